#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cclab/graph.hpp"

namespace cclab {

inline constexpr double kRowSumTol = 1e-9;
inline constexpr double kCommonInfluenceTol = 1e-9;

/// Nonnegative square matrix with unit row sums.
class StochasticMatrix {
 public:
  /// Rejects negative or non-finite entries and rows off by more than tol;
  /// rows within tol are renormalized to sum to one.
  static StochasticMatrix validate(const Eigen::MatrixXd& raw, double tol = kRowSumTol);
  static StochasticMatrix identity(std::size_t n);
  /// Every entry 1/n.
  static StochasticMatrix uniform(std::size_t n);

  std::size_t size() const { return static_cast<std::size_t>(m_.rows()); }
  const Eigen::MatrixXd& matrix() const { return m_; }
  double operator()(std::size_t i, std::size_t j) const {
    return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  friend bool operator==(const StochasticMatrix& a, const StochasticMatrix& b) {
    return a.m_.rows() == b.m_.rows() && a.m_ == b.m_;
  }

 private:
  explicit StochasticMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {}
  friend StochasticMatrix multiply(const StochasticMatrix&, const StochasticMatrix&);
  friend class ProductAccumulator;

  Eigen::MatrixXd m_;
};

/// Product accumulation with drift correction: every 64 multiplications the
/// row sums are renormalized, provided they drifted by less than kRowSumTol
/// (larger drift throws InvalidInput).
class ProductAccumulator {
 public:
  explicit ProductAccumulator(const StochasticMatrix& first);
  /// product <- next * product
  void left_multiply(const StochasticMatrix& next);
  const StochasticMatrix& product() const { return product_; }

 private:
  StochasticMatrix product_;
  std::size_t since_renormalize_ = 0;
};

/// a * b (stochastic by closure).
StochasticMatrix multiply(const StochasticMatrix& a, const StochasticMatrix& b);

inline DirectedGraph graph_of_matrix(const StochasticMatrix& a, double zero_tol = kDefaultZeroTol) {
  return graph_of_matrix(a.matrix(), zero_tol);
}

/// K x K stochastic matrix of cluster block row sums.
class QuotientMatrix {
 public:
  explicit QuotientMatrix(StochasticMatrix b) : b_(std::move(b)) {}
  std::size_t cluster_count() const { return b_.size(); }
  const StochasticMatrix& stochastic() const { return b_; }
  const Eigen::MatrixXd& matrix() const { return b_.matrix(); }

 private:
  StochasticMatrix b_;
};

/// Stochastic matrices indexed by time: a finite cycle repeated forever, or
/// an arbitrary generator t -> A(t) with no known period.
class MatrixSchedule {
 public:
  using Generator = std::function<StochasticMatrix(std::size_t)>;

  static MatrixSchedule constant(StochasticMatrix a);
  static MatrixSchedule periodic(std::vector<StochasticMatrix> cycle);
  static MatrixSchedule generated(std::size_t n, Generator gen);

  StochasticMatrix at(std::size_t t) const;
  std::size_t dimension() const { return n_; }
  /// Cycle length for periodic schedules.
  std::optional<std::size_t> period() const;
  const std::vector<StochasticMatrix>& cycle() const { return cycle_; }
  bool is_constant() const { return !gen_ && cycle_.size() == 1; }
  /// Smallest positive entry over one cycle (assumption B1's e at its tightest).
  std::optional<double> min_positive_entry(double zero_tol = kDefaultZeroTol) const;

 private:
  MatrixSchedule() = default;

  std::size_t n_ = 0;
  std::vector<StochasticMatrix> cycle_;
  Generator gen_;
};

/// min over clusters and same-cluster pairs (i, j) of sum_k min(A_ik, A_jk).
double ergodicity_coefficient(const StochasticMatrix& a, const Clustering& c);

/// Largest l1 distance between two rows belonging to the same cluster.
double hajnal_diameter(const Eigen::MatrixXd& a, const Clustering& c);
inline double hajnal_diameter(const StochasticMatrix& a, const Clustering& c) {
  return hajnal_diameter(a.matrix(), c);
}

/// Largest |x_i - x_j| over same-cluster pairs.
double state_diameter(const Eigen::VectorXd& x, const Clustering& c);

/// Block row sums sum_{j in C_q} A_ij agree across each C_p within tol.
bool has_common_influence(const StochasticMatrix& a, const Clustering& c,
                          double tol = kCommonInfluenceTol);

/// Largest spread of a block row sum within one cluster.
double common_influence_defect(const StochasticMatrix& a, const Clustering& c);

/// Throws CommonInfluenceError when the block sums disagree by more than tol.
QuotientMatrix quotient_matrix(const StochasticMatrix& a, const Clustering& c,
                               double tol = kCommonInfluenceTol);

/// A(last) ... A(t+1) A(t) for last >= t.
StochasticMatrix product_range(const MatrixSchedule& s, std::size_t t, std::size_t last);

struct PowerLimit {
  StochasticMatrix limit;
  /// Geometric rate of ||A^t - A^inf||_inf (0 when the error vanishes in
  /// finitely many steps).
  double rate;
  /// First t with max |A^{t+1} - A^t| < tol.
  std::size_t iterations;
  /// ||A^t - A^inf||_inf for t = 0..iterations.
  std::vector<double> error_history;
};

/// Iterates powers of a matrix with positive diagonal until they settle.
/// Throws ConvergenceError when max_iter is exhausted.
PowerLimit power_limit(const StochasticMatrix& a, double tol = 1e-14, std::size_t max_iter = 100000);

struct GrowthRate {
  double rate;
  /// Some product had exactly zero cluster diameter.
  bool finite_time_consensus;
  /// Delta_C(A_0^{t-1}) for t = 1..horizon, truncated at the first zero.
  std::vector<double> series;
  bool contracting() const { return rate < 1.0; }
};

/// Empirical limsup_t Delta_C(A_0^{t-1})^{1/t}: exp of the least-squares slope
/// of log Delta_C over the tail half of the horizon.
GrowthRate diameter_growth_rate(const MatrixSchedule& s, const Clustering& c, std::size_t horizon);

/// Least-squares slope of log(values[i]) against indices, over [first, last).
double log_linear_slope(std::span<const double> values, std::size_t first, std::size_t last);

}  // namespace cclab
