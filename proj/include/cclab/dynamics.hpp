#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "cclab/errors.hpp"
#include "cclab/graph.hpp"
#include "cclab/signals.hpp"
#include "cclab/stochastic.hpp"

namespace cclab {

/// Driven system x(t+1) = A(t) x(t) + offsets * u(t). A fixed coupling is a
/// constant schedule.
class System {
 public:
  System(MatrixSchedule coupling, Clustering clustering, ClusterOffsets offsets, InputSignal signal);

  const MatrixSchedule& coupling() const { return coupling_; }
  const Clustering& clustering() const { return clustering_; }
  const ClusterOffsets& offsets() const { return offsets_; }
  const InputSignal& signal() const { return signal_; }

  std::size_t size() const { return clustering_.size(); }
  bool is_fixed() const { return coupling_.is_constant(); }
  /// Throws InvalidInput for switching couplings.
  const StochasticMatrix& fixed_coupling() const;

 private:
  MatrixSchedule coupling_;
  Clustering clustering_;
  ClusterOffsets offsets_;
  InputSignal signal_;
};

/// States x(0..horizon).
struct Trajectory {
  std::vector<Eigen::VectorXd> states;

  std::size_t horizon() const { return states.empty() ? 0 : states.size() - 1; }
  std::size_t dimension() const { return states.empty() ? 0 : static_cast<std::size_t>(states.front().size()); }
};

/// A non-finite state appeared; carries everything computed before it.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t time, Trajectory partial)
      : Error(what), time_(time), partial_(std::move(partial)) {}
  std::size_t time() const { return time_; }
  const Trajectory& partial() const { return partial_; }

 private:
  std::size_t time_;
  Trajectory partial_;
};

/// a * x + drive * u; the shared kernel of every simulation here.
Eigen::VectorXd drive_step(const Eigen::MatrixXd& a, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& drive, double u);

Eigen::VectorXd step(const System& sys, const Eigen::VectorXd& x, std::size_t t);

/// Iterates step from x0 for horizon >= 1 steps. Throws DivergenceError.
Trajectory simulate(const System& sys, const Eigen::VectorXd& x0, std::size_t horizon);

/// Reduced dynamics y(t+1) = B y(t) + alphas * u(t) on cluster values.
Trajectory quotient_simulate(const QuotientMatrix& b, const ClusterOffsets& offsets,
                             const InputSignal& sig, const Eigen::VectorXd& y0, std::size_t horizon);

/// Cluster values (length K) to agent states (length n).
Eigen::VectorXd expand_to_agents(const Eigen::VectorXd& cluster_values, const Clustering& c);

/// Cluster means of an agent state.
Eigen::VectorXd cluster_means(const Eigen::VectorXd& x, const Clustering& c);

/// Delta_C(x(t)) for every stored t.
std::vector<double> intra_diameter_series(const Trajectory& traj, const Clustering& c);

/// Per-cluster T-periodic limit cycle; cycles(p, theta) is cluster p's value at
/// times t with t mod T == theta.
struct PeriodicLimit {
  std::size_t period;
  Eigen::MatrixXd cycles;
  /// Largest deviation of a tail state from its cluster's cycle sample.
  double residual;
};

/// Fits a T-periodic per-cluster cycle to the trajectory tail: the last
/// max(25%, 3T + 1) states, so at least two periods are compared against the
/// final one. Samples are cluster-member averages over the final period.
/// Returns nullopt when the residual is not below tol.
std::optional<PeriodicLimit> detect_periodic_limit(const Trajectory& traj, const Clustering& c,
                                                   std::size_t period, double tol);

/// Entry (p, q): max over phases of |v_p(theta) - v_q(theta)|.
Eigen::MatrixXd separation_metric(const PeriodicLimit& limit);

struct ZLimits {
  /// lim B^{nT+1}
  Eigen::MatrixXd z1;
  /// lim sum_{k=0}^{nT} B^{nT-k} u(k)
  Eigen::MatrixXd z2;
  std::size_t periods;
};

/// Limits governing y(nT+1) -> Z1 y(0) + Z2 alphas. Needs a positive diagonal.
ZLimits z_limits(const QuotientMatrix& b, const PeriodicInput& sig, double tol = 1e-13,
                 std::size_t max_periods = 100000);

/// Eigenvalue of Z2 along a left eigenvector of B with eigenvalue nu:
/// u(0) when nu == 1, else sum_{k=0}^{T-1} u(-k mod T) nu^k / (1 - nu^T).
std::complex<double> z2_eigenvalue(std::complex<double> nu, const PeriodicInput& sig);

struct BoundReport {
  double max_norm;       ///< max_t ||x(t)||_inf
  bool applicable;       ///< hypotheses behind the bound hold
  double bound;          ///< ||x0|| + ||A^inf s|| Y + M Y / (1 - lambda); NaN when inapplicable
  double y;              ///< Y: common bound on |u| and its partial sums
  double m;              ///< M in ||A^t - A^inf||_inf <= M lambda^t
  double lambda;
  std::string note;

  bool within() const { return applicable && max_norm <= bound; }
};

/// Compares the observed sup-norm against the constructive bound assembled
/// from the power limit of a fixed coupling.
BoundReport boundedness_report(const System& sys, const Trajectory& traj);

}  // namespace cclab
