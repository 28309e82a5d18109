#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "cclab/graph.hpp"

namespace cclab {

/// Per-cluster input gains alpha_1..alpha_K and their expansion to agents.
class ClusterOffsets {
 public:
  /// alphas must be pairwise distinct, one per cluster.
  ClusterOffsets(std::vector<double> alphas, const Clustering& c);

  const std::vector<double>& alphas() const { return alphas_; }
  /// Length-K vector (alpha_1..alpha_K).
  Eigen::VectorXd reduced() const;
  /// Length-n vector with entry i equal to the alpha of i's cluster.
  const Eigen::VectorXd& expanded() const { return expanded_; }

 private:
  std::vector<double> alphas_;
  Eigen::VectorXd expanded_;
};

/// T-periodic scalar input with zero sum over every period:
///   u(theta + kT) = u_theta for theta = 1..T-1,
///   u(kT) = -(u_1 + ... + u_{T-1}).
class PeriodicInput {
 public:
  /// free_values holds u_1..u_{T-1}; its length fixes T.
  explicit PeriodicInput(std::vector<double> free_values);

  std::size_t period() const { return free_values_.size() + 1; }
  const std::vector<double>& free_values() const { return free_values_; }
  double operator()(std::size_t t) const;

  friend bool operator==(const PeriodicInput&, const PeriodicInput&) = default;

 private:
  std::vector<double> free_values_;
  double anchor_;
};

/// Arbitrary input sequence; only boundedness can be checked, empirically.
struct GeneralInput {
  std::function<double(std::size_t)> fn;
  std::string label;
};

/// Scalar drive u(t), periodic or general.
class InputSignal {
 public:
  InputSignal(PeriodicInput p) : v_(std::move(p)) {}  // NOLINT(google-explicit-constructor)
  InputSignal(GeneralInput g) : v_(std::move(g)) {}   // NOLINT(google-explicit-constructor)

  static InputSignal zero() { return PeriodicInput({}); }

  double operator()(std::size_t t) const;
  const PeriodicInput* periodic() const { return std::get_if<PeriodicInput>(&v_); }

 private:
  std::variant<PeriodicInput, GeneralInput> v_;
};

inline double eval_u(const InputSignal& sig, std::size_t t) { return sig(t); }

/// I(t) = expanded offsets * u(t).
Eigen::VectorXd input_vector(const ClusterOffsets& off, const InputSignal& sig, std::size_t t);

struct PartialSumBound {
  double max_abs_value;        ///< max_{0<=t<=h} |u(t)|
  double max_abs_partial_sum;  ///< max_{0<=t<=h} |u(0) + ... + u(t)|
};

/// Exact maxima over t in [0, horizon]; horizon must cover one period.
PartialSumBound partial_sum_bound(const InputSignal& sig, std::size_t horizon);

/// Periodic inputs are bounded exactly. For general inputs the partial sums
/// are taken as unbounded when their running maximum over the whole horizon
/// exceeds 1.5x the maximum over the first half (linear growth gives ~2x).
bool partial_sums_look_bounded(const InputSignal& sig, std::size_t horizon);

}  // namespace cclab
