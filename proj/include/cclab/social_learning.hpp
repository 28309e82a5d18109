#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cclab/dynamics.hpp"

namespace cclab {

/// Beliefs mu_{i,t}(theta): row i is agent i's distribution over the m states.
class BeliefProfile {
 public:
  /// Rows must sum to 1 within 1e-9.
  explicit BeliefProfile(Eigen::MatrixXd beliefs);

  /// Seeded uniform draws from the simplex, one per agent.
  static BeliefProfile random(std::size_t agents, std::size_t states, std::uint64_t seed);
  static BeliefProfile uniform(std::size_t agents, std::size_t states);

  std::size_t agents() const { return static_cast<std::size_t>(mu_.rows()); }
  std::size_t states() const { return static_cast<std::size_t>(mu_.cols()); }
  const Eigen::MatrixXd& matrix() const { return mu_; }
  Eigen::VectorXd state(std::size_t theta) const { return mu_.col(static_cast<Eigen::Index>(theta)); }

 private:
  Eigen::MatrixXd mu_;
};

/// Per-cluster flags sigma_k(theta) with zero sum over states, and strength c.
class CulturalFlags {
 public:
  CulturalFlags(Eigen::MatrixXd sigma, double strength);

  std::size_t clusters() const { return static_cast<std::size_t>(sigma_.rows()); }
  std::size_t states() const { return static_cast<std::size_t>(sigma_.cols()); }
  const Eigen::MatrixXd& sigma() const { return sigma_; }
  double strength() const { return strength_; }
  CulturalFlags with_strength(double c) const { return CulturalFlags(sigma_, c); }

  /// alpha_k = c sigma_k(theta), length K.
  Eigen::VectorXd offsets(std::size_t theta) const;

 private:
  Eigen::MatrixXd sigma_;
  double strength_;
};

/// Beliefs may leave [0, 1] by at most this much before the run is rejected.
inline constexpr double kBeliefSlack = 1e-9;

/// mu(t+1)(theta) = A mu(t)(theta) + c u(t) sigma_k(theta) per state, via the
/// same kernel as the generic dynamics. Throws BeliefRangeError.
BeliefProfile learn_step(const BeliefProfile& beliefs, const StochasticMatrix& a, const CulturalFlags& flags,
                         const PeriodicInput& sig, const Clustering& c, std::size_t t);

/// |mean_{C_p} mu(theta) - mean_{C_q} mu(theta)|, p != q.
double zeta_metric(const BeliefProfile& beliefs, const Clustering& c, std::size_t p, std::size_t q,
                   std::size_t theta);

struct LearningSetup {
  MatrixSchedule coupling;
  Clustering clustering;
  CulturalFlags flags;
  PeriodicInput signal;
  BeliefProfile initial;
  std::size_t horizon;
  /// Clusters compared by zeta (0-based) and the state it tracks.
  std::pair<std::size_t, std::size_t> pair{1, 2};
  std::size_t zeta_state = 0;
};

struct ValidityLog {
  /// max over t, i of |sum_theta mu_{i,t}(theta) - 1|
  double max_sum_deviation = 0.0;
  double min_belief = 0.0;
  double max_belief = 0.0;
};

struct LearningRun {
  /// One trajectory per state theta.
  std::vector<Trajectory> per_state;
  /// zeta at t = 0..horizon.
  std::vector<double> zeta;
  ValidityLog validity;

  BeliefProfile profile(std::size_t t) const;
};

/// Throws BeliefRangeError when a belief leaves the slack band.
LearningRun learn_simulate(const LearningSetup& setup);

}  // namespace cclab
