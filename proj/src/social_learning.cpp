#include "cclab/social_learning.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cclab/rng.hpp"

namespace cclab {

namespace {

using Index = Eigen::Index;

Index idx(std::size_t v) { return static_cast<Index>(v); }

constexpr double kBeliefSumTol = 1e-9;
constexpr double kFlagSumTol = 1e-12;

void check_range(const Eigen::MatrixXd& mu, double strength, std::size_t time) {
  const double lo = mu.minCoeff();
  const double hi = mu.maxCoeff();
  if (lo >= -kBeliefSlack && hi <= 1.0 + kBeliefSlack) return;
  std::ostringstream os;
  os.precision(17);
  os << "belief left [0, 1] at t=" << time << " (range [" << lo << ", " << hi << "]) with strength c=" << strength
     << "; reduce c";
  throw BeliefRangeError(os.str(), strength, time);
}

}  // namespace

BeliefProfile::BeliefProfile(Eigen::MatrixXd beliefs) : mu_(std::move(beliefs)) {
  if (mu_.rows() == 0 || mu_.cols() == 0) throw InvalidInput("belief profile must be non-empty");
  if (!mu_.allFinite()) throw InvalidInput("beliefs must be finite");
  for (Index i = 0; i < mu_.rows(); ++i) {
    const double s = mu_.row(i).sum();
    if (std::abs(s - 1.0) > kBeliefSumTol) {
      throw InvalidInput("beliefs of agent " + std::to_string(i + 1) + " sum to " + std::to_string(s));
    }
  }
}

BeliefProfile BeliefProfile::random(std::size_t agents, std::size_t states, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd mu(idx(agents), idx(states));
  for (std::size_t i = 0; i < agents; ++i) {
    const auto w = rng.simplex(states);
    for (std::size_t s = 0; s < states; ++s) mu(idx(i), idx(s)) = w[s];
  }
  return BeliefProfile(std::move(mu));
}

BeliefProfile BeliefProfile::uniform(std::size_t agents, std::size_t states) {
  return BeliefProfile(Eigen::MatrixXd::Constant(idx(agents), idx(states), 1.0 / static_cast<double>(states)));
}

CulturalFlags::CulturalFlags(Eigen::MatrixXd sigma, double strength) : sigma_(std::move(sigma)), strength_(strength) {
  if (sigma_.rows() == 0 || sigma_.cols() < 2) throw InvalidInput("flags need at least one cluster and two states");
  if (!sigma_.allFinite()) throw InvalidInput("flags must be finite");
  if (!std::isfinite(strength_) || strength_ < 0.0) throw InvalidInput("strength c must be finite and >= 0");
  for (Index k = 0; k < sigma_.rows(); ++k) {
    if (std::abs(sigma_.row(k).sum()) > kFlagSumTol) {
      throw InvalidInput("flags of cluster " + std::to_string(k + 1) + " do not sum to zero over the states");
    }
  }
}

Eigen::VectorXd CulturalFlags::offsets(std::size_t theta) const {
  if (theta >= states()) throw InvalidInput("state index out of range");
  return strength_ * sigma_.col(idx(theta));
}

BeliefProfile learn_step(const BeliefProfile& beliefs, const StochasticMatrix& a, const CulturalFlags& flags,
                         const PeriodicInput& sig, const Clustering& c, std::size_t t) {
  if (beliefs.agents() != c.size() || a.size() != c.size()) throw InvalidInput("agent count mismatch");
  if (flags.clusters() != c.cluster_count()) throw InvalidInput("flags need one row per cluster");
  if (flags.states() != beliefs.states()) throw InvalidInput("flags and beliefs disagree on the state count");
  const double u = sig(t);
  Eigen::MatrixXd next(beliefs.matrix().rows(), beliefs.matrix().cols());
  for (std::size_t theta = 0; theta < beliefs.states(); ++theta) {
    const auto drive = expand_to_agents(flags.offsets(theta), c);
    next.col(idx(theta)) = drive_step(a.matrix(), beliefs.state(theta), drive, u);
  }
  check_range(next, flags.strength(), t + 1);
  return BeliefProfile(std::move(next));
}

double zeta_metric(const BeliefProfile& beliefs, const Clustering& c, std::size_t p, std::size_t q,
                   std::size_t theta) {
  if (p == q) throw InvalidInput("zeta compares two different clusters");
  if (p >= c.cluster_count() || q >= c.cluster_count()) throw InvalidInput("cluster index out of range");
  if (theta >= beliefs.states()) throw InvalidInput("state index out of range");
  const auto means = cluster_means(beliefs.state(theta), c);
  return std::abs(means(idx(p)) - means(idx(q)));
}

BeliefProfile LearningRun::profile(std::size_t t) const {
  if (per_state.empty() || t >= per_state.front().states.size()) throw InvalidInput("time out of range");
  const auto n = per_state.front().states[t].size();
  Eigen::MatrixXd mu(n, idx(per_state.size()));
  for (std::size_t s = 0; s < per_state.size(); ++s) mu.col(idx(s)) = per_state[s].states[t];
  return BeliefProfile(std::move(mu));
}

LearningRun learn_simulate(const LearningSetup& setup) {
  if (setup.horizon == 0) throw InvalidInput("horizon must be at least 1");
  const auto& c = setup.clustering;
  if (setup.coupling.dimension() != c.size()) throw InvalidInput("coupling does not match the clustering");
  const auto m = setup.initial.states();

  LearningRun run;
  run.per_state.resize(m);
  BeliefProfile current = setup.initial;
  auto record = [&](const BeliefProfile& b) {
    for (std::size_t s = 0; s < m; ++s) run.per_state[s].states.push_back(b.state(s));
    run.zeta.push_back(zeta_metric(b, c, setup.pair.first, setup.pair.second, setup.zeta_state));
    const auto& mu = b.matrix();
    const double dev = (mu.rowwise().sum().array() - 1.0).abs().maxCoeff();
    run.validity.max_sum_deviation = std::max(run.validity.max_sum_deviation, dev);
    run.validity.min_belief = std::min(run.validity.min_belief, mu.minCoeff());
    run.validity.max_belief = std::max(run.validity.max_belief, mu.maxCoeff());
  };
  run.validity.min_belief = setup.initial.matrix().minCoeff();
  run.validity.max_belief = setup.initial.matrix().maxCoeff();
  record(current);
  for (std::size_t t = 0; t < setup.horizon; ++t) {
    if (setup.coupling.is_constant()) {
      current = learn_step(current, setup.coupling.cycle().front(), setup.flags, setup.signal, c, t);
    } else {
      current = learn_step(current, setup.coupling.at(t), setup.flags, setup.signal, c, t);
    }
    record(current);
  }
  return run;
}

}  // namespace cclab
