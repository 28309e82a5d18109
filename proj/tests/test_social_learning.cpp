#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "cclab/config.hpp"
#include "cclab/social_learning.hpp"
#include "oracles.hpp"

using namespace cclab;

namespace {

LearningSetup example_setup(char which) { return build_learning(paper_example_config(which)); }

// Per-state run through the generic engine with alpha_k = c sigma_k(theta);
// no range monitoring.
std::vector<Trajectory> unchecked_runs(const LearningSetup& s, double c) {
  std::vector<Trajectory> out;
  for (std::size_t theta = 0; theta < s.initial.states(); ++theta) {
    std::vector<double> alphas(s.clustering.cluster_count());
    for (std::size_t k = 0; k < alphas.size(); ++k) alphas[k] = c * s.flags.sigma()(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(theta));
    // ClusterOffsets rejects the equal alphas of c = 0; expand by hand.
    const auto n = s.clustering.size();
    Eigen::VectorXd drive(static_cast<Eigen::Index>(n));
    for (Vertex i = 0; i < n; ++i) drive(static_cast<Eigen::Index>(i)) = alphas[s.clustering.cluster_of(i)];
    Trajectory traj{{s.initial.state(theta)}};
    for (std::size_t t = 0; t < s.horizon; ++t)
      traj.states.push_back(drive_step(s.coupling.at(t).matrix(), traj.states.back(), drive, s.signal(t)));
    out.push_back(std::move(traj));
  }
  return out;
}

bool runs_cleanly(LearningSetup s, double c) {
  s.flags = s.flags.with_strength(c);
  try {
    learn_simulate(s);
    return true;
  } catch (const BeliefRangeError&) {
    return false;
  }
}

}  // namespace

TEST(BeliefProfile, Validation) {
  Eigen::MatrixXd ok(2, 2);
  ok << 0.3, 0.7, 1.0, 0.0;
  EXPECT_NO_THROW(BeliefProfile{ok});
  Eigen::MatrixXd bad = ok;
  bad(0, 0) = 0.4;
  EXPECT_THROW(BeliefProfile{bad}, InvalidInput);
  const auto u = BeliefProfile::uniform(3, 4);
  EXPECT_EQ(u.matrix(), Eigen::MatrixXd::Constant(3, 4, 0.25));
}

TEST(BeliefProfile, RandomDrawsAreOnTheSimplexAndSeeded) {
  const auto a = BeliefProfile::random(20, 3, 7);
  for (Eigen::Index i = 0; i < 20; ++i) {
    EXPECT_NEAR(a.matrix().row(i).sum(), 1.0, 1e-12);
    EXPECT_GE(a.matrix().row(i).minCoeff(), 0.0);
  }
  EXPECT_EQ(a.matrix(), BeliefProfile::random(20, 3, 7).matrix());
  EXPECT_NE(a.matrix(), BeliefProfile::random(20, 3, 8).matrix());
}

TEST(CulturalFlags, ZeroSumAndStrength) {
  Eigen::MatrixXd sigma(2, 2);
  sigma << 0.5, -0.5, 1.0, -1.0;
  const CulturalFlags f(sigma, 0.1);
  EXPECT_EQ(f.offsets(0), Eigen::Vector2d(0.05, 0.1));
  EXPECT_EQ(f.offsets(1), Eigen::Vector2d(-0.05, -0.1));
  sigma(0, 0) = 0.4;
  EXPECT_THROW(CulturalFlags(sigma, 0.1), InvalidInput);
  sigma(0, 0) = 0.5;
  EXPECT_THROW(CulturalFlags(sigma, -0.1), InvalidInput);
  EXPECT_EQ(f.with_strength(0.0).offsets(0), Eigen::Vector2d::Zero());
}

TEST(LearnStep, ZeroStrengthIsPureAveraging) {
  const auto s = example_setup('A');
  const auto& a = s.coupling.at(0);
  const auto next = learn_step(s.initial, a, s.flags.with_strength(0.0), s.signal, s.clustering, 0);
  EXPECT_LT((next.matrix() - oracle::multiply(a.matrix(), s.initial.matrix())).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(LearnStep, ZeroStrengthReachesGlobalConsensusWithSpanningTree) {
  // Agent 1 reaches everyone along the chain 1 -> 2 -> 3 -> 4.
  const Clustering c(4, {{0, 1}, {2, 3}});
  Eigen::MatrixXd a(4, 4);
  a << 0.7, 0.1, 0.1, 0.1,
       0.5, 0.5, 0.0, 0.0,
       0.0, 0.5, 0.5, 0.0,
       0.0, 0.0, 0.5, 0.5;
  Eigen::MatrixXd sigma(2, 2);
  sigma << 1, -1, -1, 1;
  LearningSetup s{MatrixSchedule::constant(StochasticMatrix::validate(a)), c, CulturalFlags(sigma, 0.0),
                  PeriodicInput({-1}), BeliefProfile::random(4, 2, 3), 2000, {0, 1}, 0};
  const auto run = learn_simulate(s);
  const auto final = run.profile(2000).matrix();
  for (Eigen::Index i = 1; i < 4; ++i) EXPECT_LT((final.row(i) - final.row(0)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(LearnStep, UniformBeliefsUnchangedWhenInputIsZero) {
  const auto s = example_setup('A');
  const PeriodicInput zero({0.0});
  const auto u = BeliefProfile::uniform(9, 2);
  for (std::size_t t = 0; t < 4; ++t) {
    const auto next = learn_step(u, s.coupling.at(t), s.flags, zero, s.clustering, t);
    EXPECT_LT((next.matrix() - u.matrix()).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(LearnStep, RangeViolationNamesStrength) {
  const auto s = example_setup('A');
  try {
    learn_step(s.initial, s.coupling.at(0), s.flags.with_strength(5.0), s.signal, s.clustering, 0);
    FAIL() << "expected a range violation";
  } catch (const BeliefRangeError& e) {
    EXPECT_EQ(e.strength(), 5.0);
    EXPECT_EQ(e.time(), 1u);
    EXPECT_NE(std::string(e.what()).find("reduce c"), std::string::npos);
  }
}

TEST(Zeta, HandCases) {
  const Clustering c(4, {{0, 1}, {2, 3}});
  Eigen::MatrixXd m(4, 2);
  m << 0.7, 0.3, 0.7, 0.3, 0.4, 0.6, 0.4, 0.6;
  EXPECT_NEAR(zeta_metric(BeliefProfile(m), c, 0, 1, 0), 0.3, 1e-15);
  EXPECT_NEAR(zeta_metric(BeliefProfile(m), c, 1, 0, 1), 0.3, 1e-15);
  Eigen::MatrixXd same = Eigen::MatrixXd::Constant(4, 2, 0.5);
  EXPECT_EQ(zeta_metric(BeliefProfile(same), c, 0, 1, 0), 0.0);
  EXPECT_THROW(zeta_metric(BeliefProfile(m), c, 1, 1, 0), InvalidInput);
}

TEST(LearnSimulate, MatchesGenericDynamicsPerState) {
  for (char which : {'A', 'B'}) {
    auto s = example_setup(which);
    s.horizon = 500;
    const auto run = learn_simulate(s);
    const auto ref = unchecked_runs(s, s.flags.strength());
    ASSERT_EQ(run.per_state.size(), 2u);
    for (std::size_t theta = 0; theta < 2; ++theta)
      for (std::size_t t = 0; t <= s.horizon; ++t)
        EXPECT_LT((run.per_state[theta].states[t] - ref[theta].states[t]).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(LearnSimulate, ExampleAInputsSeparateGroups) {
  const auto s = example_setup('A');
  const auto run = learn_simulate(s);
  ASSERT_EQ(run.zeta.size(), s.horizon + 1);
  EXPECT_GT(run.zeta.back(), 1e-3);
  EXPECT_LE(run.validity.max_sum_deviation, 1e-12);
  EXPECT_GE(run.validity.min_belief, 0.0);
  EXPECT_LE(run.validity.max_belief, 1.0);
  // Intra-cluster beliefs converge.
  for (const auto& traj : run.per_state) EXPECT_LT(state_diameter(traj.states.back(), s.clustering), 1e-8);
}

TEST(LearnSimulate, WithoutInputsGroupsMerge) {
  for (char which : {'A', 'B'}) {
    auto s = example_setup(which);
    s.flags = s.flags.with_strength(0.0);
    const auto run = learn_simulate(s);
    EXPECT_LT(run.zeta.back(), 1e-6) << which;
  }
}

TEST(LearnSimulate, ExampleBSwitchingSeparatesToo) {
  const auto s = example_setup('B');
  const auto run = learn_simulate(s);
  EXPECT_GT(run.zeta.back(), 1e-3);
  for (const auto& traj : run.per_state) EXPECT_LT(state_diameter(traj.states.back(), s.clustering), 1e-8);
}

TEST(LearnSimulate, CriticalStrengthMatchesAffineOracle) {
  // Every belief is affine in c, so the admissible strengths form [0, c*]
  // with c* readable from runs at c = 0 and c = 1.
  auto s = example_setup('A');
  s.horizon = 200;
  const auto base = unchecked_runs(s, 0.0);
  const auto unit = unchecked_runs(s, 1.0);
  double critical = std::numeric_limits<double>::infinity();
  for (std::size_t theta = 0; theta < base.size(); ++theta)
    for (std::size_t t = 0; t <= s.horizon; ++t)
      for (Eigen::Index i = 0; i < base[theta].states[t].size(); ++i) {
        const double m0 = base[theta].states[t](i);
        const double d = unit[theta].states[t](i) - m0;
        if (d > 0) critical = std::min(critical, (1.0 + kBeliefSlack - m0) / d);
        if (d < 0) critical = std::min(critical, (m0 + kBeliefSlack) / -d);
      }
  ASSERT_TRUE(std::isfinite(critical));

  double lo = 0.0, hi = 16.0;
  ASSERT_TRUE(runs_cleanly(s, lo));
  ASSERT_FALSE(runs_cleanly(s, hi));
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (runs_cleanly(s, mid) ? lo : hi) = mid;
  }
  EXPECT_NEAR(lo, critical, 1e-9 * critical);
  EXPECT_TRUE(runs_cleanly(s, critical * (1 - 1e-6)));
  EXPECT_FALSE(runs_cleanly(s, critical * (1 + 1e-6)));
  EXPECT_GT(critical, s.flags.strength());
}
