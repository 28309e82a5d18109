#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "cclab/dynamics.hpp"
#include "cclab/graph.hpp"
#include "cclab/stochastic.hpp"

namespace cclab {

enum class SplitMode {
  /// Every supported entry gets the floor e, the rest of the block mass is
  /// spread by a uniform simplex sample.
  FloorSimplex,
  /// a_ij = beta_pq / d_iq, the equal split over in-neighbors in C_q.
  Equal,
};

struct GeneratorSpec {
  std::vector<std::size_t> cluster_sizes;
  /// Target quotient; drawn from the seed when absent.
  std::optional<Eigen::MatrixXd> quotient;
  /// Entry floor e in (0, 1/n].
  double floor = 0.0;
  /// Probability of each optional edge (and, for drawn quotients, of each
  /// off-diagonal quotient entry being positive).
  double density = 0.3;
  std::uint64_t seed = 0;
  SplitMode split = SplitMode::FloorSimplex;

  std::size_t n() const;
  Clustering clustering() const;
  /// Throws InvalidInput on inconsistent fields.
  void validate() const;
};

/// The spec's quotient, or one drawn from its seed with a positive diagonal
/// and every positive entry at least e * |C_q|.
Eigen::MatrixXd resolve_quotient(const GeneratorSpec& spec);

/// Self-links everywhere, a random tree inside every cluster, the cross links
/// the quotient's support demands (common-link property), plus optional
/// edges with probability density where the entry floor still fits.
DirectedGraph gen_graph_with_cluster_trees(const GeneratorSpec& spec);

/// Matrix supported exactly on g's edges whose block row sums equal the
/// resolved quotient. Throws InfeasibleError when g cannot carry it.
StochasticMatrix gen_common_influence_matrix(const GeneratorSpec& spec, const DirectedGraph& g);

/// Same realization for an arbitrary clustering and quotient b.
StochasticMatrix realize_common_influence(const DirectedGraph& g, const Clustering& c, const Eigen::MatrixXd& b,
                                          double floor, SplitMode split, std::uint64_t seed);

/// m graphs cycled periodically, none with cluster spanning trees on its own,
/// while every window of `window` >= m steps covers a union that has them.
/// All share the static quotient and the entry floor. m = 1 gives the static
/// instance as a constant schedule.
MatrixSchedule gen_switching_schedule(const GeneratorSpec& spec, std::size_t m, std::size_t window);

/// Random distinct offsets in [-1, 1] and a random T-periodic zero-sum input
/// driving a fresh static instance.
System gen_static_system(const GeneratorSpec& spec, std::size_t period);

/// As gen_static_system over a switching schedule.
System gen_switching_system(const GeneratorSpec& spec, std::size_t m, std::size_t window, std::size_t period);

/// Random state uniform in [lo, hi].
Eigen::VectorXd gen_initial_state(std::size_t n, std::uint64_t seed, double lo = -1.0, double hi = 1.0);

/// Random state constant on each cluster.
Eigen::VectorXd gen_consensus_state(const Clustering& c, std::uint64_t seed);

/// One of the two reference social-learning set-ups:
/// 9 agents in clusters {1,2,3}, {4,5,6}, {7,8,9}, quotient
/// [[1,0,0],[0,1/2,1/2],[0,1/2,1/2]], input u(2l) = -u(2l+1) = 1. Only
/// properties of the original graphs are known (self-links, roots), so the
/// graphs here are reconstructions built to have them.
struct PaperExample {
  System system;
  std::vector<DirectedGraph> graphs;
  /// Stated cluster roots (0-based): agents 3, 7 and 7 in 1-based labels.
  std::vector<Vertex> stated_roots;
  std::size_t window;
  std::uint64_t seed;
  std::size_t horizon;
  /// Cultural flags sigma_k(theta), K x 2, zero row sums.
  Eigen::MatrixXd flags;
  double strength;
};

/// Static topology, equal-split coupling.
PaperExample paper_example_a();
/// Three graphs switched periodically, same quotient, window 3.
PaperExample paper_example_b();

}  // namespace cclab
