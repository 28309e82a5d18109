#include "cclab/scenario_gen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cclab/errors.hpp"
#include "cclab/rng.hpp"

namespace cclab {

namespace {

using Index = Eigen::Index;

Index idx(std::size_t v) { return static_cast<Index>(v); }

constexpr double kSupportTol = 1e-15;

enum Stream : std::uint64_t {
  kQuotientStream = 1,
  kGraphStream = 2,
  kMatrixStream = 3,
  kSignalStream = 4,
  kSwitchingStream = 100,
};

// Largest number of in-neighbors block (p, q) can take under the floor.
std::size_t floor_capacity(double mass, double floor) {
  return static_cast<std::size_t>(std::floor(mass / floor + 1e-9));
}

std::vector<std::pair<Vertex, Vertex>> random_tree(const std::vector<Vertex>& members, Rng& rng) {
  std::vector<Vertex> order = members;
  rng.shuffle(order);
  std::vector<std::pair<Vertex, Vertex>> edges;
  for (std::size_t k = 1; k < order.size(); ++k) edges.emplace_back(order[rng.index(k)], order[k]);
  return edges;
}

void add_self_links(DirectedGraph& g) {
  for (Vertex v = 0; v < g.size(); ++v) g.add_edge(v, v);
}

// One in-neighbor from every cluster the quotient row requires.
void add_required_cross_links(DirectedGraph& g, const Clustering& c, const Eigen::MatrixXd& b, Rng& rng) {
  for (std::size_t p = 0; p < c.cluster_count(); ++p) {
    for (std::size_t q = 0; q < c.cluster_count(); ++q) {
      if (p == q || b(idx(p), idx(q)) <= kSupportTol) continue;
      for (Vertex v : c.members(p)) {
        const auto& sources = c.members(q);
        g.add_edge(sources[rng.index(sources.size())], v);
      }
    }
  }
}

std::size_t in_count(const DirectedGraph& g, Vertex v, const std::vector<Vertex>& from) {
  return static_cast<std::size_t>(
      std::count_if(from.begin(), from.end(), [&](Vertex w) { return g.has_edge(w, v); }));
}

void add_optional_edges(DirectedGraph& g, const Clustering& c, const Eigen::MatrixXd& b, double floor,
                        double density, bool cross_only, Rng& rng) {
  for (Vertex i = 0; i < g.size(); ++i) {
    const auto p = c.cluster_of(i);
    for (Vertex j = 0; j < g.size(); ++j) {
      const auto q = c.cluster_of(j);
      if (g.has_edge(j, i) || b(idx(p), idx(q)) <= kSupportTol) continue;
      if (cross_only && p == q) continue;
      if (!rng.bernoulli(density)) continue;
      if (in_count(g, i, c.members(q)) + 1 > floor_capacity(b(idx(p), idx(q)), floor)) continue;
      g.add_edge(j, i);
    }
  }
}

StochasticMatrix realize_matrix(const DirectedGraph& g, const Clustering& c, const Eigen::MatrixXd& b,
                                double floor, SplitMode split, Rng& rng) {
  const auto n = g.size();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(idx(n), idx(n));
  for (Vertex i = 0; i < n; ++i) {
    const auto p = c.cluster_of(i);
    for (std::size_t q = 0; q < c.cluster_count(); ++q) {
      std::vector<Vertex> sources;
      for (Vertex j : c.members(q))
        if (g.has_edge(j, i)) sources.push_back(j);
      const double mass = b(idx(p), idx(q));
      if (mass <= kSupportTol) {
        if (!sources.empty()) {
          throw InfeasibleError("agent " + std::to_string(i + 1) + " has links from cluster " + std::to_string(q + 1) +
                                " but the quotient entry is zero");
        }
        continue;
      }
      if (sources.empty()) {
        throw InfeasibleError("agent " + std::to_string(i + 1) + " has no in-neighbor in cluster " +
                              std::to_string(q + 1) + " but the quotient entry is positive");
      }
      const double d = static_cast<double>(sources.size());
      if (d * floor > mass * (1.0 + 1e-12)) {
        throw InfeasibleError("agent " + std::to_string(i + 1) + " has too many in-neighbors in cluster " +
                              std::to_string(q + 1) + " for entry floor " + std::to_string(floor));
      }
      if (split == SplitMode::Equal) {
        for (Vertex j : sources) a(idx(i), idx(j)) = mass / d;
      } else {
        const auto weights = rng.simplex(sources.size());
        const double spare = mass - d * floor;
        for (std::size_t k = 0; k < sources.size(); ++k) a(idx(i), idx(sources[k])) = floor + spare * weights[k];
      }
    }
  }
  auto out = StochasticMatrix::validate(a);
  if (!has_common_influence(out, c, 1e-12)) throw InfeasibleError("realized matrix lost common influence");
  return out;
}

std::vector<double> random_distinct_offsets(std::size_t k, Rng& rng) {
  std::vector<double> alphas;
  while (alphas.size() < k) {
    const double a = rng.uniform(-1.0, 1.0);
    if (std::none_of(alphas.begin(), alphas.end(), [&](double b) { return std::abs(a - b) < 1e-3; }))
      alphas.push_back(a);
  }
  return alphas;
}

PeriodicInput random_periodic_input(std::size_t period, Rng& rng) {
  if (period == 0) throw InvalidInput("period must be positive");
  std::vector<double> free(period - 1);
  for (auto& v : free) v = rng.uniform(-1.0, 1.0);
  return PeriodicInput(std::move(free));
}

}  // namespace

std::size_t GeneratorSpec::n() const {
  return std::accumulate(cluster_sizes.begin(), cluster_sizes.end(), std::size_t{0});
}

Clustering GeneratorSpec::clustering() const { return Clustering::from_sizes(cluster_sizes); }

void GeneratorSpec::validate() const {
  if (cluster_sizes.empty()) throw InvalidInput("generator needs at least one cluster");
  for (auto s : cluster_sizes)
    if (s == 0) throw InvalidInput("cluster sizes must be positive");
  const double n_real = static_cast<double>(n());
  if (!(floor > 0.0) || floor > 1.0 / n_real + 1e-15) {
    throw InvalidInput("entry floor must lie in (0, 1/n]; got " + std::to_string(floor));
  }
  if (!(density >= 0.0 && density <= 1.0)) throw InvalidInput("density must lie in [0, 1]");
  if (quotient) {
    const auto k = idx(cluster_sizes.size());
    if (quotient->rows() != k || quotient->cols() != k) throw InvalidInput("quotient must be K x K");
    StochasticMatrix::validate(*quotient);
    for (Index p = 0; p < k; ++p)
      if (!((*quotient)(p, p) > 0.0)) throw InvalidInput("quotient needs a positive diagonal for self-links");
  }
}

Eigen::MatrixXd resolve_quotient(const GeneratorSpec& spec) {
  spec.validate();
  if (spec.quotient) return StochasticMatrix::validate(*spec.quotient).matrix();
  Rng rng = Rng(spec.seed).fork(kQuotientStream);
  const auto k = spec.cluster_sizes.size();
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(idx(k), idx(k));
  for (std::size_t p = 0; p < k; ++p) {
    std::vector<std::size_t> support{p};
    for (std::size_t q = 0; q < k; ++q)
      if (q != p && rng.bernoulli(spec.density)) support.push_back(q);
    double reserved = 0.0;
    for (auto q : support) reserved += spec.floor * static_cast<double>(spec.cluster_sizes[q]);
    const auto weights = rng.simplex(support.size());
    for (std::size_t s = 0; s < support.size(); ++s) {
      const auto q = support[s];
      b(idx(p), idx(q)) = spec.floor * static_cast<double>(spec.cluster_sizes[q]) + (1.0 - reserved) * weights[s];
    }
  }
  return StochasticMatrix::validate(b).matrix();
}

DirectedGraph gen_graph_with_cluster_trees(const GeneratorSpec& spec) {
  const auto b = resolve_quotient(spec);
  const auto c = spec.clustering();
  Rng rng = Rng(spec.seed).fork(kGraphStream);
  DirectedGraph g(c.size());
  add_self_links(g);
  for (const auto& members : c.clusters())
    for (auto [from, to] : random_tree(members, rng)) g.add_edge(from, to);
  add_required_cross_links(g, c, b, rng);
  add_optional_edges(g, c, b, spec.floor, spec.density, false, rng);
  return g;
}

StochasticMatrix gen_common_influence_matrix(const GeneratorSpec& spec, const DirectedGraph& g) {
  const auto b = resolve_quotient(spec);
  const auto c = spec.clustering();
  if (g.size() != c.size()) throw InvalidInput("graph size does not match the generator spec");
  if (!has_self_links(g)) throw InfeasibleError("graph lacks self-links");
  Rng rng = Rng(spec.seed).fork(kMatrixStream);
  return realize_matrix(g, c, b, spec.floor, spec.split, rng);
}

StochasticMatrix realize_common_influence(const DirectedGraph& g, const Clustering& c, const Eigen::MatrixXd& b,
                                          double floor, SplitMode split, std::uint64_t seed) {
  if (g.size() != c.size()) throw InvalidInput("graph size does not match the clustering");
  const auto k = idx(c.cluster_count());
  if (b.rows() != k || b.cols() != k) throw InvalidInput("quotient must be K x K");
  if (!(floor > 0.0)) throw InvalidInput("entry floor must be positive");
  if (!has_self_links(g)) throw InfeasibleError("graph lacks self-links");
  const auto checked = StochasticMatrix::validate(b).matrix();
  Rng rng = Rng(seed).fork(kMatrixStream);
  return realize_matrix(g, c, checked, floor, split, rng);
}

MatrixSchedule gen_switching_schedule(const GeneratorSpec& spec, std::size_t m, std::size_t window) {
  if (m == 0) throw InvalidInput("a schedule needs at least one graph");
  if (window < m) throw InvalidInput("window must cover every graph of the cycle");
  // One graph cannot split its trees; it is the static instance.
  if (m == 1) return MatrixSchedule::constant(gen_common_influence_matrix(spec, gen_graph_with_cluster_trees(spec)));
  const auto b = resolve_quotient(spec);
  const auto c = spec.clustering();

  constexpr std::size_t kAttempts = 64;
  for (std::size_t attempt = 0; attempt < kAttempts; ++attempt) {
    Rng rng = Rng(spec.seed).fork(kSwitchingStream + attempt);
    std::vector<DirectedGraph> graphs(m, DirectedGraph(c.size()));
    for (auto& g : graphs) add_self_links(g);
    // Deal each cluster's tree edges round-robin so no single graph holds a
    // whole tree; the union holds all of them.
    for (const auto& members : c.clusters()) {
      const auto tree = random_tree(members, rng);
      const std::size_t offset = rng.index(m);
      for (std::size_t e = 0; e < tree.size(); ++e) graphs[(e + offset) % m].add_edge(tree[e].first, tree[e].second);
    }
    for (auto& g : graphs) {
      add_required_cross_links(g, c, b, rng);
      add_optional_edges(g, c, b, spec.floor, spec.density, true, rng);
    }
    const bool each_fails = std::none_of(graphs.begin(), graphs.end(), [&](const DirectedGraph& g) {
      return cluster_spanning_tree_roots(g, c).has_value();
    });
    if (!each_fails || !cluster_spanning_tree_roots(union_graph(graphs), c)) continue;

    std::vector<StochasticMatrix> cycle;
    Rng weights = Rng(spec.seed).fork(kMatrixStream);
    for (const auto& g : graphs) cycle.push_back(realize_matrix(g, c, b, spec.floor, spec.split, weights));
    return MatrixSchedule::periodic(std::move(cycle));
  }
  throw InfeasibleError("could not split the cluster trees across " + std::to_string(m) +
                        " graphs so that each graph lacks cluster spanning trees");
}

System gen_static_system(const GeneratorSpec& spec, std::size_t period) {
  const auto g = gen_graph_with_cluster_trees(spec);
  auto a = gen_common_influence_matrix(spec, g);
  auto c = spec.clustering();
  Rng rng = Rng(spec.seed).fork(kSignalStream);
  ClusterOffsets offsets(random_distinct_offsets(c.cluster_count(), rng), c);
  auto input = random_periodic_input(period, rng);
  return System(MatrixSchedule::constant(std::move(a)), std::move(c), std::move(offsets), std::move(input));
}

System gen_switching_system(const GeneratorSpec& spec, std::size_t m, std::size_t window, std::size_t period) {
  auto schedule = gen_switching_schedule(spec, m, window);
  auto c = spec.clustering();
  Rng rng = Rng(spec.seed).fork(kSignalStream);
  ClusterOffsets offsets(random_distinct_offsets(c.cluster_count(), rng), c);
  auto input = random_periodic_input(period, rng);
  return System(std::move(schedule), std::move(c), std::move(offsets), std::move(input));
}

Eigen::VectorXd gen_initial_state(std::size_t n, std::uint64_t seed, double lo, double hi) {
  Rng rng(seed);
  Eigen::VectorXd x(idx(n));
  for (Index i = 0; i < x.size(); ++i) x(i) = rng.uniform(lo, hi);
  return x;
}

Eigen::VectorXd gen_consensus_state(const Clustering& c, std::uint64_t seed) {
  return expand_to_agents(gen_initial_state(c.cluster_count(), seed), c);
}

namespace {

Clustering example_clustering() { return Clustering(9, {{0, 1, 2}, {3, 4, 5}, {6, 7, 8}}); }

Eigen::MatrixXd example_quotient() {
  Eigen::MatrixXd b(3, 3);
  b << 1.0, 0.0, 0.0,
       0.0, 0.5, 0.5,
       0.0, 0.5, 0.5;
  return b;
}

Eigen::MatrixXd example_flags() {
  Eigen::MatrixXd flags(3, 2);
  flags << 0.5, -0.5,
           1.0, -1.0,
          -1.0,  1.0;
  return flags;
}

DirectedGraph graph_with_self_links(std::initializer_list<std::pair<Vertex, Vertex>> edges) {
  std::vector<std::pair<Vertex, Vertex>> list(edges);
  auto g = DirectedGraph::from_edges(9, list);
  add_self_links(g);
  return g;
}

StochasticMatrix equal_split(const DirectedGraph& g) {
  Rng unused(0);
  return realize_matrix(g, example_clustering(), example_quotient(), 1e-3, SplitMode::Equal, unused);
}

}  // namespace

PaperExample paper_example_a() {
  // Agent 3 (index 2) roots C_1; agent 7 (index 6) reaches all of C_2 and C_3.
  auto g = graph_with_self_links({
      {2, 0}, {2, 1},                  // C_1 star from agent 3
      {6, 7}, {6, 8},                  // C_3 star from agent 7
      {4, 5},                          // inside C_2
      {6, 3}, {7, 4}, {8, 5},          // C_3 -> C_2
      {3, 6}, {4, 7}, {5, 8},          // C_2 -> C_3
  });
  const auto c = example_clustering();
  const auto flags = example_flags();
  std::vector<double> alphas{flags(0, 0), flags(1, 0), flags(2, 0)};
  System sys(MatrixSchedule::constant(equal_split(g)), c, ClusterOffsets(alphas, c), PeriodicInput({-1.0}));
  return PaperExample{std::move(sys), {g}, {2, 6, 6}, 1, 1, 2000, flags, 0.01};
}

PaperExample paper_example_b() {
  // C_1's star is split over (b) and (c), so no graph has a C_1 root alone.
  std::vector<DirectedGraph> graphs{
      graph_with_self_links({{2, 0},
                             {6, 3}, {7, 4}, {8, 5},
                             {3, 6}, {4, 7}, {5, 8}}),
      graph_with_self_links({{2, 1},
                             {6, 7}, {6, 8},
                             {6, 3}, {6, 4}, {6, 5},
                             {3, 6}, {3, 7}, {3, 8}}),
      graph_with_self_links({{7, 3}, {8, 4}, {7, 5},
                             {4, 6}, {5, 7}, {5, 8}}),
  };
  std::vector<StochasticMatrix> cycle;
  for (const auto& g : graphs) cycle.push_back(equal_split(g));
  const auto c = example_clustering();
  const auto flags = example_flags();
  std::vector<double> alphas{flags(0, 0), flags(1, 0), flags(2, 0)};
  System sys(MatrixSchedule::periodic(std::move(cycle)), c, ClusterOffsets(alphas, c), PeriodicInput({-1.0}));
  return PaperExample{std::move(sys), std::move(graphs), {2, 6, 6}, 3, 2, 5000, flags, 0.01};
}

}  // namespace cclab
