#include "cclab/graph.hpp"

#include <algorithm>
#include <deque>
#include <string>

#include "cclab/errors.hpp"

namespace cclab {

DirectedGraph::DirectedGraph(std::size_t n) : n_(n), adj_(n * n, 0) {
  if (n == 0) throw InvalidInput("graph must have at least one vertex");
}

DirectedGraph DirectedGraph::from_edges(std::size_t n,
                                        std::span<const std::pair<Vertex, Vertex>> edges) {
  DirectedGraph g(n);
  for (auto [from, to] : edges) g.add_edge(from, to);
  return g;
}

void DirectedGraph::check_vertex(Vertex v) const {
  if (v >= n_) {
    throw InvalidInput("vertex " + std::to_string(v) + " out of range for graph of size " +
                       std::to_string(n_));
  }
}

bool DirectedGraph::add_edge(Vertex from, Vertex to) {
  check_vertex(from);
  check_vertex(to);
  auto& slot = adj_[from * n_ + to];
  if (slot) return false;
  slot = 1;
  ++edge_count_;
  return true;
}

void DirectedGraph::remove_edge(Vertex from, Vertex to) {
  check_vertex(from);
  check_vertex(to);
  auto& slot = adj_[from * n_ + to];
  if (slot) {
    slot = 0;
    --edge_count_;
  }
}

std::vector<Vertex> DirectedGraph::in_neighbors(Vertex v) const {
  check_vertex(v);
  std::vector<Vertex> out;
  for (Vertex j = 0; j < n_; ++j)
    if (has_edge(j, v)) out.push_back(j);
  return out;
}

std::vector<Vertex> DirectedGraph::out_neighbors(Vertex v) const {
  check_vertex(v);
  std::vector<Vertex> out;
  for (Vertex i = 0; i < n_; ++i)
    if (has_edge(v, i)) out.push_back(i);
  return out;
}

std::vector<std::pair<Vertex, Vertex>> DirectedGraph::edges() const {
  std::vector<std::pair<Vertex, Vertex>> out;
  out.reserve(edge_count_);
  for (Vertex j = 0; j < n_; ++j)
    for (Vertex i = 0; i < n_; ++i)
      if (has_edge(j, i)) out.emplace_back(j, i);
  return out;
}

Clustering::Clustering(std::size_t n, std::vector<std::vector<Vertex>> clusters)
    : n_(n), clusters_(std::move(clusters)), owner_(n, clusters_.size()) {
  if (n == 0) throw InvalidInput("clustering must cover at least one vertex");
  if (clusters_.empty()) throw InvalidInput("clustering needs at least one cluster");
  for (std::size_t p = 0; p < clusters_.size(); ++p) {
    auto& members = clusters_[p];
    if (members.empty()) throw InvalidInput("cluster " + std::to_string(p) + " is empty");
    std::sort(members.begin(), members.end());
    for (Vertex v : members) {
      if (v >= n) throw InvalidInput("cluster member " + std::to_string(v) + " out of range");
      if (owner_[v] != clusters_.size()) {
        throw InvalidInput("vertex " + std::to_string(v) + " appears in more than one cluster");
      }
      owner_[v] = p;
    }
  }
  for (Vertex v = 0; v < n; ++v) {
    if (owner_[v] == clusters_.size()) {
      throw InvalidInput("vertex " + std::to_string(v) + " belongs to no cluster");
    }
  }
}

Clustering Clustering::from_sizes(std::span<const std::size_t> sizes) {
  std::vector<std::vector<Vertex>> clusters;
  Vertex next = 0;
  for (std::size_t s : sizes) {
    std::vector<Vertex> members(s);
    for (auto& v : members) v = next++;
    clusters.push_back(std::move(members));
  }
  return Clustering(next, std::move(clusters));
}

DirectedGraph graph_of_matrix(const Eigen::MatrixXd& a, double zero_tol) {
  if (a.rows() != a.cols()) throw InvalidInput("matrix must be square");
  const auto n = static_cast<std::size_t>(a.rows());
  DirectedGraph g(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > zero_tol) g.add_edge(j, i);
  return g;
}

bool has_self_links(const DirectedGraph& g) {
  for (Vertex v = 0; v < g.size(); ++v)
    if (!g.has_edge(v, v)) return false;
  return true;
}

namespace {

std::vector<char> reach_mask(const DirectedGraph& g, Vertex v) {
  std::vector<char> seen(g.size(), 0);
  std::deque<Vertex> queue{v};
  seen[v] = 1;
  while (!queue.empty()) {
    const Vertex u = queue.front();
    queue.pop_front();
    for (Vertex w = 0; w < g.size(); ++w) {
      if (!seen[w] && g.has_edge(u, w)) {
        seen[w] = 1;
        queue.push_back(w);
      }
    }
  }
  return seen;
}

void check_shared_size(const DirectedGraph& g, const Clustering& c) {
  if (g.size() != c.size()) throw InvalidInput("graph and clustering sizes differ");
}

}  // namespace

std::vector<Vertex> reachable_set(const DirectedGraph& g, Vertex v) {
  if (v >= g.size()) throw InvalidInput("vertex out of range");
  const auto seen = reach_mask(g, v);
  std::vector<Vertex> out;
  for (Vertex w = 0; w < g.size(); ++w)
    if (seen[w]) out.push_back(w);
  return out;
}

bool is_cluster_root(const DirectedGraph& g, const Clustering& c, std::size_t p, Vertex v) {
  check_shared_size(g, c);
  if (v >= g.size()) throw InvalidInput("vertex out of range");
  const auto seen = reach_mask(g, v);
  return std::all_of(c.members(p).begin(), c.members(p).end(), [&](Vertex w) { return seen[w] != 0; });
}

std::optional<std::vector<Vertex>> cluster_spanning_tree_roots(const DirectedGraph& g,
                                                               const Clustering& c) {
  check_shared_size(g, c);
  std::vector<std::vector<char>> masks;
  masks.reserve(g.size());
  for (Vertex v = 0; v < g.size(); ++v) masks.push_back(reach_mask(g, v));

  std::vector<Vertex> roots;
  for (std::size_t p = 0; p < c.cluster_count(); ++p) {
    const auto& members = c.members(p);
    std::optional<Vertex> root;
    for (Vertex v = 0; v < g.size() && !root; ++v) {
      if (std::all_of(members.begin(), members.end(), [&](Vertex w) { return masks[v][w] != 0; })) root = v;
    }
    if (!root) return std::nullopt;
    roots.push_back(*root);
  }
  return roots;
}

bool is_cluster_scrambling(const DirectedGraph& g, const Clustering& c) {
  check_shared_size(g, c);
  for (const auto& members : c.clusters()) {
    for (std::size_t a = 0; a < members.size(); ++a) {
      for (std::size_t b = a + 1; b < members.size(); ++b) {
        bool shared = false;
        for (Vertex k = 0; k < g.size() && !shared; ++k)
          shared = g.has_edge(k, members[a]) && g.has_edge(k, members[b]);
        if (!shared) return false;
      }
    }
    // The pair (v, v) of a singleton still needs some in-neighbor.
    if (members.size() == 1 && g.in_neighbors(members.front()).empty()) return false;
  }
  return true;
}

std::optional<std::pair<std::size_t, std::size_t>> common_link_violation(const DirectedGraph& g,
                                                                         const Clustering& c) {
  check_shared_size(g, c);
  const auto k = c.cluster_count();
  for (std::size_t p = 0; p < k; ++p) {
    for (std::size_t q = 0; q < k; ++q) {
      std::size_t linked = 0;
      for (Vertex v : c.members(p)) {
        const bool has = std::any_of(c.members(q).begin(), c.members(q).end(),
                                     [&](Vertex w) { return g.has_edge(w, v); });
        if (has) ++linked;
      }
      if (linked != 0 && linked != c.members(p).size()) return std::pair{p, q};
    }
  }
  return std::nullopt;
}

bool has_common_link_property(const DirectedGraph& g, const Clustering& c) {
  return !common_link_violation(g, c).has_value();
}

DirectedGraph union_graph(std::span<const DirectedGraph> graphs) {
  if (graphs.empty()) throw InvalidInput("union of an empty graph list");
  DirectedGraph out(graphs.front().size());
  for (const auto& g : graphs) {
    if (g.size() != out.size()) throw InvalidInput("union of graphs with different sizes");
    for (auto [from, to] : g.edges()) out.add_edge(from, to);
  }
  return out;
}

}  // namespace cclab
