#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace cclab {

using Vertex = std::size_t;

/// Directed graph on vertices 0..n-1. An edge (j, i) is a link from j to i,
/// i.e. agent i listens to agent j.
class DirectedGraph {
 public:
  explicit DirectedGraph(std::size_t n);

  /// Builds from an edge list; duplicates collapse, out-of-range vertices throw.
  static DirectedGraph from_edges(std::size_t n, std::span<const std::pair<Vertex, Vertex>> edges);

  std::size_t size() const { return n_; }
  std::size_t edge_count() const { return edge_count_; }

  bool has_edge(Vertex from, Vertex to) const { return adj_[from * n_ + to] != 0; }
  /// Returns false when the edge was already present.
  bool add_edge(Vertex from, Vertex to);
  void remove_edge(Vertex from, Vertex to);

  std::vector<Vertex> in_neighbors(Vertex v) const;
  std::vector<Vertex> out_neighbors(Vertex v) const;
  /// All edges in (from, to) lexicographic order.
  std::vector<std::pair<Vertex, Vertex>> edges() const;

  friend bool operator==(const DirectedGraph&, const DirectedGraph&) = default;

 private:
  void check_vertex(Vertex v) const;

  std::size_t n_;
  std::size_t edge_count_ = 0;
  std::vector<unsigned char> adj_;  // row-major: adj_[from * n + to]
};

/// Disjoint partition of 0..n-1 into K nonempty clusters.
class Clustering {
 public:
  /// Validates disjointness, coverage and nonemptiness. Member lists are sorted.
  Clustering(std::size_t n, std::vector<std::vector<Vertex>> clusters);

  /// Consecutive blocks of the given sizes: {0..s0-1}, {s0..s0+s1-1}, ...
  static Clustering from_sizes(std::span<const std::size_t> sizes);

  std::size_t size() const { return n_; }
  std::size_t cluster_count() const { return clusters_.size(); }
  const std::vector<Vertex>& members(std::size_t p) const { return clusters_[p]; }
  const std::vector<std::vector<Vertex>>& clusters() const { return clusters_; }
  std::size_t cluster_of(Vertex v) const { return owner_[v]; }

  friend bool operator==(const Clustering&, const Clustering&) = default;

 private:
  std::size_t n_;
  std::vector<std::vector<Vertex>> clusters_;
  std::vector<std::size_t> owner_;
};

inline constexpr double kDefaultZeroTol = 1e-12;

/// Edge (j, i) iff A(i, j) > zero_tol.
DirectedGraph graph_of_matrix(const Eigen::MatrixXd& a, double zero_tol = kDefaultZeroTol);

bool has_self_links(const DirectedGraph& g);

/// Vertices reachable from v by directed paths, v included, ascending.
std::vector<Vertex> reachable_set(const DirectedGraph& g, Vertex v);

/// True iff every member of cluster p is reachable from v.
bool is_cluster_root(const DirectedGraph& g, const Clustering& c, std::size_t p, Vertex v);

/// One root per cluster (lowest-index valid vertex), or nullopt when some
/// cluster has none. Roots may lie outside their cluster.
std::optional<std::vector<Vertex>> cluster_spanning_tree_roots(const DirectedGraph& g,
                                                               const Clustering& c);

/// Every same-cluster pair shares a common in-neighbor.
bool is_cluster_scrambling(const DirectedGraph& g, const Clustering& c);

/// For each ordered cluster pair (p, q): either no edges from C_q into C_p,
/// or every vertex of C_p has an in-edge from C_q.
bool has_common_link_property(const DirectedGraph& g, const Clustering& c);

/// First cluster pair (p, q) breaking the common-link property, if any.
std::optional<std::pair<std::size_t, std::size_t>> common_link_violation(const DirectedGraph& g,
                                                                         const Clustering& c);

/// Edge-set union; throws on an empty list or mismatched sizes.
DirectedGraph union_graph(std::span<const DirectedGraph> graphs);

}  // namespace cclab
