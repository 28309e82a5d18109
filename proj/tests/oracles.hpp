#pragma once

// Brute-force reference implementations and random generators for tests.
// Nothing here calls into the library's analytics; only plain loops.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "cclab/graph.hpp"
#include "cclab/rng.hpp"

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Owner = std::vector<std::size_t>;  // owner[i] = cluster of agent i
using Adj = std::vector<std::vector<bool>>;  // adj[from][to]

inline Owner owners(const cclab::Clustering& c) {
  Owner o(c.size());
  for (std::size_t v = 0; v < c.size(); ++v) o[v] = c.cluster_of(v);
  return o;
}

inline double mu(const Matrix& a, const Owner& o) {
  const auto n = static_cast<std::size_t>(a.rows());
  double best = 1.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || o[i] != o[j]) continue;
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += std::min(a(i, k), a(j, k));
      best = std::min(best, s);
    }
  return best;
}

inline double delta(const Matrix& a, const Owner& o) {
  const auto n = static_cast<std::size_t>(a.rows());
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (o[i] != o[j]) continue;
      double s = 0.0;
      for (std::size_t k = 0; k < static_cast<std::size_t>(a.cols()); ++k) s += std::abs(a(i, k) - a(j, k));
      worst = std::max(worst, s);
    }
  return worst;
}

inline double state_delta(const Vector& x, const Owner& o) {
  double worst = 0.0;
  for (std::size_t i = 0; i < o.size(); ++i)
    for (std::size_t j = 0; j < o.size(); ++j)
      if (o[i] == o[j]) worst = std::max(worst, std::abs(x(i) - x(j)));
  return worst;
}

inline Matrix multiply(const Matrix& a, const Matrix& b) {
  Matrix c = Matrix::Zero(a.rows(), b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.cols(); ++j)
      for (Eigen::Index k = 0; k < a.cols(); ++k) c(i, j) += a(i, k) * b(k, j);
  return c;
}

// sums(i, q) = sum_{j in C_q} a_ij
inline Matrix block_sums(const Matrix& a, const Owner& o, std::size_t k) {
  Matrix s = Matrix::Zero(a.rows(), static_cast<Eigen::Index>(k));
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) s(i, static_cast<Eigen::Index>(o[j])) += a(i, j);
  return s;
}

inline double influence_defect(const Matrix& a, const Owner& o, std::size_t k) {
  const auto s = block_sums(a, o, k);
  double worst = 0.0;
  for (std::size_t i = 0; i < o.size(); ++i)
    for (std::size_t j = 0; j < o.size(); ++j)
      if (o[i] == o[j])
        for (Eigen::Index q = 0; q < s.cols(); ++q) worst = std::max(worst, std::abs(s(i, q) - s(j, q)));
  return worst;
}

inline Adj adjacency(const Matrix& a, double tol = 1e-12) {
  const auto n = static_cast<std::size_t>(a.rows());
  Adj adj(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) adj[j][i] = a(i, j) > tol;
  return adj;
}

inline Adj adjacency(const cclab::DirectedGraph& g) {
  Adj adj(g.size(), std::vector<bool>(g.size(), false));
  for (auto [from, to] : g.edges()) adj[from][to] = true;
  return adj;
}

// Floyd-Warshall transitive closure, reflexive.
inline Adj closure(Adj r) {
  const auto n = r.size();
  for (std::size_t v = 0; v < n; ++v) r[v][v] = true;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (r[i][k])
        for (std::size_t j = 0; j < n; ++j)
          if (r[k][j]) r[i][j] = true;
  return r;
}

inline bool is_root(const Adj& reach, const Owner& o, std::size_t p, std::size_t v) {
  for (std::size_t w = 0; w < o.size(); ++w)
    if (o[w] == p && !reach[v][w]) return false;
  return true;
}

inline bool has_roots(const Adj& adj, const Owner& o, std::size_t k) {
  const auto reach = closure(adj);
  for (std::size_t p = 0; p < k; ++p) {
    bool any = false;
    for (std::size_t v = 0; v < o.size() && !any; ++v) any = is_root(reach, o, p, v);
    if (!any) return false;
  }
  return true;
}

inline bool scrambling(const Adj& adj, const Owner& o) {
  const auto n = o.size();
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      if (o[a] != o[b]) continue;
      bool common = false;
      for (std::size_t k = 0; k < n && !common; ++k) common = adj[k][a] && adj[k][b];
      if (!common) return false;
    }
  return true;
}

inline bool common_link(const Adj& adj, const Owner& o, std::size_t k) {
  for (std::size_t p = 0; p < k; ++p)
    for (std::size_t q = 0; q < k; ++q) {
      std::size_t hit = 0;
      std::size_t size = 0;
      for (std::size_t v = 0; v < o.size(); ++v) {
        if (o[v] != p) continue;
        ++size;
        bool linked = false;
        for (std::size_t w = 0; w < o.size(); ++w) linked = linked || (o[w] == q && adj[w][v]);
        hit += linked;
      }
      if (hit != 0 && hit != size) return false;
    }
  return true;
}

// Random partition of n agents into exactly k nonempty clusters.
inline cclab::Clustering random_clustering(std::size_t n, std::size_t k, cclab::Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  std::vector<std::vector<cclab::Vertex>> clusters(k);
  for (std::size_t i = 0; i < n; ++i) clusters[i < k ? i : rng.index(k)].push_back(order[i]);
  return cclab::Clustering(n, clusters);
}

// Row-stochastic with each off-diagonal entry zeroed with probability `sparsity`.
inline Matrix random_stochastic(std::size_t n, cclab::Rng& rng, double sparsity = 0.0, bool positive_diagonal = false) {
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const bool keep = (positive_diagonal && i == j) || !rng.bernoulli(sparsity);
      a(i, j) = keep ? rng.uniform(0.05, 1.0) : 0.0;
      total += a(i, j);
    }
    if (total == 0.0) {
      a(i, i) = 1.0;
      total = 1.0;
    }
    a.row(i) /= total;
  }
  return a;
}

// Matrix with inter-cluster common influence: draws a quotient, then splits
// each block mass over a random nonempty subset of the source cluster.
inline Matrix random_compliant(const cclab::Clustering& c, cclab::Rng& rng, double sparsity = 0.5,
                               Matrix* quotient_out = nullptr) {
  const auto k = c.cluster_count();
  const auto n = c.size();
  Matrix b(k, k);
  for (std::size_t p = 0; p < k; ++p) {
    double total = 0.0;
    for (std::size_t q = 0; q < k; ++q) {
      b(p, q) = (p == q || !rng.bernoulli(sparsity)) ? rng.uniform(0.05, 1.0) : 0.0;
      total += b(p, q);
    }
    b.row(p) /= total;
  }
  Matrix a = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = c.cluster_of(i);
    for (std::size_t q = 0; q < k; ++q) {
      if (b(p, q) == 0.0) continue;
      std::vector<cclab::Vertex> chosen;
      for (auto j : c.members(q))
        if ((p == q && j == i) || rng.bernoulli(0.5)) chosen.push_back(j);
      if (chosen.empty()) chosen.push_back(c.members(q)[rng.index(c.members(q).size())]);
      std::vector<double> w(chosen.size());
      double total = 0.0;
      for (auto& x : w) total += (x = rng.uniform(0.05, 1.0));
      for (std::size_t e = 0; e < chosen.size(); ++e) a(i, chosen[e]) = b(p, q) * w[e] / total;
    }
  }
  if (quotient_out) *quotient_out = b;
  return a;
}

}  // namespace oracle
