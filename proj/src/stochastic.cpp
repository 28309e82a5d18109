#include "cclab/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cclab/errors.hpp"

namespace cclab {

namespace {

using Index = Eigen::Index;

Index idx(std::size_t v) { return static_cast<Index>(v); }

void check_shared_size(std::size_t n, const Clustering& c) {
  if (n != c.size()) throw InvalidInput("matrix and clustering sizes differ");
}

// Renormalizes rows whose sums drifted by less than kRowSumTol.
void correct_drift(Eigen::MatrixXd& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    const double sum = m.row(i).sum();
    if (std::abs(sum - 1.0) > kRowSumTol) {
      throw InvalidInput("row " + std::to_string(i) + " of a stochastic product drifted to " +
                         std::to_string(sum));
    }
    m.row(i) /= sum;
  }
}

constexpr std::size_t kRenormalizeEvery = 64;

}  // namespace

StochasticMatrix StochasticMatrix::validate(const Eigen::MatrixXd& raw, double tol) {
  if (raw.rows() != raw.cols()) throw InvalidInput("stochastic matrix must be square");
  if (raw.rows() == 0) throw InvalidInput("stochastic matrix must be nonempty");
  Eigen::MatrixXd m = raw;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (!std::isfinite(m(i, j))) {
        throw InvalidInput("entry (" + std::to_string(i) + ", " + std::to_string(j) + ") is not finite");
      }
      if (m(i, j) < 0.0) {
        throw InvalidInput("entry (" + std::to_string(i) + ", " + std::to_string(j) + ") is negative");
      }
    }
    const double sum = m.row(i).sum();
    if (std::abs(sum - 1.0) > tol) {
      throw InvalidInput("row " + std::to_string(i) + " sums to " + std::to_string(sum));
    }
    m.row(i) /= sum;
  }
  return StochasticMatrix(std::move(m));
}

StochasticMatrix StochasticMatrix::identity(std::size_t n) {
  return StochasticMatrix(Eigen::MatrixXd::Identity(idx(n), idx(n)));
}

StochasticMatrix StochasticMatrix::uniform(std::size_t n) {
  return StochasticMatrix(Eigen::MatrixXd::Constant(idx(n), idx(n), 1.0 / static_cast<double>(n)));
}

StochasticMatrix multiply(const StochasticMatrix& a, const StochasticMatrix& b) {
  if (a.size() != b.size()) throw InvalidInput("product of matrices with different sizes");
  return StochasticMatrix(a.m_ * b.m_);
}

ProductAccumulator::ProductAccumulator(const StochasticMatrix& first) : product_(first) {}

void ProductAccumulator::left_multiply(const StochasticMatrix& next) {
  if (next.size() != product_.size()) throw InvalidInput("product of matrices with different sizes");
  product_.m_ = next.m_ * product_.m_;
  if (++since_renormalize_ == kRenormalizeEvery) {
    correct_drift(product_.m_);
    since_renormalize_ = 0;
  }
}

MatrixSchedule MatrixSchedule::constant(StochasticMatrix a) {
  return periodic({std::move(a)});
}

MatrixSchedule MatrixSchedule::periodic(std::vector<StochasticMatrix> cycle) {
  if (cycle.empty()) throw InvalidInput("schedule needs at least one matrix");
  const auto n = cycle.front().size();
  for (const auto& a : cycle)
    if (a.size() != n) throw InvalidInput("schedule matrices differ in dimension");
  MatrixSchedule s;
  s.n_ = n;
  s.cycle_ = std::move(cycle);
  return s;
}

MatrixSchedule MatrixSchedule::generated(std::size_t n, Generator gen) {
  if (!gen) throw InvalidInput("schedule generator is empty");
  MatrixSchedule s;
  s.n_ = n;
  s.gen_ = std::move(gen);
  return s;
}

StochasticMatrix MatrixSchedule::at(std::size_t t) const {
  if (gen_) {
    auto a = gen_(t);
    if (a.size() != n_) throw InvalidInput("schedule generator changed dimension");
    return a;
  }
  return cycle_[t % cycle_.size()];
}

std::optional<std::size_t> MatrixSchedule::period() const {
  if (gen_) return std::nullopt;
  return cycle_.size();
}

std::optional<double> MatrixSchedule::min_positive_entry(double zero_tol) const {
  if (gen_) return std::nullopt;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& a : cycle_)
    for (Index i = 0; i < a.matrix().rows(); ++i)
      for (Index j = 0; j < a.matrix().cols(); ++j)
        if (a.matrix()(i, j) > zero_tol) best = std::min(best, a.matrix()(i, j));
  return best;
}

double ergodicity_coefficient(const StochasticMatrix& a, const Clustering& c) {
  check_shared_size(a.size(), c);
  const auto& m = a.matrix();
  double mu = 1.0;
  for (const auto& members : c.clusters()) {
    for (std::size_t x = 0; x < members.size(); ++x) {
      for (std::size_t y = x + 1; y < members.size(); ++y) {
        const double overlap = m.row(idx(members[x])).cwiseMin(m.row(idx(members[y]))).sum();
        mu = std::min(mu, overlap);
      }
    }
  }
  return std::clamp(mu, 0.0, 1.0);
}

double hajnal_diameter(const Eigen::MatrixXd& a, const Clustering& c) {
  check_shared_size(static_cast<std::size_t>(a.rows()), c);
  double diameter = 0.0;
  for (const auto& members : c.clusters())
    for (std::size_t x = 0; x < members.size(); ++x)
      for (std::size_t y = x + 1; y < members.size(); ++y)
        diameter = std::max(diameter, (a.row(idx(members[x])) - a.row(idx(members[y]))).lpNorm<1>());
  return diameter;
}

double state_diameter(const Eigen::VectorXd& x, const Clustering& c) {
  check_shared_size(static_cast<std::size_t>(x.size()), c);
  double diameter = 0.0;
  for (const auto& members : c.clusters()) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (Vertex v : members) {
      lo = std::min(lo, x(idx(v)));
      hi = std::max(hi, x(idx(v)));
    }
    diameter = std::max(diameter, hi - lo);
  }
  return diameter;
}

namespace {

// blocks(i, q) = sum_{j in C_q} A_ij
Eigen::MatrixXd block_sums(const StochasticMatrix& a, const Clustering& c) {
  const auto& m = a.matrix();
  Eigen::MatrixXd blocks = Eigen::MatrixXd::Zero(m.rows(), idx(c.cluster_count()));
  for (std::size_t q = 0; q < c.cluster_count(); ++q)
    for (Vertex j : c.members(q)) blocks.col(idx(q)) += m.col(idx(j));
  return blocks;
}

}  // namespace

double common_influence_defect(const StochasticMatrix& a, const Clustering& c) {
  check_shared_size(a.size(), c);
  const auto blocks = block_sums(a, c);
  double defect = 0.0;
  for (const auto& members : c.clusters()) {
    for (Index q = 0; q < blocks.cols(); ++q) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (Vertex i : members) {
        lo = std::min(lo, blocks(idx(i), q));
        hi = std::max(hi, blocks(idx(i), q));
      }
      defect = std::max(defect, hi - lo);
    }
  }
  return defect;
}

bool has_common_influence(const StochasticMatrix& a, const Clustering& c, double tol) {
  return common_influence_defect(a, c) <= tol;
}

QuotientMatrix quotient_matrix(const StochasticMatrix& a, const Clustering& c, double tol) {
  const double defect = common_influence_defect(a, c);
  if (defect > tol) {
    throw CommonInfluenceError("block row sums vary by " + std::to_string(defect) +
                               " within a cluster");
  }
  const auto blocks = block_sums(a, c);
  const auto k = idx(c.cluster_count());
  Eigen::MatrixXd b(k, k);
  for (Index p = 0; p < k; ++p) b.row(p) = blocks.row(idx(c.members(static_cast<std::size_t>(p)).front()));
  return QuotientMatrix(StochasticMatrix::validate(b));
}

StochasticMatrix product_range(const MatrixSchedule& s, std::size_t t, std::size_t last) {
  if (last < t) throw InvalidInput("product range needs last >= first");
  ProductAccumulator acc(s.at(t));
  for (std::size_t r = t + 1; r <= last; ++r) acc.left_multiply(s.at(r));
  return acc.product();
}

double log_linear_slope(std::span<const double> values, std::size_t first, std::size_t last) {
  double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = first; i < last; ++i) {
    if (!(values[i] > 0.0)) continue;
    const double x = static_cast<double>(i);
    const double y = std::log(values[i]);
    n += 1;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  if (n < 2) return -std::numeric_limits<double>::infinity();
  const double denom = n * sxx - sx * sx;
  return (n * sxy - sx * sy) / denom;
}

PowerLimit power_limit(const StochasticMatrix& a, double tol, std::size_t max_iter) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!(a(i, i) > 0.0)) throw InvalidInput("power limit needs a positive diagonal");

  ProductAccumulator power(a);
  std::size_t iterations = 0;
  for (std::size_t t = 1;; ++t) {
    if (t > max_iter) {
      throw ConvergenceError("matrix powers did not settle within " + std::to_string(max_iter) +
                             " iterations");
    }
    const Eigen::MatrixXd previous = power.product().matrix();
    power.left_multiply(a);
    if ((power.product().matrix() - previous).cwiseAbs().maxCoeff() < tol) {
      iterations = t;
      break;
    }
  }
  // A^iterations is only tol-accurate; measuring errors against it bends the
  // tail of the history down. Squaring pushes the limit error to roundoff.
  StochasticMatrix limit = power.product();
  for (int k = 0; k < 4; ++k) limit = multiply(limit, limit);

  std::vector<double> errors;
  errors.reserve(iterations + 1);
  Eigen::MatrixXd current = Eigen::MatrixXd::Identity(a.matrix().rows(), a.matrix().cols());
  for (std::size_t t = 0; t <= iterations; ++t) {
    errors.push_back((current - limit.matrix()).cwiseAbs().rowwise().sum().maxCoeff());
    current = current * a.matrix();
  }
  // Transient-free estimate from the last half; exact zeros carry no rate.
  const double slope = log_linear_slope(errors, errors.size() / 2, errors.size());
  const double rate = std::isfinite(slope) ? std::min(1.0, std::exp(slope)) : 0.0;
  return PowerLimit{limit, rate, iterations, std::move(errors)};
}

GrowthRate diameter_growth_rate(const MatrixSchedule& s, const Clustering& c, std::size_t horizon) {
  if (horizon < 2) throw InvalidInput("growth rate needs a horizon of at least 2");
  // Below this the series is rounding noise rather than contraction.
  constexpr double kNoiseFloor = 1e-13;

  GrowthRate out{1.0, false, {}};
  ProductAccumulator acc(s.at(0));
  for (std::size_t t = 1; t <= horizon; ++t) {
    if (t > 1) acc.left_multiply(s.at(t - 1));
    const double d = hajnal_diameter(acc.product(), c);
    out.series.push_back(d);
    if (d == 0.0) {
      out.rate = 0.0;
      out.finite_time_consensus = true;
      return out;
    }
  }
  std::size_t usable = 0;
  while (usable < out.series.size() && out.series[usable] > kNoiseFloor) ++usable;
  if (usable < 2) {
    out.rate = 0.0;
    return out;
  }
  const double slope = log_linear_slope(out.series, std::min(usable / 2, usable - 2), usable);
  out.rate = std::exp(slope);
  return out;
}

}  // namespace cclab
