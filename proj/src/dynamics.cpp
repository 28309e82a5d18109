#include "cclab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace cclab {

namespace {

using Index = Eigen::Index;

Index idx(std::size_t v) { return static_cast<Index>(v); }

}  // namespace

System::System(MatrixSchedule coupling, Clustering clustering, ClusterOffsets offsets, InputSignal signal)
    : coupling_(std::move(coupling)),
      clustering_(std::move(clustering)),
      offsets_(std::move(offsets)),
      signal_(std::move(signal)) {
  if (coupling_.dimension() != clustering_.size()) {
    throw InvalidInput("coupling dimension " + std::to_string(coupling_.dimension()) +
                       " does not match clustering size " + std::to_string(clustering_.size()));
  }
  if (static_cast<std::size_t>(offsets_.expanded().size()) != clustering_.size()) {
    throw InvalidInput("offsets were expanded for a different clustering");
  }
}

const StochasticMatrix& System::fixed_coupling() const {
  if (!is_fixed()) throw InvalidInput("system has a switching coupling");
  return coupling_.cycle().front();
}

Eigen::VectorXd drive_step(const Eigen::MatrixXd& a, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& drive, double u) {
  if (a.cols() != x.size() || drive.size() != a.rows()) throw InvalidInput("state dimension mismatch");
  Eigen::VectorXd next = a * x;
  next += drive * u;
  return next;
}

Eigen::VectorXd step(const System& sys, const Eigen::VectorXd& x, std::size_t t) {
  Eigen::VectorXd next = sys.is_fixed()
                             ? drive_step(sys.fixed_coupling().matrix(), x, sys.offsets().expanded(), sys.signal()(t))
                             : drive_step(sys.coupling().at(t).matrix(), x, sys.offsets().expanded(), sys.signal()(t));
  if (!next.allFinite()) {
    throw DivergenceError("non-finite state at t=" + std::to_string(t + 1), t + 1, Trajectory{{x}});
  }
  return next;
}

Trajectory simulate(const System& sys, const Eigen::VectorXd& x0, std::size_t horizon) {
  if (horizon == 0) throw InvalidInput("horizon must be at least 1");
  if (static_cast<std::size_t>(x0.size()) != sys.size()) throw InvalidInput("initial state has wrong length");
  if (!x0.allFinite()) throw InvalidInput("initial state is not finite");
  Trajectory traj;
  traj.states.reserve(horizon + 1);
  traj.states.push_back(x0);
  for (std::size_t t = 0; t < horizon; ++t) {
    try {
      traj.states.push_back(step(sys, traj.states.back(), t));
    } catch (const DivergenceError& e) {
      throw DivergenceError(e.what(), e.time(), std::move(traj));
    }
  }
  return traj;
}

Trajectory quotient_simulate(const QuotientMatrix& b, const ClusterOffsets& offsets,
                             const InputSignal& sig, const Eigen::VectorXd& y0, std::size_t horizon) {
  if (horizon == 0) throw InvalidInput("horizon must be at least 1");
  if (static_cast<std::size_t>(y0.size()) != b.cluster_count()) {
    throw InvalidInput("quotient initial state has wrong length");
  }
  if (offsets.alphas().size() != b.cluster_count()) throw InvalidInput("offsets do not match quotient size");
  const Eigen::VectorXd drive = offsets.reduced();
  Trajectory traj;
  traj.states.reserve(horizon + 1);
  traj.states.push_back(y0);
  for (std::size_t t = 0; t < horizon; ++t) {
    traj.states.push_back(drive_step(b.matrix(), traj.states.back(), drive, sig(t)));
    if (!traj.states.back().allFinite()) {
      throw DivergenceError("non-finite quotient state at t=" + std::to_string(t + 1), t + 1, traj);
    }
  }
  return traj;
}

Eigen::VectorXd expand_to_agents(const Eigen::VectorXd& cluster_values, const Clustering& c) {
  if (static_cast<std::size_t>(cluster_values.size()) != c.cluster_count()) {
    throw InvalidInput("need one value per cluster");
  }
  Eigen::VectorXd x(idx(c.size()));
  for (Vertex v = 0; v < c.size(); ++v) x(idx(v)) = cluster_values(idx(c.cluster_of(v)));
  return x;
}

Eigen::VectorXd cluster_means(const Eigen::VectorXd& x, const Clustering& c) {
  if (static_cast<std::size_t>(x.size()) != c.size()) throw InvalidInput("state has wrong length");
  Eigen::VectorXd means = Eigen::VectorXd::Zero(idx(c.cluster_count()));
  for (std::size_t p = 0; p < c.cluster_count(); ++p) {
    for (Vertex v : c.members(p)) means(idx(p)) += x(idx(v));
    means(idx(p)) /= static_cast<double>(c.members(p).size());
  }
  return means;
}

std::vector<double> intra_diameter_series(const Trajectory& traj, const Clustering& c) {
  std::vector<double> out;
  out.reserve(traj.states.size());
  for (const auto& x : traj.states) out.push_back(state_diameter(x, c));
  return out;
}

std::optional<PeriodicLimit> detect_periodic_limit(const Trajectory& traj, const Clustering& c,
                                                   std::size_t period, double tol) {
  if (period == 0) throw InvalidInput("period must be positive");
  const std::size_t len = traj.states.size();
  if (len < 4 * period) throw InvalidInput("trajectory must span at least four periods");

  const std::size_t window = std::min(len, std::max(len / 4, 3 * period + 1));
  const std::size_t first = len - window;
  const std::size_t k = c.cluster_count();

  PeriodicLimit limit{period, Eigen::MatrixXd::Zero(idx(k), idx(period)), 0.0};
  for (std::size_t t = len - period; t < len; ++t) {
    limit.cycles.col(idx(t % period)) = cluster_means(traj.states[t], c);
  }
  for (std::size_t t = first; t < len; ++t) {
    const auto& x = traj.states[t];
    const auto phase = idx(t % period);
    for (Vertex v = 0; v < c.size(); ++v) {
      const double dev = std::abs(x(idx(v)) - limit.cycles(idx(c.cluster_of(v)), phase));
      limit.residual = std::max(limit.residual, dev);
    }
  }
  if (!(limit.residual < tol)) return std::nullopt;
  return limit;
}

Eigen::MatrixXd separation_metric(const PeriodicLimit& limit) {
  const Index k = limit.cycles.rows();
  Eigen::MatrixXd sep = Eigen::MatrixXd::Zero(k, k);
  for (Index p = 0; p < k; ++p)
    for (Index q = 0; q < k; ++q)
      sep(p, q) = (limit.cycles.row(p) - limit.cycles.row(q)).cwiseAbs().maxCoeff();
  return sep;
}

ZLimits z_limits(const QuotientMatrix& b, const PeriodicInput& sig, double tol, std::size_t max_periods) {
  const auto& bm = b.matrix();
  const Index k = bm.rows();
  // Z1 = lim B^{nT+1} is the plain power limit.
  const auto power = power_limit(b.stochastic(), tol, max_periods * sig.period());

  // R(t) = sum_{k<=t} B^{t-k} u(k) obeys R(t) = B R(t-1) + u(t) I.
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(k, k);
  Eigen::MatrixXd r = eye * sig(0);
  Eigen::MatrixXd previous = r;
  std::size_t t = 0;
  for (std::size_t n = 1; n <= max_periods; ++n) {
    for (std::size_t s = 0; s < sig.period(); ++s) {
      ++t;
      r = bm * r + eye * sig(t);
    }
    if ((r - previous).cwiseAbs().maxCoeff() < tol) return ZLimits{power.limit.matrix(), r, n};
    previous = r;
  }
  throw ConvergenceError("periodic partial sums did not settle within " + std::to_string(max_periods) +
                         " periods");
}

std::complex<double> z2_eigenvalue(std::complex<double> nu, const PeriodicInput& sig) {
  const std::size_t period = sig.period();
  if (std::abs(nu - 1.0) < 1e-12) return sig(0);
  std::complex<double> numerator = 0.0;
  std::complex<double> power = 1.0;
  for (std::size_t k = 0; k < period; ++k) {
    numerator += sig((period - k) % period) * power;
    power *= nu;
  }
  return numerator / (1.0 - power);
}

BoundReport boundedness_report(const System& sys, const Trajectory& traj) {
  if (traj.states.empty()) throw InvalidInput("empty trajectory");
  BoundReport report{0.0, false, std::numeric_limits<double>::quiet_NaN(), 0.0, 0.0, 0.0, {}};
  for (const auto& x : traj.states) report.max_norm = std::max(report.max_norm, x.cwiseAbs().maxCoeff());

  if (!sys.is_fixed()) {
    report.note = "constructive bound needs a fixed coupling";
    return report;
  }
  const auto& a = sys.fixed_coupling();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a(i, i) > 0.0)) {
      report.note = "coupling has a zero diagonal entry; power convergence not guaranteed";
      return report;
    }
  }
  const std::size_t horizon = traj.horizon();
  if (!partial_sums_look_bounded(sys.signal(), std::max<std::size_t>(horizon, 2))) {
    report.note = "input partial sums grow over the horizon";
    return report;
  }
  std::size_t span = horizon;
  if (const auto* p = sys.signal().periodic()) span = std::max(span, p->period());
  const auto sums = partial_sum_bound(sys.signal(), span);
  report.y = std::max(sums.max_abs_value, sums.max_abs_partial_sum);

  const auto power = power_limit(a);
  const Eigen::VectorXd& drive = sys.offsets().expanded();
  const double drive_norm = drive.cwiseAbs().maxCoeff();
  const double limit_drive = (power.limit.matrix() * drive).cwiseAbs().maxCoeff();
  const double x0 = traj.states.front().cwiseAbs().maxCoeff();

  // The tail of ||A^t - A^inf|| sits at rounding level; it carries no rate.
  constexpr double kNoiseFloor = 1e-12;
  double transient;
  report.lambda = power.rate;
  if (power.rate > 0.0 && power.rate < 1.0) {
    for (std::size_t t = 0; t < power.error_history.size(); ++t) {
      const double err = power.error_history[t];
      if (err > kNoiseFloor) report.m = std::max(report.m, err / std::pow(power.rate, static_cast<double>(t)));
    }
    transient = report.m / (1.0 - power.rate);
  } else {
    transient = 0.0;
    for (double err : power.error_history) transient += err;
    report.m = transient;
  }
  report.applicable = true;
  report.bound = x0 + limit_drive * report.y + transient * drive_norm * report.y;
  report.note = "l1/sup-norm constructive bound";
  return report;
}

}  // namespace cclab
