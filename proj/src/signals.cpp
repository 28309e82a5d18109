#include "cclab/signals.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cclab/errors.hpp"

namespace cclab {

ClusterOffsets::ClusterOffsets(std::vector<double> alphas, const Clustering& c)
    : alphas_(std::move(alphas)), expanded_(static_cast<Eigen::Index>(c.size())) {
  if (alphas_.size() != c.cluster_count()) {
    throw InvalidInput("need one offset per cluster: got " + std::to_string(alphas_.size()) +
                       " for " + std::to_string(c.cluster_count()) + " clusters");
  }
  for (std::size_t p = 0; p < alphas_.size(); ++p) {
    if (!std::isfinite(alphas_[p])) throw InvalidInput("offset is not finite");
    for (std::size_t q = p + 1; q < alphas_.size(); ++q)
      if (alphas_[p] == alphas_[q]) throw InvalidInput("cluster offsets must be pairwise distinct");
  }
  for (Vertex v = 0; v < c.size(); ++v)
    expanded_(static_cast<Eigen::Index>(v)) = alphas_[c.cluster_of(v)];
}

Eigen::VectorXd ClusterOffsets::reduced() const {
  return Eigen::Map<const Eigen::VectorXd>(alphas_.data(), static_cast<Eigen::Index>(alphas_.size()));
}

PeriodicInput::PeriodicInput(std::vector<double> free_values)
    : free_values_(std::move(free_values)),
      anchor_(-std::accumulate(free_values_.begin(), free_values_.end(), 0.0)) {
  for (double v : free_values_)
    if (!std::isfinite(v)) throw InvalidInput("input value is not finite");
}

double PeriodicInput::operator()(std::size_t t) const {
  const std::size_t phase = t % period();
  return phase == 0 ? anchor_ : free_values_[phase - 1];
}

double InputSignal::operator()(std::size_t t) const {
  return std::visit(
      [t](const auto& s) -> double {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, PeriodicInput>) {
          return s(t);
        } else {
          return s.fn(t);
        }
      },
      v_);
}

Eigen::VectorXd input_vector(const ClusterOffsets& off, const InputSignal& sig, std::size_t t) {
  return off.expanded() * sig(t);
}

PartialSumBound partial_sum_bound(const InputSignal& sig, std::size_t horizon) {
  if (const auto* p = sig.periodic(); p && horizon < p->period()) {
    throw InvalidInput("partial-sum horizon must cover a full period");
  }
  PartialSumBound out{0.0, 0.0};
  double running = 0.0;
  for (std::size_t t = 0; t <= horizon; ++t) {
    const double u = sig(t);
    running += u;
    out.max_abs_value = std::max(out.max_abs_value, std::abs(u));
    out.max_abs_partial_sum = std::max(out.max_abs_partial_sum, std::abs(running));
  }
  return out;
}

bool partial_sums_look_bounded(const InputSignal& sig, std::size_t horizon) {
  if (sig.periodic()) return true;
  double running = 0.0;
  double first_half = 0.0;
  double whole = 0.0;
  for (std::size_t t = 0; t <= horizon; ++t) {
    const double u = sig(t);
    if (!std::isfinite(u)) return false;
    running += u;
    whole = std::max(whole, std::abs(running));
    if (t <= horizon / 2) first_half = whole;
  }
  return whole <= 1.5 * first_half + 1e-12;
}

}  // namespace cclab
