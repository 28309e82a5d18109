#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace cclab {

// Seeded generator whose derived draws are identical on every platform:
// the standard distributions are implementation-defined, so the few we
// need are built directly on the 64-bit engine output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, bound).
  std::size_t index(std::size_t bound) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(bound));
  }

  bool bernoulli(double p) { return uniform() < p; }

  double exponential() { return -std::log1p(-uniform()); }

  /// Uniform sample from the (k-1)-simplex.
  std::vector<double> simplex(std::size_t k) {
    std::vector<double> w(k);
    double total = 0.0;
    for (auto& v : w) {
      v = exponential();
      total += v;
    }
    for (auto& v : w) v /= total;
    return w;
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[index(i)]);
  }

  /// Child stream for independent sub-generation.
  Rng fork(std::uint64_t stream) { return Rng(next() ^ (0x9E3779B97F4A7C15ULL * (stream + 1))); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace cclab
