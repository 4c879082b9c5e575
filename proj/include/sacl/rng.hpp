#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>

#include <Eigen/Core>

namespace sacl {

/// Seedable random stream. Every stochastic routine takes one by reference.
///
/// Draws are built from raw 64-bit engine output rather than the standard
/// distributions, whose algorithms are implementation-defined; the same seed
/// therefore produces the same sequence on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 bits of precision.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer on [0, n).
  int uniform_int(int n) {
    if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
    // Lemire's multiply-shift; bias is below 2^-32 for the sizes used here.
    const auto x = static_cast<unsigned __int128>(engine_()) *
                   static_cast<unsigned __int128>(n);
    return static_cast<int>(x >> 64);
  }

  /// Index drawn with probability proportional to `weights` (non-negative,
  /// positive sum). Sums left to right so the result is order-deterministic.
  template <typename Derived>
  int categorical(const Eigen::DenseBase<Derived>& weights) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < weights.size(); ++i) total += weights(i);
    if (!(total > 0.0)) {
      throw std::invalid_argument("categorical: weights must have positive sum");
    }
    const double u = uniform() * total;
    double acc = 0.0;
    int last_positive = -1;
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
      if (weights(i) <= 0.0) continue;
      acc += weights(i);
      last_positive = static_cast<int>(i);
      if (u < acc) return last_positive;
    }
    return last_positive;
  }

  /// Derives an independent child stream (splitmix64 of a fresh draw and a tag).
  Rng split(std::uint64_t tag) {
    std::uint64_t z = engine_() + 0x9e3779b97f4a7c15ULL * (tag + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return Rng(z ^ (z >> 31));
  }

 private:
  std::mt19937_64 engine_;
};

/// Deterministic seed mixing for (seed, stream) pairs.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed * 0x9e3779b97f4a7c15ULL + stream + 0x632be59bd9b4e019ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace sacl
