#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <span>

namespace ctmdp {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Order-sensitive hash of a word sequence.
constexpr std::uint64_t hash_words(std::uint64_t seed,
                                   std::initializer_list<std::uint64_t> words) noexcept {
  std::uint64_t h = mix64(seed + 0x9e3779b97f4a7c15ULL);
  for (std::uint64_t w : words) h = mix64(h ^ (w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
  return h;
}

/**
 * Counter-based generator: output n of stream (seed, stream) is a pure
 * function of (seed, stream, n). Streams are indexed by path number so Monte
 * Carlo results do not depend on how paths are scheduled across workers.
 */
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
      : key_(hash_words(seed, {stream, 0x5eedULL})) {}

  std::uint64_t next() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double exponential(double rate) noexcept { return -std::log1p(-uniform()) / rate; }

  /// Fills `out` with a Dirichlet(1, ..., 1) draw (uniform on the simplex).
  void dirichlet_flat(std::span<double> out) noexcept {
    double total = 0.0;
    for (double& w : out) {
      w = -std::log1p(-uniform());
      total += w;
    }
    if (total <= 0.0) {
      for (double& w : out) w = 1.0 / static_cast<double>(out.size());
      return;
    }
    for (double& w : out) w /= total;
  }

  std::uint64_t draws() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace ctmdp
