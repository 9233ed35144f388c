#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace gossiprec {

/// splitmix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for stream `stream` of entity `id` under a global seed.
constexpr std::uint64_t derive_seed(std::uint64_t global, std::uint64_t id,
                                    std::uint64_t stream = 0) noexcept {
  return mix64(mix64(mix64(global) ^ id) ^ (stream * 0xd1b54a32d192ed03ULL));
}

/// Seeded random source with platform-independent distributions.
///
/// The standard distribution objects are implementation-defined, so every
/// draw here is computed directly from the raw 64-bit engine output. Runs are
/// bit-identical across compilers and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n) {
    // rejection sampling removes modulo bias
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  /// Exponential with the given mean.
  double exponential(double mean);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_index(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    shuffle(std::span<T>(items));
  }

  /// k distinct indices from [0, n), in draw order.
  std::vector<std::uint64_t> sample_indices(std::uint64_t n, std::uint64_t k);

 private:
  std::mt19937_64 engine_;
};

}  // namespace gossiprec
