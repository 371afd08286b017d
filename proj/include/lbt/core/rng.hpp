#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace lbt {

/// Seeded random source used everywhere randomness matters.
///
/// Bounded integers and unit reals are drawn with fixed algorithms on top
/// of mt19937_64 (whose output sequence is fully specified), so pinned
/// simulation results do not depend on the standard library's
/// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, n); throws DomainError when n is 0.
  std::size_t uniform_index(std::size_t n);

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

  // Log-normal parameterised by its median; sigma is the log-scale sd.
  double lognormal_median(double median, double sigma);

  std::mt19937_64& engine() { return engine_; }

  bool operator==(const Rng&) const = default;

 private:
  std::mt19937_64 engine_;
};

// Derives an independent stream seed from (seed, stream) with splitmix64.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace lbt
