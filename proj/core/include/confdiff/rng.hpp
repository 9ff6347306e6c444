#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace confdiff {

/// SplitMix64 finalizer. Used to derive statistically independent child seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Child seed for stream `key` of `seed`. Distinct keys give independent streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t key) noexcept;

/// FNV-1a of a label, so streams can be keyed by name ("train", "test", ...).
std::uint64_t stream_key(std::string_view name) noexcept;

/// Seedable, splittable 64-bit generator. The engine is mt19937_64; `split`
/// hands out child generators whose seeds depend only on (seed, key), never on
/// how many numbers the parent has already produced.
class Rng {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

  std::uint64_t seed() const noexcept { return seed_; }

  Rng split(std::uint64_t key) const { return Rng(derive_seed(seed_, key)); }
  Rng split(std::string_view name) const { return split(stream_key(name)); }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal(double mean = 0.0, double stddev = 1.0) {
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }
  bool bernoulli(double p) { return uniform() < p; }

  // UniformRandomBitGenerator interface, for std::shuffle and friends.
  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace confdiff
