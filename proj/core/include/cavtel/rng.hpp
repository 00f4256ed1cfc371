#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace cavtel {

/// splitmix64 finalizer (Steele, Lea, Flood 2014).
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic random stream identified by (seed, stream_index).
///
/// Stream k of master seed s seeds an mt19937_64 with the k-th element of
/// the splitmix64 sequence started at s, i.e. mix64(s + k*2^64/phi). The
/// same pair always reproduces the same draw sequence bit-exactly; doubles
/// are produced from raw 64-bit words rather than std::distributions so the
/// sequence does not depend on the standard library implementation.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_index)
      : seed_(seed),
        stream_(stream_index),
        engine_(mix64(seed + stream_index * 0x9e3779b97f4a7c15ULL)) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_index() const { return stream_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double strictly inside (0, 1): 53 random bits offset by 1/2 ulp.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) *
           (1.0 / 9007199254740992.0);
  }

  /// Uniform double on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Exponential waiting time with the given rate (rate > 0).
  double exponential(double rate) { return -std::log(uniform()) / rate; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

}  // namespace cavtel
