// ============================================================================
// rng.hpp -- counter-keyed random streams and portable discrete samplers
//
// Every random draw in the simulator comes from a stream derived from
// (master seed, domain, trial, period, node). Streams are independent of
// scheduling, so runs are reproducible for any worker count and trials can
// be evaluated in any order.
// ============================================================================
#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace csd {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ull;

/// SplitMix64 finalizer; bijective on 64-bit words.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

// Domain separators for derived streams.
inline constexpr std::uint64_t kTrafficDomain = 0x74726166666963ull;  // traffic sampling
inline constexpr std::uint64_t kSweepDomain = 0x73776565700a0dull;    // per-cell sweep seeds

/// A small keyed random stream (SplitMix64 sequence).
class RngStream {
 public:
  explicit RngStream(std::uint64_t state) : state_(state) {}

  /// Derives a stream from a master seed and a list of key words.
  /// Distinct key tuples give (practically) independent streams.
  static RngStream keyed(std::uint64_t seed, std::initializer_list<std::uint64_t> words) {
    std::uint64_t h = mix64(seed + kGoldenGamma);
    for (std::uint64_t w : words) {
      h = mix64(h ^ (w + kGoldenGamma));
    }
    return RngStream(h);
  }

  std::uint64_t next_u64() {
    state_ += kGoldenGamma;
    return mix64(state_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

/// Derives a fresh 64-bit seed from a master seed and key words
/// (used for per-cell seeds in parameter sweeps).
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> words) {
  std::uint64_t h = mix64(seed + kGoldenGamma);
  for (std::uint64_t w : words) {
    h = mix64(h ^ (w + kGoldenGamma));
  }
  return h;
}

/// Poisson sample by inversion (sequential search). Exact and portable;
/// adequate for the small means used here. `exp_neg_mean` = exp(-mean),
/// passed in so hot loops can precompute it.
inline int sample_poisson(double mean, double exp_neg_mean, RngStream& rng) {
  const double u = rng.next_unit();
  double p = exp_neg_mean;
  double cdf = p;
  int k = 0;
  // Cap guards the loop if cdf saturates just below u in floating point.
  const int cap = static_cast<int>(mean + 12.0 * std::sqrt(mean) + 64.0);
  while (u >= cdf && k < cap) {
    ++k;
    p *= mean / static_cast<double>(k);
    cdf += p;
  }
  return k;
}

inline int sample_poisson(double mean, RngStream& rng) {
  return sample_poisson(mean, std::exp(-mean), rng);
}

/// Binomial(n, p) as n explicit Bernoulli draws. Exact; n is small here.
inline int sample_binomial(int n, double p, RngStream& rng) {
  int k = 0;
  for (int i = 0; i < n; ++i) {
    k += rng.next_unit() < p ? 1 : 0;
  }
  return k;
}

}  // namespace csd
