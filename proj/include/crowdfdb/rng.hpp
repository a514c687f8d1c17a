#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

namespace crowdfdb {

/// SplitMix64 finalizer (Steele, Lea, Flood). Used for seeding and stream
/// derivation; constants are the published ones.
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// 64-bit FNV-1a of a purpose tag.
constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Seed of the stream identified by (master seed, purpose tag, index).
///
/// seed = mix(mix(master + G) ^ fnv1a64(tag) ^ mix(index + 2G)),
/// with G = 0x9e3779b97f4a7c15 (the SplitMix64 increment).
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                          std::uint64_t index = 0) noexcept;

/// xoshiro256** (Blackman & Vigna) with its 256-bit state filled from a
/// SplitMix64 sequence. Every draw helper below is defined in terms of
/// next() only, so sequences are identical on every platform.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t seed) noexcept;
  RandomStream(std::uint64_t master, std::string_view tag,
               std::uint64_t index = 0) noexcept
      : RandomStream(derive_seed(master, tag, index)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type next() noexcept;
  result_type operator()() noexcept { return next(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) noexcept {
    return lo + (hi - lo) * uniform01();
  }
  /// True with probability p. p <= 0 never fires, p >= 1 always fires.
  bool bernoulli(double p) noexcept { return uniform01() < p; }
  /// Uniform integer in [0, bound) by rejection; bound must be > 0.
  std::uint64_t below(std::uint64_t bound) noexcept;

  template <typename T>
  void shuffle(std::vector<T>& items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t s_[4];
};

/// Draws indices from a fixed discrete distribution by inverse CDF.
class DiscreteSampler {
 public:
  explicit DiscreteSampler(std::span<const double> weights);
  std::size_t operator()(RandomStream& rng) const;

 private:
  std::vector<double> cumulative_;
};

}  // namespace crowdfdb
