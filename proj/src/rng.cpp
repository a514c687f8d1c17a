#include "crowdfdb/rng.hpp"

#include <algorithm>
#include <stdexcept>

namespace crowdfdb {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                          std::uint64_t index) noexcept {
  return splitmix64_mix(splitmix64_mix(master + kGolden) ^ fnv1a64(tag) ^
                        splitmix64_mix(index + 2 * kGolden));
}

RandomStream::RandomStream(std::uint64_t seed) noexcept {
  std::uint64_t state = seed;
  for (auto& word : s_) {
    state += kGolden;
    word = splitmix64_mix(state);
  }
}

RandomStream::result_type RandomStream::next() noexcept {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

std::uint64_t RandomStream::below(std::uint64_t bound) noexcept {
  // Reject the top partial block so every residue is equally likely.
  const std::uint64_t limit = max() - max() % bound;
  std::uint64_t x;
  do {
    x = next();
  } while (x >= limit);
  return x % bound;
}

DiscreteSampler::DiscreteSampler(std::span<const double> weights) {
  if (weights.empty()) throw std::invalid_argument("DiscreteSampler: no weights");
  cumulative_.reserve(weights.size());
  double acc = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw std::invalid_argument("DiscreteSampler: negative weight");
    acc += w;
    cumulative_.push_back(acc);
  }
  if (acc <= 0.0) throw std::invalid_argument("DiscreteSampler: zero total weight");
}

std::size_t DiscreteSampler::operator()(RandomStream& rng) const {
  const double u = rng.uniform01() * cumulative_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  // Trailing zero weights share the final cumulative value; skip back to the
  // last index that actually carries mass.
  auto idx = static_cast<std::size_t>(std::min(it, cumulative_.end() - 1) - cumulative_.begin());
  while (idx > 0 && cumulative_[idx] == cumulative_[idx - 1]) --idx;
  return idx;
}

}  // namespace crowdfdb
