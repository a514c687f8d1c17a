#include "crowdfdb/estimation.hpp"

#include <string>

namespace crowdfdb {

void GoldPhaseConfig::validate() const {
  if (n_gold_per_type < 1) {
    throw ValidationError("gold tasks per type must be >= 1, got " + std::to_string(n_gold_per_type));
  }
}

void GoldResponseTally::validate() const {
  for (int z = 0; z < 2; ++z) {
    for (int y = 0; y < 2; ++y) {
      if (correct[z][y] < 0 || correct[z][y] > attempted[z][y]) {
        throw ValidationError("gold tally (z=" + std::to_string(z) + ", y=" + std::to_string(y) +
                              "): need 0 <= correct <= attempted");
      }
    }
  }
}

MatrixPair estimate_matrices(const GoldResponseTally& tally, bool add_one_smoothing) {
  tally.validate();
  std::array<std::array<double, 2>, 2> diag{};
  for (int z = 0; z < 2; ++z) {
    for (int y = 0; y < 2; ++y) {
      std::int64_t n = tally.attempted[z][y];
      std::int64_t k = tally.correct[z][y];
      if (add_one_smoothing) {
        n += 2;
        k += 1;
      }
      if (n == 0) {
        throw EstimationError("no gold answers for type (z=" + std::to_string(z) +
                              ", y=" + std::to_string(y) + ")");
      }
      diag[z][y] = static_cast<double>(k) / static_cast<double>(n);
    }
  }
  return {AccuracyMatrix::from_diagonal(diag[0][0], diag[0][1]),
          AccuracyMatrix::from_diagonal(diag[1][0], diag[1][1])};
}

GoldResponseTally simulate_gold_tally(const WorkerProfile& worker, int n_gold_per_type,
                                      RandomStream& rng) {
  GoldResponseTally tally;
  for (int z = 0; z < 2; ++z) {
    for (int y = 0; y < 2; ++y) {
      tally.attempted[z][y] = n_gold_per_type;
      std::int64_t k = 0;
      for (int t = 0; t < n_gold_per_type; ++t) k += sample_label(worker, z, y, rng) == y;
      tally.correct[z][y] = k;
    }
  }
  return tally;
}

std::vector<GoldResponseTally> run_gold_tallies(std::span<const WorkerProfile> workers,
                                                const GoldPhaseConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (workers.empty()) throw ValidationError("gold phase needs at least one worker");
  std::vector<GoldResponseTally> out;
  out.reserve(workers.size());
  for (std::size_t i = 0; i < workers.size(); ++i) {
    RandomStream rng(seed, "gold", i);
    out.push_back(simulate_gold_tally(workers[i], cfg.n_gold_per_type, rng));
  }
  return out;
}

std::vector<MatrixPair> estimate_all(std::span<const GoldResponseTally> tallies,
                                     bool add_one_smoothing) {
  std::vector<MatrixPair> out;
  out.reserve(tallies.size());
  for (const auto& t : tallies) out.push_back(estimate_matrices(t, add_one_smoothing));
  return out;
}

std::vector<MatrixPair> run_gold_phase(std::span<const WorkerProfile> workers,
                                       const GoldPhaseConfig& cfg, std::uint64_t seed) {
  const auto tallies = run_gold_tallies(workers, cfg, seed);
  return estimate_all(tallies, cfg.add_one_smoothing);
}

}  // namespace crowdfdb
