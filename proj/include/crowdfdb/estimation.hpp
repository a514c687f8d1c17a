#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "crowdfdb/worker_model.hpp"

namespace crowdfdb {

/// Thrown when a tally cannot produce an estimate.
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GoldPhaseConfig {
  /// Gold tasks per (z, y) type per worker.
  int n_gold_per_type = 20;
  /// Add one correct and one incorrect pseudo-answer per type so that
  /// estimates stay strictly inside (0, 1). Off by default.
  bool add_one_smoothing = false;

  void validate() const;
};

/// Attempted/correct gold answers for one worker, indexed [z][y].
struct GoldResponseTally {
  std::array<std::array<std::int64_t, 2>, 2> attempted{};
  std::array<std::array<std::int64_t, 2>, 2> correct{};

  void validate() const;
  friend bool operator==(const GoldResponseTally&, const GoldResponseTally&) = default;
};

/// Estimate diag(z, y) = correct / attempted, off-diagonal = 1 - diagonal.
MatrixPair estimate_matrices(const GoldResponseTally& tally, bool add_one_smoothing = false);

/// Simulated gold answers of one worker against its true matrices.
GoldResponseTally simulate_gold_tally(const WorkerProfile& worker, int n_gold_per_type,
                                      RandomStream& rng);

/// Runs the gold phase for every worker. Worker i draws from the stream
/// derive_seed(seed, "gold", i), so the output does not depend on how the
/// per-worker work is scheduled.
std::vector<GoldResponseTally> run_gold_tallies(std::span<const WorkerProfile> workers,
                                                const GoldPhaseConfig& cfg, std::uint64_t seed);

std::vector<MatrixPair> run_gold_phase(std::span<const WorkerProfile> workers,
                                       const GoldPhaseConfig& cfg, std::uint64_t seed);

std::vector<MatrixPair> estimate_all(std::span<const GoldResponseTally> tallies,
                                     bool add_one_smoothing = false);

}  // namespace crowdfdb
