#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "crowdfdb/estimation.hpp"
#include "crowdfdb/worker_model.hpp"

namespace crowdfdb {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  double draw(RandomStream& rng) const noexcept { return lo == hi ? lo : rng.uniform(lo, hi); }
};

/// Each diagonal entry A_z[y,y] drawn independently from its own interval.
struct IntervalBiasModel {
  /// Indexed [z][y].
  std::array<std::array<Range, 2>, 2> diagonal{{{Range{0.6, 0.9}, Range{0.6, 0.9}},
                                                {Range{0.6, 0.9}, Range{0.6, 0.9}}}};
};

/// Two clusters of workers. Every worker draws a base FPR and FNR; the
/// cluster adds a between-group offset (rate for z=1 minus rate for z=0),
/// split symmetrically around the base. Biased workers follow the majority
/// direction with probability `majority_share`, otherwise both offsets flip.
struct MixtureBiasModel {
  Range base_fpr{0.10, 0.40};
  Range base_fnr{0.10, 0.40};
  double biased_fraction = 0.6;
  double majority_share = 0.75;
  Range biased_fpr_offset{0.15, 0.30};
  Range biased_fnr_offset{-0.30, -0.15};
  Range unbiased_fpr_offset{0.0, 0.0};
  Range unbiased_fnr_offset{0.0, 0.0};
};

enum class BiasModelKind { Interval, Mixture };

struct CostModel {
  enum class Kind { Uniform, AccuracyLinked };
  Kind kind = Kind::Uniform;
  /// Uniform fee.
  double fee = 1.0;
  /// AccuracyLinked: high_fee with probability = average diagonal accuracy.
  double low_fee = 1.0;
  double high_fee = 3.0;
};

struct PopulationSpec {
  std::size_t n_workers = 400;
  BiasModelKind bias_model = BiasModelKind::Mixture;
  IntervalBiasModel interval;
  MixtureBiasModel mixture;
  CostModel cost;
  std::uint64_t seed = 1;

  void validate() const;
};

struct TaskPoolSpec {
  std::int64_t n_z0 = 2454;
  std::int64_t n_z1 = 3696;
  double base_rate_z0 = 0.3936;
  double base_rate_z1 = 0.5143;
  std::uint64_t seed = 1;

  void validate() const;
};

struct TaskRecord {
  std::string id;
  int z = 0;
  int y = 0;

  friend bool operator==(const TaskRecord&, const TaskRecord&) = default;
};

/// Worker i uses stream (seed, "worker", i), so growing a population keeps
/// the earlier workers unchanged.
std::vector<WorkerProfile> generate_population(const PopulationSpec& spec);

/// Labels drawn per group base rate, then shuffled; ids follow generation
/// order (group z=0 first).
std::vector<TaskRecord> generate_task_pool(const TaskPoolSpec& spec);

/// Pool composition as priors: P(Z=1) and per-group positive rates. A group
/// with no tasks gets base rate 0.5.
Priors priors_of(std::span<const TaskRecord> tasks);

/// Mirrored pairs of workers. In each pair one worker's FPR is higher on
/// z=0 by `gap`, the other's is higher on z=1 by `gap`; FNRs are shared and
/// group-independent. Any policy that weights each pair symmetrically has
/// zero FPR gap.
std::vector<WorkerProfile> make_binding_fairness_instance(double gap, std::size_t n_pairs,
                                                          std::uint64_t seed);

/// Worker files: header id,cost,a0_00,a0_01,a0_10,a0_11,a1_00,a1_01,a1_10,a1_11.
void save_workers(const std::filesystem::path& path, std::span<const WorkerProfile> workers);
std::vector<WorkerProfile> load_workers(const std::filesystem::path& path);

/// Task files: header id,z,y.
void save_tasks(const std::filesystem::path& path, std::span<const TaskRecord> tasks);
std::vector<TaskRecord> load_tasks(const std::filesystem::path& path);

/// Gold tally files: header id followed by attempted/correct pairs for the
/// types (0,0), (0,1), (1,0), (1,1) in that order:
/// id,n_z0_y0,k_z0_y0,n_z0_y1,k_z0_y1,n_z1_y0,k_z1_y0,n_z1_y1,k_z1_y1.
struct WorkerTally {
  std::string id;
  GoldResponseTally tally;
};
void save_tallies(const std::filesystem::path& path, std::span<const WorkerTally> tallies);
std::vector<WorkerTally> load_tallies(const std::filesystem::path& path);

/// Recorded gold answers: header worker_id,task_id,answer,z,y. Tallies are
/// returned in order of each worker's first appearance.
std::vector<WorkerTally> load_gold_responses(const std::filesystem::path& path);

}  // namespace crowdfdb
