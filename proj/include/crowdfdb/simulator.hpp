#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crowdfdb/datagen.hpp"
#include "crowdfdb/estimation.hpp"
#include "crowdfdb/lp.hpp"

namespace crowdfdb {

enum class Method { CrowdFDB, Random, Greedy };

std::string to_string(Method m);
Method parse_method(std::string_view text);

enum class SweepAxis { None, Gold, Alpha };

std::string to_string(SweepAxis a);
SweepAxis parse_sweep_axis(std::string_view text);

struct ExperimentConfig {
  std::string name = "experiment";
  /// When set, workers are loaded from this file instead of generated.
  std::optional<std::filesystem::path> workers_file;
  PopulationSpec population;
  /// When set, tasks are loaded from this file instead of generated.
  std::optional<std::filesystem::path> tasks_file;
  TaskPoolSpec pool;
  GoldPhaseConfig gold;
  ConstraintSet constraints;
  std::vector<Method> methods{Method::CrowdFDB, Method::Random, Method::Greedy};
  int repetitions = 100;
  std::uint64_t seed = 1;
  double gamma = 0.9;
  SweepAxis sweep = SweepAxis::None;
  std::vector<double> sweep_values;

  void validate() const;
  /// Copy with one sweep value applied.
  ExperimentConfig at_sweep_value(double v) const;
};

/// One labelled task.
struct LabelRecord {
  int z = 0;
  int y = 0;
  int yhat = 0;
};

/// Empirical error rates of a batch of labels. Rates whose denominator is
/// zero are absent.
struct LabelScore {
  /// Tasks per (z, y) cell.
  std::array<std::array<std::int64_t, 2>, 2> count{};
  /// Mislabelled tasks per (z, y) cell: false positives for y=0, false
  /// negatives for y=1.
  std::array<std::array<std::int64_t, 2>, 2> errors{};
  std::array<std::optional<double>, 2> fpr;
  std::array<std::optional<double>, 2> fnr;
  std::optional<double> fpr_gap;
  std::optional<double> fnr_gap;
  std::optional<double> accuracy;

  std::int64_t total() const noexcept;
  /// Recompute rates from count/errors.
  void finalize();
};

LabelScore score_labels(std::span<const LabelRecord> records);

enum class RunStatus { Ok, Infeasible };

std::string to_string(RunStatus s);

/// Outcome of a single repetition.
struct MetricsReport {
  Method method = Method::CrowdFDB;
  int rep = 0;
  RunStatus status = RunStatus::Ok;
  /// LP status for CrowdFDB; empty for the baselines.
  std::optional<LpStatus> lp_status;
  LabelScore score;
  /// Mean fee paid per label.
  std::optional<double> mean_cost;
  /// Entropy (nats) of the selection distribution: the policy for CrowdFDB
  /// and Random, the realized task shares for Greedy.
  std::optional<double> entropy;
  /// Tasks given to each worker.
  std::vector<std::int64_t> assignments;
  /// Selection probabilities (empty for Greedy or failed runs).
  std::vector<double> policy;
  /// Estimates used by this repetition.
  std::vector<MatrixPair> estimates;
};

/// Mean and standard error over the runs where a metric is present.
struct Stat {
  std::size_t n = 0;
  double mean = 0.0;
  double se = 0.0;
};

Stat summarize(std::span<const double> values);

struct Aggregate {
  Method method = Method::CrowdFDB;
  double sweep_value = 0.0;
  std::size_t n_runs = 0;
  std::size_t n_ok = 0;
  std::size_t n_infeasible = 0;
  Stat fpr_gap, fnr_gap, accuracy, mean_cost, entropy;
  /// Counts summed over successful runs, and the gaps they imply.
  LabelScore pooled;
};

Aggregate aggregate(Method method, double sweep_value, std::span<const MetricsReport> runs);

struct MethodResult {
  Method method = Method::CrowdFDB;
  std::vector<MetricsReport> runs;
  Aggregate summary;
};

struct SweepPointResult {
  double value = 0.0;
  std::vector<MethodResult> methods;

  const MethodResult& of(Method m) const;
};

/// Population, pool and priors resolved once; repetitions reuse them.
class Experiment {
 public:
  explicit Experiment(ExperimentConfig cfg);
  Experiment(ExperimentConfig cfg, std::vector<WorkerProfile> workers, std::vector<TaskRecord> tasks);

  const ExperimentConfig& config() const noexcept { return cfg_; }
  std::span<const WorkerProfile> workers() const noexcept { return workers_; }
  std::span<const TaskRecord> tasks() const noexcept { return tasks_; }
  const Priors& priors() const noexcept { return priors_; }

  /// One repetition of `method` at the config's current parameters. All
  /// randomness comes from streams derived from (seed, rep).
  MetricsReport run_once(Method method, int rep) const;
  MetricsReport run_once(const ExperimentConfig& point, Method method, int rep) const;

  /// Every sweep point (or the single base point) x method x repetition.
  /// Repetitions run on `threads` workers; results do not depend on it.
  std::vector<SweepPointResult> run(unsigned threads = 0) const;

 private:
  ExperimentConfig cfg_;
  std::vector<WorkerProfile> workers_;
  std::vector<TaskRecord> tasks_;
  Priors priors_;
};

std::vector<SweepPointResult> run_experiment(const ExperimentConfig& cfg, unsigned threads = 0);

/// Worker count for parallel repetitions: CROWDFDB_THREADS if set, else the
/// hardware concurrency.
unsigned default_thread_count();

/// Long format: one row per (sweep value, method, repetition) plus mean and
/// se rows per (sweep value, method).
void write_results_csv(std::ostream& out, const ExperimentConfig& cfg,
                       std::span<const SweepPointResult> results);

/// Wide format: one row per sweep value, mean and se columns per method.
void write_summary_csv(std::ostream& out, const ExperimentConfig& cfg,
                       std::span<const SweepPointResult> results);

}  // namespace crowdfdb
