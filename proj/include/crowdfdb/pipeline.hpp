#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "crowdfdb/datagen.hpp"
#include "crowdfdb/estimation.hpp"
#include "crowdfdb/lp.hpp"

namespace crowdfdb {

struct PipelineDiagnostics {
  /// Confidence used for delta.
  double gamma = 0.9;
  /// Fairness-violation bound at `gamma`.
  double delta = 0.0;
  /// Expected accuracy of the policy under the estimated matrices.
  double predicted_accuracy = 0.0;
  /// Rows within Tolerances::binding of equality at the optimum.
  std::vector<std::string> binding_constraints;
};

struct PipelineResult {
  std::vector<MatrixPair> estimates;
  LpProblem lp;
  LpSolution solution;
  /// Equals solution.policy when the LP is optimal, empty otherwise.
  Policy policy;
  PipelineDiagnostics diagnostics;

  bool optimal() const noexcept { return solution.optimal(); }
};

/// Gold phase against the workers' true matrices, estimation, LP.
PipelineResult build_policy(std::span<const WorkerProfile> workers, const GoldPhaseConfig& gold,
                            const Priors& priors, const ConstraintSet& cs, std::uint64_t seed,
                            double gamma = 0.9);

/// Same, from recorded gold tallies. delta uses the smallest attempted count.
PipelineResult build_policy(std::span<const WorkerTally> tallies, std::span<const double> costs,
                            bool add_one_smoothing, const Priors& priors, const ConstraintSet& cs,
                            double gamma = 0.9);

/// LP and diagnostics for already-estimated matrices.
PipelineResult policy_from_estimates(std::vector<MatrixPair> estimates, std::span<const double> costs,
                                     int n_gold_per_type, const Priors& priors,
                                     const ConstraintSet& cs, double gamma = 0.9);

}  // namespace crowdfdb
