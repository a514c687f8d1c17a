#include "crowdfdb/pipeline.hpp"

#include <algorithm>
#include <limits>

#include "crowdfdb/bounds.hpp"
#include "crowdfdb/tolerances.hpp"

namespace crowdfdb {

PipelineResult policy_from_estimates(std::vector<MatrixPair> estimates, std::span<const double> costs,
                                     int n_gold_per_type, const Priors& priors,
                                     const ConstraintSet& cs, double gamma) {
  LpProblem lp = build_lp(estimates, costs, priors, cs);
  LpSolution solution;
  try {
    solution = solve_lp(lp);
  } catch (const SolverError& e) {
    throw SolverError(std::string("policy LP over ") + std::to_string(estimates.size()) +
                      " workers: " + e.what());
  }

  PipelineDiagnostics diag;
  diag.gamma = gamma;
  diag.delta = fairness_violation_bound(
      {static_cast<int>(estimates.size()), n_gold_per_type, gamma, cs.beta});
  Policy policy;
  if (solution.optimal()) {
    policy = solution.policy;
    diag.predicted_accuracy = solution.objective_value;
    diag.binding_constraints = binding_rows(lp, policy.weights(), Tolerances::binding);
  }
  return {std::move(estimates), std::move(lp), std::move(solution), std::move(policy), std::move(diag)};
}

PipelineResult build_policy(std::span<const WorkerProfile> workers, const GoldPhaseConfig& gold,
                            const Priors& priors, const ConstraintSet& cs, std::uint64_t seed,
                            double gamma) {
  for (const auto& w : workers) w.validate();
  auto estimates = run_gold_phase(workers, gold, seed);
  const auto costs = costs_of(workers);
  return policy_from_estimates(std::move(estimates), costs, gold.n_gold_per_type, priors, cs, gamma);
}

PipelineResult build_policy(std::span<const WorkerTally> tallies, std::span<const double> costs,
                            bool add_one_smoothing, const Priors& priors, const ConstraintSet& cs,
                            double gamma) {
  if (tallies.empty()) throw ValidationError("no gold tallies");
  std::vector<MatrixPair> estimates;
  estimates.reserve(tallies.size());
  std::int64_t min_attempted = std::numeric_limits<std::int64_t>::max();
  for (const auto& wt : tallies) {
    try {
      estimates.push_back(estimate_matrices(wt.tally, add_one_smoothing));
    } catch (const std::exception& e) {
      throw EstimationError("worker '" + wt.id + "': " + e.what());
    }
    for (const auto& row : wt.tally.attempted)
      for (auto a : row) min_attempted = std::min(min_attempted, a);
  }
  return policy_from_estimates(std::move(estimates), costs, static_cast<int>(std::max<std::int64_t>(1, min_attempted)),
                               priors, cs, gamma);
}

}  // namespace crowdfdb
