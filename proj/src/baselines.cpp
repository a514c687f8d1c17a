#include "crowdfdb/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace crowdfdb {

Policy random_policy(std::size_t n) {
  if (n == 0) throw ValidationError("random policy needs at least one worker");
  return Policy(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

std::int64_t GreedyPlan::total() const noexcept {
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

std::vector<std::size_t> GreedyPlan::assignment_sequence() const {
  std::vector<std::size_t> seq;
  seq.reserve(static_cast<std::size_t>(total()));
  for (std::size_t w : order) seq.insert(seq.end(), static_cast<std::size_t>(counts[w]), w);
  return seq;
}

GreedyPlan greedy_plan(std::span<const MatrixPair> estimates, std::span<const double> costs,
                       const Priors& priors, double beta, std::int64_t total_tasks) {
  const std::size_t n = estimates.size();
  if (n == 0) throw ValidationError("greedy plan needs at least one worker");
  if (costs.size() != n) throw DimensionError("greedy plan: cost count differs from worker count");
  if (total_tasks < 1) throw ValidationError("greedy plan needs T >= 1");
  if (!(beta >= 0.0)) throw ValidationError("greedy plan: beta must be >= 0");
  priors.validate();

  GreedyPlan plan;
  plan.cap = static_cast<std::int64_t>(std::floor(beta * static_cast<double>(total_tasks)));
  if (plan.cap * static_cast<std::int64_t>(n) < total_tasks) {
    throw CapacityError("greedy plan infeasible: " + std::to_string(n) + " workers x cap " +
                        std::to_string(plan.cap) + " < " + std::to_string(total_tasks) + " tasks");
  }

  std::vector<double> density(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double acc = single_worker_accuracy(estimates[i], priors);
    density[i] = costs[i] > 0.0 ? acc / costs[i] : std::numeric_limits<double>::infinity();
  }
  plan.order.resize(n);
  std::iota(plan.order.begin(), plan.order.end(), std::size_t{0});
  std::stable_sort(plan.order.begin(), plan.order.end(),
                   [&](std::size_t a, std::size_t b) { return density[a] > density[b]; });

  plan.counts.assign(n, 0);
  std::int64_t remaining = total_tasks;
  for (std::size_t w : plan.order) {
    if (remaining == 0) break;
    const std::int64_t take = std::min(plan.cap, remaining);
    plan.counts[w] = take;
    remaining -= take;
  }
  return plan;
}

}  // namespace crowdfdb
