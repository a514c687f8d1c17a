#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "crowdfdb/worker_model.hpp"

namespace crowdfdb {

/// Every worker equally likely.
Policy random_policy(std::size_t n);

/// Task counts of the density-greedy baseline.
struct GreedyPlan {
  /// counts[i] tasks go to worker i.
  std::vector<std::int64_t> counts;
  /// Workers by descending density, ties by index.
  std::vector<std::size_t> order;
  std::int64_t cap = 0;

  std::int64_t total() const noexcept;
  /// Worker for each of the total() task slots, filling workers in order.
  std::vector<std::size_t> assignment_sequence() const;
};

/// Thrown when n * floor(beta * T) < T.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Density = estimated expected accuracy / cost (a zero cost ranks first).
/// Each worker, in density order, takes up to floor(beta * T) tasks until
/// all T are placed.
GreedyPlan greedy_plan(std::span<const MatrixPair> estimates, std::span<const double> costs,
                       const Priors& priors, double beta, std::int64_t total_tasks);

}  // namespace crowdfdb
