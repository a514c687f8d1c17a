#pragma once

namespace crowdfdb {

/// Numeric tolerances shared by every module.
struct Tolerances {
  /// Row sums and entry ranges of accuracy matrices.
  static constexpr double structural = 1e-12;
  /// Sum of policy weights.
  static constexpr double policy_sum = 1e-9;
  /// Primal feasibility of LP rows.
  static constexpr double lp_feasibility = 1e-7;
  /// Reduced-cost threshold for simplex optimality.
  static constexpr double lp_optimality = 1e-9;
  /// Smallest pivot magnitude accepted by the ratio test.
  static constexpr double lp_pivot = 1e-11;
  /// A row is reported as binding when its slack is below this.
  static constexpr double binding = 1e-6;
};

}  // namespace crowdfdb
