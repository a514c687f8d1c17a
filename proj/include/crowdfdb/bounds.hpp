#pragma once

namespace crowdfdb {

/// Inputs of the two estimation-error guarantees.
struct BoundQuery {
  int n_workers = 1;
  int n_gold_per_type = 20;
  /// gamma for the fairness bound, gamma' for the accuracy-loss bound.
  double confidence = 0.9;
  /// Only used by accuracy_loss_bound.
  double beta = 0.0;

  void validate() const;
};

/// With probability at least gamma, the true fairness gap of the policy
/// solved on estimates exceeds alpha by at most
///   2 sqrt((-ln(1 - gamma^(1/(2n))) + ln 2) / (2 N_g)).
double fairness_violation_bound(const BoundQuery& q);

/// With probability at least gamma', the expected-accuracy loss from
/// optimizing on estimates is at most
///   2 n beta sqrt((-ln(1 - gamma'^(1/(4n))) + ln 2) / (2 N_g)).
double accuracy_loss_bound(const BoundQuery& q);

}  // namespace crowdfdb
