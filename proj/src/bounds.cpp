#include "crowdfdb/bounds.hpp"

#include <cmath>
#include <numbers>

#include "crowdfdb/worker_model.hpp"

namespace crowdfdb {

namespace {

// sqrt((-ln(1 - g^(1/k)) + ln 2) / (2 N_g)). 1 - g^(1/k) is evaluated as
// -expm1(ln(g) / k), which keeps full precision when g^(1/k) is near 1.
double hoeffding_radius(double confidence, double root, int n_gold) {
  const double tail = -std::expm1(std::log(confidence) / root);
  return std::sqrt((-std::log(tail) + std::numbers::ln2) / (2.0 * n_gold));
}

}  // namespace

void BoundQuery::validate() const {
  if (n_workers < 1) throw ValidationError("bound query: n must be >= 1");
  if (n_gold_per_type < 1) throw ValidationError("bound query: N_g must be >= 1");
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw ValidationError("bound query: confidence must lie in (0, 1)");
  }
  if (!(beta >= 0.0 && beta < 1.0)) throw ValidationError("bound query: beta must lie in [0, 1)");
}

double fairness_violation_bound(const BoundQuery& q) {
  q.validate();
  return 2.0 * hoeffding_radius(q.confidence, 2.0 * q.n_workers, q.n_gold_per_type);
}

double accuracy_loss_bound(const BoundQuery& q) {
  q.validate();
  return 2.0 * q.n_workers * q.beta *
         hoeffding_radius(q.confidence, 4.0 * q.n_workers, q.n_gold_per_type);
}

}  // namespace crowdfdb
