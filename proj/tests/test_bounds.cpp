#include <cmath>

#include "crowdfdb/bounds.hpp"
#include "crowdfdb/worker_model.hpp"
#include "doctest.h"
#include "oracles/highprec_bounds.hpp"

using namespace crowdfdb;
using oracle::HighPrec;

namespace {

double rel_err(double got, const HighPrec& want) {
  if (want == 0) return std::abs(got);
  return static_cast<double>(abs((HighPrec(got) - want) / want));
}

}  // namespace

TEST_CASE("closed form by hand") {
  // gamma = 1/4, n = 1: 1 - gamma^(1/2) = 1/2, so delta = 2 sqrt(ln 2)
  CHECK(fairness_violation_bound({1, 1, 0.25, 0.0}) == doctest::Approx(2.0 * std::sqrt(std::log(2.0))).epsilon(1e-15));
  // gamma' = 1/16, n = 1: 1 - gamma'^(1/4) = 1/2
  CHECK(accuracy_loss_bound({1, 1, 0.0625, 0.5}) == doctest::Approx(std::sqrt(std::log(2.0))).epsilon(1e-15));
}

TEST_CASE("matches the high-precision evaluation on the grid") {
  for (const auto& p : oracle::bound_grid()) {
    CAPTURE(p.n);
    CAPTURE(p.n_gold);
    CAPTURE(p.gamma);
    CAPTURE(p.beta);
    const BoundQuery q{p.n, p.n_gold, p.gamma, p.beta};
    CHECK(rel_err(fairness_violation_bound(q), oracle::hp_fairness_bound(p.n, p.n_gold, HighPrec(p.gamma))) <= 1e-12);
    CHECK(rel_err(accuracy_loss_bound(q),
                  oracle::hp_accuracy_bound(p.n, p.n_gold, HighPrec(p.gamma), HighPrec(p.beta))) <= 1e-12);
  }
}

TEST_CASE("single worker and a vanishing confidence") {
  for (double g : {0.95, 1e-12}) {
    CHECK(rel_err(fairness_violation_bound({1, 20, g, 0.0}), oracle::hp_fairness_bound(1, 20, HighPrec(g))) <= 1e-12);
  }
  // as gamma -> 0 the log term vanishes and delta -> 2 sqrt(ln 2 / (2 N_g))
  CHECK(fairness_violation_bound({1, 20, 1e-12, 0.0}) ==
        doctest::Approx(2.0 * std::sqrt(std::log(2.0) / 40.0)).epsilon(1e-5));
}

TEST_CASE("quadrupling gold halves both bounds") {
  for (int n : {1, 20, 400})
    for (int ng : {5, 20, 100}) {
      const double a = fairness_violation_bound({n, ng, 0.9, 0.01});
      const double b = fairness_violation_bound({n, 4 * ng, 0.9, 0.01});
      CHECK(a / b == doctest::Approx(2.0).epsilon(1e-14));
      const double c = accuracy_loss_bound({n, ng, 0.9, 0.01});
      const double d = accuracy_loss_bound({n, 4 * ng, 0.9, 0.01});
      CHECK(c / d == doctest::Approx(2.0).epsilon(1e-14));
    }
}

TEST_CASE("accuracy loss is zero at beta 0 and linear in beta") {
  CHECK(accuracy_loss_bound({20, 20, 0.9, 0.0}) == 0.0);
  const double one = accuracy_loss_bound({20, 20, 0.9, 0.1});
  for (double b : {0.05, 0.2, 0.7}) {
    CHECK(accuracy_loss_bound({20, 20, 0.9, b}) == doctest::Approx(one * b / 0.1).epsilon(1e-13));
  }
}

TEST_CASE("monotonicity") {
  double prev = 0.0;
  for (int n : {1, 2, 5, 20, 100, 400, 5000}) {
    const double d = fairness_violation_bound({n, 20, 0.9, 0.0});
    CHECK(d > prev);
    prev = d;
  }
  prev = 0.0;
  for (double g : {0.1, 0.5, 0.9, 0.99, 0.999999}) {
    const double d = fairness_violation_bound({20, 20, g, 0.0});
    CHECK(d > prev);
    prev = d;
  }
  prev = 1e9;
  for (int ng : {1, 2, 5, 20, 100, 10000}) {
    const double d = fairness_violation_bound({20, ng, 0.9, 0.0});
    CHECK(d < prev);
    prev = d;
  }
}

TEST_CASE("invalid queries") {
  CHECK_THROWS_AS(fairness_violation_bound({0, 20, 0.9, 0.0}), ValidationError);
  CHECK_THROWS_AS(fairness_violation_bound({20, 0, 0.9, 0.0}), ValidationError);
  CHECK_THROWS_AS(fairness_violation_bound({20, 20, 1.0, 0.0}), ValidationError);
  CHECK_THROWS_AS(fairness_violation_bound({20, 20, 0.0, 0.0}), ValidationError);
  CHECK_THROWS_AS(accuracy_loss_bound({20, 20, 0.9, 1.0}), ValidationError);
  CHECK(std::isfinite(fairness_violation_bound({400, 20, 1.0 - 1e-15, 0.0})));
}
