#include <cmath>

#include "crowdfdb/estimation.hpp"
#include "doctest.h"

using namespace crowdfdb;

namespace {

GoldResponseTally tally_of(std::int64_t n, std::array<std::array<std::int64_t, 2>, 2> k) {
  GoldResponseTally t;
  for (auto& row : t.attempted) row = {n, n};
  t.correct = k;
  return t;
}

WorkerProfile sample_worker() {
  return {"w", AccuracyMatrix::from_diagonal(0.85, 0.65), AccuracyMatrix::from_diagonal(0.55, 0.95), 1.0};
}

}  // namespace

TEST_CASE("estimate from counts") {
  const auto m = estimate_matrices(tally_of(20, {{{15, 20}, {0, 10}}}));
  CHECK(m.z0(0, 0) == doctest::Approx(0.75));
  CHECK(m.z0(0, 1) == doctest::Approx(0.25));
  CHECK(m.z0(1, 1) == 1.0);
  CHECK(m.z0(1, 0) == 0.0);
  CHECK(m.z1(0, 0) == 0.0);
  CHECK(m.z1(1, 1) == doctest::Approx(0.5));
}

TEST_CASE("all-correct tally gives identity") {
  const auto m = estimate_matrices(tally_of(20, {{{20, 20}, {20, 20}}}));
  CHECK(m.z0 == AccuracyMatrix());
  CHECK(m.z1 == AccuracyMatrix());
}

TEST_CASE("smoothing keeps estimates interior") {
  const auto m = estimate_matrices(tally_of(20, {{{20, 0}, {15, 10}}}), true);
  CHECK(m.z0(0, 0) == doctest::Approx(21.0 / 22.0));
  CHECK(m.z0(1, 1) == doctest::Approx(1.0 / 22.0));
  CHECK(m.z1(0, 0) == doctest::Approx(16.0 / 22.0));
}

TEST_CASE("invalid tallies") {
  auto t = tally_of(20, {{{15, 20}, {0, 10}}});
  t.attempted[1][0] = 0;
  t.correct[1][0] = 0;
  CHECK_THROWS_AS(estimate_matrices(t), EstimationError);
  auto u = tally_of(20, {{{21, 20}, {0, 10}}});
  CHECK_THROWS(estimate_matrices(u));
  auto v = tally_of(20, {{{-1, 20}, {0, 10}}});
  CHECK_THROWS(estimate_matrices(v));
  CHECK_THROWS_AS((GoldPhaseConfig{0, false}.validate()), ValidationError);
}

TEST_CASE("simulated tallies") {
  const auto w = sample_worker();
  RandomStream rng(9);
  const auto t = simulate_gold_tally(w, 30, rng);
  for (int z = 0; z < 2; ++z)
    for (int y = 0; y < 2; ++y) {
      CHECK(t.attempted[z][y] == 30);
      CHECK(t.correct[z][y] >= 0);
      CHECK(t.correct[z][y] <= 30);
    }
}

TEST_CASE("large gold phase converges") {
  const std::vector<WorkerProfile> ws = {sample_worker()};
  const auto est = run_gold_phase(ws, {10000, false}, 3);
  for (int z = 0; z < 2; ++z)
    for (int y = 0; y < 2; ++y) CHECK(std::abs(est[0][z](y, y) - ws[0].matrix(z)(y, y)) <= 0.02);
}

TEST_CASE("gold phase is deterministic and per-worker independent") {
  std::vector<WorkerProfile> ws(5, sample_worker());
  const auto a = run_gold_tallies(ws, {20, false}, 77);
  const auto b = run_gold_tallies(ws, {20, false}, 77);
  CHECK(a == b);
  const auto c = run_gold_tallies(std::span(ws).first(3), {20, false}, 77);
  for (std::size_t i = 0; i < 3; ++i) CHECK(c[i] == a[i]);
  const auto d = run_gold_tallies(ws, {20, false}, 78);
  CHECK(d != a);
}

TEST_CASE("property: estimates are row-stochastic") {
  RandomStream gen(4);
  for (int trial = 0; trial < 50; ++trial) {
    const WorkerProfile w{"w", AccuracyMatrix::from_diagonal(gen.uniform01(), gen.uniform01()),
                          AccuracyMatrix::from_diagonal(gen.uniform01(), gen.uniform01()), 1.0};
    const std::vector<WorkerProfile> ws = {w};
    for (bool smooth : {false, true}) {
      const auto est = run_gold_phase(ws, {1 + static_cast<int>(gen.below(40)), smooth}, trial);
      for (int z = 0; z < 2; ++z)
        for (int y = 0; y < 2; ++y) {
          CHECK(est[0][z](y, 0) + est[0][z](y, 1) == doctest::Approx(1.0).epsilon(1e-12));
          CHECK(est[0][z](y, y) >= 0.0);
          CHECK(est[0][z](y, y) <= 1.0);
          if (smooth) {
            CHECK(est[0][z](y, y) > 0.0);
            CHECK(est[0][z](y, y) < 1.0);
          }
        }
    }
  }
}

TEST_CASE("property: estimator is unbiased") {
  const std::vector<WorkerProfile> ws = {sample_worker()};
  const int phases = 1000, ng = 20;
  std::array<std::array<double, 2>, 2> sum{};
  for (int r = 0; r < phases; ++r) {
    const auto est = run_gold_phase(ws, {ng, false}, 1000 + r);
    for (int z = 0; z < 2; ++z)
      for (int y = 0; y < 2; ++y) sum[z][y] += est[0][z](y, y);
  }
  for (int z = 0; z < 2; ++z)
    for (int y = 0; y < 2; ++y) {
      const double p = ws[0].matrix(z)(y, y);
      CHECK(std::abs(sum[z][y] / phases - p) <= 3.0 * std::sqrt(p * (1 - p) / (phases * ng)));
    }
}
