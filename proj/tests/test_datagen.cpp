#include <cmath>
#include <filesystem>
#include <fstream>

#include "crowdfdb/csv.hpp"
#include "crowdfdb/datagen.hpp"
#include "crowdfdb/lp.hpp"
#include "doctest.h"
#include "oracles/lp_oracles.hpp"

using namespace crowdfdb;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "crowdfdb_test_datagen";
  fs::create_directories(dir);
  return dir / name;
}

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string error_of(auto&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("uniform fees") {
  PopulationSpec spec;
  spec.n_workers = 50;
  spec.cost.kind = CostModel::Kind::Uniform;
  spec.cost.fee = 1.0;
  for (const auto& w : generate_population(spec)) CHECK(w.cost == 1.0);
}

TEST_CASE("accuracy-linked fees") {
  PopulationSpec spec;
  spec.n_workers = 10000;
  spec.bias_model = BiasModelKind::Interval;
  for (auto& row : spec.interval.diagonal) row = {Range{0.5, 0.9}, Range{0.5, 0.9}};
  spec.cost = {CostModel::Kind::AccuracyLinked, 1.0, 1.0, 3.0};
  const auto ws = generate_population(spec);
  double mean_acc = 0.0, high = 0.0;
  for (const auto& w : ws) {
    CHECK((w.cost == 1.0 || w.cost == 3.0));
    mean_acc += w.average_accuracy() / ws.size();
    high += (w.cost == 3.0) / static_cast<double>(ws.size());
  }
  CHECK(std::abs(mean_acc - 0.7) < 0.01);
  CHECK(std::abs(high - 0.7) <= 0.02);

  // a perfect worker always pays the high fee
  for (auto& row : spec.interval.diagonal) row = {Range{1.0, 1.0}, Range{1.0, 1.0}};
  spec.n_workers = 100;
  for (const auto& w : generate_population(spec)) CHECK(w.cost == 3.0);
}

TEST_CASE("populations are valid, deterministic and prefix-stable") {
  for (auto kind : {BiasModelKind::Interval, BiasModelKind::Mixture}) {
    PopulationSpec spec;
    spec.n_workers = 200;
    spec.bias_model = kind;
    spec.seed = 12;
    const auto a = generate_population(spec);
    CHECK(a == generate_population(spec));
    for (const auto& w : a) CHECK_NOTHROW(w.validate());
    spec.n_workers = 50;
    const auto b = generate_population(spec);
    for (std::size_t i = 0; i < b.size(); ++i) CHECK(b[i] == a[i]);
    spec.seed = 13;
    CHECK(generate_population(spec) != b);
  }
}

TEST_CASE("mixture model produces a majority bias direction") {
  PopulationSpec spec;
  spec.n_workers = 2000;
  const auto ws = generate_population(spec);
  int biased_up = 0, biased_down = 0, flat = 0;
  for (const auto& w : ws) {
    const double d = w.matrix_z1.false_positive_rate() - w.matrix_z0.false_positive_rate();
    if (d > 0.1) ++biased_up;
    else if (d < -0.1) ++biased_down;
    else if (std::abs(d) < 1e-12) ++flat;
  }
  // 60% biased, three quarters of them in the majority direction
  CHECK(std::abs(biased_up / 2000.0 - 0.45) < 0.04);
  CHECK(std::abs(biased_down / 2000.0 - 0.15) < 0.03);
  CHECK(std::abs(flat / 2000.0 - 0.40) < 0.04);
}

TEST_CASE("population spec validation") {
  PopulationSpec spec;
  spec.n_workers = 0;
  CHECK_THROWS_AS(spec.validate(), ValidationError);
  spec.n_workers = 10;
  spec.cost.high_fee = -1.0;
  spec.cost.kind = CostModel::Kind::AccuracyLinked;
  CHECK_THROWS_AS(spec.validate(), ValidationError);
  PopulationSpec bad_range;
  bad_range.mixture.base_fpr = {0.5, 0.2};
  CHECK_THROWS_AS(bad_range.validate(), ValidationError);
  PopulationSpec bad_prob;
  bad_prob.mixture.majority_share = 1.5;
  CHECK_THROWS_AS(bad_prob.validate(), ValidationError);
}

TEST_CASE("default task pool") {
  const auto tasks = generate_task_pool({});
  CHECK(tasks.size() == 6150);
  std::int64_t z1 = 0, pos1 = 0, pos0 = 0;
  for (const auto& t : tasks) {
    z1 += t.z;
    if (t.y == 1) ++(t.z ? pos1 : pos0);
  }
  CHECK(z1 == 3696);
  CHECK(std::abs(pos1 / 3696.0 - 0.5143) <= 0.025);
  CHECK(std::abs(pos0 / 2454.0 - 0.3936) <= 0.025);
  const auto pri = priors_of(tasks);
  CHECK(pri.p_z1 == doctest::Approx(3696.0 / 6150.0));
  CHECK(pri.p_y1_given_z1 == doctest::Approx(pos1 / 3696.0));
  std::vector<bool> seen(tasks.size(), false);
  for (const auto& t : tasks) {
    const auto k = std::stoul(t.id.substr(1));
    REQUIRE(k < seen.size());
    CHECK_FALSE(seen[k]);
    seen[k] = true;
  }
  CHECK(tasks == generate_task_pool({}));
}

TEST_CASE("degenerate pools") {
  TaskPoolSpec spec;
  spec.n_z0 = 100;
  spec.n_z1 = 0;
  spec.base_rate_z0 = 0.0;
  const auto tasks = generate_task_pool(spec);
  for (const auto& t : tasks) CHECK(t.y == 0);
  const auto pri = priors_of(tasks);
  CHECK(pri.p_z1 == 0.0);
  CHECK(pri.p_y1_given_z1 == 0.5);
  spec.base_rate_z1 = 1.5;
  CHECK_THROWS_AS(generate_task_pool(spec), ValidationError);
}

TEST_CASE("mirrored pairs") {
  const auto ws = make_binding_fairness_instance(0.3, 1, 5);
  REQUIRE(ws.size() == 2);
  const auto m = matrices_of(ws);
  CHECK(fairness_gap(compose_policy_accuracy(Policy({1.0, 0.0}), ws), FairnessKind::FprParity) ==
        doctest::Approx(0.3));
  CHECK(fairness_gap(compose_policy_accuracy(Policy({0.0, 1.0}), ws), FairnessKind::FprParity) ==
        doctest::Approx(0.3));
  CHECK(fairness_gap(compose_policy_accuracy(Policy({0.5, 0.5}), ws), FairnessKind::ErrorRateParity) <= 1e-15);

  ConstraintSet cs;
  cs.alpha = 0.0;
  cs.beta = 0.6;
  const auto lp = build_lp(m, costs_of(ws), {}, cs);
  const auto sol = solve_lp(lp);
  REQUIRE(sol.optimal());
  CHECK(sol.policy[0] == doctest::Approx(0.5));
  CHECK(sol.policy[1] == doctest::Approx(0.5));
  const auto vertex = oracle::vertex_enumeration_max(lp);
  REQUIRE(vertex);
  CHECK(sol.objective_value == doctest::Approx(*vertex).epsilon(1e-12));

  const auto many = make_binding_fairness_instance(0.2, 10, 5);
  CHECK(many.size() == 20);
  std::vector<double> even(20, 0.05);
  CHECK(fairness_gap(compose_policy_accuracy(Policy(even), many), FairnessKind::FprParity) <= 1e-15);
  CHECK_THROWS_AS(make_binding_fairness_instance(0.0, 1, 5), ValidationError);
}

TEST_CASE("worker and task files round-trip") {
  PopulationSpec spec;
  spec.n_workers = 100;
  spec.cost.kind = CostModel::Kind::AccuracyLinked;
  const auto ws = generate_population(spec);
  const auto wp = scratch("workers.csv");
  save_workers(wp, ws);
  CHECK(load_workers(wp) == ws);

  const auto tasks = generate_task_pool({});
  const auto tp = scratch("tasks.csv");
  save_tasks(tp, tasks);
  CHECK(load_tasks(tp) == tasks);

  std::vector<WorkerTally> tallies(2);
  tallies[0].id = "a";
  tallies[1].id = "b";
  for (int z = 0; z < 2; ++z)
    for (int y = 0; y < 2; ++y) {
      tallies[0].tally.attempted[z][y] = 20;
      tallies[0].tally.correct[z][y] = 10 + z + 2 * y;
      tallies[1].tally.attempted[z][y] = 5;
    }
  const auto gp = scratch("tallies.csv");
  save_tallies(gp, tallies);
  const auto back = load_tallies(gp);
  REQUIRE(back.size() == 2);
  CHECK(back[0].id == "a");
  CHECK(back[0].tally == tallies[0].tally);
  CHECK(back[1].tally == tallies[1].tally);
}

TEST_CASE("malformed worker files") {
  const std::string header = "id,cost,a0_00,a0_01,a0_10,a0_11,a1_00,a1_01,a1_10,a1_11\n";
  const auto p = scratch("bad_workers.csv");

  write_text(p, header + "w0,1,0.9,0.1,0.2,0.8,0.9,0.1,0.2,0.8\nw1,1,0.9,0.3,0.2,0.8,0.9,0.1,0.2,0.8\n");
  auto msg = error_of([&] { load_workers(p); });
  CHECK(msg.find(":3:") != std::string::npos);
  CHECK(msg.find("a0_00") != std::string::npos);
  CHECK_THROWS_AS(load_workers(p), FormatError);

  write_text(p, header + "w0,1,0.9,0.1,0.2,0.8,0.9,0.1,abc,0.8\n");
  msg = error_of([&] { load_workers(p); });
  CHECK(msg.find(":2:") != std::string::npos);
  CHECK(msg.find("a1_10") != std::string::npos);

  write_text(p, "id,cost,a0_00,a0_01,a0_10,a0_11,a1_00,a1_01,a1_10,a1_11,extra\n");
  CHECK_THROWS_AS(load_workers(p), FormatError);
  write_text(p, "id,a0_00,cost,a0_01,a0_10,a0_11,a1_00,a1_01,a1_10,a1_11\n");
  CHECK_THROWS_AS(load_workers(p), FormatError);
  write_text(p, header + "w0,1,0.9,0.1\n");
  CHECK_THROWS_AS(load_workers(p), FormatError);
  CHECK_THROWS_AS(load_workers(scratch("missing.csv")), FormatError);

  const auto tp = scratch("bad_tasks.csv");
  write_text(tp, "id,z,y\nt0,0,1\nt1,2,0\n");
  msg = error_of([&] { load_tasks(tp); });
  CHECK(msg.find(":3:") != std::string::npos);
  CHECK(msg.find("'z'") != std::string::npos);
}

TEST_CASE("gold response import") {
  const auto p = scratch("gold.csv");
  write_text(p,
             "worker_id,task_id,answer,z,y\n"
             "b,g1,1,0,1\n"
             "a,g1,0,0,1\n"
             "b,g2,0,1,0\n"
             "b,g3,1,1,0\n");
  const auto t = load_gold_responses(p);
  REQUIRE(t.size() == 2);
  CHECK(t[0].id == "b");
  CHECK(t[0].tally.attempted[0][1] == 1);
  CHECK(t[0].tally.correct[0][1] == 1);
  CHECK(t[0].tally.attempted[1][0] == 2);
  CHECK(t[0].tally.correct[1][0] == 1);
  CHECK(t[1].id == "a");
  CHECK(t[1].tally.correct[0][1] == 0);
}
