#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "crowdfdb/csv.hpp"
#include "crowdfdb/datagen.hpp"
#include "doctest.h"

using namespace crowdfdb;
namespace fs = std::filesystem;

namespace {

const fs::path kDir = fs::current_path() / "cli_scratch";

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run cli(const std::string& args) {
  fs::create_directories(kDir);
  const auto out = kDir / "stdout.txt", err = kDir / "stderr.txt";
  const std::string cmd = std::string("\"") + CROWDFDB_CLI + "\" --threads 2 " + args + " >\"" + out.string() +
                          "\" 2>\"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  auto slurp = [](const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
  };
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::string p(const std::string& name) { return "\"" + (kDir / name).string() + "\""; }

std::string slurp(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

double field_after(const std::string& text, const std::string& key) {
  const auto pos = text.find(key);
  REQUIRE(pos != std::string::npos);
  return std::stod(text.substr(pos + key.size()));
}

// Rows of a dumped LP as (coefficients, is_equality, rhs).
struct DumpRow {
  std::vector<double> a;
  bool eq = false;
  double rhs = 0.0;
};

std::vector<DumpRow> read_dump(const fs::path& path) {
  std::ifstream f(path);
  std::string line;
  std::vector<DumpRow> rows;
  std::getline(f, line);  // objective
  while (std::getline(f, line)) {
    std::istringstream in(line.substr(line.find(':') + 1));
    DumpRow r;
    std::string tok;
    while (in >> tok) {
      if (tok == "<=" || tok == "=") {
        r.eq = tok == "=";
        in >> r.rhs;
        break;
      }
      r.a.push_back(std::stod(tok));
    }
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

TEST_CASE("generate writes the default population and pool") {
  const auto r = cli("generate --workers " + p("w.csv") + " --tasks " + p("t.csv"));
  REQUIRE(r.code == 0);
  CHECK(load_workers(kDir / "w.csv").size() == 400);
  CHECK(load_tasks(kDir / "t.csv").size() == 6150);

  REQUIRE(cli("generate --workers " + p("w2.csv") + " --tasks " + p("t2.csv")).code == 0);
  CHECK(slurp(kDir / "w.csv") == slurp(kDir / "w2.csv"));
  CHECK(slurp(kDir / "t.csv") == slurp(kDir / "t2.csv"));

  REQUIRE(cli("generate --set population.seed=2 --workers " + p("w3.csv") + " --tasks " + p("t3.csv")).code == 0);
  CHECK(slurp(kDir / "w.csv") != slurp(kDir / "w3.csv"));
}

TEST_CASE("validation failures exit with 2") {
  const auto r = cli("generate --set pool.base_rate_z0=1.2 --workers " + p("x.csv") + " --tasks " + p("y.csv"));
  CHECK(r.code == 2);
  CHECK(r.err.find("base rate") != std::string::npos);
  CHECK(cli("policy --workers " + p("does-not-exist.csv")).code == 2);
  CHECK(cli("policy --alpha -1").code == 2);
  CHECK(cli("policy --set unknown.key=1").code == 2);
  CHECK(cli("bounds --n 0 --gold 20").code == 2);
  CHECK(cli("no-such-command").code == 2);
}

TEST_CASE("policy with the non-uniform fee parameter set") {
  REQUIRE(cli("generate --set population.cost_model=accuracy-linked --workers " + p("wc.csv") + " --tasks " +
              p("tc.csv"))
              .code == 0);
  const auto r = cli("policy --workers " + p("wc.csv") + " --tasks " + p("tc.csv") +
                     " --fairness error-rate --alpha 0.01 --beta 0.01 --budget 1.5 --gold 20 --out " + p("pol.csv") +
                     " --dump-lp " + p("lp.txt"));
  REQUIRE(r.code == 0);
  CHECK(r.out.find("status: optimal") != std::string::npos);

  const auto workers = load_workers(kDir / "wc.csv");
  const auto table = CsvTable::read(kDir / "pol.csv");
  table.require_header({"id", "weight"});
  REQUIRE(table.rows.size() == workers.size());
  std::vector<double> s;
  double sum = 0.0, fee = 0.0;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    CHECK(table.rows[i].fields[0] == workers[i].id);
    s.push_back(table.number(table.rows[i], 1));
    sum += s.back();
    fee += s.back() * workers[i].cost;
    CHECK(s.back() >= 0.0);
    CHECK(s.back() <= 0.01 + 1e-7);
  }
  CHECK(std::abs(sum - 1.0) <= 1e-9);
  CHECK(fee <= 1.5 + 1e-7);

  const auto rows = read_dump(kDir / "lp.txt");
  CHECK(rows.size() == 1 + 400 + 4 + 1);
  for (const auto& row : rows) {
    REQUIRE(row.a.size() == s.size());
    double lhs = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) lhs += row.a[i] * s[i];
    if (row.eq) CHECK(std::abs(lhs - row.rhs) <= 1e-7);
    else CHECK(lhs <= row.rhs + 1e-7);
  }
}

TEST_CASE("dropping fairness never lowers the predicted accuracy") {
  for (const char* extra : {"--budget 1.5 --beta 0.01", "--budget 1.2 --beta 0.05", "--beta 0.02"}) {
    const std::string base = "policy --workers " + p("wc.csv") + " --tasks " + p("tc.csv") + " --alpha 0.01 " + extra;
    const auto fair = cli(base + " --fairness error-rate");
    const auto none = cli(base + " --fairness none");
    REQUIRE(fair.code == 0);
    REQUIRE(none.code == 0);
    CHECK(field_after(none.out, "predicted accuracy: ") >= field_after(fair.out, "predicted accuracy: ") - 1e-12);
  }
}

TEST_CASE("infeasible policy exits with 3 and names the relaxation") {
  std::ofstream(kDir / "one.csv") << "id,cost,a0_00,a0_01,a0_10,a0_11,a1_00,a1_01,a1_10,a1_11\n"
                                     "solo,1,1,0,0,1,1,0,0,1\n";
  const auto r = cli("policy --workers " + p("one.csv") + " --beta 0.5");
  CHECK(r.code == 3);
  CHECK(r.err.find("diversity") != std::string::npos);
}

TEST_CASE("bounds") {
  const auto r = cli("bounds --n 400 --gold 20 --gamma 0.9 --gamma-prime 0.9 --beta 0.01");
  REQUIRE(r.code == 0);
  CHECK(field_after(r.out, "fairness_violation_bound ") == doctest::Approx(0.98123351375398371).epsilon(1e-15));
  CHECK(field_after(r.out, "accuracy_loss_bound ") == doctest::Approx(4.0637532092548589).epsilon(1e-15));
}

TEST_CASE("smoke experiment and manifest replay") {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = cli(std::string("experiment \"") + CROWDFDB_CONFIG_DIR + "/smoke.conf\" --out " + p("smoke.csv"));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  REQUIRE(r.code == 0);
  CHECK(secs < 10.0);
  const auto results = slurp(kDir / "smoke.csv");
  const auto summary = slurp(kDir / "smoke.summary.csv");
  CHECK(fs::exists(kDir / "smoke.csv.manifest"));
  for (const char* col : {"fpr_gap", "fnr_gap", "accuracy"}) {
    CHECK(results.find(col) != std::string::npos);
    for (const char* m : {"crowdfdb", "random", "greedy"}) {
      CHECK(summary.find(std::string(m) + "_" + col + "_se") != std::string::npos);
    }
  }

  REQUIRE(cli("replay " + p("smoke.csv.manifest") + " --out " + p("replayed.csv")).code == 0);
  CHECK(slurp(kDir / "replayed.csv") == results);
  CHECK(slurp(kDir / "replayed.summary.csv") == summary);

  // replay into the recorded path
  fs::remove(kDir / "smoke.csv");
  REQUIRE(cli("replay " + p("smoke.csv.manifest")).code == 0);
  CHECK(slurp(kDir / "smoke.csv") == results);
}

TEST_CASE("recipe configs parse") {
  for (const char* name : {"figure1", "figure2", "figure3", "figure4", "appendix-figure5", "appendix-figure6",
                           "appendix-figure7", "appendix-figure8", "smoke"}) {
    CAPTURE(name);
    // one repetition of a 5-worker population is enough to exercise every key
    const auto r = cli(std::string("experiment \"") + CROWDFDB_CONFIG_DIR + "/" + name +
                       ".conf\" --set repetitions=1 --set population.n_workers=5 --set pool.n_z0=20 --set pool.n_z1=20"
                       " --set beta=0.3 --out " + p(std::string(name) + ".csv"));
    CHECK(r.code == 0);
  }
}
