// crowdfdb: fairness/diversity/budget-constrained crowdsourcing policies.
//
//   crowdfdb generate   [--config F] [--set k=v ...] --workers W.csv --tasks T.csv
//   crowdfdb policy     (--workers W.csv | --config F) [--tallies G.csv] [constraint flags] [--out P.csv]
//   crowdfdb experiment CONFIG [--set k=v ...] --out results.csv
//   crowdfdb replay     MANIFEST [--out results.csv]
//   crowdfdb bounds     --n N --gold NG --gamma G [--gamma-prime G2 --beta B]
//
// Exit codes: 0 success, 2 validation error, 3 infeasible LP, 4 numerical
// failure, 1 anything else.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "crowdfdb/baselines.hpp"
#include "crowdfdb/bounds.hpp"
#include "crowdfdb/config.hpp"
#include "crowdfdb/csv.hpp"
#include "crowdfdb/datagen.hpp"
#include "crowdfdb/pipeline.hpp"
#include "crowdfdb/simulator.hpp"
#include "crowdfdb/tolerances.hpp"

namespace fs = std::filesystem;
using namespace crowdfdb;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kValidation = 2, kInfeasible = 3, kNumerical = 4 };

KeyValues load_config(const std::optional<std::string>& file, const std::vector<std::string>& sets) {
  KeyValues kv = file ? read_key_values(*file) : KeyValues{};
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + s + "'");
    set_value(kv, s.substr(0, eq), s.substr(eq + 1));
  }
  return kv;
}

fs::path base_dir(const std::optional<std::string>& file) {
  return file ? fs::path(*file).parent_path() : fs::path{};
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void write_outputs(const ExperimentConfig& cfg, const std::vector<SweepPointResult>& results,
                   const fs::path& out, const fs::path& summary) {
  {
    std::ofstream f(out, std::ios::binary | std::ios::trunc);
    if (!f) throw FormatError("cannot write '" + out.string() + "'");
    write_results_csv(f, cfg, results);
  }
  std::ofstream f(summary, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError("cannot write '" + summary.string() + "'");
  write_summary_csv(f, cfg, results);
}

fs::path default_summary(const fs::path& out) {
  fs::path s = out;
  s.replace_extension(".summary.csv");
  return s;
}

int cmd_generate(const std::optional<std::string>& config, const std::vector<std::string>& sets,
                 const std::string& workers_out, const std::string& tasks_out) {
  const auto cfg = config_from_key_values(load_config(config, sets), base_dir(config));
  const auto workers = generate_population(cfg.population);
  const auto tasks = generate_task_pool(cfg.pool);
  save_workers(workers_out, workers);
  save_tasks(tasks_out, tasks);
  std::cout << "wrote " << workers.size() << " workers to " << workers_out << " and " << tasks.size()
            << " tasks to " << tasks_out << '\n';
  return kOk;
}

struct PolicyArgs {
  std::optional<std::string> config;
  std::vector<std::string> sets;
  std::optional<std::string> workers;
  std::optional<std::string> tasks;
  std::optional<std::string> tallies;
  std::optional<std::string> out;
  std::optional<std::string> dump_lp;
  std::optional<double> alpha, beta, budget, gamma;
  std::optional<std::string> fairness;
  std::optional<int> gold;
  std::optional<std::uint64_t> seed;
  bool smoothing = false;
};

int cmd_policy(const PolicyArgs& a) {
  ExperimentConfig cfg = config_from_key_values(load_config(a.config, a.sets), base_dir(a.config));
  if (a.workers) cfg.workers_file = *a.workers;
  if (a.tasks) cfg.tasks_file = *a.tasks;
  if (a.alpha) cfg.constraints.alpha = *a.alpha;
  if (a.beta) cfg.constraints.beta = *a.beta;
  if (a.budget) cfg.constraints.budget = *a.budget;
  if (a.gamma) cfg.gamma = *a.gamma;
  if (a.fairness) cfg.constraints.fairness_kind = parse_fairness_kind(*a.fairness);
  if (a.gold) cfg.gold.n_gold_per_type = *a.gold;
  if (a.seed) cfg.seed = *a.seed;
  if (a.smoothing) cfg.gold.add_one_smoothing = true;
  cfg.validate();

  const auto workers = cfg.workers_file ? load_workers(*cfg.workers_file) : generate_population(cfg.population);
  const auto tasks = cfg.tasks_file ? load_tasks(*cfg.tasks_file) : generate_task_pool(cfg.pool);
  const Priors priors = priors_of(tasks);

  std::optional<PipelineResult> result;
  if (a.tallies) {
    const auto tallies = load_tallies(*a.tallies);
    if (tallies.size() != workers.size()) {
      throw ValidationError("tally file has " + std::to_string(tallies.size()) + " workers, worker file has " +
                            std::to_string(workers.size()));
    }
    const auto costs = costs_of(workers);
    result.emplace(build_policy(tallies, costs, cfg.gold.add_one_smoothing, priors, cfg.constraints, cfg.gamma));
  } else {
    result.emplace(build_policy(workers, cfg.gold, priors, cfg.constraints, cfg.seed, cfg.gamma));
  }

  if (a.dump_lp) {
    std::ofstream f(*a.dump_lp);
    if (!f) throw FormatError("cannot write '" + *a.dump_lp + "'");
    dump_lp(result->lp, f);
  }

  std::cout << "workers: " << workers.size() << "  fairness: " << to_string(cfg.constraints.fairness_kind)
            << "  alpha: " << cfg.constraints.alpha << "  beta: " << cfg.constraints.beta
            << "  budget: " << cfg.constraints.budget << "  N_g: " << cfg.gold.n_gold_per_type << '\n';
  std::cout << "status: " << to_string(result->solution.status) << '\n';
  if (!result->optimal()) {
    std::cerr << "error: the policy LP is " << to_string(result->solution.status) << '\n';
    if (result->solution.relaxation_hints.empty()) {
      std::cerr << "hint: no single constraint family can be dropped to restore feasibility\n";
    }
    for (RowFamily f : result->solution.relaxation_hints) {
      std::cerr << "hint: relaxing the " << to_string(f) << " constraints restores feasibility\n";
    }
    return kInfeasible;
  }

  const auto violations = verify_solution(result->lp, result->solution, Tolerances::lp_feasibility);
  if (!violations.empty()) {
    for (const auto& v : violations) std::cerr << "violated: " << v.name << " by " << v.excess << '\n';
    return kNumerical;
  }

  const auto& d = result->diagnostics;
  std::cout << "predicted accuracy: " << format_number(d.predicted_accuracy) << '\n';
  std::cout << "delta (gamma=" << d.gamma << "): " << format_number(d.delta) << '\n';
  std::cout << "binding constraints:";
  for (const auto& b : d.binding_constraints) std::cout << ' ' << b;
  std::cout << '\n';
  std::size_t support = 0;
  for (double w : result->policy.weights()) support += w > 0.0;
  std::cout << "workers in support: " << support << "  entropy: " << result->policy.entropy() << '\n';

  if (a.out) {
    std::ofstream f(*a.out, std::ios::binary | std::ios::trunc);
    if (!f) throw FormatError("cannot write '" + *a.out + "'");
    f << "id,weight\n";
    for (std::size_t i = 0; i < workers.size(); ++i) {
      f << workers[i].id << ',' << format_number(result->policy[i]) << '\n';
    }
    std::cout << "policy written to " << *a.out << '\n';
  }
  return kOk;
}

int run_and_record(const ExperimentConfig& cfg, const fs::path& out, const fs::path& manifest_path,
                   unsigned threads) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto results = run_experiment(cfg, threads);
  const fs::path summary = default_summary(out);
  write_outputs(cfg, results, out, summary);

  RunManifest m;
  m.config = to_key_values(cfg);
  m.version = CROWDFDB_VERSION;
  m.created_at = utc_now();
  m.results = fs::absolute(out);
  m.summary = fs::absolute(summary);
  write_manifest(manifest_path, m);

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << "results: " << out.string() << "\nsummary: " << summary.string()
            << "\nmanifest: " << manifest_path.string() << "\nelapsed: " << secs << " s\n";
  for (const auto& point : results) {
    for (const auto& mr : point.methods) {
      const auto& s = mr.summary;
      std::cout << "  " << to_string(cfg.sweep) << '=' << point.value << ' ' << to_string(mr.method)
                << ": |dFPR| " << s.fpr_gap.mean << " |dFNR| " << s.fnr_gap.mean << " acc "
                << s.accuracy.mean << " cost " << s.mean_cost.mean;
      if (s.n_infeasible) std::cout << " (" << s.n_infeasible << " infeasible)";
      std::cout << '\n';
    }
  }
  return kOk;
}

int cmd_experiment(const std::string& config, const std::vector<std::string>& sets, const std::string& out,
                   const std::optional<std::string>& manifest, unsigned threads) {
  const auto cfg = config_from_key_values(load_config(config, sets), base_dir(config));
  const fs::path manifest_path = manifest ? fs::path(*manifest) : fs::path(out + ".manifest");
  return run_and_record(cfg, out, manifest_path, threads);
}

int cmd_replay(const std::string& manifest, const std::optional<std::string>& out, unsigned threads) {
  const auto m = read_manifest(manifest);
  const auto cfg = config_from_key_values(m.config);
  const fs::path results = out ? fs::path(*out) : m.results;
  const auto r = run_experiment(cfg, threads);
  write_outputs(cfg, r, results, default_summary(results));
  std::cout << "replayed " << manifest << " into " << results.string() << '\n';
  return kOk;
}

int cmd_bounds(int n, int gold, double gamma, double gamma_prime, double beta) {
  const double delta = fairness_violation_bound({n, gold, gamma, beta});
  const double loss = accuracy_loss_bound({n, gold, gamma_prime, beta});
  std::printf("n=%d N_g=%d gamma=%g gamma'=%g beta=%g\n", n, gold, gamma, gamma_prime, beta);
  std::printf("fairness_violation_bound %.17g\n", delta);
  std::printf("accuracy_loss_bound %.17g\n", loss);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Crowdsourcing task assignment under fairness, diversity and budget constraints"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: CROWDFDB_THREADS or all cores)");

  std::optional<std::string> gen_config;
  std::vector<std::string> gen_sets;
  std::string gen_workers, gen_tasks;
  auto* gen = app.add_subcommand("generate", "Generate a synthetic worker population and task pool");
  gen->add_option("--config", gen_config, "Config file with population.* and pool.* keys");
  gen->add_option("--set", gen_sets, "Override a config key (key=value)");
  gen->add_option("--workers", gen_workers, "Worker file to write")->required();
  gen->add_option("--tasks", gen_tasks, "Task file to write")->required();

  PolicyArgs pa;
  auto* pol = app.add_subcommand("policy", "Estimate workers and solve for the optimal policy");
  pol->add_option("--config", pa.config, "Config file");
  pol->add_option("--set", pa.sets, "Override a config key (key=value)");
  pol->add_option("--workers", pa.workers, "Worker file (true matrices drive simulated gold answers)");
  pol->add_option("--tasks", pa.tasks, "Task file (priors are taken from its composition)");
  pol->add_option("--tallies", pa.tallies, "Recorded gold tallies, one row per worker in worker-file order");
  pol->add_option("--alpha", pa.alpha, "Fairness slack");
  pol->add_option("--beta", pa.beta, "Diversity cap");
  pol->add_option("--budget", pa.budget, "Expected fee per label (inf for none)");
  pol->add_option("--fairness", pa.fairness, "none | fpr | fnr | error-rate");
  pol->add_option("--gold", pa.gold, "Gold tasks per (z, y) type");
  pol->add_option("--gamma", pa.gamma, "Confidence for the reported delta");
  pol->add_option("--seed", pa.seed, "Seed of the simulated gold phase");
  pol->add_flag("--smoothing", pa.smoothing, "Add-one smoothing of gold estimates");
  pol->add_option("--out", pa.out, "Policy file to write (id,weight)");
  pol->add_option("--dump-lp", pa.dump_lp, "Write the LP in text form");

  std::string exp_config, exp_out;
  std::vector<std::string> exp_sets;
  std::optional<std::string> exp_manifest;
  auto* exp = app.add_subcommand("experiment", "Run repeated simulations and write results CSV");
  exp->add_option("config", exp_config, "Experiment config file")->required();
  exp->add_option("--set", exp_sets, "Override a config key (key=value)");
  exp->add_option("--out", exp_out, "Results CSV")->required();
  exp->add_option("--manifest", exp_manifest, "Manifest path (default: <out>.manifest)");

  std::string rep_manifest;
  std::optional<std::string> rep_out;
  auto* rep = app.add_subcommand("replay", "Re-run an experiment from its manifest");
  rep->add_option("manifest", rep_manifest, "Manifest file")->required();
  rep->add_option("--out", rep_out, "Results CSV (default: path recorded in the manifest)");

  int b_n = 0, b_gold = 0;
  double b_gamma = 0.9, b_gamma_prime = 0.9, b_beta = 0.0;
  auto* bnd = app.add_subcommand("bounds", "Print the fairness-violation and accuracy-loss bounds");
  bnd->add_option("--n", b_n, "Number of workers")->required();
  bnd->add_option("--gold", b_gold, "Gold tasks per type")->required();
  bnd->add_option("--gamma", b_gamma, "Confidence of the fairness bound");
  bnd->add_option("--gamma-prime", b_gamma_prime, "Confidence of the accuracy-loss bound");
  bnd->add_option("--beta", b_beta, "Diversity cap");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*gen) return cmd_generate(gen_config, gen_sets, gen_workers, gen_tasks);
    if (*pol) return cmd_policy(pa);
    if (*exp) return cmd_experiment(exp_config, exp_sets, exp_out, exp_manifest, threads);
    if (*rep) return cmd_replay(rep_manifest, rep_out, threads);
    if (*bnd) return cmd_bounds(b_n, b_gold, b_gamma, b_gamma_prime, b_beta);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kValidation;
  } catch (const FormatError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kValidation;
  } catch (const EstimationError& e) {
    std::cerr << "estimation error: " << e.what() << '\n';
    return kValidation;
  } catch (const CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << '\n';
    return kInfeasible;
  } catch (const SolverError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
