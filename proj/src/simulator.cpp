#include "crowdfdb/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <ostream>
#include <thread>

#include "crowdfdb/baselines.hpp"
#include "crowdfdb/csv.hpp"
#include "crowdfdb/pipeline.hpp"

namespace crowdfdb {

std::string to_string(Method m) {
  switch (m) {
    case Method::CrowdFDB: return "crowdfdb";
    case Method::Random: return "random";
    case Method::Greedy: return "greedy";
  }
  return "?";
}

Method parse_method(std::string_view text) {
  std::string s(text);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "crowdfdb") return Method::CrowdFDB;
  if (s == "random") return Method::Random;
  if (s == "greedy") return Method::Greedy;
  throw ValidationError("unknown method '" + std::string(text) + "'");
}

std::string to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::None: return "none";
    case SweepAxis::Gold: return "gold";
    case SweepAxis::Alpha: return "alpha";
  }
  return "?";
}

SweepAxis parse_sweep_axis(std::string_view text) {
  if (text == "none" || text.empty()) return SweepAxis::None;
  if (text == "gold" || text == "n_g") return SweepAxis::Gold;
  if (text == "alpha") return SweepAxis::Alpha;
  throw ValidationError("unknown sweep axis '" + std::string(text) + "'");
}

std::string to_string(RunStatus s) { return s == RunStatus::Ok ? "ok" : "infeasible"; }

void ExperimentConfig::validate() const {
  if (repetitions < 1) throw ValidationError("repetitions must be >= 1");
  if (methods.empty()) throw ValidationError("at least one method is required");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ValidationError("gamma must lie in (0, 1)");
  if (!workers_file) population.validate();
  if (!tasks_file) pool.validate();
  gold.validate();
  constraints.validate();
  if (sweep != SweepAxis::None && sweep_values.empty()) {
    throw ValidationError("sweep '" + to_string(sweep) + "' needs sweep values");
  }
  for (double v : sweep_values) at_sweep_value(v);
}

ExperimentConfig ExperimentConfig::at_sweep_value(double v) const {
  ExperimentConfig c = *this;
  switch (sweep) {
    case SweepAxis::None: break;
    case SweepAxis::Gold:
      if (!(v >= 1.0) || v != std::floor(v)) {
        throw ValidationError("gold sweep values must be positive integers");
      }
      c.gold.n_gold_per_type = static_cast<int>(v);
      c.gold.validate();
      break;
    case SweepAxis::Alpha:
      c.constraints.alpha = v;
      c.constraints.validate();
      break;
  }
  return c;
}

std::int64_t LabelScore::total() const noexcept {
  return count[0][0] + count[0][1] + count[1][0] + count[1][1];
}

void LabelScore::finalize() {
  auto rate = [](std::int64_t k, std::int64_t n) -> std::optional<double> {
    if (n == 0) return std::nullopt;
    return static_cast<double>(k) / static_cast<double>(n);
  };
  for (int z = 0; z < 2; ++z) {
    fpr[z] = rate(errors[z][0], count[z][0]);
    fnr[z] = rate(errors[z][1], count[z][1]);
  }
  fpr_gap = fpr[0] && fpr[1] ? std::optional(std::abs(*fpr[0] - *fpr[1])) : std::nullopt;
  fnr_gap = fnr[0] && fnr[1] ? std::optional(std::abs(*fnr[0] - *fnr[1])) : std::nullopt;
  const std::int64_t n = total();
  const std::int64_t wrong = errors[0][0] + errors[0][1] + errors[1][0] + errors[1][1];
  accuracy = rate(n - wrong, n);
}

LabelScore score_labels(std::span<const LabelRecord> records) {
  LabelScore s;
  for (const auto& r : records) {
    ++s.count[r.z][r.y];
    s.errors[r.z][r.y] += r.yhat != r.y;
  }
  s.finalize();
  return s;
}

Stat summarize(std::span<const double> values) {
  Stat s;
  s.n = values.size();
  if (s.n == 0) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.se = std::sqrt(ss / static_cast<double>(s.n - 1) / static_cast<double>(s.n));
  }
  return s;
}

Aggregate aggregate(Method method, double sweep_value, std::span<const MetricsReport> runs) {
  Aggregate a;
  a.method = method;
  a.sweep_value = sweep_value;
  a.n_runs = runs.size();
  std::vector<double> fpr, fnr, acc, cost, ent;
  for (const auto& r : runs) {
    if (r.status != RunStatus::Ok) {
      ++a.n_infeasible;
      continue;
    }
    ++a.n_ok;
    if (r.score.fpr_gap) fpr.push_back(*r.score.fpr_gap);
    if (r.score.fnr_gap) fnr.push_back(*r.score.fnr_gap);
    if (r.score.accuracy) acc.push_back(*r.score.accuracy);
    if (r.mean_cost) cost.push_back(*r.mean_cost);
    if (r.entropy) ent.push_back(*r.entropy);
    for (int z = 0; z < 2; ++z) {
      for (int y = 0; y < 2; ++y) {
        a.pooled.count[z][y] += r.score.count[z][y];
        a.pooled.errors[z][y] += r.score.errors[z][y];
      }
    }
  }
  a.fpr_gap = summarize(fpr);
  a.fnr_gap = summarize(fnr);
  a.accuracy = summarize(acc);
  a.mean_cost = summarize(cost);
  a.entropy = summarize(ent);
  a.pooled.finalize();
  return a;
}

const MethodResult& SweepPointResult::of(Method m) const {
  for (const auto& r : methods) {
    if (r.method == m) return r;
  }
  throw std::out_of_range("method '" + to_string(m) + "' not in results");
}

Experiment::Experiment(ExperimentConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  workers_ = cfg_.workers_file ? load_workers(*cfg_.workers_file) : generate_population(cfg_.population);
  tasks_ = cfg_.tasks_file ? load_tasks(*cfg_.tasks_file) : generate_task_pool(cfg_.pool);
  if (workers_.empty()) throw ValidationError("experiment has no workers");
  if (tasks_.empty()) throw ValidationError("experiment has no tasks");
  priors_ = priors_of(tasks_);
}

Experiment::Experiment(ExperimentConfig cfg, std::vector<WorkerProfile> workers,
                       std::vector<TaskRecord> tasks)
    : cfg_(std::move(cfg)), workers_(std::move(workers)), tasks_(std::move(tasks)) {
  cfg_.validate();
  if (workers_.empty()) throw ValidationError("experiment has no workers");
  if (tasks_.empty()) throw ValidationError("experiment has no tasks");
  priors_ = priors_of(tasks_);
}

MetricsReport Experiment::run_once(Method method, int rep) const { return run_once(cfg_, method, rep); }

MetricsReport Experiment::run_once(const ExperimentConfig& point, Method method, int rep) const {
  MetricsReport report;
  report.method = method;
  report.rep = rep;
  const auto rep_index = static_cast<std::uint64_t>(rep);

  // Every method sees the same gold answers in a given repetition.
  report.estimates = run_gold_phase(workers_, point.gold, derive_seed(point.seed, "rep-gold", rep_index));
  const auto costs = costs_of(workers_);
  const std::size_t n = workers_.size();

  std::vector<std::size_t> sequence;
  std::optional<DiscreteSampler> sampler;
  switch (method) {
    case Method::CrowdFDB: {
      auto result = policy_from_estimates(report.estimates, costs, point.gold.n_gold_per_type,
                                          priors_, point.constraints, point.gamma);
      report.lp_status = result.solution.status;
      if (!result.optimal()) {
        report.status = RunStatus::Infeasible;
        return report;
      }
      report.policy.assign(result.policy.weights().begin(), result.policy.weights().end());
      report.entropy = result.policy.entropy();
      break;
    }
    case Method::Random: {
      const auto p = random_policy(n);
      report.policy.assign(p.weights().begin(), p.weights().end());
      report.entropy = p.entropy();
      break;
    }
    case Method::Greedy: {
      try {
        const auto plan = greedy_plan(report.estimates, costs, priors_, point.constraints.beta,
                                      static_cast<std::int64_t>(tasks_.size()));
        sequence = plan.assignment_sequence();
      } catch (const CapacityError&) {
        report.status = RunStatus::Infeasible;
        return report;
      }
      break;
    }
  }
  if (!report.policy.empty()) sampler.emplace(report.policy);

  RandomStream assign(point.seed, "rep-assign-" + to_string(method), rep_index);
  RandomStream labels(point.seed, "rep-labels-" + to_string(method), rep_index);
  report.assignments.assign(n, 0);
  double spent = 0.0;
  for (std::size_t k = 0; k < tasks_.size(); ++k) {
    const auto& task = tasks_[k];
    const std::size_t w = sampler ? (*sampler)(assign) : sequence[k];
    ++report.assignments[w];
    spent += costs[w];
    const int yhat = sample_label(workers_[w], task.z, task.y, labels);
    ++report.score.count[task.z][task.y];
    report.score.errors[task.z][task.y] += yhat != task.y;
  }
  report.score.finalize();
  report.mean_cost = spent / static_cast<double>(tasks_.size());
  if (method == Method::Greedy) {
    double h = 0.0;
    for (auto c : report.assignments) {
      if (c == 0) continue;
      const double share = static_cast<double>(c) / static_cast<double>(tasks_.size());
      h -= share * std::log(share);
    }
    report.entropy = h;
  }
  return report;
}

unsigned default_thread_count() {
  if (const char* env = std::getenv("CROWDFDB_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<SweepPointResult> Experiment::run(unsigned threads) const {
  if (threads == 0) threads = default_thread_count();
  std::vector<double> values = cfg_.sweep_values;
  if (cfg_.sweep == SweepAxis::None) values = {0.0};

  struct Job {
    std::size_t point, method;
    int rep;
  };
  std::vector<ExperimentConfig> points;
  std::vector<SweepPointResult> results(values.size());
  std::vector<Job> jobs;
  for (std::size_t p = 0; p < values.size(); ++p) {
    points.push_back(cfg_.at_sweep_value(values[p]));
    results[p].value = values[p];
    for (std::size_t m = 0; m < cfg_.methods.size(); ++m) {
      results[p].methods.push_back({cfg_.methods[m], std::vector<MetricsReport>(cfg_.repetitions), {}});
      for (int r = 0; r < cfg_.repetitions; ++r) jobs.push_back({p, m, r});
    }
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (;;) {
      const std::size_t j = next.fetch_add(1);
      if (j >= jobs.size() || failed.load()) return;
      const auto& job = jobs[j];
      try {
        results[job.point].methods[job.method].runs[static_cast<std::size_t>(job.rep)] =
            run_once(points[job.point], cfg_.methods[job.method], job.rep);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
        return;
      }
    }
  };
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, jobs.size())));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  for (auto& point : results) {
    for (auto& mr : point.methods) mr.summary = aggregate(mr.method, point.value, mr.runs);
  }
  return results;
}

std::vector<SweepPointResult> run_experiment(const ExperimentConfig& cfg, unsigned threads) {
  return Experiment(cfg).run(threads);
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

std::string sweep_label(const ExperimentConfig& cfg, double v) {
  return cfg.sweep == SweepAxis::None ? std::string() : format_number(v);
}

}  // namespace

void write_results_csv(std::ostream& out, const ExperimentConfig& cfg,
                       std::span<const SweepPointResult> results) {
  out << "sweep_param,sweep_value,method,row,rep,status,fpr_gap,fnr_gap,accuracy,mean_cost,entropy,"
         "n_ok,n_infeasible,pooled_fpr_gap,pooled_fnr_gap,"
         "n_z0_y0,n_z0_y1,n_z1_y0,n_z1_y1,err_z0_y0,err_z0_y1,err_z1_y0,err_z1_y1\n";
  auto counts = [&out](const LabelScore& s) {
    for (int z = 0; z < 2; ++z)
      for (int y = 0; y < 2; ++y) out << ',' << s.count[z][y];
    for (int z = 0; z < 2; ++z)
      for (int y = 0; y < 2; ++y) out << ',' << s.errors[z][y];
  };
  const std::string param = to_string(cfg.sweep);
  for (const auto& point : results) {
    const std::string sv = sweep_label(cfg, point.value);
    for (const auto& mr : point.methods) {
      const std::string m = to_string(mr.method);
      for (const auto& r : mr.runs) {
        out << param << ',' << sv << ',' << m << ",run," << r.rep << ',' << to_string(r.status) << ','
            << opt(r.score.fpr_gap) << ',' << opt(r.score.fnr_gap) << ',' << opt(r.score.accuracy) << ','
            << opt(r.mean_cost) << ',' << opt(r.entropy) << ",,,,";
        counts(r.score);
        out << '\n';
      }
      const auto& a = mr.summary;
      auto stat = [](const Stat& s, bool se) {
        return s.n == 0 ? std::string() : format_number(se ? s.se : s.mean);
      };
      for (bool se : {false, true}) {
        out << param << ',' << sv << ',' << m << ',' << (se ? "se" : "mean") << ",,," << stat(a.fpr_gap, se)
            << ',' << stat(a.fnr_gap, se) << ',' << stat(a.accuracy, se) << ',' << stat(a.mean_cost, se)
            << ',' << stat(a.entropy, se) << ',' << a.n_ok << ',' << a.n_infeasible << ',';
        if (se) {
          out << ",,,,,,,,,";
        } else {
          out << opt(a.pooled.fpr_gap) << ',' << opt(a.pooled.fnr_gap);
          counts(a.pooled);
        }
        out << '\n';
      }
    }
  }
}

void write_summary_csv(std::ostream& out, const ExperimentConfig& cfg,
                       std::span<const SweepPointResult> results) {
  static constexpr const char* kMetrics[] = {"fpr_gap", "fnr_gap", "accuracy", "mean_cost"};
  out << "sweep_param,sweep_value";
  for (Method m : cfg.methods) {
    for (const char* metric : kMetrics) {
      out << ',' << to_string(m) << '_' << metric << ',' << to_string(m) << '_' << metric << "_se";
    }
    out << ',' << to_string(m) << "_n_infeasible";
  }
  out << '\n';
  for (const auto& point : results) {
    out << to_string(cfg.sweep) << ',' << sweep_label(cfg, point.value);
    for (const auto& mr : point.methods) {
      const auto& a = mr.summary;
      for (const Stat* s : {&a.fpr_gap, &a.fnr_gap, &a.accuracy, &a.mean_cost}) {
        if (s->n == 0) {
          out << ",,";
        } else {
          out << ',' << format_number(s->mean) << ',' << format_number(s->se);
        }
      }
      out << ',' << a.n_infeasible;
    }
    out << '\n';
  }
}

}  // namespace crowdfdb
