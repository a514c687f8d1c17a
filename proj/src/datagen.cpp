#include "crowdfdb/datagen.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_map>

#include "crowdfdb/csv.hpp"

namespace crowdfdb {

namespace {

void check_range(const Range& r, const char* what, double lo, double hi) {
  if (!(r.lo >= lo && r.hi <= hi && r.lo <= r.hi)) {
    throw ValidationError(std::string(what) + ": interval must satisfy " + std::to_string(lo) +
                          " <= lo <= hi <= " + std::to_string(hi));
  }
}

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError(std::string(what) + " must lie in [0, 1]");
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write '" + path.string() + "'");
  return out;
}

void check_id(const std::string& id) {
  if (id.empty() || id.find_first_of(",\n\r") != std::string::npos) {
    throw ValidationError("identifier '" + id + "' is empty or contains a delimiter");
  }
}

WorkerProfile mixture_worker(const MixtureBiasModel& m, RandomStream& rng) {
  const double fpr = m.base_fpr.draw(rng);
  const double fnr = m.base_fnr.draw(rng);
  double d_fpr = 0.0;
  double d_fnr = 0.0;
  if (rng.bernoulli(m.biased_fraction)) {
    d_fpr = m.biased_fpr_offset.draw(rng);
    d_fnr = m.biased_fnr_offset.draw(rng);
    if (!rng.bernoulli(m.majority_share)) {
      d_fpr = -d_fpr;
      d_fnr = -d_fnr;
    }
  } else {
    d_fpr = m.unbiased_fpr_offset.draw(rng);
    d_fnr = m.unbiased_fnr_offset.draw(rng);
  }
  auto rate = [](double base, double offset) { return std::clamp(base + offset, 0.0, 1.0); };
  WorkerProfile w;
  w.matrix_z0 = AccuracyMatrix::from_diagonal(1.0 - rate(fpr, -0.5 * d_fpr), 1.0 - rate(fnr, -0.5 * d_fnr));
  w.matrix_z1 = AccuracyMatrix::from_diagonal(1.0 - rate(fpr, 0.5 * d_fpr), 1.0 - rate(fnr, 0.5 * d_fnr));
  return w;
}

}  // namespace

void PopulationSpec::validate() const {
  if (n_workers < 1) throw ValidationError("population needs at least one worker");
  for (int z = 0; z < 2; ++z)
    for (int y = 0; y < 2; ++y) check_range(interval.diagonal[z][y], "diagonal accuracy", 0.0, 1.0);
  check_range(mixture.base_fpr, "base FPR", 0.0, 1.0);
  check_range(mixture.base_fnr, "base FNR", 0.0, 1.0);
  check_probability(mixture.biased_fraction, "biased fraction");
  check_probability(mixture.majority_share, "majority share");
  check_range(mixture.biased_fpr_offset, "biased FPR offset", -1.0, 1.0);
  check_range(mixture.biased_fnr_offset, "biased FNR offset", -1.0, 1.0);
  check_range(mixture.unbiased_fpr_offset, "unbiased FPR offset", -1.0, 1.0);
  check_range(mixture.unbiased_fnr_offset, "unbiased FNR offset", -1.0, 1.0);
  if (!(cost.fee >= 0.0 && cost.low_fee >= 0.0 && cost.high_fee >= 0.0)) {
    throw ValidationError("fees must be >= 0");
  }
}

void TaskPoolSpec::validate() const {
  if (n_z0 < 0 || n_z1 < 0) throw ValidationError("task counts must be >= 0");
  check_probability(base_rate_z0, "base rate for z=0");
  check_probability(base_rate_z1, "base rate for z=1");
}

std::vector<WorkerProfile> generate_population(const PopulationSpec& spec) {
  spec.validate();
  std::vector<WorkerProfile> out;
  out.reserve(spec.n_workers);
  for (std::size_t i = 0; i < spec.n_workers; ++i) {
    RandomStream rng(spec.seed, "worker", i);
    WorkerProfile w;
    if (spec.bias_model == BiasModelKind::Interval) {
      const auto& d = spec.interval.diagonal;
      const double p00 = d[0][0].draw(rng), p01 = d[0][1].draw(rng);
      const double p10 = d[1][0].draw(rng), p11 = d[1][1].draw(rng);
      w.matrix_z0 = AccuracyMatrix::from_diagonal(p00, p01);
      w.matrix_z1 = AccuracyMatrix::from_diagonal(p10, p11);
    } else {
      w = mixture_worker(spec.mixture, rng);
    }
    w.id = "w" + std::to_string(i);
    if (spec.cost.kind == CostModel::Kind::Uniform) {
      w.cost = spec.cost.fee;
    } else {
      w.cost = rng.bernoulli(w.average_accuracy()) ? spec.cost.high_fee : spec.cost.low_fee;
    }
    out.push_back(std::move(w));
  }
  return out;
}

std::vector<TaskRecord> generate_task_pool(const TaskPoolSpec& spec) {
  spec.validate();
  std::vector<TaskRecord> out;
  out.reserve(static_cast<std::size_t>(spec.n_z0 + spec.n_z1));
  RandomStream labels(spec.seed, "labels");
  std::size_t next_id = 0;
  for (int z = 0; z < 2; ++z) {
    const std::int64_t count = z == 0 ? spec.n_z0 : spec.n_z1;
    const double rate = z == 0 ? spec.base_rate_z0 : spec.base_rate_z1;
    for (std::int64_t k = 0; k < count; ++k) {
      out.push_back({"t" + std::to_string(next_id++), z, labels.bernoulli(rate) ? 1 : 0});
    }
  }
  RandomStream order(spec.seed, "shuffle");
  order.shuffle(out);
  return out;
}

Priors priors_of(std::span<const TaskRecord> tasks) {
  std::array<std::int64_t, 2> n{}, pos{};
  for (const auto& t : tasks) {
    ++n[t.z];
    pos[t.z] += t.y;
  }
  Priors p;
  const auto total = n[0] + n[1];
  p.p_z1 = total > 0 ? static_cast<double>(n[1]) / static_cast<double>(total) : 0.5;
  p.p_y1_given_z0 = n[0] > 0 ? static_cast<double>(pos[0]) / static_cast<double>(n[0]) : 0.5;
  p.p_y1_given_z1 = n[1] > 0 ? static_cast<double>(pos[1]) / static_cast<double>(n[1]) : 0.5;
  return p;
}

std::vector<WorkerProfile> make_binding_fairness_instance(double gap, std::size_t n_pairs,
                                                          std::uint64_t seed) {
  if (!(gap > 0.0 && gap <= 1.0)) throw ValidationError("gap must lie in (0, 1]");
  std::vector<WorkerProfile> out;
  out.reserve(2 * n_pairs);
  for (std::size_t p = 0; p < n_pairs; ++p) {
    RandomStream rng(seed, "mirrored-pair", p);
    const double fpr = rng.uniform(0.0, std::min(0.3, 1.0 - gap));
    const double fnr = rng.uniform(0.05, 0.3);
    const auto low = AccuracyMatrix::from_diagonal(1.0 - fpr, 1.0 - fnr);
    const auto high = AccuracyMatrix::from_diagonal(1.0 - fpr - gap, 1.0 - fnr);
    out.push_back({"p" + std::to_string(p) + "a", high, low, 1.0});
    out.push_back({"p" + std::to_string(p) + "b", low, high, 1.0});
  }
  return out;
}

namespace {

const std::vector<std::string> kWorkerHeader = {"id",    "cost",  "a0_00", "a0_01", "a0_10",
                                                "a0_11", "a1_00", "a1_01", "a1_10", "a1_11"};
const std::vector<std::string> kTaskHeader = {"id", "z", "y"};
const std::vector<std::string> kTallyHeader = {"id",      "n_z0_y0", "k_z0_y0", "n_z0_y1", "k_z0_y1",
                                               "n_z1_y0", "k_z1_y0", "n_z1_y1", "k_z1_y1"};
const std::vector<std::string> kResponseHeader = {"worker_id", "task_id", "answer", "z", "y"};

void write_header(std::ostream& out, const std::vector<std::string>& header) {
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
}

int binary_field(const CsvTable& t, const CsvTable::Row& row, std::size_t col) {
  const auto v = t.integer(row, col);
  if (v != 0 && v != 1) t.fail(row, col, "must be 0 or 1");
  return static_cast<int>(v);
}

}  // namespace

void save_workers(const std::filesystem::path& path, std::span<const WorkerProfile> workers) {
  auto out = open_for_write(path);
  write_header(out, kWorkerHeader);
  for (const auto& w : workers) {
    check_id(w.id);
    out << w.id << ',' << format_number(w.cost);
    for (const auto* m : {&w.matrix_z0, &w.matrix_z1})
      for (int y = 0; y < 2; ++y)
        for (int yh = 0; yh < 2; ++yh) out << ',' << format_number((*m)(y, yh));
    out << '\n';
  }
  if (!out) throw FormatError("write to '" + path.string() + "' failed");
}

std::vector<WorkerProfile> load_workers(const std::filesystem::path& path) {
  const auto t = CsvTable::read(path);
  t.require_header(kWorkerHeader);
  std::vector<WorkerProfile> out;
  out.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    WorkerProfile w;
    w.id = row.fields[0];
    if (w.id.empty()) t.fail(row, 0, "empty id");
    w.cost = t.number(row, 1);
    if (!(w.cost >= 0.0)) t.fail(row, 1, "cost must be >= 0");
    for (int z = 0; z < 2; ++z) {
      std::array<std::array<double, 2>, 2> e{};
      for (int y = 0; y < 2; ++y)
        for (int yh = 0; yh < 2; ++yh) e[y][yh] = t.number(row, 2 + 4 * z + 2 * y + yh);
      try {
        (z == 0 ? w.matrix_z0 : w.matrix_z1) = AccuracyMatrix(e);
      } catch (const ValidationError& err) {
        t.fail(row, 2 + 4 * z, std::string("matrix for z=") + std::to_string(z) + ": " + err.what());
      }
    }
    out.push_back(std::move(w));
  }
  return out;
}

void save_tasks(const std::filesystem::path& path, std::span<const TaskRecord> tasks) {
  auto out = open_for_write(path);
  write_header(out, kTaskHeader);
  for (const auto& task : tasks) {
    check_id(task.id);
    out << task.id << ',' << task.z << ',' << task.y << '\n';
  }
  if (!out) throw FormatError("write to '" + path.string() + "' failed");
}

std::vector<TaskRecord> load_tasks(const std::filesystem::path& path) {
  const auto t = CsvTable::read(path);
  t.require_header(kTaskHeader);
  std::vector<TaskRecord> out;
  out.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    if (row.fields[0].empty()) t.fail(row, 0, "empty id");
    out.push_back({row.fields[0], binary_field(t, row, 1), binary_field(t, row, 2)});
  }
  return out;
}

void save_tallies(const std::filesystem::path& path, std::span<const WorkerTally> tallies) {
  auto out = open_for_write(path);
  write_header(out, kTallyHeader);
  for (const auto& wt : tallies) {
    check_id(wt.id);
    out << wt.id;
    for (int z = 0; z < 2; ++z)
      for (int y = 0; y < 2; ++y) out << ',' << wt.tally.attempted[z][y] << ',' << wt.tally.correct[z][y];
    out << '\n';
  }
  if (!out) throw FormatError("write to '" + path.string() + "' failed");
}

std::vector<WorkerTally> load_tallies(const std::filesystem::path& path) {
  const auto t = CsvTable::read(path);
  t.require_header(kTallyHeader);
  std::vector<WorkerTally> out;
  for (const auto& row : t.rows) {
    WorkerTally wt;
    wt.id = row.fields[0];
    for (int z = 0; z < 2; ++z) {
      for (int y = 0; y < 2; ++y) {
        const std::size_t col = 1 + 4 * z + 2 * y;
        wt.tally.attempted[z][y] = t.integer(row, col);
        wt.tally.correct[z][y] = t.integer(row, col + 1);
        if (wt.tally.attempted[z][y] < 0) t.fail(row, col, "must be >= 0");
        if (wt.tally.correct[z][y] < 0 || wt.tally.correct[z][y] > wt.tally.attempted[z][y]) {
          t.fail(row, col + 1, "must lie between 0 and the attempted count");
        }
      }
    }
    out.push_back(std::move(wt));
  }
  return out;
}

std::vector<WorkerTally> load_gold_responses(const std::filesystem::path& path) {
  const auto t = CsvTable::read(path);
  t.require_header(kResponseHeader);
  std::vector<WorkerTally> out;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& row : t.rows) {
    const auto& wid = row.fields[0];
    if (wid.empty()) t.fail(row, 0, "empty worker id");
    const int answer = binary_field(t, row, 2);
    const int z = binary_field(t, row, 3);
    const int y = binary_field(t, row, 4);
    auto [it, fresh] = index.try_emplace(wid, out.size());
    if (fresh) out.push_back({wid, {}});
    auto& tally = out[it->second].tally;
    ++tally.attempted[z][y];
    tally.correct[z][y] += answer == y;
  }
  return out;
}

}  // namespace crowdfdb
