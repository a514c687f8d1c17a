#include "crowdfdb/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <ostream>

#include "crowdfdb/csv.hpp"

namespace crowdfdb {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad(const std::string& key, const std::string& value, const std::string& what) {
  throw ValidationError("config key '" + key + "' = '" + value + "': " + what);
}

double to_double(const std::string& key, const std::string& v) {
  if (v == "inf" || v == "none" || v == "infinity") return std::numeric_limits<double>::infinity();
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) bad(key, v, "not a number");
  return out;
}

std::int64_t to_int(const std::string& key, const std::string& v) {
  std::int64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) bad(key, v, "not an integer");
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) bad(key, v, "not an unsigned integer");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad(key, v, "expected true or false");
}

/// "lo:hi", or a single value for a degenerate interval.
Range to_range(const std::string& key, const std::string& v) {
  const auto colon = v.find(':');
  if (colon == std::string::npos) {
    const double x = to_double(key, v);
    return {x, x};
  }
  return {to_double(key, trim(v.substr(0, colon))), to_double(key, trim(v.substr(colon + 1)))};
}

std::string from_range(const Range& r) { return format_number(r.lo) + ":" + format_number(r.hi); }

std::string from_double(double v) {
  return std::isinf(v) && v > 0 ? std::string("inf") : format_number(v);
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? "," : "") + parts[i];
  return out;
}

std::vector<std::string> list(const std::string& v) {
  std::vector<std::string> out;
  for (const auto& f : split_fields(v)) {
    auto t = trim(f);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

const char* kDiagKeys[2][2] = {{"population.diag_z0_y0", "population.diag_z0_y1"},
                               {"population.diag_z1_y0", "population.diag_z1_y1"}};

}  // namespace

KeyValues parse_key_values(std::istream& in, const std::string& source) {
  KeyValues kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto text = trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw ValidationError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    auto key = trim(text.substr(0, eq));
    auto value = trim(text.substr(eq + 1));
    if (key.empty()) throw ValidationError(source + ":" + std::to_string(line_no) + ": empty key");
    const bool dup = std::any_of(kv.begin(), kv.end(), [&](const auto& p) { return p.first == key; });
    if (dup) throw ValidationError(source + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
    kv.emplace_back(std::move(key), std::move(value));
  }
  return kv;
}

KeyValues read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  return parse_key_values(in, path.string());
}

void write_key_values(std::ostream& out, const KeyValues& kv) {
  for (const auto& [k, v] : kv) out << k << " = " << v << '\n';
}

void set_value(KeyValues& kv, const std::string& key, const std::string& value) {
  for (auto& p : kv) {
    if (p.first == key) {
      p.second = value;
      return;
    }
  }
  kv.emplace_back(key, value);
}

ExperimentConfig config_from_key_values(const KeyValues& kv, const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  auto& pop = c.population;
  auto& mix = pop.mixture;
  auto path = [&base_dir](const std::string& v) -> std::filesystem::path {
    std::filesystem::path p(v);
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
  };

  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"name", [&](auto&, auto& v) { c.name = v; }},
      {"methods",
       [&](auto&, auto& v) {
         c.methods.clear();
         for (const auto& m : list(v)) c.methods.push_back(parse_method(m));
       }},
      {"repetitions", [&](auto& k, auto& v) { c.repetitions = static_cast<int>(to_int(k, v)); }},
      {"seed", [&](auto& k, auto& v) { c.seed = to_uint(k, v); }},
      {"gamma", [&](auto& k, auto& v) { c.gamma = to_double(k, v); }},
      {"workers_file", [&](auto&, auto& v) { if (!v.empty()) c.workers_file = path(v); }},
      {"tasks_file", [&](auto&, auto& v) { if (!v.empty()) c.tasks_file = path(v); }},
      {"gold", [&](auto& k, auto& v) { c.gold.n_gold_per_type = static_cast<int>(to_int(k, v)); }},
      {"gold_smoothing", [&](auto& k, auto& v) { c.gold.add_one_smoothing = to_bool(k, v); }},
      {"alpha", [&](auto& k, auto& v) { c.constraints.alpha = to_double(k, v); }},
      {"beta", [&](auto& k, auto& v) { c.constraints.beta = to_double(k, v); }},
      {"budget", [&](auto& k, auto& v) { c.constraints.budget = to_double(k, v); }},
      {"fairness", [&](auto&, auto& v) { c.constraints.fairness_kind = parse_fairness_kind(v); }},
      {"sweep", [&](auto&, auto& v) { c.sweep = parse_sweep_axis(v); }},
      {"sweep_values",
       [&](auto& k, auto& v) {
         c.sweep_values.clear();
         for (const auto& x : list(v)) c.sweep_values.push_back(to_double(k, x));
       }},
      {"population.n_workers", [&](auto& k, auto& v) {
         const auto n = to_int(k, v);
         if (n < 1) bad(k, v, "must be >= 1");
         pop.n_workers = static_cast<std::size_t>(n);
       }},
      {"population.seed", [&](auto& k, auto& v) { pop.seed = to_uint(k, v); }},
      {"population.bias_model",
       [&](auto& k, auto& v) {
         if (v == "mixture") pop.bias_model = BiasModelKind::Mixture;
         else if (v == "interval") pop.bias_model = BiasModelKind::Interval;
         else bad(k, v, "expected mixture or interval");
       }},
      {"population.base_fpr", [&](auto& k, auto& v) { mix.base_fpr = to_range(k, v); }},
      {"population.base_fnr", [&](auto& k, auto& v) { mix.base_fnr = to_range(k, v); }},
      {"population.biased_fraction", [&](auto& k, auto& v) { mix.biased_fraction = to_double(k, v); }},
      {"population.majority_share", [&](auto& k, auto& v) { mix.majority_share = to_double(k, v); }},
      {"population.biased_fpr_offset", [&](auto& k, auto& v) { mix.biased_fpr_offset = to_range(k, v); }},
      {"population.biased_fnr_offset", [&](auto& k, auto& v) { mix.biased_fnr_offset = to_range(k, v); }},
      {"population.unbiased_fpr_offset", [&](auto& k, auto& v) { mix.unbiased_fpr_offset = to_range(k, v); }},
      {"population.unbiased_fnr_offset", [&](auto& k, auto& v) { mix.unbiased_fnr_offset = to_range(k, v); }},
      {kDiagKeys[0][0], [&](auto& k, auto& v) { pop.interval.diagonal[0][0] = to_range(k, v); }},
      {kDiagKeys[0][1], [&](auto& k, auto& v) { pop.interval.diagonal[0][1] = to_range(k, v); }},
      {kDiagKeys[1][0], [&](auto& k, auto& v) { pop.interval.diagonal[1][0] = to_range(k, v); }},
      {kDiagKeys[1][1], [&](auto& k, auto& v) { pop.interval.diagonal[1][1] = to_range(k, v); }},
      {"population.cost_model",
       [&](auto& k, auto& v) {
         if (v == "uniform") pop.cost.kind = CostModel::Kind::Uniform;
         else if (v == "accuracy-linked") pop.cost.kind = CostModel::Kind::AccuracyLinked;
         else bad(k, v, "expected uniform or accuracy-linked");
       }},
      {"population.fee", [&](auto& k, auto& v) { pop.cost.fee = to_double(k, v); }},
      {"population.low_fee", [&](auto& k, auto& v) { pop.cost.low_fee = to_double(k, v); }},
      {"population.high_fee", [&](auto& k, auto& v) { pop.cost.high_fee = to_double(k, v); }},
      {"pool.n_z0", [&](auto& k, auto& v) { c.pool.n_z0 = to_int(k, v); }},
      {"pool.n_z1", [&](auto& k, auto& v) { c.pool.n_z1 = to_int(k, v); }},
      {"pool.base_rate_z0", [&](auto& k, auto& v) { c.pool.base_rate_z0 = to_double(k, v); }},
      {"pool.base_rate_z1", [&](auto& k, auto& v) { c.pool.base_rate_z1 = to_double(k, v); }},
      {"pool.seed", [&](auto& k, auto& v) { c.pool.seed = to_uint(k, v); }},
  };

  for (const auto& [key, value] : kv) {
    const auto it = setters.find(key);
    if (it == setters.end()) throw ValidationError("unknown config key '" + key + "'");
    it->second(key, value);
  }
  c.validate();
  return c;
}

KeyValues to_key_values(const ExperimentConfig& c) {
  std::vector<std::string> methods;
  for (Method m : c.methods) methods.push_back(to_string(m));
  std::vector<std::string> sweep;
  for (double v : c.sweep_values) sweep.push_back(format_number(v));
  const auto& pop = c.population;
  const auto& mix = pop.mixture;

  KeyValues kv = {
      {"name", c.name},
      {"methods", join(methods)},
      {"repetitions", std::to_string(c.repetitions)},
      {"seed", std::to_string(c.seed)},
      {"gamma", format_number(c.gamma)},
      {"gold", std::to_string(c.gold.n_gold_per_type)},
      {"gold_smoothing", c.gold.add_one_smoothing ? "true" : "false"},
      {"alpha", from_double(c.constraints.alpha)},
      {"beta", from_double(c.constraints.beta)},
      {"budget", from_double(c.constraints.budget)},
      {"fairness", to_string(c.constraints.fairness_kind)},
      {"sweep", to_string(c.sweep)},
      {"sweep_values", join(sweep)},
  };
  if (c.workers_file) {
    kv.emplace_back("workers_file", std::filesystem::absolute(*c.workers_file).string());
  } else {
    kv.insert(kv.end(), {
        {"population.n_workers", std::to_string(pop.n_workers)},
        {"population.seed", std::to_string(pop.seed)},
        {"population.bias_model", pop.bias_model == BiasModelKind::Mixture ? "mixture" : "interval"},
        {"population.base_fpr", from_range(mix.base_fpr)},
        {"population.base_fnr", from_range(mix.base_fnr)},
        {"population.biased_fraction", format_number(mix.biased_fraction)},
        {"population.majority_share", format_number(mix.majority_share)},
        {"population.biased_fpr_offset", from_range(mix.biased_fpr_offset)},
        {"population.biased_fnr_offset", from_range(mix.biased_fnr_offset)},
        {"population.unbiased_fpr_offset", from_range(mix.unbiased_fpr_offset)},
        {"population.unbiased_fnr_offset", from_range(mix.unbiased_fnr_offset)},
    });
    for (int z = 0; z < 2; ++z)
      for (int y = 0; y < 2; ++y) kv.emplace_back(kDiagKeys[z][y], from_range(pop.interval.diagonal[z][y]));
    kv.insert(kv.end(), {
        {"population.cost_model", pop.cost.kind == CostModel::Kind::Uniform ? "uniform" : "accuracy-linked"},
        {"population.fee", format_number(pop.cost.fee)},
        {"population.low_fee", format_number(pop.cost.low_fee)},
        {"population.high_fee", format_number(pop.cost.high_fee)},
    });
  }
  if (c.tasks_file) {
    kv.emplace_back("tasks_file", std::filesystem::absolute(*c.tasks_file).string());
  } else {
    kv.insert(kv.end(), {
        {"pool.n_z0", std::to_string(c.pool.n_z0)},
        {"pool.n_z1", std::to_string(c.pool.n_z1)},
        {"pool.base_rate_z0", format_number(c.pool.base_rate_z0)},
        {"pool.base_rate_z1", format_number(c.pool.base_rate_z1)},
        {"pool.seed", std::to_string(c.pool.seed)},
    });
  }
  return kv;
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write '" + path.string() + "'");
  out << "# run manifest: replay with `crowdfdb replay " << path.filename().string() << "`\n";
  write_key_values(out, {{"manifest.version", m.version},
                         {"manifest.created_at", m.created_at},
                         {"manifest.results", m.results.string()},
                         {"manifest.summary", m.summary.string()}});
  write_key_values(out, m.config);
  if (!out) throw FormatError("write to '" + path.string() + "' failed");
}

RunManifest read_manifest(const std::filesystem::path& path) {
  RunManifest m;
  for (auto& [k, v] : read_key_values(path)) {
    if (k == "manifest.version") m.version = v;
    else if (k == "manifest.created_at") m.created_at = v;
    else if (k == "manifest.results") m.results = v;
    else if (k == "manifest.summary") m.summary = v;
    else if (k.rfind("manifest.", 0) == 0) throw ValidationError("unknown manifest key '" + k + "'");
    else m.config.emplace_back(k, v);
  }
  return m;
}

}  // namespace crowdfdb
