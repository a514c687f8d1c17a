#include "crowdfdb/worker_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "crowdfdb/tolerances.hpp"

namespace crowdfdb {

namespace {

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ValidationError(std::string(what) + " must lie in [0, 1], got " + std::to_string(p));
  }
}

}  // namespace

AccuracyMatrix::AccuracyMatrix(const std::array<std::array<double, 2>, 2>& entries)
    : entries_(entries) {
  for (int y = 0; y < 2; ++y) {
    for (int yh = 0; yh < 2; ++yh) check_probability(entries_[y][yh], "accuracy matrix entry");
    const double row = entries_[y][0] + entries_[y][1];
    if (std::abs(row - 1.0) > Tolerances::structural) {
      throw ValidationError("accuracy matrix row " + std::to_string(y) + " sums to " +
                            std::to_string(row) + ", expected 1");
    }
  }
}

AccuracyMatrix AccuracyMatrix::from_diagonal(double p00, double p11) {
  check_probability(p00, "diagonal entry [0,0]");
  check_probability(p11, "diagonal entry [1,1]");
  return AccuracyMatrix({{{p00, 1.0 - p00}, {1.0 - p11, p11}}});
}

double WorkerProfile::average_accuracy() const noexcept {
  return 0.25 * (matrix_z0(0, 0) + matrix_z0(1, 1) + matrix_z1(0, 0) + matrix_z1(1, 1));
}

void WorkerProfile::validate() const {
  if (!(cost >= 0.0) || !std::isfinite(cost)) {
    throw ValidationError("worker '" + id + "': cost must be finite and >= 0");
  }
}

Policy::Policy(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw ValidationError("policy must have at least one weight");
  double sum = 0.0;
  for (double w : weights_) {
    check_probability(w, "policy weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > Tolerances::policy_sum) {
    throw ValidationError("policy weights sum to " + std::to_string(sum) + ", expected 1");
  }
}

double Policy::entropy() const noexcept {
  double h = 0.0;
  for (double w : weights_) {
    if (w > 0.0) h -= w * std::log(w);
  }
  return h;
}

void Priors::validate() const {
  check_probability(p_z1, "P(Z=1)");
  check_probability(p_y1_given_z0, "P_{z=0}(Y=1)");
  check_probability(p_y1_given_z1, "P_{z=1}(Y=1)");
}

std::string to_string(FairnessKind kind) {
  switch (kind) {
    case FairnessKind::None: return "none";
    case FairnessKind::FprParity: return "fpr";
    case FairnessKind::FnrParity: return "fnr";
    case FairnessKind::ErrorRateParity: return "error-rate";
  }
  return "none";
}

FairnessKind parse_fairness_kind(std::string_view text) {
  std::string s(text);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  std::replace(s.begin(), s.end(), '_', '-');
  if (s == "none") return FairnessKind::None;
  if (s == "fpr" || s == "fpr-parity") return FairnessKind::FprParity;
  if (s == "fnr" || s == "fnr-parity") return FairnessKind::FnrParity;
  if (s == "error-rate" || s == "error-rate-parity" || s == "err") {
    return FairnessKind::ErrorRateParity;
  }
  throw ValidationError("unknown fairness kind '" + std::string(text) + "'");
}

std::vector<MatrixPair> matrices_of(std::span<const WorkerProfile> workers) {
  std::vector<MatrixPair> out;
  out.reserve(workers.size());
  for (const auto& w : workers) out.push_back({w.matrix_z0, w.matrix_z1});
  return out;
}

std::vector<double> costs_of(std::span<const WorkerProfile> workers) {
  std::vector<double> out;
  out.reserve(workers.size());
  for (const auto& w : workers) out.push_back(w.cost);
  return out;
}

PolicyAccuracy compose_policy_accuracy(const Policy& policy, std::span<const MatrixPair> matrices) {
  if (policy.size() != matrices.size()) {
    throw DimensionError("policy has " + std::to_string(policy.size()) + " weights but there are " +
                         std::to_string(matrices.size()) + " workers");
  }
  std::array<std::array<std::array<double, 2>, 2>, 2> acc{};
  for (std::size_t i = 0; i < matrices.size(); ++i) {
    const double s = policy[i];
    if (s == 0.0) continue;
    for (int z = 0; z < 2; ++z)
      for (int y = 0; y < 2; ++y)
        for (int yh = 0; yh < 2; ++yh) acc[z][y][yh] += s * matrices[i][z](y, yh);
  }
  // Rounding can leave a row a few ulps off 1; pin the off-diagonal to the
  // complement so the result passes the structural check.
  auto finish = [](std::array<std::array<double, 2>, 2> e) {
    for (int y = 0; y < 2; ++y) {
      e[y][y] = std::clamp(e[y][y], 0.0, 1.0);
      e[y][1 - y] = 1.0 - e[y][y];
    }
    return AccuracyMatrix(e);
  };
  return {finish(acc[0]), finish(acc[1])};
}

PolicyAccuracy compose_policy_accuracy(const Policy& policy, std::span<const WorkerProfile> workers) {
  const auto m = matrices_of(workers);
  return compose_policy_accuracy(policy, m);
}

double single_worker_accuracy(const MatrixPair& m, const Priors& priors) noexcept {
  double total = 0.0;
  for (int z = 0; z < 2; ++z)
    for (int y = 0; y < 2; ++y) total += priors.weight(z, y) * m[z](y, y);
  return total;
}

double expected_accuracy(const Policy& policy, std::span<const MatrixPair> matrices,
                         const Priors& priors) {
  if (policy.size() != matrices.size()) {
    throw DimensionError("policy has " + std::to_string(policy.size()) + " weights but there are " +
                         std::to_string(matrices.size()) + " workers");
  }
  priors.validate();
  double total = 0.0;
  for (std::size_t i = 0; i < matrices.size(); ++i) {
    total += policy[i] * single_worker_accuracy(matrices[i], priors);
  }
  return total;
}

double expected_accuracy(const Policy& policy, std::span<const WorkerProfile> workers,
                         const Priors& priors) {
  const auto m = matrices_of(workers);
  return expected_accuracy(policy, m, priors);
}

double fairness_gap(const PolicyAccuracy& pa, FairnessKind kind) noexcept {
  const double fpr = std::abs(pa.matrix_z0(0, 1) - pa.matrix_z1(0, 1));
  const double fnr = std::abs(pa.matrix_z0(1, 0) - pa.matrix_z1(1, 0));
  switch (kind) {
    case FairnessKind::None: return 0.0;
    case FairnessKind::FprParity: return fpr;
    case FairnessKind::FnrParity: return fnr;
    case FairnessKind::ErrorRateParity: return std::max(fpr, fnr);
  }
  return 0.0;
}

int sample_label(const WorkerProfile& worker, int z, int y, RandomStream& rng) noexcept {
  return rng.bernoulli(worker.matrix(z)(y, 1)) ? 1 : 0;
}

}  // namespace crowdfdb
