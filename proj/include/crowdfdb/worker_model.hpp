#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "crowdfdb/rng.hpp"

namespace crowdfdb {

/// Thrown when two inputs that must agree in length do not.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a value violates a domain invariant (probability out of
/// range, row sum off, negative fee, ...).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// 2x2 row-stochastic matrix of P(reported label | true label), indexed
/// [y][yhat]. Validated at construction, never renormalized.
class AccuracyMatrix {
 public:
  /// Identity (a perfectly accurate worker).
  AccuracyMatrix() noexcept : entries_{{{1.0, 0.0}, {0.0, 1.0}}} {}
  explicit AccuracyMatrix(const std::array<std::array<double, 2>, 2>& entries);

  /// Matrix with the given diagonal; off-diagonals are 1 - diagonal.
  static AccuracyMatrix from_diagonal(double p00, double p11);

  double operator()(int y, int yhat) const noexcept { return entries_[y][yhat]; }
  double false_positive_rate() const noexcept { return entries_[0][1]; }
  double false_negative_rate() const noexcept { return entries_[1][0]; }

  const std::array<std::array<double, 2>, 2>& entries() const noexcept { return entries_; }

  friend bool operator==(const AccuracyMatrix&, const AccuracyMatrix&) = default;

 private:
  std::array<std::array<double, 2>, 2> entries_;
};

struct WorkerProfile {
  std::string id;
  AccuracyMatrix matrix_z0;
  AccuracyMatrix matrix_z1;
  double cost = 1.0;

  const AccuracyMatrix& matrix(int z) const noexcept { return z == 0 ? matrix_z0 : matrix_z1; }
  /// Mean of the four diagonal entries.
  double average_accuracy() const noexcept;
  /// Throws ValidationError on a negative or non-finite cost.
  void validate() const;

  friend bool operator==(const WorkerProfile&, const WorkerProfile&) = default;
};

/// Stochastic vector of worker selection probabilities.
class Policy {
 public:
  Policy() = default;
  explicit Policy(std::vector<double> weights);

  std::size_t size() const noexcept { return weights_.size(); }
  double operator[](std::size_t i) const noexcept { return weights_[i]; }
  std::span<const double> weights() const noexcept { return weights_; }

  /// Shannon entropy in nats.
  double entropy() const noexcept;

  friend bool operator==(const Policy&, const Policy&) = default;

 private:
  std::vector<double> weights_;
};

struct Priors {
  double p_z1 = 0.5;
  double p_y1_given_z0 = 0.5;
  double p_y1_given_z1 = 0.5;

  double p_z(int z) const noexcept { return z == 1 ? p_z1 : 1.0 - p_z1; }
  double p_y_given_z(int y, int z) const noexcept {
    const double p1 = z == 1 ? p_y1_given_z1 : p_y1_given_z0;
    return y == 1 ? p1 : 1.0 - p1;
  }
  /// Joint weight P(Z=z) * P_z(Y=y) of a (z, y) task type.
  double weight(int z, int y) const noexcept { return p_z(z) * p_y_given_z(y, z); }
  void validate() const;
};

struct PolicyAccuracy {
  AccuracyMatrix matrix_z0;
  AccuracyMatrix matrix_z1;
};

enum class FairnessKind { None, FprParity, FnrParity, ErrorRateParity };

std::string to_string(FairnessKind kind);
/// Accepts none, fpr, fnr, error-rate (and a few spellings of each).
FairnessKind parse_fairness_kind(std::string_view text);

/// Per-worker matrix pair, used for both true and estimated matrices.
struct MatrixPair {
  AccuracyMatrix z0;
  AccuracyMatrix z1;

  const AccuracyMatrix& operator[](int z) const noexcept { return z == 0 ? z0 : z1; }
  friend bool operator==(const MatrixPair&, const MatrixPair&) = default;
};

std::vector<MatrixPair> matrices_of(std::span<const WorkerProfile> workers);
std::vector<double> costs_of(std::span<const WorkerProfile> workers);

/// Entrywise sum_i S[i] * A_iz for z = 0, 1.
PolicyAccuracy compose_policy_accuracy(const Policy& policy, std::span<const MatrixPair> matrices);
PolicyAccuracy compose_policy_accuracy(const Policy& policy, std::span<const WorkerProfile> workers);

/// Expected accuracy of one worker: sum_z P(z) sum_y P_z(y) A_z[y,y].
double single_worker_accuracy(const MatrixPair& m, const Priors& priors) noexcept;

/// sum_z P(z) sum_y P_z(y) sum_i S[i] A_iz[y,y].
double expected_accuracy(const Policy& policy, std::span<const MatrixPair> matrices,
                         const Priors& priors);
double expected_accuracy(const Policy& policy, std::span<const WorkerProfile> workers,
                         const Priors& priors);

/// |FPR_0 - FPR_1|, |FNR_0 - FNR_1|, or the larger of the two. None gives 0.
double fairness_gap(const PolicyAccuracy& pa, FairnessKind kind) noexcept;

/// One label from row y of the worker's matrix for group z.
int sample_label(const WorkerProfile& worker, int z, int y, RandomStream& rng) noexcept;

}  // namespace crowdfdb
