#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "crowdfdb/worker_model.hpp"

namespace crowdfdb {

/// Raised when the simplex cannot finish (iteration guard exceeded or a
/// numerically unusable tableau). Never raised for plain infeasibility.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fairness slack, diversity cap and per-label budget of the policy LP.
struct ConstraintSet {
  double alpha = 0.01;
  double beta = 0.5;
  /// Expected fee per label. +infinity omits the budget row.
  double budget = std::numeric_limits<double>::infinity();
  FairnessKind fairness_kind = FairnessKind::ErrorRateParity;

  bool has_budget() const noexcept { return budget != std::numeric_limits<double>::infinity(); }
  void validate() const;
};

enum class Relation { LessEqual, Equal };

/// Which constraint family a row belongs to; used for relaxation hints.
enum class RowFamily { Normalization, Diversity, Fairness, Budget };

std::string to_string(RowFamily family);

struct LpRow {
  std::vector<double> coefficients;
  Relation relation = Relation::LessEqual;
  double rhs = 0.0;
  RowFamily family = RowFamily::Fairness;
  std::string name;
};

/// min objective . S  subject to rows, S >= 0. Exactly one equality row,
/// sum_i S[i] = 1, so every feasible point is a policy.
class LpProblem {
 public:
  LpProblem(std::vector<double> objective, std::vector<LpRow> rows);

  std::size_t num_vars() const noexcept { return objective_.size(); }
  std::span<const double> objective() const noexcept { return objective_; }
  std::span<const LpRow> rows() const noexcept { return rows_; }

  std::size_t count(RowFamily family) const noexcept;
  /// Copy with every row of `family` dropped.
  LpProblem without(RowFamily family) const;

 private:
  std::vector<double> objective_;
  std::vector<LpRow> rows_;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

std::string to_string(LpStatus status);

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  /// Meaningful only when Optimal.
  Policy policy;
  /// Negated minimum, i.e. the expected accuracy for builder output.
  double objective_value = 0.0;
  std::size_t iterations = 0;
  /// For Infeasible results: families whose removal alone restores
  /// feasibility.
  std::vector<RowFamily> relaxation_hints;

  bool optimal() const noexcept { return status == LpStatus::Optimal; }
};

/// Objective coefficient of worker i is minus its expected accuracy under
/// the priors. Rows, in order: normalization, diversity[i], fairness pairs
/// (fpr then fnr as selected; omitted for an infinite alpha), budget
/// (omitted for an infinite budget).
LpProblem build_lp(std::span<const MatrixPair> estimates, std::span<const double> costs,
                   const Priors& priors, const ConstraintSet& cs);

/// Two-phase primal simplex on a dense tableau with Bland's rule.
LpSolution solve_lp(const LpProblem& lp);

struct RowViolation {
  /// Index into lp.rows(), or nullopt for a nonnegativity bound.
  std::optional<std::size_t> row;
  std::string name;
  double excess = 0.0;
};

/// Every row (and nonnegativity bound) violated by more than `tol`.
std::vector<RowViolation> verify_solution(const LpProblem& lp, std::span<const double> point,
                                          double tol);
std::vector<RowViolation> verify_solution(const LpProblem& lp, const LpSolution& sol, double tol);

/// Names of rows whose slack at `point` is within `tol`, equality row excluded.
std::vector<std::string> binding_rows(const LpProblem& lp, std::span<const double> point,
                                      double tol);

/// Fixed-format text listing: one line for the objective, one per row.
void dump_lp(const LpProblem& lp, std::ostream& out);
std::string dump_lp(const LpProblem& lp);

}  // namespace crowdfdb
