#include "crowdfdb/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "crowdfdb/tolerances.hpp"

namespace crowdfdb {

void ConstraintSet::validate() const {
  if (!(alpha >= 0.0)) throw ValidationError("alpha must be >= 0");
  if (!(beta >= 0.0 && beta < 1.0)) throw ValidationError("beta must lie in [0, 1)");
  if (!(budget >= 0.0)) throw ValidationError("budget must be >= 0");
}

std::string to_string(RowFamily family) {
  switch (family) {
    case RowFamily::Normalization: return "normalization";
    case RowFamily::Diversity: return "diversity";
    case RowFamily::Fairness: return "fairness";
    case RowFamily::Budget: return "budget";
  }
  return "?";
}

std::string to_string(LpStatus status) {
  switch (status) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
  }
  return "?";
}

LpProblem::LpProblem(std::vector<double> objective, std::vector<LpRow> rows)
    : objective_(std::move(objective)), rows_(std::move(rows)) {
  if (objective_.empty()) throw DimensionError("LP needs at least one variable");
  std::size_t equalities = 0;
  for (const auto& r : rows_) {
    if (r.coefficients.size() != objective_.size()) {
      throw DimensionError("LP row '" + r.name + "' has " + std::to_string(r.coefficients.size()) +
                           " coefficients, expected " + std::to_string(objective_.size()));
    }
    if (r.relation == Relation::Equal) {
      ++equalities;
      const bool ones = std::all_of(r.coefficients.begin(), r.coefficients.end(),
                                    [](double a) { return a == 1.0; });
      if (!ones || r.rhs != 1.0) {
        throw ValidationError("LP equality row must be sum_i S[i] = 1");
      }
    }
  }
  if (equalities != 1) throw ValidationError("LP must contain exactly one equality row");
}

std::size_t LpProblem::count(RowFamily family) const noexcept {
  return static_cast<std::size_t>(std::count_if(
      rows_.begin(), rows_.end(), [family](const LpRow& r) { return r.family == family; }));
}

LpProblem LpProblem::without(RowFamily family) const {
  std::vector<LpRow> kept;
  for (const auto& r : rows_) {
    if (r.family != family) kept.push_back(r);
  }
  return LpProblem(objective_, std::move(kept));
}

LpProblem build_lp(std::span<const MatrixPair> estimates, std::span<const double> costs,
                   const Priors& priors, const ConstraintSet& cs) {
  const std::size_t n = estimates.size();
  if (n == 0) throw DimensionError("LP needs at least one worker");
  if (costs.size() != n) {
    throw DimensionError("got " + std::to_string(costs.size()) + " costs for " +
                         std::to_string(n) + " workers");
  }
  priors.validate();
  cs.validate();

  std::vector<double> objective(n);
  for (std::size_t i = 0; i < n; ++i) objective[i] = -single_worker_accuracy(estimates[i], priors);

  std::vector<LpRow> rows;
  rows.reserve(n + 6);
  rows.push_back({std::vector<double>(n, 1.0), Relation::Equal, 1.0, RowFamily::Normalization,
                  "normalization"});
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> a(n, 0.0);
    a[i] = 1.0;
    rows.push_back({std::move(a), Relation::LessEqual, cs.beta, RowFamily::Diversity,
                    "diversity[" + std::to_string(i) + "]"});
  }

  // |sum_i S[i] (A_i0[y,1-y] - A_i1[y,1-y])| <= alpha as two rows.
  auto add_parity_pair = [&](int y, const char* label) {
    std::vector<double> diff(n);
    for (std::size_t i = 0; i < n; ++i) diff[i] = estimates[i].z0(y, 1 - y) - estimates[i].z1(y, 1 - y);
    std::vector<double> neg(n);
    std::transform(diff.begin(), diff.end(), neg.begin(), [](double d) { return -d; });
    rows.push_back({std::move(diff), Relation::LessEqual, cs.alpha, RowFamily::Fairness,
                    std::string(label) + "_upper"});
    rows.push_back({std::move(neg), Relation::LessEqual, cs.alpha, RowFamily::Fairness,
                    std::string(label) + "_lower"});
  };
  // an infinite alpha leaves nothing to enforce
  const bool fair = std::isfinite(cs.alpha);
  if (fair && (cs.fairness_kind == FairnessKind::FprParity || cs.fairness_kind == FairnessKind::ErrorRateParity)) {
    add_parity_pair(0, "fpr");
  }
  if (fair && (cs.fairness_kind == FairnessKind::FnrParity || cs.fairness_kind == FairnessKind::ErrorRateParity)) {
    add_parity_pair(1, "fnr");
  }

  if (cs.has_budget()) {
    std::vector<double> c(costs.begin(), costs.end());
    rows.push_back({std::move(c), Relation::LessEqual, cs.budget, RowFamily::Budget, "budget"});
  }
  return LpProblem(std::move(objective), std::move(rows));
}

namespace {

/// Dense simplex tableau. Row-major, `width` = columns + 1 (rhs last).
class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), width_(cols + 1), data_(rows * (cols + 1), 0.0),
        cost_(cols + 1, 0.0), basis_(rows, 0) {}

  double& at(std::size_t r, std::size_t c) { return data_[r * width_ + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * width_ + c]; }
  double& rhs(std::size_t r) { return data_[r * width_ + cols_]; }
  double rhs(std::size_t r) const { return data_[r * width_ + cols_]; }
  std::vector<double>& cost() { return cost_; }
  std::vector<std::size_t>& basis() { return basis_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  /// Reduced-cost row for the cost vector `c` given the current basis.
  void price(std::span<const double> c) {
    std::fill(cost_.begin(), cost_.end(), 0.0);
    std::copy(c.begin(), c.end(), cost_.begin());
    for (std::size_t r = 0; r < rows_; ++r) {
      const double cb = c[basis_[r]];
      if (cb == 0.0) continue;
      const double* row = &data_[r * width_];
      for (std::size_t j = 0; j < width_; ++j) cost_[j] -= cb * row[j];
    }
  }

  void pivot(std::size_t pr, std::size_t pc) {
    double* prow = &data_[pr * width_];
    const double inv = 1.0 / prow[pc];
    for (std::size_t j = 0; j < width_; ++j) prow[j] *= inv;
    prow[pc] = 1.0;
    for (std::size_t r = 0; r < rows_; ++r) {
      if (r == pr) continue;
      double* row = &data_[r * width_];
      const double f = row[pc];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < width_; ++j) row[j] -= f * prow[j];
      row[pc] = 0.0;
    }
    const double f = cost_[pc];
    if (f != 0.0) {
      for (std::size_t j = 0; j < width_; ++j) cost_[j] -= f * prow[j];
      cost_[pc] = 0.0;
    }
    basis_[pr] = pc;
  }

 private:
  std::size_t rows_, cols_, width_;
  std::vector<double> data_;
  std::vector<double> cost_;
  std::vector<std::size_t> basis_;
};

enum class PhaseResult { Optimal, Unbounded };

/// Bland's rule: lowest-index improving column enters; among rows tied on
/// the ratio test, the one whose basic variable has the lowest index leaves.
PhaseResult run_phase(Tableau& t, std::size_t eligible_cols, std::size_t& iterations,
                      std::size_t max_iterations) {
  for (;;) {
    std::size_t enter = eligible_cols;
    for (std::size_t j = 0; j < eligible_cols; ++j) {
      if (t.cost()[j] < -Tolerances::lp_optimality) {
        enter = j;
        break;
      }
    }
    if (enter == eligible_cols) return PhaseResult::Optimal;

    std::size_t leave = t.rows();
    double best_ratio = 0.0;
    for (std::size_t r = 0; r < t.rows(); ++r) {
      const double a = t.at(r, enter);
      if (a <= Tolerances::lp_pivot) continue;
      const double ratio = std::max(t.rhs(r), 0.0) / a;
      if (leave == t.rows() || ratio < best_ratio ||
          (ratio == best_ratio && t.basis()[r] < t.basis()[leave])) {
        leave = r;
        best_ratio = ratio;
      }
    }
    if (leave == t.rows()) return PhaseResult::Unbounded;

    if (++iterations > max_iterations) {
      throw SolverError("simplex iteration limit (" + std::to_string(max_iterations) + ") exceeded");
    }
    t.pivot(leave, enter);
  }
}

LpSolution solve_once(const LpProblem& lp) {
  const std::size_t n = lp.num_vars();
  const auto rows = lp.rows();
  const std::size_t m = rows.size();

  // Column layout: structural | slack or surplus per inequality | artificial.
  std::size_t n_slack = 0;
  std::size_t n_art = 0;
  std::vector<double> sign(m, 1.0);
  std::vector<bool> needs_art(m, false);
  for (std::size_t r = 0; r < m; ++r) {
    if (rows[r].rhs < 0.0) sign[r] = -1.0;
    if (rows[r].relation == Relation::LessEqual) ++n_slack;
    needs_art[r] = rows[r].relation == Relation::Equal || sign[r] < 0.0;
    if (needs_art[r]) ++n_art;
  }
  const std::size_t art_begin = n + n_slack;
  const std::size_t cols = art_begin + n_art;

  Tableau t(m, cols);
  std::size_t slack_col = n;
  std::size_t art_col = art_begin;
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t j = 0; j < n; ++j) t.at(r, j) = sign[r] * rows[r].coefficients[j];
    t.rhs(r) = sign[r] * rows[r].rhs;
    if (rows[r].relation == Relation::LessEqual) {
      t.at(r, slack_col) = sign[r];
      if (!needs_art[r]) t.basis()[r] = slack_col;
      ++slack_col;
    }
    if (needs_art[r]) {
      t.at(r, art_col) = 1.0;
      t.basis()[r] = art_col;
      ++art_col;
    }
  }

  const std::size_t max_iterations = 50 * (m + cols) + 1000;
  LpSolution sol;

  if (n_art > 0) {
    std::vector<double> phase1(cols, 0.0);
    std::fill(phase1.begin() + static_cast<std::ptrdiff_t>(art_begin), phase1.end(), 1.0);
    t.price(phase1);
    run_phase(t, cols, sol.iterations, max_iterations);
    double infeasibility = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
      if (t.basis()[r] >= art_begin) infeasibility += std::max(t.rhs(r), 0.0);
    }
    if (infeasibility > Tolerances::lp_feasibility) {
      sol.status = LpStatus::Infeasible;
      return sol;
    }
    // Drive zero-valued artificials out of the basis where possible; rows
    // with no usable pivot are redundant and keep their artificial at 0.
    for (std::size_t r = 0; r < m; ++r) {
      if (t.basis()[r] < art_begin) continue;
      for (std::size_t j = 0; j < art_begin; ++j) {
        if (std::abs(t.at(r, j)) > Tolerances::lp_pivot) {
          t.pivot(r, j);
          break;
        }
      }
    }
  }

  std::vector<double> phase2(cols, 0.0);
  std::copy(lp.objective().begin(), lp.objective().end(), phase2.begin());
  t.price(phase2);
  if (run_phase(t, art_begin, sol.iterations, max_iterations) == PhaseResult::Unbounded) {
    sol.status = LpStatus::Unbounded;
    return sol;
  }

  std::vector<double> x(n, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    if (t.basis()[r] < n) x[t.basis()[r]] = std::max(t.rhs(r), 0.0);
  }
  // Pivoting leaves the weights a few ulps away from summing to 1.
  double sum = 0.0;
  for (double v : x) sum += v;
  if (!(std::abs(sum - 1.0) <= Tolerances::lp_feasibility)) {
    throw SolverError("simplex returned weights summing to " + std::to_string(sum));
  }
  for (double& v : x) v = std::min(v / sum, 1.0);

  double value = 0.0;
  for (std::size_t j = 0; j < n; ++j) value += lp.objective()[j] * x[j];
  sol.status = LpStatus::Optimal;
  sol.policy = Policy(std::move(x));
  sol.objective_value = -value;
  return sol;
}

}  // namespace

LpSolution solve_lp(const LpProblem& lp) {
  LpSolution sol = solve_once(lp);
  if (sol.status == LpStatus::Infeasible) {
    for (RowFamily family : {RowFamily::Fairness, RowFamily::Diversity, RowFamily::Budget}) {
      if (lp.count(family) == 0) continue;
      if (solve_once(lp.without(family)).status == LpStatus::Optimal) {
        sol.relaxation_hints.push_back(family);
      }
    }
  }
  return sol;
}

std::vector<RowViolation> verify_solution(const LpProblem& lp, std::span<const double> point,
                                          double tol) {
  if (point.size() != lp.num_vars()) {
    throw DimensionError("point has " + std::to_string(point.size()) + " entries, LP has " +
                         std::to_string(lp.num_vars()) + " variables");
  }
  std::vector<RowViolation> out;
  for (std::size_t j = 0; j < point.size(); ++j) {
    if (point[j] < -tol) {
      out.push_back({std::nullopt, "nonnegativity[" + std::to_string(j) + "]", -point[j]});
    }
  }
  const auto rows = lp.rows();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    double lhs = 0.0;
    for (std::size_t j = 0; j < point.size(); ++j) lhs += rows[r].coefficients[j] * point[j];
    const double excess = rows[r].relation == Relation::Equal ? std::abs(lhs - rows[r].rhs)
                                                             : lhs - rows[r].rhs;
    if (excess > tol) out.push_back({r, rows[r].name, excess});
  }
  return out;
}

std::vector<RowViolation> verify_solution(const LpProblem& lp, const LpSolution& sol, double tol) {
  return verify_solution(lp, sol.policy.weights(), tol);
}

std::vector<std::string> binding_rows(const LpProblem& lp, std::span<const double> point,
                                      double tol) {
  std::vector<std::string> out;
  for (const auto& row : lp.rows()) {
    if (row.relation == Relation::Equal) continue;
    double lhs = 0.0;
    for (std::size_t j = 0; j < point.size(); ++j) lhs += row.coefficients[j] * point[j];
    if (std::abs(row.rhs - lhs) <= tol) out.push_back(row.name);
  }
  return out;
}

void dump_lp(const LpProblem& lp, std::ostream& out) {
  char buf[32];
  auto num = [&buf](double v) {
    std::snprintf(buf, sizeof buf, "%+.12e", v);
    return std::string(buf);
  };
  out << "minimize";
  for (double c : lp.objective()) out << ' ' << num(c);
  out << '\n';
  for (const auto& row : lp.rows()) {
    out << row.name << ':';
    for (double a : row.coefficients) out << ' ' << num(a);
    out << (row.relation == Relation::Equal ? " = " : " <= ") << num(row.rhs) << '\n';
  }
}

std::string dump_lp(const LpProblem& lp) {
  std::ostringstream os;
  dump_lp(lp, os);
  return os.str();
}

}  // namespace crowdfdb
