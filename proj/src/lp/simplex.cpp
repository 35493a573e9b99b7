// Bounded primal revised simplex.
//
// The program is first reduced: rows with a single nonzero become variable
// bounds and rows with identical (or negated) coefficient vectors are merged
// into one ranged row. The reduced problem is solved in the form
//
//   A x - r = 0,   l <= x <= u,   rl <= r <= ru
//
// starting from the all-logical basis, with artificial columns on rows whose
// logical cannot absorb the initial activity. Phase 1 drives the
// artificials to zero, phase 2 minimizes the cost, and an optional third
// phase minimizes the tie-break weights over the optimal face while every
// nonbasic column with a nonzero phase-2 reduced cost stays at its bound.
// Duals of the original rows are recovered from the phase-2 multipliers.

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>

#include "mpm/lp/solver.h"

namespace mpm::lp {
namespace {

constexpr double kPrimalTol = 1e-9;
constexpr double kDualTol = 1e-9;
constexpr double kPivotTol = 1e-9;
constexpr double kInfeasibilityTol = 1e-7;
constexpr int kRefactorInterval = 64;
constexpr int kDegenerateBeforeBland = 200;

using Clock = std::chrono::steady_clock;

// ---------------------------------------------------------------------------
// Reduction of the original program.

struct BoundSource {
  int row = -1;       // original row providing the bound, -1 = own bound
  double coef = 0.0;  // coefficient of the variable in that row
};

struct ReducedRow {
  std::vector<Term> terms;  // normalized so the first coefficient is > 0
  double lower = -kInfinity;
  double upper = kInfinity;
  int lower_row = -1;
  double lower_scale = 1.0;
  int upper_row = -1;
  double upper_scale = 1.0;
};

struct Reduction {
  bool infeasible = false;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<BoundSource> lower_source;
  std::vector<BoundSource> upper_source;
  std::vector<ReducedRow> rows;
};

std::vector<Term> canonical_terms(const std::vector<Term>& terms) {
  std::vector<Term> sorted = terms;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Term& a, const Term& b) { return a.var < b.var; });
  std::vector<Term> merged;
  for (const Term& t : sorted) {
    if (!merged.empty() && merged.back().var == t.var) {
      merged.back().coef += t.coef;
    } else {
      merged.push_back(t);
    }
  }
  std::erase_if(merged, [](const Term& t) { return t.coef == 0.0; });
  return merged;
}

std::string row_key(const std::vector<Term>& terms) {
  std::string key(terms.size() * (sizeof(int) + sizeof(double)), '\0');
  char* out = key.data();
  for (const Term& t : terms) {
    std::memcpy(out, &t.var, sizeof(int));
    out += sizeof(int);
    std::memcpy(out, &t.coef, sizeof(double));
    out += sizeof(double);
  }
  return key;
}

void tighten_lower(double value, int row, double scale_or_coef, double& bound,
                   int& source, double& source_scale) {
  const double tol = 1e-12 * std::max(1.0, std::abs(value));
  if (value > bound + tol) {
    bound = value;
    source = row;
    source_scale = scale_or_coef;
  } else if (value >= bound - tol && source < 0) {
    source = row;
    source_scale = scale_or_coef;
  }
}

void tighten_upper(double value, int row, double scale_or_coef, double& bound,
                   int& source, double& source_scale) {
  const double tol = 1e-12 * std::max(1.0, std::abs(value));
  if (value < bound - tol) {
    bound = value;
    source = row;
    source_scale = scale_or_coef;
  } else if (value <= bound + tol && source < 0) {
    source = row;
    source_scale = scale_or_coef;
  }
}

Reduction reduce(const LinearProgram& program) {
  Reduction red;
  const int n = program.num_variables();
  red.lower.resize(n);
  red.upper.resize(n);
  red.lower_source.resize(n);
  red.upper_source.resize(n);
  for (int j = 0; j < n; ++j) {
    red.lower[j] = program.variable(j).lower;
    red.upper[j] = program.variable(j).upper;
  }
  std::unordered_map<std::string, int> row_of_key;
  for (int k = 0; k < program.num_constraints(); ++k) {
    const Constraint& c = program.constraint(k);
    std::vector<Term> terms = canonical_terms(c.terms);
    const bool has_upper = c.sense != Sense::kGreaterEqual;
    const bool has_lower = c.sense != Sense::kLessEqual;
    if (terms.empty()) {
      if ((has_upper && c.rhs < -kInfeasibilityTol) ||
          (has_lower && c.rhs > kInfeasibilityTol)) {
        red.infeasible = true;
      }
      continue;
    }
    if (terms.size() == 1) {
      const int j = terms[0].var;
      const double a = terms[0].coef;
      const double value = c.rhs / a;
      // a > 0 keeps the direction of the inequality, a < 0 flips it.
      const bool gives_upper = a > 0 ? has_upper : has_lower;
      const bool gives_lower = a > 0 ? has_lower : has_upper;
      if (gives_upper) {
        tighten_upper(value, k, a, red.upper[j], red.upper_source[j].row,
                      red.upper_source[j].coef);
      }
      if (gives_lower) {
        tighten_lower(value, k, a, red.lower[j], red.lower_source[j].row,
                      red.lower_source[j].coef);
      }
      continue;
    }
    const double scale = terms[0].coef > 0 ? 1.0 : -1.0;
    if (scale < 0) {
      for (Term& t : terms) t.coef = -t.coef;
    }
    const std::string key = row_key(terms);
    auto [it, inserted] = row_of_key.emplace(key, static_cast<int>(red.rows.size()));
    if (inserted) {
      ReducedRow row;
      row.terms = std::move(terms);
      red.rows.push_back(std::move(row));
    }
    ReducedRow& row = red.rows[it->second];
    const double rhs = scale * c.rhs;
    const bool row_upper = scale > 0 ? has_upper : has_lower;
    const bool row_lower = scale > 0 ? has_lower : has_upper;
    if (row_upper) tighten_upper(rhs, k, scale, row.upper, row.upper_row, row.upper_scale);
    if (row_lower) tighten_lower(rhs, k, scale, row.lower, row.lower_row, row.lower_scale);
  }
  for (int j = 0; j < n; ++j) {
    if (red.lower[j] > red.upper[j]) {
      if (red.lower[j] - red.upper[j] > kInfeasibilityTol * std::max(1.0, std::abs(red.upper[j]))) {
        red.infeasible = true;
      } else {
        red.lower[j] = red.upper[j];
      }
    }
  }
  for (ReducedRow& row : red.rows) {
    if (row.lower > row.upper) {
      if (row.lower - row.upper > kInfeasibilityTol * std::max(1.0, std::abs(row.upper))) {
        red.infeasible = true;
      } else {
        row.lower = row.upper;
      }
    }
  }
  return red;
}

// ---------------------------------------------------------------------------
// Simplex engine on the reduced problem.

enum class ColStatus { kBasic, kAtLower, kAtUpper, kFree, kFixed };

struct Eta {
  int pos = 0;
  double pivot = 1.0;
  std::vector<std::pair<int, double>> entries;  // off-pivot nonzeros of alpha
};

enum class PhaseResult { kOptimal, kUnbounded, kTimeLimit, kNumericalFailure };

class Engine {
 public:
  Engine(const Reduction& red, int n, Clock::time_point deadline)
      : n_(n), m_(static_cast<int>(red.rows.size())), deadline_(deadline) {
    // Structural columns in compressed sparse column form.
    std::vector<int> counts(n_, 0);
    for (const ReducedRow& row : red.rows) {
      for (const Term& t : row.terms) ++counts[t.var];
    }
    col_start_.assign(n_ + 1, 0);
    for (int j = 0; j < n_; ++j) col_start_[j + 1] = col_start_[j] + counts[j];
    col_row_.resize(col_start_[n_]);
    col_val_.resize(col_start_[n_]);
    std::vector<int> fill(col_start_.begin(), col_start_.end() - 1);
    for (int i = 0; i < m_; ++i) {
      for (const Term& t : red.rows[i].terms) {
        col_row_[fill[t.var]] = i;
        col_val_[fill[t.var]] = t.coef;
        ++fill[t.var];
      }
    }
    lower_.assign(red.lower.begin(), red.lower.end());
    upper_.assign(red.upper.begin(), red.upper.end());
    for (const ReducedRow& row : red.rows) {
      lower_.push_back(row.lower);
      upper_.push_back(row.upper);
    }
  }

  int iterations() const { return iterations_; }
  int num_columns() const { return static_cast<int>(lower_.size()); }
  const std::vector<double>& values() const { return x_; }
  const std::vector<ColStatus>& status() const { return status_; }

  // Sets the starting point and builds the phase-1 problem. Returns false
  // when the initial basis cannot be factorized.
  bool initialize() {
    const int total = n_ + m_;
    lower_.resize(total);
    upper_.resize(total);
    art_row_.clear();
    art_sign_.clear();
    x_.assign(total, 0.0);
    status_.assign(total, ColStatus::kAtLower);
    for (int j = 0; j < n_; ++j) place_at_bound(j);
    std::vector<double> activity(m_, 0.0);
    for (int j = 0; j < n_; ++j) {
      if (x_[j] == 0.0) continue;
      for (int p = col_start_[j]; p < col_start_[j + 1]; ++p) {
        activity[col_row_[p]] += col_val_[p] * x_[j];
      }
    }
    head_.assign(m_, -1);
    for (int i = 0; i < m_; ++i) {
      const int logical = n_ + i;
      const double v = activity[i];
      if (v >= lower_[logical] - kPrimalTol && v <= upper_[logical] + kPrimalTol) {
        status_[logical] = ColStatus::kBasic;
        x_[logical] = v;
        head_[i] = logical;
        continue;
      }
      const double bound = v < lower_[logical] ? lower_[logical] : upper_[logical];
      x_[logical] = bound;
      status_[logical] = lower_[logical] == upper_[logical]
                             ? ColStatus::kFixed
                             : (bound == lower_[logical] ? ColStatus::kAtLower
                                                         : ColStatus::kAtUpper);
      // A x - r + sign * art = 0  =>  art = (r - v) / sign >= 0.
      const int art = static_cast<int>(lower_.size());
      art_row_.push_back(i);
      art_sign_.push_back(bound - v > 0 ? 1.0 : -1.0);
      lower_.push_back(0.0);
      upper_.push_back(kInfinity);
      x_.push_back(std::abs(bound - v));
      status_.push_back(ColStatus::kBasic);
      head_[i] = art;
    }
    return refactor();
  }

  void set_phase1_costs() {
    cost_.assign(num_columns(), 0.0);
    for (int k = 0; k < static_cast<int>(art_row_.size()); ++k) cost_[n_ + m_ + k] = 1.0;
  }

  void set_costs(const std::vector<double>& structural) {
    cost_.assign(num_columns(), 0.0);
    std::copy(structural.begin(), structural.end(), cost_.begin());
  }

  double artificial_sum() const {
    double sum = 0.0;
    for (int k = 0; k < static_cast<int>(art_row_.size()); ++k) sum += x_[n_ + m_ + k];
    return sum;
  }

  // Artificials are fixed at zero once phase 1 succeeds; basic ones are
  // pivoted out by the ratio test as soon as they would move.
  void retire_artificials() {
    for (int k = 0; k < static_cast<int>(art_row_.size()); ++k) {
      const int j = n_ + m_ + k;
      upper_[j] = 0.0;
      if (status_[j] != ColStatus::kBasic) {
        status_[j] = ColStatus::kFixed;
        x_[j] = 0.0;
      }
    }
  }

  // Nonbasic columns whose reduced cost is nonzero are frozen at their
  // current value; the remaining columns span the optimal face.
  void freeze_nonzero_reduced_costs(const std::vector<double>& reduced) {
    frozen_.assign(num_columns(), false);
    for (int j = 0; j < num_columns(); ++j) {
      if (status_[j] != ColStatus::kBasic && std::abs(reduced[j]) > kDualTol) frozen_[j] = true;
    }
  }

  std::vector<double> duals() {
    std::vector<double> basic_cost(m_);
    for (int p = 0; p < m_; ++p) basic_cost[p] = cost_[head_[p]];
    return btran(basic_cost);
  }

  std::vector<double> all_reduced_costs(const std::vector<double>& y) const {
    std::vector<double> d(num_columns());
    for (int j = 0; j < num_columns(); ++j) d[j] = cost_[j] - column_dot(j, y);
    return d;
  }

  PhaseResult run_phase() {
    int degenerate_run = 0;
    std::vector<double> alpha;
    while (true) {
      if ((iterations_ & 15) == 0 && Clock::now() > deadline_) return PhaseResult::kTimeLimit;
      if (static_cast<int>(etas_.size()) >= kRefactorInterval) {
        if (!refactor()) return PhaseResult::kNumericalFailure;
      }
      const bool bland = degenerate_run > kDegenerateBeforeBland;
      std::vector<double> y = duals();

      int entering = -1;
      double best_score = 0.0;
      double direction = 0.0;
      for (int j = 0; j < num_columns(); ++j) {
        const ColStatus s = status_[j];
        if (s == ColStatus::kBasic || s == ColStatus::kFixed) continue;
        if (!frozen_.empty() && frozen_[j]) continue;
        const double d = cost_[j] - column_dot(j, y);
        double score = 0.0;
        double dir = 0.0;
        if (s == ColStatus::kAtLower && d < -kDualTol) {
          score = -d;
          dir = 1.0;
        } else if (s == ColStatus::kAtUpper && d > kDualTol) {
          score = d;
          dir = -1.0;
        } else if (s == ColStatus::kFree && std::abs(d) > kDualTol) {
          score = std::abs(d);
          dir = d < 0 ? 1.0 : -1.0;
        }
        if (dir == 0.0) continue;
        if (bland) {
          entering = j;
          direction = dir;
          break;
        }
        if (score > best_score) {
          best_score = score;
          entering = j;
          direction = dir;
        }
      }
      if (entering < 0) return PhaseResult::kOptimal;

      alpha = ftran_column(entering);

      // Harris two-pass ratio test.
      double relaxed = kInfinity;
      for (int p = 0; p < m_; ++p) {
        const double a = direction * alpha[p];
        if (std::abs(a) <= kPivotTol) continue;
        const int k = head_[p];
        if (a > 0) {
          if (lower_[k] == -kInfinity) continue;
          relaxed = std::min(relaxed, (x_[k] - lower_[k] + kPrimalTol) / a);
        } else {
          if (upper_[k] == kInfinity) continue;
          relaxed = std::min(relaxed, (upper_[k] - x_[k] + kPrimalTol) / -a);
        }
      }
      const double flip = upper_[entering] - lower_[entering];
      int leave = -1;
      double theta = kInfinity;
      if (flip <= relaxed) {
        theta = flip;
      } else if (relaxed < kInfinity) {
        double best_pivot = 0.0;
        for (int p = 0; p < m_; ++p) {
          const double a = direction * alpha[p];
          if (std::abs(a) <= kPivotTol) continue;
          const int k = head_[p];
          double ratio;
          if (a > 0) {
            if (lower_[k] == -kInfinity) continue;
            ratio = std::max(0.0, x_[k] - lower_[k]) / a;
          } else {
            if (upper_[k] == kInfinity) continue;
            ratio = std::max(0.0, upper_[k] - x_[k]) / -a;
          }
          if (ratio > relaxed) continue;
          const bool better =
              bland ? (leave < 0 || k < head_[leave]) : std::abs(a) > best_pivot;
          if (better) {
            best_pivot = std::abs(a);
            leave = p;
            theta = ratio;
          }
        }
      }
      if (theta == kInfinity) return PhaseResult::kUnbounded;

      ++iterations_;
      degenerate_run = theta <= 1e-12 ? degenerate_run + 1 : 0;
      const double step = direction * theta;
      if (step != 0.0) {
        x_[entering] += step;
        for (int p = 0; p < m_; ++p) {
          if (alpha[p] != 0.0) x_[head_[p]] -= step * alpha[p];
        }
      }
      if (leave < 0) {
        status_[entering] = direction > 0 ? ColStatus::kAtUpper : ColStatus::kAtLower;
        x_[entering] = direction > 0 ? upper_[entering] : lower_[entering];
        continue;
      }
      const int leaving = head_[leave];
      const double a = direction * alpha[leave];
      const bool to_lower = a > 0;
      x_[leaving] = to_lower ? lower_[leaving] : upper_[leaving];
      status_[leaving] = lower_[leaving] == upper_[leaving]
                             ? ColStatus::kFixed
                             : (to_lower ? ColStatus::kAtLower : ColStatus::kAtUpper);
      status_[entering] = ColStatus::kBasic;
      head_[leave] = entering;
      push_eta(leave, alpha);
    }
  }

  bool refactor() {
    etas_.clear();
    if (m_ == 0) return true;
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(m_) * 3);
    for (int p = 0; p < m_; ++p) {
      const int j = head_[p];
      if (j < n_) {
        for (int q = col_start_[j]; q < col_start_[j + 1]; ++q) {
          triplets.emplace_back(col_row_[q], p, col_val_[q]);
        }
      } else if (j < n_ + m_) {
        triplets.emplace_back(j - n_, p, -1.0);
      } else {
        const int k = j - n_ - m_;
        triplets.emplace_back(art_row_[k], p, art_sign_[k]);
      }
    }
    basis_.resize(m_, m_);
    basis_.setFromTriplets(triplets.begin(), triplets.end());
    basis_.makeCompressed();
    lu_.compute(basis_);
    if (lu_.info() != Eigen::Success) return false;
    recompute_basic_values();
    return true;
  }

 private:
  void place_at_bound(int j) {
    if (lower_[j] == upper_[j]) {
      status_[j] = ColStatus::kFixed;
      x_[j] = lower_[j];
    } else if (lower_[j] > -kInfinity && (upper_[j] == kInfinity ||
                                          std::abs(lower_[j]) <= std::abs(upper_[j]))) {
      status_[j] = ColStatus::kAtLower;
      x_[j] = lower_[j];
    } else if (upper_[j] < kInfinity) {
      status_[j] = ColStatus::kAtUpper;
      x_[j] = upper_[j];
    } else {
      status_[j] = ColStatus::kFree;
      x_[j] = 0.0;
    }
  }

  double column_dot(int j, const std::vector<double>& y) const {
    if (j < n_) {
      double s = 0.0;
      for (int p = col_start_[j]; p < col_start_[j + 1]; ++p) s += col_val_[p] * y[col_row_[p]];
      return s;
    }
    if (j < n_ + m_) return -y[j - n_];
    const int k = j - n_ - m_;
    return art_sign_[k] * y[art_row_[k]];
  }

  void scatter_column(int j, double scale, Eigen::VectorXd& out) const {
    if (j < n_) {
      for (int p = col_start_[j]; p < col_start_[j + 1]; ++p) out[col_row_[p]] += scale * col_val_[p];
    } else if (j < n_ + m_) {
      out[j - n_] -= scale;
    } else {
      const int k = j - n_ - m_;
      out[art_row_[k]] += scale * art_sign_[k];
    }
  }

  std::vector<double> ftran(Eigen::VectorXd rhs) const {
    std::vector<double> w(m_);
    if (m_ == 0) return w;
    Eigen::VectorXd solved = lu_.solve(rhs);
    for (int p = 0; p < m_; ++p) w[p] = solved[p];
    for (const Eta& eta : etas_) {
      const double wr = w[eta.pos] / eta.pivot;
      w[eta.pos] = wr;
      if (wr == 0.0) continue;
      for (const auto& [i, a] : eta.entries) w[i] -= a * wr;
    }
    return w;
  }

  std::vector<double> ftran_column(int j) const {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m_);
    scatter_column(j, 1.0, rhs);
    return ftran(std::move(rhs));
  }

  std::vector<double> btran(std::vector<double> z) const {
    std::vector<double> y(m_);
    if (m_ == 0) return y;
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double s = z[it->pos];
      for (const auto& [i, a] : it->entries) s -= a * z[i];
      z[it->pos] = s / it->pivot;
    }
    Eigen::VectorXd rhs(m_);
    for (int p = 0; p < m_; ++p) rhs[p] = z[p];
    Eigen::VectorXd solved = lu_.transpose().solve(rhs);
    for (int i = 0; i < m_; ++i) y[i] = solved[i];
    return y;
  }

  void push_eta(int pos, const std::vector<double>& alpha) {
    Eta eta;
    eta.pos = pos;
    eta.pivot = alpha[pos];
    for (int p = 0; p < m_; ++p) {
      if (p != pos && alpha[p] != 0.0) eta.entries.emplace_back(p, alpha[p]);
    }
    etas_.push_back(std::move(eta));
  }

  void recompute_basic_values() {
    if (m_ == 0) return;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m_);
    for (int j = 0; j < num_columns(); ++j) {
      if (status_[j] == ColStatus::kBasic || x_[j] == 0.0) continue;
      scatter_column(j, -x_[j], rhs);
    }
    Eigen::VectorXd solved = lu_.solve(rhs);
    for (int p = 0; p < m_; ++p) x_[head_[p]] = solved[p];
  }

  int n_;
  int m_;
  Clock::time_point deadline_;
  std::vector<int> col_start_;
  std::vector<int> col_row_;
  std::vector<double> col_val_;
  std::vector<int> art_row_;
  std::vector<double> art_sign_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<double> cost_;
  std::vector<double> x_;
  std::vector<ColStatus> status_;
  std::vector<bool> frozen_;
  std::vector<int> head_;
  std::vector<Eta> etas_;
  Eigen::SparseMatrix<double> basis_;
  mutable Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  int iterations_ = 0;
};

// Maps phase-2 multipliers of the reduced problem back to the original rows.
std::vector<double> recover_duals(const LinearProgram& program, const Reduction& red,
                                  const std::vector<ColStatus>& status,
                                  const std::vector<double>& x,
                                  const std::vector<double>& y,
                                  const std::vector<double>& reduced) {
  const int n = program.num_variables();
  std::vector<double> dual(program.num_constraints(), 0.0);
  for (int i = 0; i < static_cast<int>(red.rows.size()); ++i) {
    const int logical = n + i;
    const ReducedRow& row = red.rows[i];
    const double yi = y[i];
    if (status[logical] == ColStatus::kBasic || yi == 0.0) continue;
    bool at_lower;
    if (status[logical] == ColStatus::kFixed) {
      at_lower = yi > 0;
    } else {
      at_lower = std::abs(x[logical] - row.lower) <= std::abs(x[logical] - row.upper);
    }
    if (at_lower && row.lower_row >= 0) dual[row.lower_row] = row.lower_scale * yi;
    if (!at_lower && row.upper_row >= 0) dual[row.upper_row] = row.upper_scale * yi;
  }
  for (int j = 0; j < n; ++j) {
    if (status[j] == ColStatus::kBasic) continue;
    const double d = reduced[j];
    if (d == 0.0) continue;
    bool at_lower;
    if (status[j] == ColStatus::kFixed) {
      at_lower = d > 0;
    } else {
      at_lower = status[j] == ColStatus::kAtLower;
    }
    const BoundSource& src = at_lower ? red.lower_source[j] : red.upper_source[j];
    if (src.row >= 0) dual[src.row] = d / src.coef;
  }
  return dual;
}

}  // namespace

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal:
      return "optimal";
    case SolveStatus::kInfeasible:
      return "infeasible";
    case SolveStatus::kUnbounded:
      return "unbounded";
    case SolveStatus::kTimeLimit:
      return "time-limit";
  }
  return "?";
}

LpSolution solve(const LinearProgram& program, const SolveOptions& options) {
  const auto start = Clock::now();
  const auto limit = std::chrono::duration<double>(std::max(0.0, options.time_limit_seconds));
  const auto deadline = start + std::chrono::duration_cast<Clock::duration>(limit);
  const int n = program.num_variables();

  LpSolution solution;
  solution.primal.assign(n, 0.0);
  solution.dual.assign(program.num_constraints(), 0.0);
  auto finish = [&](SolveStatus status) {
    solution.status = status;
    solution.objective = program.objective_value(solution.primal);
    solution.reduced_cost = reduced_costs(program, solution.dual);
    solution.solve_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    return solution;
  };

  const Reduction red = reduce(program);
  if (red.infeasible) return finish(SolveStatus::kInfeasible);

  std::vector<double> costs(n);
  std::vector<double> tie_break(n);
  for (int j = 0; j < n; ++j) {
    costs[j] = program.variable(j).cost;
    tie_break[j] = program.variable(j).tie_break;
  }

  Engine engine(red, n, deadline);
  auto copy_primal = [&] {
    for (int j = 0; j < n; ++j) solution.primal[j] = engine.values()[j];
  };
  auto run = [&](auto&& configure) -> PhaseResult {
    configure();
    PhaseResult result = engine.run_phase();
    solution.iterations = engine.iterations();
    return result;
  };

  if (!engine.initialize()) return finish(SolveStatus::kInfeasible);
  PhaseResult phase = run([&] { engine.set_phase1_costs(); });
  if (phase == PhaseResult::kTimeLimit) return finish(SolveStatus::kTimeLimit);
  if (phase != PhaseResult::kOptimal) return finish(SolveStatus::kInfeasible);
  engine.refactor();
  if (engine.artificial_sum() > kInfeasibilityTol) return finish(SolveStatus::kInfeasible);
  engine.retire_artificials();

  phase = run([&] { engine.set_costs(costs); });
  copy_primal();
  if (phase == PhaseResult::kTimeLimit) return finish(SolveStatus::kTimeLimit);
  if (phase == PhaseResult::kUnbounded) return finish(SolveStatus::kUnbounded);
  if (phase != PhaseResult::kOptimal) return finish(SolveStatus::kInfeasible);
  engine.refactor();

  const std::vector<double> y = engine.duals();
  const std::vector<double> reduced = engine.all_reduced_costs(y);
  const std::vector<ColStatus> status = engine.status();
  const std::vector<double> x_primary = engine.values();
  solution.dual = recover_duals(program, red, status, x_primary, y, reduced);

  if (options.tie_break && program.has_tie_break()) {
    engine.freeze_nonzero_reduced_costs(reduced);
    phase = run([&] { engine.set_costs(tie_break); });
    if (phase == PhaseResult::kOptimal) {
      engine.refactor();
    } else if (phase == PhaseResult::kTimeLimit) {
      copy_primal();
      return finish(SolveStatus::kTimeLimit);
    }
  }
  copy_primal();
  return finish(SolveStatus::kOptimal);
}

}  // namespace mpm::lp
