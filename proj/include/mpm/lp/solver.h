#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mpm/lp/linear_program.h"

namespace mpm::lp {

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded, kTimeLimit };

std::string_view to_string(SolveStatus status);

struct SolveOptions {
  double time_limit_seconds = 300.0;
  // Run the secondary (tie-break) objective over the optimal face when the
  // program carries tie-break weights.
  bool tie_break = true;
};

// Primal/dual solution of a LinearProgram.
//
// Duals follow the sensitivity convention dual = d(objective)/d(rhs): a
// binding <= row of a minimization has dual <= 0, a binding >= row has
// dual >= 0 and equality rows are free. Reduced costs are
// cost_j - sum_i a_ij * dual_i over all rows.
struct LpSolution {
  SolveStatus status = SolveStatus::kInfeasible;
  double objective = 0.0;
  std::vector<double> primal;
  std::vector<double> dual;
  std::vector<double> reduced_cost;
  double solve_seconds = 0.0;
  int iterations = 0;

  bool optimal() const { return status == SolveStatus::kOptimal; }

  double value(const LinearProgram& program, std::string_view variable) const;
  double dual_of(const LinearProgram& program, std::string_view constraint) const;
  std::map<std::string, double> primal_by_name(const LinearProgram& program) const;
  std::map<std::string, double> dual_by_name(const LinearProgram& program) const;
};

LpSolution solve(const LinearProgram& program, const SolveOptions& options = {});

// Objective of the Lagrangian dual at the given row multipliers:
//   sum_i rhs_i * dual_i + sum_j min over [l_j, u_j] of (c_j - a_j' dual) x_j
// plus the objective constant. Returns -infinity when a reduced cost points
// toward an infinite bound. By weak duality this never exceeds the optimum
// when the multipliers have the signs required by each row's sense.
double dual_objective(const LinearProgram& program, std::span<const double> duals);

// Reduced costs c_j - sum_i a_ij dual_i.
std::vector<double> reduced_costs(const LinearProgram& program,
                                  std::span<const double> duals);

struct KktReport {
  double primal_residual = 0.0;       // max row/bound violation
  double duality_gap = 0.0;           // |primal objective - dual objective|
  double complementarity = 0.0;       // max |dual_i| * |slack_i|
  double dual_sign_violation = 0.0;   // max wrong-signed dual or reduced cost
};

KktReport check_kkt(const LinearProgram& program, const LpSolution& solution);

// Writes the program in CPLEX LP text format.
void write_lp_format(const LinearProgram& program, std::ostream& out);

}  // namespace mpm::lp
