#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "mpm/lp/solver.h"

namespace mpm::lp {

double LpSolution::value(const LinearProgram& program, std::string_view variable) const {
  auto j = program.find_variable(variable);
  if (!j) throw std::out_of_range("unknown variable '" + std::string(variable) + "'");
  return primal.at(*j);
}

double LpSolution::dual_of(const LinearProgram& program, std::string_view constraint) const {
  auto i = program.find_constraint(constraint);
  if (!i) throw std::out_of_range("unknown constraint '" + std::string(constraint) + "'");
  return dual.at(*i);
}

std::map<std::string, double> LpSolution::primal_by_name(const LinearProgram& program) const {
  std::map<std::string, double> out;
  for (int j = 0; j < program.num_variables(); ++j) out[program.variable(j).name] = primal.at(j);
  return out;
}

std::map<std::string, double> LpSolution::dual_by_name(const LinearProgram& program) const {
  std::map<std::string, double> out;
  for (int i = 0; i < program.num_constraints(); ++i) out[program.constraint(i).name] = dual.at(i);
  return out;
}

std::vector<double> reduced_costs(const LinearProgram& program, std::span<const double> duals) {
  std::vector<double> d(program.num_variables());
  for (int j = 0; j < program.num_variables(); ++j) d[j] = program.variable(j).cost;
  for (int i = 0; i < program.num_constraints(); ++i) {
    const double y = duals[i];
    if (y == 0.0) continue;
    for (const Term& t : program.constraint(i).terms) d[t.var] -= t.coef * y;
  }
  return d;
}

double dual_objective(const LinearProgram& program, std::span<const double> duals) {
  double value = program.objective_constant();
  for (int i = 0; i < program.num_constraints(); ++i) value += program.constraint(i).rhs * duals[i];
  const std::vector<double> d = reduced_costs(program, duals);
  for (int j = 0; j < program.num_variables(); ++j) {
    const Variable& v = program.variable(j);
    const double negligible = 1e-9 * (1.0 + std::abs(v.cost));
    if (d[j] > 0) {
      if (v.lower == -kInfinity) {
        if (d[j] > negligible) return -kInfinity;
        continue;
      }
      value += v.lower * d[j];
    } else if (d[j] < 0) {
      if (v.upper == kInfinity) {
        if (-d[j] > negligible) return -kInfinity;
        continue;
      }
      value += v.upper * d[j];
    }
  }
  return value;
}

KktReport check_kkt(const LinearProgram& program, const LpSolution& solution) {
  KktReport report;
  const auto& x = solution.primal;
  for (int j = 0; j < program.num_variables(); ++j) {
    const Variable& v = program.variable(j);
    report.primal_residual = std::max({report.primal_residual, v.lower - x[j], x[j] - v.upper});
  }
  for (int i = 0; i < program.num_constraints(); ++i) {
    const Constraint& c = program.constraint(i);
    report.primal_residual = std::max(report.primal_residual, program.violation(i, x));
    const double slack = std::abs(c.rhs - program.activity(i, x));
    const double y = solution.dual[i];
    report.complementarity = std::max(report.complementarity, std::abs(y) * slack);
    if (c.sense == Sense::kLessEqual) {
      report.dual_sign_violation = std::max(report.dual_sign_violation, y);
    } else if (c.sense == Sense::kGreaterEqual) {
      report.dual_sign_violation = std::max(report.dual_sign_violation, -y);
    }
  }
  const std::vector<double> d = reduced_costs(program, solution.dual);
  for (int j = 0; j < program.num_variables(); ++j) {
    const Variable& v = program.variable(j);
    if (d[j] > 0) {
      if (v.lower == -kInfinity) {
        report.dual_sign_violation = std::max(report.dual_sign_violation, d[j]);
      } else {
        report.complementarity = std::max(report.complementarity, d[j] * (x[j] - v.lower));
      }
    } else if (d[j] < 0) {
      if (v.upper == kInfinity) {
        report.dual_sign_violation = std::max(report.dual_sign_violation, -d[j]);
      } else {
        report.complementarity = std::max(report.complementarity, -d[j] * (v.upper - x[j]));
      }
    }
  }
  report.duality_gap = std::abs(program.objective_value(x) - dual_objective(program, solution.dual));
  return report;
}

namespace {

// LP-format identifiers may not contain brackets or commas.
std::string lp_name(const std::string& name) {
  std::string out = name;
  for (char& c : out) {
    if (c == '[' || c == ']' || c == ',' || c == ' ' || c == ':') c = '_';
  }
  return out;
}

void write_number(std::ostream& out, double value) {
  if (value == kInfinity) {
    out << "+inf";
  } else if (value == -kInfinity) {
    out << "-inf";
  } else {
    out << value;
  }
}

}  // namespace

void write_lp_format(const LinearProgram& program, std::ostream& out) {
  const auto precision = out.precision(17);
  out << "\\ objective constant: " << program.objective_constant() << "\n";
  out << "Minimize\n obj:";
  bool any = false;
  for (int j = 0; j < program.num_variables(); ++j) {
    const Variable& v = program.variable(j);
    if (v.cost == 0.0) continue;
    out << (v.cost < 0 ? " - " : " + ") << std::abs(v.cost) << " " << lp_name(v.name);
    any = true;
  }
  if (!any) out << " 0 " << (program.num_variables() > 0 ? lp_name(program.variable(0).name) : "");
  out << "\nSubject To\n";
  for (int i = 0; i < program.num_constraints(); ++i) {
    const Constraint& c = program.constraint(i);
    out << " " << lp_name(c.name) << ":";
    if (c.terms.empty()) out << " 0 " << lp_name(program.variable(0).name);
    for (const Term& t : c.terms) {
      out << (t.coef < 0 ? " - " : " + ") << std::abs(t.coef) << " "
          << lp_name(program.variable(t.var).name);
    }
    out << " " << to_string(c.sense) << " " << c.rhs << "\n";
  }
  out << "Bounds\n";
  for (int j = 0; j < program.num_variables(); ++j) {
    const Variable& v = program.variable(j);
    out << " ";
    if (v.lower == -kInfinity && v.upper == kInfinity) {
      out << lp_name(v.name) << " free\n";
      continue;
    }
    write_number(out, v.lower);
    out << " <= " << lp_name(v.name) << " <= ";
    write_number(out, v.upper);
    out << "\n";
  }
  out << "End\n";
  out.precision(precision);
}

}  // namespace mpm::lp
