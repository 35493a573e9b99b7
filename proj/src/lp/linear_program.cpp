#include "mpm/lp/linear_program.h"

#include <cmath>
#include <stdexcept>

namespace mpm::lp {

std::string_view to_string(Sense sense) {
  switch (sense) {
    case Sense::kLessEqual:
      return "<=";
    case Sense::kEqual:
      return "=";
    case Sense::kGreaterEqual:
      return ">=";
  }
  return "?";
}

std::string_view to_string(ConstraintTag tag) {
  switch (tag) {
    case ConstraintTag::kIntertemporal:
      return "intertemporal";
    case ConstraintTag::kSystem:
      return "system";
    case ConstraintTag::kResource:
      return "resource";
    case ConstraintTag::kBoundary:
      return "boundary";
  }
  return "?";
}

int LinearProgram::add_variable(std::string name, double lower, double upper,
                                double cost) {
  if (std::isnan(lower) || std::isnan(upper) || !std::isfinite(cost)) {
    throw std::invalid_argument("variable '" + name + "': non-finite data");
  }
  if (lower > upper) {
    throw std::invalid_argument("variable '" + name + "': lower bound exceeds upper bound");
  }
  if (lower == kInfinity || upper == -kInfinity) {
    throw std::invalid_argument("variable '" + name + "': bound on the wrong side of infinity");
  }
  const int index = num_variables();
  auto [it, inserted] = variable_index_.emplace(name, index);
  if (!inserted) {
    throw std::invalid_argument("duplicate variable name '" + name + "'");
  }
  variables_.push_back(Variable{std::move(name), lower, upper, cost, 0.0});
  return index;
}

int LinearProgram::add_constraint(std::string name, ConstraintTag tag,
                                  std::vector<Term> terms, Sense sense,
                                  double rhs) {
  if (!std::isfinite(rhs)) {
    throw std::invalid_argument("constraint '" + name + "': non-finite right-hand side");
  }
  for (const Term& term : terms) {
    if (term.var < 0 || term.var >= num_variables()) {
      throw std::invalid_argument("constraint '" + name + "' references an undeclared variable");
    }
    if (!std::isfinite(term.coef)) {
      throw std::invalid_argument("constraint '" + name + "': non-finite coefficient");
    }
  }
  const int index = num_constraints();
  auto [it, inserted] = constraint_index_.emplace(name, index);
  if (!inserted) {
    throw std::invalid_argument("duplicate constraint name '" + name + "'");
  }
  constraints_.push_back(Constraint{std::move(name), tag, std::move(terms), sense, rhs});
  return index;
}

void LinearProgram::set_cost(int var, double cost) {
  variables_.at(var).cost = cost;
}

void LinearProgram::add_cost(int var, double delta) {
  variables_.at(var).cost += delta;
}

void LinearProgram::set_tie_break(int var, double weight) {
  variables_.at(var).tie_break = weight;
}

bool LinearProgram::has_tie_break() const {
  for (const Variable& v : variables_) {
    if (v.tie_break != 0.0) return true;
  }
  return false;
}

std::optional<int> LinearProgram::find_variable(std::string_view name) const {
  auto it = variable_index_.find(std::string(name));
  if (it == variable_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> LinearProgram::find_constraint(std::string_view name) const {
  auto it = constraint_index_.find(std::string(name));
  if (it == constraint_index_.end()) return std::nullopt;
  return it->second;
}

double LinearProgram::objective_value(std::span<const double> x) const {
  double value = objective_constant_;
  for (int j = 0; j < num_variables(); ++j) value += variables_[j].cost * x[j];
  return value;
}

double LinearProgram::activity(int row, std::span<const double> x) const {
  double value = 0.0;
  for (const Term& term : constraints_.at(row).terms) value += term.coef * x[term.var];
  return value;
}

double LinearProgram::violation(int row, std::span<const double> x) const {
  const Constraint& c = constraints_.at(row);
  const double lhs = activity(row, x);
  switch (c.sense) {
    case Sense::kLessEqual:
      return std::max(0.0, lhs - c.rhs);
    case Sense::kGreaterEqual:
      return std::max(0.0, c.rhs - lhs);
    case Sense::kEqual:
      return std::abs(lhs - c.rhs);
  }
  return 0.0;
}

}  // namespace mpm::lp
