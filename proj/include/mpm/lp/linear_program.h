#pragma once

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mpm::lp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Sense { kLessEqual, kEqual, kGreaterEqual };

// Block the row belongs to in the clearing formulation.
enum class ConstraintTag { kIntertemporal, kSystem, kResource, kBoundary };

std::string_view to_string(Sense sense);
std::string_view to_string(ConstraintTag tag);

struct Term {
  int var = 0;
  double coef = 0.0;
};

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = kInfinity;
  double cost = 0.0;
  // Weight in the secondary objective used to pick one point among
  // degenerate optima. Zero for variables that do not take part.
  double tie_break = 0.0;
};

struct Constraint {
  std::string name;
  ConstraintTag tag = ConstraintTag::kSystem;
  std::vector<Term> terms;
  Sense sense = Sense::kLessEqual;
  double rhs = 0.0;
};

// Minimization LP with named variables and tagged, named constraints.
// Invalid input is rejected at insertion time with std::invalid_argument,
// so a constructed program always satisfies its invariants.
class LinearProgram {
 public:
  int add_variable(std::string name, double lower, double upper, double cost);
  int add_constraint(std::string name, ConstraintTag tag,
                     std::vector<Term> terms, Sense sense, double rhs);

  void set_cost(int var, double cost);
  void add_cost(int var, double delta);
  void set_tie_break(int var, double weight);
  void add_objective_constant(double value) { objective_constant_ += value; }

  int num_variables() const { return static_cast<int>(variables_.size()); }
  int num_constraints() const { return static_cast<int>(constraints_.size()); }
  const Variable& variable(int j) const { return variables_.at(j); }
  const Constraint& constraint(int i) const { return constraints_.at(i); }
  std::span<const Variable> variables() const { return variables_; }
  std::span<const Constraint> constraints() const { return constraints_; }
  double objective_constant() const { return objective_constant_; }
  bool has_tie_break() const;

  std::optional<int> find_variable(std::string_view name) const;
  std::optional<int> find_constraint(std::string_view name) const;

  double objective_value(std::span<const double> x) const;
  double activity(int row, std::span<const double> x) const;
  // Signed violation of row `row` at x; zero when satisfied.
  double violation(int row, std::span<const double> x) const;

 private:
  std::vector<Variable> variables_;
  std::vector<Constraint> constraints_;
  std::unordered_map<std::string, int> variable_index_;
  std::unordered_map<std::string, int> constraint_index_;
  double objective_constant_ = 0.0;
};

}  // namespace mpm::lp
