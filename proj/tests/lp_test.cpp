#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "mpm/lp/solver.h"

using namespace mpm::lp;

namespace {

void require_kkt(const LinearProgram& lp, const LpSolution& sol) {
  REQUIRE(sol.optimal());
  const KktReport r = check_kkt(lp, sol);
  CHECK(r.primal_residual <= 1e-6);
  CHECK(r.duality_gap <= 1e-6 * (1.0 + std::abs(sol.objective)));
  CHECK(r.complementarity <= 1e-6);
  CHECK(r.dual_sign_violation <= 1e-9);
}

// Brute-force oracle for two-variable LPs: enumerate intersections of every
// pair of boundary lines (rows and box bounds), keep the feasible ones.
double vertex_enumeration_min(const std::vector<std::array<double, 3>>& rows_le,
                              double c0, double c1, double box) {
  std::vector<std::array<double, 3>> lines = rows_le;
  lines.push_back({1, 0, box});
  lines.push_back({-1, 0, 0});
  lines.push_back({0, 1, box});
  lines.push_back({0, -1, 0});
  double best = INFINITY;
  for (std::size_t a = 0; a < lines.size(); ++a) {
    for (std::size_t b = a + 1; b < lines.size(); ++b) {
      const auto& p = lines[a];
      const auto& q = lines[b];
      const double det = p[0] * q[1] - p[1] * q[0];
      if (std::abs(det) < 1e-12) continue;
      const double x = (p[2] * q[1] - p[1] * q[2]) / det;
      const double y = (p[0] * q[2] - p[2] * q[0]) / det;
      bool feasible = true;
      for (const auto& l : lines) feasible = feasible && l[0] * x + l[1] * y <= l[2] + 1e-9;
      if (feasible) best = std::min(best, c0 * x + c1 * y);
    }
  }
  return best;
}

}  // namespace

TEST_CASE("one-variable LP with a binding lower row") {
  LinearProgram lp;
  const int x = lp.add_variable("x", -kInfinity, kInfinity, 1.0);
  lp.add_constraint("lo", ConstraintTag::kResource, {{x, 1.0}}, Sense::kGreaterEqual, 3.0);
  lp.add_constraint("hi", ConstraintTag::kResource, {{x, 1.0}}, Sense::kLessEqual, 10.0);
  const LpSolution sol = solve(lp);
  REQUIRE(sol.optimal());
  CHECK(sol.value(lp, "x") == doctest::Approx(3.0));
  CHECK(sol.objective == doctest::Approx(3.0));
  CHECK(sol.dual_of(lp, "lo") == doctest::Approx(1.0));
  CHECK(sol.dual_of(lp, "hi") == doctest::Approx(0.0));
  require_kkt(lp, sol);
}

TEST_CASE("contradictory rows are reported infeasible") {
  LinearProgram lp;
  const int x = lp.add_variable("x", -kInfinity, kInfinity, 0.0);
  lp.add_constraint("a", ConstraintTag::kResource, {{x, 1.0}}, Sense::kLessEqual, -1.0);
  lp.add_constraint("b", ConstraintTag::kResource, {{x, 1.0}}, Sense::kGreaterEqual, 0.0);
  CHECK(solve(lp).status == SolveStatus::kInfeasible);

  LinearProgram lp2;
  const int u = lp2.add_variable("u", 0, kInfinity, 0.0);
  const int v = lp2.add_variable("v", 0, kInfinity, 0.0);
  lp2.add_constraint("sum_le", ConstraintTag::kSystem, {{u, 1}, {v, 1}}, Sense::kLessEqual, 1.0);
  lp2.add_constraint("diff_ge", ConstraintTag::kSystem, {{u, 1}, {v, -1}}, Sense::kGreaterEqual, 2.0);
  CHECK(solve(lp2).status == SolveStatus::kInfeasible);
}

TEST_CASE("unbounded program is reported, not thrown") {
  LinearProgram lp;
  const int x = lp.add_variable("x", 0, kInfinity, -1.0);
  const int y = lp.add_variable("y", 0, kInfinity, 0.0);
  lp.add_constraint("r", ConstraintTag::kSystem, {{x, 1}, {y, -1}}, Sense::kLessEqual, 1.0);
  CHECK(solve(lp).status == SolveStatus::kUnbounded);
}

TEST_CASE("textbook product-mix LP and its shadow prices") {
  // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18.
  LinearProgram lp;
  const int x = lp.add_variable("x", 0, kInfinity, -3.0);
  const int y = lp.add_variable("y", 0, kInfinity, -5.0);
  lp.add_constraint("plant1", ConstraintTag::kResource, {{x, 1}}, Sense::kLessEqual, 4);
  lp.add_constraint("plant2", ConstraintTag::kResource, {{y, 2}}, Sense::kLessEqual, 12);
  lp.add_constraint("plant3", ConstraintTag::kSystem, {{x, 3}, {y, 2}}, Sense::kLessEqual, 18);
  const LpSolution sol = solve(lp);
  REQUIRE(sol.optimal());
  CHECK(sol.value(lp, "x") == doctest::Approx(2));
  CHECK(sol.value(lp, "y") == doctest::Approx(6));
  CHECK(sol.objective == doctest::Approx(-36));
  CHECK(sol.dual_of(lp, "plant1") == doctest::Approx(0));
  CHECK(sol.dual_of(lp, "plant2") == doctest::Approx(-1.5));
  CHECK(sol.dual_of(lp, "plant3") == doctest::Approx(-1));
  require_kkt(lp, sol);
}

TEST_CASE("parallel rows are merged and duals land on the binding row") {
  LinearProgram lp;
  const int x = lp.add_variable("x", 0, 10, -1.0);
  const int y = lp.add_variable("y", 0, 10, -2.0);
  lp.add_constraint("loose_upper", ConstraintTag::kSystem, {{x, 1}, {y, 1}}, Sense::kLessEqual, 5);
  lp.add_constraint("lower", ConstraintTag::kSystem, {{x, 1}, {y, 1}}, Sense::kGreaterEqual, 2);
  lp.add_constraint("tight_upper", ConstraintTag::kSystem, {{x, -1}, {y, -1}}, Sense::kGreaterEqual, -4);
  const LpSolution sol = solve(lp);
  REQUIRE(sol.optimal());
  CHECK(sol.value(lp, "y") == doctest::Approx(4));
  CHECK(sol.dual_of(lp, "loose_upper") == 0.0);
  CHECK(sol.dual_of(lp, "lower") == 0.0);
  // Relaxing -x - y >= -4 by one unit of rhs tightens the cap: +2 cost.
  CHECK(sol.dual_of(lp, "tight_upper") == doctest::Approx(2.0));
  require_kkt(lp, sol);
}

TEST_CASE("equality rows carry free-signed duals") {
  LinearProgram lp;
  const int a = lp.add_variable("a", 0, 10, 2.0);
  const int b = lp.add_variable("b", 0, 10, 5.0);
  lp.add_constraint("balance", ConstraintTag::kSystem, {{a, 1}, {b, 1}}, Sense::kEqual, 12);
  const LpSolution sol = solve(lp);
  REQUIRE(sol.optimal());
  CHECK(sol.value(lp, "a") == doctest::Approx(10));
  CHECK(sol.dual_of(lp, "balance") == doctest::Approx(5.0));
  require_kkt(lp, sol);

  LinearProgram neg;
  const int c = neg.add_variable("c", 0, 10, 3.0);
  const int d = neg.add_variable("d", 0, 10, -4.0);
  neg.add_constraint("link", ConstraintTag::kSystem, {{c, 1}, {d, -1}}, Sense::kEqual, -2);
  const LpSolution s2 = solve(neg);
  REQUIRE(s2.optimal());
  CHECK(s2.value(neg, "d") == doctest::Approx(10));
  CHECK(s2.value(neg, "c") == doctest::Approx(8));
  CHECK(s2.dual_of(neg, "link") == doctest::Approx(3.0));
  require_kkt(neg, s2);
}

TEST_CASE("tie-break selects among degenerate optima without moving duals") {
  for (int flip = 0; flip < 2; ++flip) {
    LinearProgram lp;
    const int x = lp.add_variable("x", 0, kInfinity, 1.0);
    const int y = lp.add_variable("y", 0, kInfinity, 1.0);
    lp.add_constraint("cover", ConstraintTag::kSystem, {{x, 1}, {y, 1}}, Sense::kGreaterEqual, 1);
    lp.set_tie_break(x, flip ? 2.0 : 1.0);
    lp.set_tie_break(y, flip ? 1.0 : 2.0);
    const LpSolution sol = solve(lp);
    REQUIRE(sol.optimal());
    CHECK(sol.value(lp, flip ? "y" : "x") == doctest::Approx(1.0));
    CHECK(sol.objective == doctest::Approx(1.0));
    CHECK(sol.dual_of(lp, "cover") == doctest::Approx(1.0));
    require_kkt(lp, sol);
  }
}

TEST_CASE("zero time limit yields time-limit status") {
  LinearProgram lp;
  std::vector<Term> terms;
  for (int j = 0; j < 20; ++j) {
    terms.push_back({lp.add_variable("x" + std::to_string(j), 0, 5, 1.0 + j), 1.0});
  }
  lp.add_constraint("demand", ConstraintTag::kSystem, terms, Sense::kEqual, 50);
  SolveOptions options;
  options.time_limit_seconds = 0.0;
  CHECK(solve(lp, options).status == SolveStatus::kTimeLimit);
  CHECK(solve(lp).status == SolveStatus::kOptimal);
}

TEST_CASE("malformed programs are rejected at construction") {
  LinearProgram lp;
  const int x = lp.add_variable("x", 0, 1, 0);
  CHECK_THROWS_AS(lp.add_variable("x", 0, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(lp.add_variable("y", 2, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(lp.add_constraint("r", ConstraintTag::kSystem, {{x + 5, 1}}, Sense::kEqual, 0),
                  std::invalid_argument);
  lp.add_constraint("r", ConstraintTag::kSystem, {{x, 1}}, Sense::kEqual, 0);
  CHECK_THROWS_AS(lp.add_constraint("r", ConstraintTag::kSystem, {{x, 1}}, Sense::kEqual, 0),
                  std::invalid_argument);
}

TEST_CASE("random two-variable LPs agree with vertex enumeration") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coef(-3, 3);
  for (int trial = 0; trial < 200; ++trial) {
    const double box = 10;
    const double c0 = coef(rng), c1 = coef(rng);
    std::vector<std::array<double, 3>> rows;
    LinearProgram lp;
    const int x = lp.add_variable("x", 0, box, c0);
    const int y = lp.add_variable("y", 0, box, c1);
    for (int k = 0; k < 4; ++k) {
      // Rows through a point inside the box keep the program feasible.
      const double a = coef(rng), b = coef(rng);
      const double rhs = a * 5 + b * 5 + std::abs(coef(rng));
      rows.push_back({a, b, rhs});
      lp.add_constraint("r" + std::to_string(k), ConstraintTag::kSystem, {{x, a}, {y, b}},
                        Sense::kLessEqual, rhs);
    }
    const LpSolution sol = solve(lp);
    REQUIRE(sol.optimal());
    CHECK(sol.objective == doctest::Approx(vertex_enumeration_min(rows, c0, c1, box)).epsilon(1e-9));
    require_kkt(lp, sol);
  }
}

TEST_CASE("random larger LPs satisfy KKT and solve deterministically") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 15 + trial % 10;
    const int m = 10 + trial % 7;
    LinearProgram lp;
    std::vector<double> x0(n);
    for (int j = 0; j < n; ++j) {
      const double lo = trial % 3 == 0 ? -kInfinity : -5 * u(rng);
      lp.add_variable("x" + std::to_string(j), lo, 5 + 5 * u(rng), 2 * u(rng) - 1);
      x0[j] = 0.0;
    }
    for (int i = 0; i < m; ++i) {
      std::vector<Term> terms;
      for (int j = 0; j < n; ++j) {
        if (u(rng) < 0.3) terms.push_back({j, 4 * u(rng) - 2});
      }
      const double slack = u(rng);
      const int kind = i % 3;
      const Sense sense = kind == 0 ? Sense::kLessEqual : (kind == 1 ? Sense::kGreaterEqual : Sense::kEqual);
      const double rhs = sense == Sense::kLessEqual ? slack : (sense == Sense::kGreaterEqual ? -slack : 0.0);
      lp.add_constraint("r" + std::to_string(i), ConstraintTag::kSystem, terms, sense, rhs);
    }
    const LpSolution a = solve(lp);
    if (a.status == SolveStatus::kUnbounded) continue;
    require_kkt(lp, a);
    const LpSolution b = solve(lp);
    CHECK(a.primal == b.primal);
    CHECK(a.dual == b.dual);
  }
}

TEST_CASE("LP text dump names every row and bound") {
  LinearProgram lp;
  const int x = lp.add_variable("p[g1,1]", 0, 40, 10);
  lp.add_constraint("balance[1]", ConstraintTag::kSystem, {{x, 1}}, Sense::kEqual, 5);
  std::ostringstream out;
  write_lp_format(lp, out);
  const std::string text = out.str();
  CHECK(text.find("Minimize") != std::string::npos);
  CHECK(text.find("balance_1_: + 1 p_g1_1_ = 5") != std::string::npos);
  CHECK(text.find("0 <= p_g1_1_ <= 40") != std::string::npos);
}
