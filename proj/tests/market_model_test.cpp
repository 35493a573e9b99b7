#include <set>

#include "doctest.h"
#include "mpm/market_model.h"
#include "support/case_a.h"
#include "support/grid_oracle.h"

using namespace mpm;
using mpm::testing::case_a_horizon;
using mpm::testing::case_a_resources;
using mpm::testing::kCaseAImperfect;
using mpm::testing::kCaseAPerfect;

namespace {

MarketOutcome clear(const std::vector<Resource>& res, const Horizon& h) {
  const lp::LinearProgram prog = build_full_horizon(res, h);
  return solve_outcome(res, h, 1, h.periods, h.demand, prog);
}

std::vector<double> esr_net(const MarketOutcome& out, int esr) {
  std::vector<double> net;
  for (int t = out.start; t <= out.end(); ++t) net.push_back(out.at(t)[esr].output);
  return net;
}

int count_prefix(const lp::LinearProgram& prog, std::string_view prefix, lp::Sense sense) {
  int n = 0;
  for (const lp::Constraint& c : prog.constraints()) {
    if (c.name.starts_with(prefix) && c.sense == sense) ++n;
  }
  return n;
}

// Period encoded as the last comma-separated field of a "kind[id,t]" name.
int period_of(const std::string& name) {
  const auto comma = name.rfind(',');
  const auto open = name.rfind('[');
  const auto from = comma == std::string::npos ? open : comma;
  return std::stoi(name.substr(from + 1));
}

testing::GridResult case_a_oracle(const std::vector<double>& demand, double step) {
  return testing::grid_clear({{10, 40}, {63, 40}, {100, 30}}, {9, 5, 15, 12, 6}, demand, step);
}

}  // namespace

TEST_CASE("Case A program has the expected row structure") {
  const auto res = case_a_resources();
  const lp::LinearProgram prog = build_full_horizon(res, case_a_horizon());
  CHECK(count_prefix(prog, "balance[", lp::Sense::kEqual) == 8);
  CHECK(count_prefix(prog, "soc_rec[", lp::Sense::kEqual) == 8);
  CHECK(count_prefix(prog, "socmax[", lp::Sense::kLessEqual) == 8);
  std::set<std::pair<std::string, int>> bounded;
  for (const lp::Constraint& c : prog.constraints()) {
    for (std::string_view kind : {"pmax[", "dismax[", "chmax["}) {
      if (c.name.starts_with(kind)) {
        const std::string id = c.name.substr(kind.size(), c.name.rfind(',') - kind.size());
        bounded.insert({id, period_of(c.name)});
      }
    }
  }
  CHECK(bounded.size() == 4 * 8);
}

TEST_CASE("block-structure audit: only ramp and SOC rows couple periods") {
  auto res = case_a_resources();
  res[0].ramp_up = 15;
  res[0].ramp_down = 20;
  const lp::LinearProgram prog = build_full_horizon(res, case_a_horizon());
  for (const lp::Constraint& c : prog.constraints()) {
    std::set<int> periods;
    for (const lp::Term& term : c.terms) periods.insert(period_of(prog.variable(term.var).name));
    const bool link = c.name.starts_with("soc_rec[") || c.name.starts_with("ramp_");
    CHECK_MESSAGE((c.tag == lp::ConstraintTag::kIntertemporal) == link, c.name);
    if (!link) CHECK_MESSAGE(periods.size() <= 1, c.name);
  }
  CHECK(count_prefix(prog, "ramp_up[", lp::Sense::kLessEqual) == 8);
  CHECK(count_prefix(prog, "ramp_dn[", lp::Sense::kGreaterEqual) == 8);
}

TEST_CASE("single generator clears at its offer") {
  Resource g;
  g.id = "G";
  g.offer = {17};
  g.eco_max = 40;
  const std::vector<Resource> res = {g};
  const Horizon h{1, 1.0, {10}};
  const lp::LinearProgram prog = build_full_horizon(res, h);
  CHECK(count_prefix(prog, "balance[", lp::Sense::kEqual) == 1);
  const MarketOutcome out = clear(res, h);
  REQUIRE(out.optimal());
  CHECK(out.at(1)[0].output == doctest::Approx(10));
  CHECK(out.lmp_at(1) == doctest::Approx(17));
}

TEST_CASE("Case A forward schedule matches the grid-enumeration oracle") {
  const auto res = case_a_resources();
  const MarketOutcome out = clear(res, case_a_horizon());
  REQUIRE(out.optimal());
  const testing::GridResult oracle = case_a_oracle(kCaseAPerfect, 1.0);
  CHECK(out.objective == doctest::Approx(oracle.cost).epsilon(1e-12));
  CHECK(oracle.cost == doctest::Approx(19301));
  const std::vector<double> expected = {-6, 0, 0, 0, 12, -12, 0, 12};
  const std::vector<double> net = esr_net(out, 3);
  double peak = 0.0;
  for (int t = 1; t <= 8; ++t) {
    CHECK(net[t - 1] == doctest::Approx(expected[t - 1]).epsilon(1e-9));
    peak = std::max(peak, out.at(t)[3].soc);
    CHECK(out.at(t)[3].charge * out.at(t)[3].discharge == doctest::Approx(0.0));
  }
  CHECK(peak == doctest::Approx(12));
}

TEST_CASE("Case A imperfect loads match the oracle at 0.1 MWh resolution") {
  const auto res = case_a_resources();
  const MarketOutcome out = clear(res, case_a_horizon(kCaseAImperfect));
  REQUIRE(out.optimal());
  CHECK(out.objective == doctest::Approx(case_a_oracle(kCaseAImperfect, 0.1).cost).epsilon(1e-12));
}

TEST_CASE("forward LMPs agree with oracle finite differences") {
  // The value function is piecewise linear in demand; one-sided differences
  // bracket every valid price.
  const auto res = case_a_resources();
  const MarketOutcome out = clear(res, case_a_horizon());
  const double base = case_a_oracle(kCaseAPerfect, 1.0).cost;
  for (int t = 0; t < 8; ++t) {
    std::vector<double> up = kCaseAPerfect;
    std::vector<double> down = kCaseAPerfect;
    up[t] += 1.0;
    down[t] -= 1.0;
    const double right = case_a_oracle(up, 1.0).cost - base;
    const double left = base - case_a_oracle(down, 1.0).cost;
    CHECK(out.lmp[t] >= left - 1e-9);
    CHECK(out.lmp[t] <= right + 1e-9);
  }
}

TEST_CASE("SP over the full horizon is the full-horizon program") {
  auto res = case_a_resources();
  res[1].ramp_up = 25;
  const Horizon h = case_a_horizon();
  const lp::LinearProgram full = build_full_horizon(res, h);
  const lp::LinearProgram sp =
      build_sp(res, h, Window::make(1, 8, 8), initial_state(res), std::nullopt, h.demand);
  REQUIRE(full.num_variables() == sp.num_variables());
  REQUIRE(full.num_constraints() == sp.num_constraints());
  for (int j = 0; j < full.num_variables(); ++j) {
    CHECK(full.variable(j).name == sp.variable(j).name);
    CHECK(full.variable(j).cost == sp.variable(j).cost);
    CHECK(full.variable(j).lower == sp.variable(j).lower);
    CHECK(full.variable(j).upper == sp.variable(j).upper);
  }
  for (int i = 0; i < full.num_constraints(); ++i) {
    const lp::Constraint& a = full.constraint(i);
    const lp::Constraint& b = sp.constraint(i);
    CHECK(a.name == b.name);
    CHECK(a.tag == b.tag);
    CHECK(a.sense == b.sense);
    CHECK(a.rhs == b.rhs);
    REQUIRE(a.terms.size() == b.terms.size());
    for (std::size_t k = 0; k < a.terms.size(); ++k) {
      CHECK(a.terms[k].var == b.terms[k].var);
      CHECK(a.terms[k].coef == b.terms[k].coef);
    }
  }
}

TEST_CASE("SP window reproduces the forward schedule under perfect forecast") {
  const auto res = case_a_resources();
  const Horizon h = case_a_horizon();
  const MarketOutcome fwd = clear(res, h);
  for (int start = 1; start <= 8; ++start) {
    const Window w = Window::make(start, 3, 8);
    const SystemState past = start == 1 ? initial_state(res) : fwd.at(start - 1);
    std::optional<SystemState> anchor;
    if (w.has_future_boundary()) anchor = fwd.at(w.end + 1);
    const std::span<const double> demand(h.demand.data() + w.start - 1, w.length());
    const lp::LinearProgram sp = build_sp(res, h, w, past, anchor, demand);
    if (anchor) {
      CHECK(sp.constraint(*sp.find_constraint(var_name("soc_rec", "ESR", w.end + 1))).tag ==
            lp::ConstraintTag::kBoundary);
    }
    const MarketOutcome out = solve_outcome(res, h, w.start, w.end, demand, sp);
    REQUIRE(out.optimal());
    for (int t = w.start; t <= w.end; ++t) {
      for (std::size_t i = 0; i < res.size(); ++i) {
        CHECK(out.at(t)[i].output == doctest::Approx(fwd.at(t)[i].output).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("SP window on imperfect loads departs from forward at t4 and t5 only") {
  const auto res = case_a_resources();
  const Horizon h = case_a_horizon();
  const MarketOutcome fwd = clear(res, h);
  const Window w = Window::make(4, 3, 8);
  const std::span<const double> demand(kCaseAImperfect.data() + 3, 3);
  const lp::LinearProgram sp = build_sp(res, h, w, fwd.at(3), fwd.at(7), demand);
  const MarketOutcome out = solve_outcome(res, h, 4, 6, demand, sp);
  REQUIRE(out.optimal());
  CHECK(out.at(4)[3].output == doctest::Approx(0.4));
  CHECK(out.at(5)[3].output == doctest::Approx(11.6));
  CHECK(out.at(6)[3].output == doctest::Approx(fwd.at(6)[3].output));
  CHECK(fwd.at(4)[3].output == doctest::Approx(0.0));
  CHECK(fwd.at(5)[3].output == doctest::Approx(12.0));
}

TEST_CASE("PP window prices equal forward prices under perfect forecast") {
  const auto res = case_a_resources();
  const Horizon h = case_a_horizon();
  const MarketOutcome fwd = clear(res, h);
  BuildOptions pricing;
  pricing.tie_break = false;
  for (int length : {1, 2, 3, 8}) {
    for (int start = 1; start <= 8; ++start) {
      const Window w = Window::make(start, length, 8);
      const OfferAdjustments adj = offer_adjustments(res, h, w, fwd.intertemporal_duals);
      const std::span<const double> demand(h.demand.data() + w.start - 1, w.length());
      const lp::LinearProgram pp = build_pp(res, h, w, adj, demand, pricing);
      CHECK_FALSE(pp.find_constraint(var_name("soc_rec", "ESR", w.start)).has_value());
      const MarketOutcome out = solve_outcome(res, h, w.start, w.end, demand, pp);
      REQUIRE(out.optimal());
      for (int t = w.start; t <= w.end; ++t) {
        CHECK(out.lmp_at(t) == doctest::Approx(fwd.lmp_at(t)).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("PP objective at the forward schedule is window cost plus adjustments") {
  const auto res = case_a_resources();
  const Horizon h = case_a_horizon();
  const lp::LinearProgram full = build_full_horizon(res, h);
  const lp::LpSolution sol = lp::solve(full);
  const MarketOutcome fwd = extract_outcome(res, h, 1, 8, h.demand, full, sol);
  const Window w = Window::make(3, 3, 8);
  const OfferAdjustments adj = offer_adjustments(res, h, w, fwd.intertemporal_duals);
  CHECK_FALSE(adj.backward.empty());
  CHECK_FALSE(adj.forward.empty());
  const lp::LinearProgram pp =
      build_pp(res, h, w, adj, std::span<const double>(h.demand.data() + 2, 3));
  std::vector<double> x(pp.num_variables());
  double window_cost = 0.0;
  for (int j = 0; j < pp.num_variables(); ++j) {
    x[j] = sol.primal[*full.find_variable(pp.variable(j).name)];
    window_cost += full.variable(*full.find_variable(pp.variable(j).name)).cost * x[j];
  }
  double adjustment = 0.0;
  for (const auto* side : {&adj.backward, &adj.forward}) {
    for (const auto& [name, delta] : *side) adjustment += delta * sol.value(full, name);
  }
  CHECK(pp.objective_value(x) == doctest::Approx(window_cost + adjustment).epsilon(1e-12));
}

TEST_CASE("without intertemporal rows PP is per-period merit order") {
  auto res = case_a_resources();
  res.pop_back();
  const Horizon h = case_a_horizon();
  const Window w = Window::make(2, 4, 8);
  const OfferAdjustments adj = offer_adjustments(res, h, w, {});
  CHECK(adj.backward.empty());
  const std::span<const double> demand(h.demand.data() + 1, 4);
  const MarketOutcome out =
      solve_outcome(res, h, 2, 5, demand, build_pp(res, h, w, adj, demand));
  REQUIRE(out.optimal());
  const std::vector<double> expected = {63, 63, 100, 100};
  for (int t = 2; t <= 5; ++t) CHECK(out.lmp_at(t) == doctest::Approx(expected[t - 2]));
}

TEST_CASE("missing guideline duals are a configuration error") {
  const auto res = case_a_resources();
  const Horizon h = case_a_horizon();
  CHECK_THROWS_AS(offer_adjustments(res, h, Window::make(2, 3, 8), {}), std::invalid_argument);
}

TEST_CASE("terminal target binds and elastic mode prices shortfall at value of load") {
  auto res = case_a_resources();
  res[3].soc_target = 6;
  const MarketOutcome hard = clear(res, case_a_horizon());
  REQUIRE(hard.optimal());
  CHECK(hard.at(8)[3].soc == doctest::Approx(6));
  CHECK(hard.violations() == 0);

  const Horizon tight{2, 1.0, {150, 20}};
  CHECK_THROWS_AS(build_full_horizon(res, tight), std::invalid_argument);
  BuildOptions elastic;
  elastic.elastic = true;
  const lp::LinearProgram prog = build_full_horizon(res, tight, elastic);
  const MarketOutcome out = solve_outcome(res, tight, 1, 2, tight.demand, prog);
  REQUIRE(out.optimal());
  CHECK(out.shed[0] > 0);
  CHECK(out.lmp_at(1) == doctest::Approx(1000));
  CHECK(out.violations() >= 1);
}

TEST_CASE("validation names the offending field") {
  auto res = case_a_resources();
  res[3].soc_initial = 20;
  try {
    validate(res, case_a_horizon());
    FAIL("expected rejection");
  } catch (const ValidationError& e) {
    CHECK(e.field() == "resources[3].soc_initial");
  }
  res = case_a_resources();
  res[3].bid = 9;
  CHECK_THROWS_AS(validate(res, case_a_horizon()), ValidationError);
  res = case_a_resources();
  res[0].eco_min = 50;
  CHECK_THROWS_AS(validate(res, case_a_horizon()), ValidationError);
  CHECK_THROWS_AS(validate(Horizon{2, 1.0, {1, -1}}), ValidationError);
}

TEST_CASE("period length scales costs but not prices") {
  const auto res = case_a_resources();
  Horizon h = case_a_horizon();
  const MarketOutcome hourly = clear(res, h);
  h.period_hours = 0.5;
  auto half = res;
  half[3].soc_max = 6;  // same energy-to-power ratio in periods
  half[3].soc_initial = 3;
  const MarketOutcome out = clear(half, h);
  REQUIRE(out.optimal());
  CHECK(out.objective == doctest::Approx(hourly.objective / 2));
  for (int t = 1; t <= 8; ++t) CHECK(out.lmp_at(t) == doctest::Approx(hourly.lmp_at(t)));
}
