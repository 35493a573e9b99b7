#include "mpm/forward_market.h"

#include <cmath>
#include <fstream>

#include "json.hpp"

namespace mpm {

using nlohmann::json;

namespace {

std::string infeasible_group(std::span<const Resource> resources, const Horizon& horizon) {
  BuildOptions elastic;
  elastic.elastic = true;
  elastic.tie_break = false;
  const lp::LinearProgram prog = build_full_horizon(resources, horizon, elastic);
  const MarketOutcome out = solve_outcome(resources, horizon, 1, horizon.periods, horizon.demand, prog);
  if (!out.optimal()) return "intertemporal";
  for (std::size_t k = 0; k < out.shed.size(); ++k) {
    if (out.shed[k] > 1e-6 || out.spill[k] > 1e-6) return "system";
  }
  for (const auto& [id, miss] : out.target_miss) {
    if (miss > 1e-6) return "resource";
  }
  return "intertemporal";
}

}  // namespace

ForwardResult clear_forward(std::span<const Resource> resources, const Horizon& horizon,
                            const BuildOptions& options, const lp::SolveOptions& solve_options) {
  validate(resources, horizon);
  if (!options.elastic) {
    if (auto problem = preflight_screen(resources, horizon)) throw InfeasibleClearing("system", *problem);
  }
  const lp::LinearProgram prog = build_full_horizon(resources, horizon, options);
  const lp::LpSolution sol = lp::solve(prog, solve_options);
  if (sol.status == lp::SolveStatus::kInfeasible) {
    throw InfeasibleClearing(infeasible_group(resources, horizon), "no schedule meets every row");
  }
  if (!sol.optimal()) {
    throw InfeasibleClearing("solver", std::string(lp::to_string(sol.status)));
  }
  ForwardResult result;
  result.outcome = extract_outcome(resources, horizon, 1, horizon.periods, horizon.demand, prog, sol);
  result.dual_objective = lp::dual_objective(prog, sol.dual);

  std::vector<double> raw(prog.num_variables(), 0.0);
  for (int i = 0; i < prog.num_constraints(); ++i) {
    const lp::Constraint& c = prog.constraint(i);
    if (c.tag != lp::ConstraintTag::kIntertemporal || sol.dual[i] == 0.0) continue;
    for (const lp::Term& term : c.terms) raw[term.var] -= term.coef * sol.dual[i];
  }
  const double dt = horizon.period_hours;
  const auto n = resources.size();
  result.output_opportunity_cost.assign(n, std::vector<double>(horizon.periods, 0.0));
  result.charge_opportunity_cost.assign(n, std::vector<double>(horizon.periods, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    const Resource& r = resources[i];
    for (int t = 1; t <= horizon.periods; ++t) {
      const std::string out_name = var_name(r.is_storage() ? "dis" : "p", r.id, t);
      result.output_opportunity_cost[i][t - 1] = raw[*prog.find_variable(out_name)] / dt;
      if (r.is_storage()) {
        result.charge_opportunity_cost[i][t - 1] = raw[*prog.find_variable(var_name("ch", r.id, t))] / dt;
      }
    }
  }
  return result;
}

EquilibriumReport verify_competitive_equilibrium(std::span<const Resource> resources,
                                                 const Horizon& horizon,
                                                 const MarketOutcome& outcome,
                                                 std::span<const double> prices) {
  EquilibriumReport report;
  report.passed = true;
  for (std::size_t i = 0; i < resources.size(); ++i) {
    const Resource& r = resources[i];
    std::vector<ResourceState> path;
    for (int t = 1; t <= horizon.periods; ++t) path.push_back(outcome.at(t)[i]);
    const lp::LinearProgram prog = build_profit_max(r, horizon, prices);
    lp::SolveOptions options;
    options.tie_break = false;
    const lp::LpSolution sol = lp::solve(prog, options);
    EquilibriumEntry entry;
    entry.id = r.id;
    entry.realized_profit = resource_profit(r, horizon, prices, path);
    entry.max_profit = sol.optimal() ? -sol.objective : entry.realized_profit;
    entry.gap = entry.max_profit - entry.realized_profit;
    if (!sol.optimal() || entry.gap > 1e-6 * (1.0 + std::abs(entry.max_profit))) report.passed = false;
    report.entries.push_back(entry);
  }
  for (int t = 1; t <= horizon.periods; ++t) {
    double supply = 0.0;
    for (const ResourceState& s : outcome.at(t)) supply += s.output;
    const std::size_t k = static_cast<std::size_t>(t - outcome.start);
    const double served = horizon.demand[t - 1] - (k < outcome.shed.size() ? outcome.shed[k] - outcome.spill[k] : 0.0);
    report.max_balance_residual = std::max(report.max_balance_residual, std::abs(supply - served));
  }
  if (report.max_balance_residual > 1e-6) report.passed = false;
  return report;
}

EquilibriumReport verify_competitive_equilibrium(std::span<const Resource> resources,
                                                 const Horizon& horizon,
                                                 const ForwardResult& forward) {
  return verify_competitive_equilibrium(resources, horizon, forward.outcome, forward.outcome.lmp);
}

MarginalIdentityReport check_marginal_identity(std::span<const Resource> resources,
                                               const Horizon& horizon,
                                               const ForwardResult& forward, double tolerance) {
  MarginalIdentityReport report;
  const MarketOutcome& out = forward.outcome;
  auto dual = [&](const std::string& name) {
    const auto it = out.resource_duals.find(name);
    return it == out.resource_duals.end() ? 0.0 : it->second;
  };
  auto check = [&](double marginal_profit, double opportunity_cost) {
    ++report.checked;
    report.max_error = std::max(report.max_error, std::abs(marginal_profit - opportunity_cost));
  };
  const double dt = horizon.period_hours;
  for (std::size_t i = 0; i < resources.size(); ++i) {
    const Resource& r = resources[i];
    for (int t = 1; t <= horizon.periods; ++t) {
      const ResourceState& s = out.at(t)[i];
      const double lmp = out.lmp_at(t);
      const double oc_out = forward.output_opportunity_cost[i][t - 1];
      if (!r.is_storage()) {
        if (std::abs(dual(var_name("pmax", r.id, t))) <= tolerance * dt &&
            std::abs(dual(var_name("pmin", r.id, t))) <= tolerance * dt) {
          check(lmp - r.offer_at(t), oc_out);
        }
        continue;
      }
      if (s.discharge > tolerance && std::abs(dual(var_name("dismax", r.id, t))) <= tolerance * dt) {
        check(lmp - r.offer_at(t), oc_out);
      }
      if (s.charge > tolerance && std::abs(dual(var_name("chmax", r.id, t))) <= tolerance * dt) {
        check(r.bid - lmp, forward.charge_opportunity_cost[i][t - 1]);
      }
    }
  }
  report.passed = report.max_error <= tolerance;
  return report;
}

namespace {

json state_json(const ResourceState& s) {
  return json{{"output", s.output}, {"charge", s.charge}, {"discharge", s.discharge}, {"soc", s.soc}};
}

ResourceState state_from(const json& j) {
  return ResourceState{j.at("output").get<double>(), j.at("charge").get<double>(),
                       j.at("discharge").get<double>(), j.at("soc").get<double>()};
}

}  // namespace

std::string forward_to_json(std::span<const Resource> resources, const ForwardResult& forward) {
  const MarketOutcome& out = forward.outcome;
  json j;
  j["format"] = "forward-result/1";
  json ids = json::array();
  for (const Resource& r : resources) ids.push_back(r.id);
  j["resources"] = ids;
  j["start"] = out.start;
  json schedule = json::array();
  for (const SystemState& period : out.schedule) {
    json row = json::object();
    for (std::size_t i = 0; i < period.size(); ++i) row[resources[i].id] = state_json(period[i]);
    schedule.push_back(row);
  }
  j["schedule"] = schedule;
  j["lmp"] = out.lmp;
  j["demand"] = out.demand;
  j["shed"] = out.shed;
  j["spill"] = out.spill;
  j["target_miss"] = out.target_miss;
  j["intertemporal_duals"] = out.intertemporal_duals;
  j["resource_duals"] = out.resource_duals;
  j["objective"] = out.objective;
  j["production_cost"] = out.production_cost;
  j["solve_seconds"] = out.solve_seconds;
  j["elastic"] = out.elastic;
  j["dual_objective"] = forward.dual_objective;
  json oc_out = json::object();
  json oc_ch = json::object();
  for (std::size_t i = 0; i < resources.size(); ++i) {
    oc_out[resources[i].id] = forward.output_opportunity_cost[i];
    oc_ch[resources[i].id] = forward.charge_opportunity_cost[i];
  }
  j["output_opportunity_cost"] = oc_out;
  j["charge_opportunity_cost"] = oc_ch;
  return j.dump(2);
}

ForwardResult forward_from_json(std::span<const Resource> resources, const std::string& text) {
  const json j = json::parse(text);
  if (j.value("format", "") != "forward-result/1") {
    throw std::invalid_argument("not a forward-result/1 document");
  }
  const auto ids = j.at("resources").get<std::vector<std::string>>();
  if (ids.size() != resources.size()) throw std::invalid_argument("resource set does not match");
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] != resources[i].id) throw std::invalid_argument("resource '" + ids[i] + "' out of order");
  }
  ForwardResult result;
  MarketOutcome& out = result.outcome;
  out.status = lp::SolveStatus::kOptimal;
  out.start = j.at("start").get<int>();
  for (const json& row : j.at("schedule")) {
    SystemState state;
    for (const Resource& r : resources) state.push_back(state_from(row.at(r.id)));
    out.schedule.push_back(std::move(state));
  }
  out.lmp = j.at("lmp").get<std::vector<double>>();
  out.demand = j.at("demand").get<std::vector<double>>();
  out.shed = j.at("shed").get<std::vector<double>>();
  out.spill = j.at("spill").get<std::vector<double>>();
  out.target_miss = j.at("target_miss").get<std::map<std::string, double>>();
  out.intertemporal_duals = j.at("intertemporal_duals").get<std::map<std::string, double>>();
  out.resource_duals = j.at("resource_duals").get<std::map<std::string, double>>();
  out.objective = j.at("objective").get<double>();
  out.production_cost = j.at("production_cost").get<double>();
  out.solve_seconds = j.at("solve_seconds").get<double>();
  out.elastic = j.at("elastic").get<bool>();
  result.dual_objective = j.at("dual_objective").get<double>();
  for (const Resource& r : resources) {
    result.output_opportunity_cost.push_back(
        j.at("output_opportunity_cost").at(r.id).get<std::vector<double>>());
    result.charge_opportunity_cost.push_back(
        j.at("charge_opportunity_cost").at(r.id).get<std::vector<double>>());
  }
  return result;
}

void write_forward(const std::filesystem::path& path, std::span<const Resource> resources,
                   const ForwardResult& forward) {
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot write " + path.string());
  file << forward_to_json(resources, forward) << '\n';
}

ForwardResult read_forward(const std::filesystem::path& path, std::span<const Resource> resources) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("cannot read " + path.string());
  const std::string text((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
  return forward_from_json(resources, text);
}

}  // namespace mpm
