#include "mpm/settlement_metrics.h"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "mpm/synthetic.h"

namespace mpm {

namespace {

constexpr double kUnbounded = std::numeric_limits<double>::infinity();

struct Quantities {
  std::vector<double> resource;  // MWh per resource
  double load = 0.0;             // MWh withdrawn, negative
};

Quantities quantities(const MarketOutcome& outcome, int t, double dt) {
  Quantities q;
  for (const ResourceState& s : outcome.at(t)) q.resource.push_back(s.output * dt);
  const int k = t - outcome.start;
  q.load = -(outcome.demand.at(k) - outcome.shed.at(k) + outcome.spill.at(k)) * dt;
  return q;
}

lp::SolveOptions plain_solve() {
  lp::SolveOptions options;
  options.tie_break = false;
  return options;
}

BuildOptions plain_build() {
  BuildOptions options;
  options.tie_break = false;
  return options;
}

lp::LinearProgram past_program(std::span<const Resource> resources, const Horizon& horizon, int t0,
                               const SystemState& boundary, std::span<const double> realized_demand) {
  if (t0 < 2 || t0 > horizon.periods) throw std::invalid_argument("past boundary needs 2 <= t0 <= T");
  if (static_cast<int>(realized_demand.size()) < t0 - 1) {
    throw std::invalid_argument("realized demand must cover the past periods");
  }
  const Window past{1, t0 - 1, horizon.periods};
  return build_sp(resources, horizon, past, initial_state(resources), boundary,
                  realized_demand.first(t0 - 1), plain_build());
}

}  // namespace

double SettlementLedger::total(const std::string& resource) const {
  double sum = 0.0;
  for (const LedgerEntry& e : entries) {
    if (e.resource == resource) sum += e.cashflow;
  }
  return sum;
}

double SettlementLedger::total(const std::string& resource, int period) const {
  double sum = 0.0;
  for (const LedgerEntry& e : entries) {
    if (e.resource == resource && e.period == period) sum += e.cashflow;
  }
  return sum;
}

SettlementLedger settle_forward(std::span<const Resource> resources, const Horizon& horizon,
                                const ForwardResult& forward) {
  RtTrace empty;
  return settle(resources, horizon, &forward, empty);
}

SettlementLedger settle(std::span<const Resource> resources, const Horizon& horizon,
                        const ForwardResult* forward, const RtTrace& trace) {
  const double dt = horizon.period_hours;
  SettlementLedger ledger;
  // Quantity each party holds for each period after the latest market.
  std::vector<Quantities> held(horizon.periods, Quantities{std::vector<double>(resources.size(), 0.0), 0.0});

  auto post = [&](const std::string& market, int t, double price, const Quantities& q) {
    Quantities& prev = held[t - 1];
    for (std::size_t i = 0; i < resources.size(); ++i) {
      const double dq = q.resource[i] - prev.resource[i];
      ledger.entries.push_back({market, resources[i].id, t, dq, price, price * dq});
    }
    const double dl = q.load - prev.load;
    ledger.entries.push_back({market, kLoadId, t, dl, price, price * dl});
    prev = q;
  };

  if (forward) {
    const MarketOutcome& out = forward->outcome;
    for (int t = 1; t <= horizon.periods; ++t) post("forward", t, out.lmp_at(t), quantities(out, t, dt));
  }
  for (std::size_t k = 0; k < trace.windows.size(); ++k) {
    const WindowRecord& rec = trace.windows[k];
    const std::string market = "rt-" + std::to_string(k + 1);
    for (int t = rec.window.start; t <= rec.settle_last; ++t) {
      post(market, t, rec.prices.at(t - rec.window.start), quantities(rec.schedule, t, dt));
    }
  }
  return ledger;
}

Surpluses compute_surpluses(const SettlementLedger& ledger, std::span<const Resource> resources,
                            const Horizon& horizon, std::span<const SystemState> dispatch,
                            std::span<const double> served, double value_of_load) {
  const double dt = horizon.period_hours;
  Surpluses s;
  for (std::size_t i = 0; i < resources.size(); ++i) {
    const Resource& r = resources[i];
    double cost = 0.0;
    for (std::size_t k = 0; k < dispatch.size(); ++k) {
      const int t = static_cast<int>(k) + 1;
      const ResourceState& x = dispatch[k][i];
      cost += dt * (r.is_storage() ? r.offer_at(t) * x.discharge - r.bid * x.charge : r.offer_at(t) * x.output);
    }
    (r.is_storage() ? s.esrs : s.ps) += ledger.total(r.id) - cost;
  }
  double value = 0.0;
  for (double q : served) value += value_of_load * q * dt;
  s.cs = value + ledger.total(kLoadId);
  s.ss = s.ps + s.esrs + s.cs;
  return s;
}

std::map<std::string, double> compute_loc(std::span<const Resource> resources, const Horizon& horizon,
                                          std::span<const double> prices,
                                          std::span<const SystemState> dispatch) {
  if (static_cast<int>(prices.size()) != horizon.periods ||
      static_cast<int>(dispatch.size()) != horizon.periods) {
    throw std::invalid_argument("lost opportunity cost needs full-horizon prices and dispatch");
  }
  std::map<std::string, double> loc;
  std::vector<ResourceState> path(dispatch.size());
  for (std::size_t i = 0; i < resources.size(); ++i) {
    Resource r = resources[i];
    for (std::size_t k = 0; k < dispatch.size(); ++k) path[k] = dispatch[k][i];
    if (r.is_storage() && r.soc_target) r.soc_target = path.back().soc;
    const lp::LpSolution best = lp::solve(build_profit_max(r, horizon, prices), plain_solve());
    if (!best.optimal()) {
      throw std::runtime_error("profit maximization for " + r.id + " is " +
                               std::string(lp::to_string(best.status)));
    }
    loc[r.id] = -best.objective - resource_profit(r, horizon, prices, path);
  }
  return loc;
}

MetricsReport compute_metrics(std::span<const Resource> resources, const Horizon& horizon,
                              const ForwardResult& forward, const RtTrace& trace, double value_of_load) {
  MetricsReport m;
  m.scheme = trace.scheme;
  const SettlementLedger ledger = settle(resources, horizon, &forward, trace);
  std::vector<double> served(trace.demand.size());
  for (std::size_t k = 0; k < served.size(); ++k) served[k] = trace.demand[k] - trace.shed[k];
  m.surplus = compute_surpluses(ledger, resources, horizon, trace.dispatch, served, value_of_load);
  m.loc = compute_loc(resources, horizon, trace.lmp, trace.dispatch);
  for (std::size_t i = 0; i < resources.size(); ++i) {
    const double v = m.loc.at(resources[i].id);
    m.total_loc += v;
    if (resources[i].is_storage()) m.storage_loc += v;
  }
  m.violations = trace.violations();
  m.reoptimizations = trace.reoptimizations;
  m.production_cost = trace.production_cost(resources, horizon.period_hours);
  for (const WindowRecord& w : trace.windows) {
    m.mean_schedule_seconds += w.schedule_seconds;
    m.mean_pricing_seconds += w.pricing_seconds;
  }
  if (!trace.windows.empty()) {
    m.mean_schedule_seconds /= static_cast<double>(trace.windows.size());
    m.mean_pricing_seconds /= static_cast<double>(trace.windows.size());
  }
  return m;
}

double backward_profit(std::span<const Resource> resources, const Horizon& horizon, int t0,
                       const SystemState& boundary, std::span<const double> realized_demand) {
  const lp::LpSolution sol =
      lp::solve(past_program(resources, horizon, t0, boundary, realized_demand), plain_solve());
  return sol.optimal() ? sol.objective : kUnbounded;
}

double forward_profit(std::span<const Resource> resources, const Horizon& horizon, int t_end,
                      const SystemState& boundary, std::span<const double> demand) {
  if (t_end < 1 || t_end >= horizon.periods) throw std::invalid_argument("future boundary needs 1 <= t_end < T");
  if (static_cast<int>(demand.size()) != horizon.periods) throw std::invalid_argument("demand must cover 1..T");
  const Window future{t_end + 1, horizon.periods, horizon.periods};
  const lp::LinearProgram prog = build_lookahead(resources, horizon, future, boundary,
                                                 demand.subspan(t_end), plain_build());
  const lp::LpSolution sol = lp::solve(prog, plain_solve());
  return sol.optimal() ? sol.objective : kUnbounded;
}

double backward_cut(std::span<const Resource> resources, const Horizon& horizon,
                    const ForwardResult& forward, int t0, const SystemState& boundary,
                    std::span<const double> realized_demand) {
  const lp::LinearProgram prog = past_program(resources, horizon, t0, boundary, realized_demand);
  const MarketOutcome& out = forward.outcome;
  double cut = 0.0;
  for (const lp::Constraint& c : prog.constraints()) {
    double dual = 0.0;
    if (c.tag == lp::ConstraintTag::kSystem) {
      const int t = std::stoi(c.name.substr(c.name.find('[') + 1));
      dual = out.lmp_at(t) * horizon.period_hours;
    } else if (auto it = out.intertemporal_duals.find(c.name); it != out.intertemporal_duals.end()) {
      dual = it->second;
    } else {
      dual = out.resource_duals.at(c.name);
    }
    cut += dual * c.rhs;
  }
  return cut;
}

std::vector<std::pair<int, SystemState>> sample_boundaries(std::span<const Resource> resources,
                                                           const Horizon& horizon,
                                                           const ForwardResult& forward, int count,
                                                           std::uint64_t seed) {
  std::vector<std::pair<int, SystemState>> samples;
  if (horizon.periods < 2) return samples;
  Rng rng(seed);
  for (int n = 0; n < count; ++n) {
    const int t0 = rng.integer(2, horizon.periods);
    SystemState x = forward.outcome.at(t0);
    if (!rng.chance(0.2)) {
      for (std::size_t i = 0; i < resources.size(); ++i) {
        const Resource& r = resources[i];
        if (r.is_storage()) {
          x[i].soc = rng.uniform(0.0, r.soc_max);
        } else if (rng.chance(0.5)) {
          x[i].output = rng.uniform(r.eco_min, r.eco_max);
        }
      }
    }
    samples.emplace_back(t0, std::move(x));
  }
  return samples;
}

LowerCutReport lower_cut_check(std::span<const Resource> resources, const Horizon& horizon,
                               const ForwardResult& forward, std::span<const double> realized_demand,
                               std::span<const std::pair<int, SystemState>> samples, double tolerance) {
  LowerCutReport report;
  for (const auto& [t0, x] : samples) {
    CutSample s{t0, x, backward_profit(resources, horizon, t0, x, realized_demand),
                backward_cut(resources, horizon, forward, t0, x, realized_demand)};
    report.max_violation = std::max(report.max_violation, s.cut - s.value);
    if (!report.epsilon.contains(t0)) {
      const SystemState& xu = forward.outcome.at(t0);
      report.epsilon[t0] = backward_profit(resources, horizon, t0, xu, realized_demand) -
                           backward_cut(resources, horizon, forward, t0, xu, realized_demand);
    }
    report.samples.push_back(std::move(s));
  }
  report.passed = report.max_violation <= tolerance;
  for (const auto& [t0, eps] : report.epsilon) {
    if (eps < -tolerance) report.passed = false;
  }
  return report;
}

}  // namespace mpm
