#include "mpm/realtime_engine.h"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace mpm {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double relative_deviation(std::span<const double> realized, std::span<const double> forecast) {
  double worst = 0.0;
  for (std::size_t k = 0; k < realized.size(); ++k) {
    const double scale = std::max(std::abs(forecast[k]), 1e-9);
    worst = std::max(worst, std::abs(realized[k] - forecast[k]) / scale);
  }
  return worst;
}

}  // namespace

void validate(const RtConfig& config, int periods) {
  if (config.stride < 1 || config.stride > config.window || config.window > periods) {
    throw std::invalid_argument("rolling configuration needs 1 <= stride <= window <= periods");
  }
  if (!(config.deviation_threshold >= 0)) {
    throw std::invalid_argument("deviation threshold must be >= 0");
  }
  if (!(config.time_limit_seconds > 0)) throw std::invalid_argument("time limit must be positive");
}

int RtTrace::violations(double tolerance) const {
  int count = 0;
  for (std::size_t k = 0; k < shed.size(); ++k) {
    if (shed[k] > tolerance || spill[k] > tolerance) ++count;
  }
  for (const auto& [id, miss] : target_miss) {
    if (miss > tolerance) ++count;
  }
  return count;
}

double RtTrace::production_cost(std::span<const Resource> resources, double period_hours) const {
  double cost = 0.0;
  for (std::size_t k = 0; k < dispatch.size(); ++k) {
    const int t = static_cast<int>(k) + 1;
    for (std::size_t i = 0; i < resources.size(); ++i) {
      const Resource& r = resources[i];
      const ResourceState& s = dispatch[k][i];
      cost += period_hours * (r.is_storage() ? r.offer_at(t) * s.discharge - r.bid * s.charge
                                             : r.offer_at(t) * s.output);
    }
  }
  return cost;
}

Guideline Guideline::from(const ForwardResult& forward) {
  return Guideline{forward.outcome.schedule, forward.outcome.intertemporal_duals,
                   forward.outcome.demand};
}

void Guideline::replace_from(int period, const MarketOutcome& outcome) {
  for (int t = std::max(period, outcome.start); t <= outcome.end(); ++t) {
    schedule.at(t - 1) = outcome.at(t);
    demand.at(t - 1) = outcome.demand.at(t - outcome.start);
  }
  for (const auto& [name, value] : outcome.intertemporal_duals) pi[name] = value;
}

void commit(RtTrace& trace, const WindowRecord& record) {
  const int start = record.window.start;
  for (int t = start; t <= record.commit_last; ++t) {
    trace.dispatch.push_back(record.schedule.at(t));
    trace.lmp.push_back(record.prices.at(t - start));
    trace.shed.push_back(record.schedule.shed.at(t - start));
    trace.spill.push_back(record.schedule.spill.at(t - start));
  }
}

void finish(RtTrace& trace, std::span<const Resource> resources, const Horizon& horizon) {
  trace.target_miss.clear();
  if (static_cast<int>(trace.dispatch.size()) != horizon.periods) return;
  for (std::size_t i = 0; i < resources.size(); ++i) {
    const Resource& r = resources[i];
    if (r.is_storage() && r.soc_target) {
      trace.target_miss[r.id] = std::abs(trace.dispatch.back()[i].soc - *r.soc_target);
    }
  }
}

bool continuation_feasible(std::span<const Resource> resources, const Horizon& horizon, int from,
                           const SystemState& state, std::span<const SystemState> schedule,
                           std::span<const double> demand, double tolerance) {
  if (from > horizon.periods) return true;
  const Window w{from, horizon.periods, horizon.periods};
  BuildOptions options;
  options.tie_break = false;
  const std::span<const double> tail(demand.data() + from - 1, w.length());
  const lp::LinearProgram prog = build_sp(resources, horizon, w, state, std::nullopt, tail, options);
  std::vector<double> x(prog.num_variables(), 0.0);
  for (int t = from; t <= horizon.periods; ++t) {
    for (std::size_t i = 0; i < resources.size(); ++i) {
      const Resource& r = resources[i];
      const ResourceState& s = schedule[t - 1][i];
      if (r.is_storage()) {
        x[*prog.find_variable(var_name("ch", r.id, t))] = s.charge;
        x[*prog.find_variable(var_name("dis", r.id, t))] = s.discharge;
        x[*prog.find_variable(var_name("soc", r.id, t))] = s.soc;
      } else {
        x[*prog.find_variable(var_name("p", r.id, t))] = s.output;
      }
    }
  }
  for (int j = 0; j < prog.num_variables(); ++j) {
    const lp::Variable& v = prog.variable(j);
    if (x[j] < v.lower - tolerance || x[j] > v.upper + tolerance) return false;
  }
  for (int i = 0; i < prog.num_constraints(); ++i) {
    if (prog.violation(i, x) > tolerance) return false;
  }
  return true;
}

RtTrace run_rolling(std::span<const Resource> resources, const Horizon& horizon,
                    const ForwardResult& forward, std::span<const double> realized_demand,
                    const RtConfig& config) {
  const int periods = horizon.periods;
  validate(config, periods);
  if (static_cast<int>(realized_demand.size()) != periods) {
    throw std::invalid_argument("realized demand must cover the horizon");
  }
  BuildOptions build;
  build.value_of_load = config.value_of_load;
  build.tie_break = config.tie_break;
  BuildOptions elastic = build;
  elastic.elastic = true;
  BuildOptions pricing = build;
  pricing.tie_break = false;
  lp::SolveOptions solve;
  solve.time_limit_seconds = config.time_limit_seconds;
  solve.tie_break = config.tie_break;

  Guideline guide = Guideline::from(forward);
  RtTrace trace;
  trace.scheme = "proposed";
  trace.demand.assign(realized_demand.begin(), realized_demand.end());
  SystemState state = initial_state(resources);

  for (int t0 = 1; t0 <= periods; t0 += config.stride) {
    WindowRecord rec;
    rec.window = Window::make(t0, config.window, periods);
    const Window& w = rec.window;
    rec.past = state;
    const std::span<const double> demand(realized_demand.data() + t0 - 1, w.length());
    const auto clock = std::chrono::steady_clock::now();

    auto schedule = [&](const BuildOptions& options) {
      rec.anchor.reset();
      if (w.has_future_boundary()) rec.anchor = guide.schedule.at(w.end);
      const lp::LinearProgram sp = build_sp(resources, horizon, w, state, rec.anchor, demand, options);
      return solve_outcome(resources, horizon, w.start, w.end, demand, sp, solve);
    };

    const std::span<const double> planned(guide.demand.data() + t0 - 1, w.length());
    bool reoptimize = relative_deviation(demand, planned) > config.deviation_threshold;
    if (!reoptimize) {
      rec.schedule = schedule(build);
      reoptimize = !rec.schedule.optimal();
    }
    if (reoptimize) {
      // Remaining horizon with realized demand in the window, forecast after.
      const Window rest{t0, periods, periods};
      std::vector<double> rest_demand(guide.demand.begin() + t0 - 1, guide.demand.end());
      std::copy(demand.begin(), demand.end(), rest_demand.begin());
      lp::LinearProgram prog = build_sp(resources, horizon, rest, state, std::nullopt, rest_demand, build);
      MarketOutcome plan = solve_outcome(resources, horizon, t0, periods, rest_demand, prog, solve);
      if (!plan.optimal()) {
        prog = build_sp(resources, horizon, rest, state, std::nullopt, rest_demand, elastic);
        plan = solve_outcome(resources, horizon, t0, periods, rest_demand, prog, solve);
      }
      if (plan.optimal()) guide.replace_from(t0, plan);
      rec.reoptimized = true;
      ++trace.reoptimizations;
      rec.schedule = schedule(build);
    }
    if (!rec.schedule.optimal()) {
      rec.schedule = schedule(elastic);
      rec.elastic = true;
    }
    if (!rec.schedule.optimal()) {
      throw std::runtime_error("window " + std::to_string(t0) + " has no schedule even with slacks: " +
                               std::string(lp::to_string(rec.schedule.status)));
    }
    rec.schedule_seconds = seconds_since(clock);

    const auto price_clock = std::chrono::steady_clock::now();
    rec.adjustments = offer_adjustments(resources, horizon, w, guide.pi);
    MarketOutcome priced = solve_outcome(resources, horizon, w.start, w.end, demand,
                                         build_pp(resources, horizon, w, rec.adjustments, demand, pricing),
                                         solve);
    if (!priced.optimal()) {
      BuildOptions elastic_pricing = pricing;
      elastic_pricing.elastic = true;
      priced = solve_outcome(resources, horizon, w.start, w.end, demand,
                             build_pp(resources, horizon, w, rec.adjustments, demand, elastic_pricing),
                             solve);
    }
    rec.prices = priced.optimal() ? priced.lmp : std::vector<double>(w.length(), config.value_of_load);
    rec.pricing_seconds = seconds_since(price_clock);

    if (config.check_continuation && w.has_future_boundary()) {
      rec.continuation_feasible = continuation_feasible(resources, horizon, w.end + 1,
                                                        rec.schedule.at(w.end), guide.schedule,
                                                        guide.demand);
    }
    rec.commit_last = std::min(t0 + config.stride - 1, w.end);
    rec.settle_last = w.end;
    state = rec.schedule.at(rec.commit_last);
    commit(trace, rec);
    trace.windows.push_back(std::move(rec));
  }
  finish(trace, resources, horizon);
  return trace;
}

MarketOutcome perfect_information_run(std::span<const Resource> resources, const Horizon& horizon,
                                      std::span<const double> realized_demand,
                                      const BuildOptions& options) {
  Horizon realized = horizon;
  realized.demand.assign(realized_demand.begin(), realized_demand.end());
  return clear_forward(resources, realized, options).outcome;
}

}  // namespace mpm
