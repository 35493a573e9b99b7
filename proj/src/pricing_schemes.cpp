#include "mpm/pricing_schemes.h"

#include <chrono>
#include <functional>
#include <stdexcept>
#include <string>

namespace mpm {

namespace {

using Builder = std::function<lp::LinearProgram(const BuildOptions&)>;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

BuildOptions build_options(const RtConfig& config) {
  BuildOptions options;
  options.value_of_load = config.value_of_load;
  options.tie_break = config.tie_break;
  return options;
}

lp::SolveOptions solve_options(const RtConfig& config) {
  lp::SolveOptions options;
  options.time_limit_seconds = config.time_limit_seconds;
  options.tie_break = config.tie_break;
  return options;
}

// Hard solve, then the elastic program if the hard one has no optimum.
MarketOutcome solve_with_fallback(std::span<const Resource> resources, const Horizon& horizon,
                                  int first, int last, std::span<const double> demand,
                                  const Builder& build, const RtConfig& config) {
  BuildOptions options = build_options(config);
  const lp::SolveOptions solve = solve_options(config);
  MarketOutcome out = solve_outcome(resources, horizon, first, last, demand, build(options), solve);
  if (out.optimal()) return out;
  options.elastic = true;
  out = solve_outcome(resources, horizon, first, last, demand, build(options), solve);
  if (!out.optimal()) {
    throw std::runtime_error("period " + std::to_string(first) + " has no dispatch even with slacks: " +
                             std::string(lp::to_string(out.status)));
  }
  return out;
}

// Record for a scheme whose scheduling and pricing share one program.
WindowRecord single_step(std::span<const Resource> resources, const Horizon& horizon, int t, int last,
                         const SystemState& state, std::span<const double> demand,
                         const Builder& build, const RtConfig& config) {
  WindowRecord rec;
  rec.window = Window{t, last, horizon.periods};
  rec.past = state;
  const auto clock = std::chrono::steady_clock::now();
  rec.schedule = solve_with_fallback(resources, horizon, t, last, demand, build, config);
  rec.schedule_seconds = seconds_since(clock);
  rec.pricing_seconds = rec.schedule_seconds;
  rec.elastic = rec.schedule.elastic;
  rec.prices = rec.schedule.lmp;
  rec.commit_last = t;
  rec.settle_last = t;
  return rec;
}

}  // namespace

std::string_view to_string(SchemeId scheme) {
  switch (scheme) {
    case SchemeId::kMyopic: return "myopic";
    case SchemeId::kFirstOnly: return "first_only";
    case SchemeId::kProposed: return "proposed";
    case SchemeId::kHogan: return "hogan";
    case SchemeId::kHua: return "hua";
  }
  return "?";
}

SchemeId parse_scheme(std::string_view name) {
  for (SchemeId s : kAllSchemes) {
    if (to_string(s) == name) return s;
  }
  throw std::invalid_argument("unknown scheme '" + std::string(name) + "'");
}

WindowRecord price_myopic(std::span<const Resource> resources, const Horizon& horizon, int t,
                          const SystemState& state, double demand, const RtConfig& config) {
  const std::vector<double> d{demand};
  const Window w{t, t, horizon.periods};
  return single_step(resources, horizon, t, t, state, d,
                     [&](const BuildOptions& o) { return build_lookahead(resources, horizon, w, state, d, o); },
                     config);
}

WindowRecord price_first_only(std::span<const Resource> resources, const Horizon& horizon, int t,
                              const SystemState& state, std::span<const double> window_demand,
                              const RtConfig& config) {
  const int last = t + static_cast<int>(window_demand.size()) - 1;
  if (window_demand.empty() || last > horizon.periods) {
    throw std::invalid_argument("first_only window must lie inside the horizon");
  }
  const Window w{t, last, horizon.periods};
  return single_step(
      resources, horizon, t, last, state, window_demand,
      [&](const BuildOptions& o) { return build_lookahead(resources, horizon, w, state, window_demand, o); },
      config);
}

WindowRecord price_hua(std::span<const Resource> resources, const Horizon& horizon, int t,
                       const SystemState& state, std::span<const double> demand_tail,
                       const RtConfig& config) {
  if (static_cast<int>(demand_tail.size()) != horizon.periods - t + 1) {
    throw std::invalid_argument("remainder demand must cover t..T");
  }
  const Window w{t, horizon.periods, horizon.periods};
  return single_step(
      resources, horizon, t, horizon.periods, state, demand_tail,
      [&](const BuildOptions& o) { return build_lookahead(resources, horizon, w, state, demand_tail, o); },
      config);
}

MarketOutcome price_hogan(std::span<const Resource> resources, const Horizon& horizon, int t,
                          std::span<const SystemState> history, std::span<const double> demand,
                          bool fix_past, const RtConfig& config) {
  const int periods = horizon.periods;
  if (static_cast<int>(demand.size()) != periods) throw std::invalid_argument("demand must cover 1..T");
  if (fix_past && static_cast<int>(history.size()) < t - 1) {
    throw std::invalid_argument("fixed-past pricing needs the realized dispatch before t");
  }
  const Window w{1, periods, periods};
  const SystemState start = initial_state(resources);
  const Builder build = [&](const BuildOptions& o) {
    lp::LinearProgram prog = build_lookahead(resources, horizon, w, start, demand, o);
    if (!fix_past) return prog;
    // Pin realized dispatch; singleton rows fold into bounds in presolve.
    auto pin = [&](std::string name, double value) {
      const int j = *prog.find_variable(name);
      prog.add_constraint("fix_past[" + name + "]", lp::ConstraintTag::kBoundary, {{j, 1.0}},
                          lp::Sense::kEqual, value);
    };
    for (int p = 1; p < t; ++p) {
      for (std::size_t i = 0; i < resources.size(); ++i) {
        const Resource& r = resources[i];
        const ResourceState& s = history[p - 1][i];
        if (r.is_storage()) {
          pin(var_name("ch", r.id, p), s.charge);
          pin(var_name("dis", r.id, p), s.discharge);
        } else {
          pin(var_name("p", r.id, p), s.output);
        }
      }
    }
    return prog;
  };
  return solve_with_fallback(resources, horizon, 1, periods, demand, build, config);
}

RtTrace run_scheme(SchemeId scheme, std::span<const Resource> resources, const Horizon& horizon,
                   const ForwardResult& forward, std::span<const double> realized_demand,
                   const SchemeConfig& config) {
  const int periods = horizon.periods;
  if (static_cast<int>(realized_demand.size()) != periods) {
    throw std::invalid_argument("realized demand must cover the horizon");
  }
  if (scheme == SchemeId::kProposed) {
    RtTrace trace = run_rolling(resources, horizon, forward, realized_demand, config.rt);
    return trace;
  }
  validate(config.rt, periods);
  RtTrace trace;
  trace.scheme = std::string(to_string(scheme));
  trace.demand.assign(realized_demand.begin(), realized_demand.end());
  SystemState state = initial_state(resources);

  for (int t = 1; t <= periods; ++t) {
    // Every look-ahead scheme sees the same information: realized load up to
    // the end of the look-ahead window, forecast after it.
    const Window ahead = Window::make(t, config.rt.window, periods);
    std::vector<double> known(horizon.demand.begin(), horizon.demand.end());
    std::copy(realized_demand.begin(), realized_demand.begin() + ahead.end, known.begin());
    WindowRecord rec;
    switch (scheme) {
      case SchemeId::kMyopic:
        rec = price_myopic(resources, horizon, t, state, realized_demand[t - 1], config.rt);
        break;
      case SchemeId::kFirstOnly: {
        rec = price_first_only(resources, horizon, t, state,
                               std::span<const double>(known).subspan(t - 1, ahead.length()), config.rt);
        break;
      }
      case SchemeId::kHua:
        rec = price_hua(resources, horizon, t, state,
                        std::span<const double>(known).subspan(t - 1), config.rt);
        break;
      case SchemeId::kHogan: {
        rec = price_hua(resources, horizon, t, state,
                        std::span<const double>(known).subspan(t - 1), config.rt);
        const auto clock = std::chrono::steady_clock::now();
        const MarketOutcome pricing = price_hogan(resources, horizon, t, trace.dispatch, known,
                                                  config.hogan_fix_past, config.rt);
        rec.pricing_seconds = seconds_since(clock);
        rec.prices.assign(pricing.lmp.begin() + (t - 1), pricing.lmp.end());
        rec.elastic = rec.elastic || pricing.elastic;
        break;
      }
      case SchemeId::kProposed:
        break;
    }
    state = rec.schedule.at(t);
    commit(trace, rec);
    trace.windows.push_back(std::move(rec));
  }
  finish(trace, resources, horizon);
  return trace;
}

}  // namespace mpm
