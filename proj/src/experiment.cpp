#include "mpm/experiment.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace mpm {

namespace {

using json = nlohmann::ordered_json;

struct Task {
  SchemeId scheme;
  int window;
  int scenario;
};

// Per-run golden findings, merged into one verdict per check.
struct RunChecks {
  std::map<std::string, double> worst;  // check -> worst deviation seen
};

double max_gap(std::span<const double> a, std::span<const double> b) {
  double gap = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) gap = std::max(gap, std::abs(a[k] - b[k]));
  return gap;
}

double dispatch_gap(const std::vector<SystemState>& a, const std::vector<SystemState>& b) {
  double gap = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    for (std::size_t i = 0; i < a[k].size(); ++i) gap = std::max(gap, std::abs(a[k][i].output - b[k][i].output));
  }
  return gap;
}

std::optional<double> percent(double value, double base) {
  if (base == 0.0) return std::nullopt;
  return 100.0 * (value - base) / std::abs(base);
}

std::string optional_number(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

void write_atomic(const std::filesystem::path& path, const std::string& text) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream file(tmp, std::ios::binary);
    if (!file) throw std::runtime_error("cannot write " + tmp.string());
    file << text;
    if (!file) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

std::string format_number(double value) {
  if (value == 0.0) return "0";  // folds -0
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

bool ExperimentReport::golden_passed() const {
  return std::all_of(golden.begin(), golden.end(), [](const Verdict& v) { return v.passed; });
}

const Aggregate* ExperimentReport::find(SchemeId scheme, int window) const {
  for (const Aggregate& a : aggregates) {
    if (a.scheme == scheme && a.window == window) return &a;
  }
  return nullptr;
}

ExperimentReport run_experiment(const ScenarioFile& scenario, const ExperimentOptions& options) {
  const std::vector<Resource>& res = scenario.resources;
  const Horizon& h = scenario.horizon;
  BuildOptions build;
  build.value_of_load = scenario.rt.value_of_load;
  build.tie_break = scenario.rt.tie_break;
  lp::SolveOptions solve;
  solve.time_limit_seconds = scenario.rt.time_limit_seconds;
  solve.tie_break = scenario.rt.tie_break;
  const ForwardResult forward = clear_forward(res, h, build, solve);
  const std::vector<std::vector<double>> realized = generate_realizations(scenario.realization, h.demand);
  const GoldenSpec& golden = scenario.golden;

  ExperimentReport report;
  report.scenario = scenario.name;
  report.forward_lmp = forward.outcome.lmp;

  std::vector<Task> tasks;
  for (SchemeId s : scenario.schemes) {
    for (int w : scenario.windows) {
      for (int k = 0; k < static_cast<int>(realized.size()); ++k) tasks.push_back({s, w, k});
    }
  }
  report.runs.resize(tasks.size());
  std::vector<RunChecks> checks(tasks.size());

  auto run_task = [&](std::size_t n) {
    const Task& task = tasks[n];
    RunResult& out = report.runs[n];
    out.scheme = task.scheme;
    out.window = task.window;
    out.scenario = task.scenario;
    try {
      SchemeConfig config;
      config.rt = scenario.rt;
      config.rt.window = task.window;
      config.rt.stride = std::min(config.rt.stride, task.window);
      config.hogan_fix_past = scenario.hogan_fix_past;
      const std::vector<double>& demand = realized[task.scenario];
      const RtTrace trace = run_scheme(task.scheme, res, h, forward, demand, config);
      out.metrics = compute_metrics(res, h, forward, trace, scenario.rt.value_of_load);
      for (const auto& [id, miss] : trace.target_miss) out.target_missed = out.target_missed || miss > 1e-6;
      if (task.scheme != SchemeId::kProposed) return;
      auto& worst = checks[n].worst;
      if (golden.rt_matches_forward) {
        worst["rt_matches_forward"] = std::max(dispatch_gap(trace.dispatch, forward.outcome.schedule),
                                               max_gap(trace.lmp, forward.outcome.lmp));
      }
      if (golden.rt_prices_equal_forward) worst["rt_prices_equal_forward"] = max_gap(trace.lmp, forward.outcome.lmp);
      if (golden.rt_dispatch_equals_perfect_information) {
        const MarketOutcome perfect = perfect_information_run(res, h, demand, build);
        worst["rt_dispatch_equals_perfect_information"] = dispatch_gap(trace.dispatch, perfect.schedule);
      }
      if (golden.zero_violations) worst["zero_violations"] = out.metrics->violations;
      if (golden.zero_loc) {
        double loc = 0.0;
        for (const auto& [id, v] : out.metrics->loc) loc = std::max(loc, std::abs(v));
        worst["zero_loc"] = loc;
      }
    } catch (const std::exception& e) {
      out.metrics.reset();
      out.error = e.what();
    }
  };

  int threads = options.threads > 0 ? options.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, std::max(1, static_cast<int>(tasks.size())));
  if (threads == 1) {
    for (std::size_t n = 0; n < tasks.size(); ++n) run_task(n);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t n = next++; n < tasks.size(); n = next++) run_task(n);
      });
    }
  }

  for (SchemeId s : scenario.schemes) {
    for (int w : scenario.windows) {
      Aggregate a;
      a.scheme = s;
      a.window = w;
      for (const RunResult& r : report.runs) {
        if (r.scheme != s || r.window != w) continue;
        if (!r.metrics) {
          ++a.failed;
          continue;
        }
        const MetricsReport& m = *r.metrics;
        ++a.runs;
        a.ss += m.surplus.ss;
        a.ps += m.surplus.ps;
        a.cs += m.surplus.cs;
        a.esrs += m.surplus.esrs;
        a.total_loc += m.total_loc;
        a.storage_loc += m.storage_loc;
        a.violations += m.violations;
        a.violation_scenarios += m.violations > 0 ? 1 : 0;
        a.target_miss_scenarios += r.target_missed ? 1 : 0;
        a.pricing_seconds += m.mean_pricing_seconds;
        a.schedule_seconds += m.mean_schedule_seconds;
      }
      if (a.runs > 0) {
        for (double* v : {&a.ss, &a.ps, &a.cs, &a.esrs, &a.total_loc, &a.storage_loc, &a.pricing_seconds,
                          &a.schedule_seconds}) {
          *v /= a.runs;
        }
      }
      report.aggregates.push_back(a);
    }
  }
  for (Aggregate& a : report.aggregates) {
    const Aggregate* base = report.find(SchemeId::kMyopic, a.window);
    if (!base) {
      for (const Aggregate& b : report.aggregates) {
        if (b.scheme == SchemeId::kMyopic) base = &b;
      }
    }
    if (!base || base->runs == 0 || a.runs == 0) continue;
    a.ss_vs_myopic = percent(a.ss, base->ss);
    a.ps_vs_myopic = percent(a.ps, base->ps);
    a.cs_vs_myopic = percent(a.cs, base->cs);
    a.esrs_vs_myopic = percent(a.esrs, base->esrs);
    a.loc_vs_myopic = percent(a.total_loc, base->total_loc);
    a.pricing_vs_myopic = percent(a.pricing_seconds, base->pricing_seconds);
  }

  const double tol = golden.tolerance;
  if (golden.forward_lmp) {
    const double gap = max_gap(forward.outcome.lmp, *golden.forward_lmp);
    report.golden.push_back({"forward_lmp", gap <= tol, "max deviation " + format_number(gap)});
  }
  for (const auto& [id, expected] : golden.forward_storage_net) {
    std::size_t i = 0;
    while (res[i].id != id) ++i;
    double gap = 0.0;
    for (int t = 1; t <= h.periods; ++t) {
      gap = std::max(gap, std::abs(forward.outcome.at(t)[i].output - expected.at(t - 1)));
    }
    report.golden.push_back({"forward_storage_net[" + id + "]", gap <= tol, "max deviation " + format_number(gap)});
  }
  const std::pair<const char*, bool> run_checks[] = {
      {"rt_matches_forward", golden.rt_matches_forward},
      {"rt_prices_equal_forward", golden.rt_prices_equal_forward},
      {"rt_dispatch_equals_perfect_information", golden.rt_dispatch_equals_perfect_information},
      {"zero_violations", golden.zero_violations},
      {"zero_loc", golden.zero_loc}};
  for (const auto& [name, asked] : run_checks) {
    if (!asked) continue;
    int checked = 0;
    int failed = 0;
    double worst = 0.0;
    for (std::size_t n = 0; n < tasks.size(); ++n) {
      if (tasks[n].scheme != SchemeId::kProposed) continue;
      if (!report.runs[n].metrics) {
        ++failed;
        continue;
      }
      ++checked;
      worst = std::max(worst, checks[n].worst.at(name));
    }
    if (checked + failed == 0) {
      report.golden.push_back({name, false, "no proposed-scheme run to check"});
    } else if (failed > 0) {
      report.golden.push_back({name, false, std::to_string(failed) + " proposed runs failed"});
    } else {
      report.golden.push_back({name, worst <= tol, "worst over " + std::to_string(checked) + " runs " +
                                                       format_number(worst)});
    }
  }
  return report;
}

std::string metrics_csv(const ExperimentReport& report) {
  std::ostringstream out;
  out << "scheme,window,scenario,status,ss,ps,cs,esrs,total_loc,storage_loc,violations,target_missed,"
         "reoptimizations,production_cost\n";
  for (const RunResult& r : report.runs) {
    out << to_string(r.scheme) << ',' << r.window << ',' << r.scenario << ',';
    if (!r.metrics) {
      std::string msg = r.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      out << "error: " << msg << ",,,,,,,,,,\n";
      continue;
    }
    const MetricsReport& m = *r.metrics;
    out << "ok," << format_number(m.surplus.ss) << ',' << format_number(m.surplus.ps) << ','
        << format_number(m.surplus.cs) << ',' << format_number(m.surplus.esrs) << ',' << format_number(m.total_loc)
        << ',' << format_number(m.storage_loc) << ',' << m.violations << ',' << (r.target_missed ? 1 : 0) << ','
        << m.reoptimizations << ',' << format_number(m.production_cost) << '\n';
  }
  return out.str();
}

std::string aggregates_csv(const ExperimentReport& report) {
  std::ostringstream out;
  out << "scheme,window,runs,failed,ss,ps,cs,esrs,total_loc,storage_loc,violations,violation_scenarios,"
         "target_miss_scenarios,ss_vs_myopic_pct,ps_vs_myopic_pct,cs_vs_myopic_pct,esrs_vs_myopic_pct,"
         "loc_vs_myopic_pct\n";
  for (const Aggregate& a : report.aggregates) {
    out << to_string(a.scheme) << ',' << a.window << ',' << a.runs << ',' << a.failed << ',' << format_number(a.ss)
        << ',' << format_number(a.ps) << ',' << format_number(a.cs) << ',' << format_number(a.esrs) << ','
        << format_number(a.total_loc) << ',' << format_number(a.storage_loc) << ',' << a.violations << ','
        << a.violation_scenarios << ',' << a.target_miss_scenarios << ',' << optional_number(a.ss_vs_myopic) << ','
        << optional_number(a.ps_vs_myopic) << ',' << optional_number(a.cs_vs_myopic) << ','
        << optional_number(a.esrs_vs_myopic) << ',' << optional_number(a.loc_vs_myopic) << '\n';
  }
  return out.str();
}

std::string timing_csv(const ExperimentReport& report) {
  std::ostringstream out;
  out << "scheme,window,scenario,mean_pricing_seconds,mean_schedule_seconds\n";
  for (const RunResult& r : report.runs) {
    if (!r.metrics) continue;
    out << to_string(r.scheme) << ',' << r.window << ',' << r.scenario << ','
        << format_number(r.metrics->mean_pricing_seconds) << ',' << format_number(r.metrics->mean_schedule_seconds)
        << '\n';
  }
  return out.str();
}

std::string summary_json(const ExperimentReport& report) {
  json j;
  j["scenario"] = report.scenario;
  j["forward_lmp"] = report.forward_lmp;
  j["aggregates"] = json::array();
  for (const Aggregate& a : report.aggregates) {
    json row{{"scheme", std::string(to_string(a.scheme))},
             {"window", a.window},
             {"runs", a.runs},
             {"failed", a.failed},
             {"ss", a.ss},
             {"ps", a.ps},
             {"cs", a.cs},
             {"esrs", a.esrs},
             {"total_loc", a.total_loc},
             {"storage_loc", a.storage_loc},
             {"violations", a.violations},
             {"violation_scenarios", a.violation_scenarios},
             {"target_miss_scenarios", a.target_miss_scenarios},
             {"mean_pricing_seconds", a.pricing_seconds},
             {"mean_schedule_seconds", a.schedule_seconds}};
    auto put = [&](const char* key, const std::optional<double>& v) {
      row[key] = v ? json(*v) : json(nullptr);
    };
    put("ss_vs_myopic_pct", a.ss_vs_myopic);
    put("ps_vs_myopic_pct", a.ps_vs_myopic);
    put("cs_vs_myopic_pct", a.cs_vs_myopic);
    put("esrs_vs_myopic_pct", a.esrs_vs_myopic);
    put("loc_vs_myopic_pct", a.loc_vs_myopic);
    put("pricing_vs_myopic_pct", a.pricing_vs_myopic);
    j["aggregates"].push_back(row);
  }
  j["golden"] = json::array();
  for (const Verdict& v : report.golden) {
    j["golden"].push_back({{"check", v.check}, {"passed", v.passed}, {"detail", v.detail}});
  }
  j["golden_passed"] = report.golden_passed();
  json errors = json::array();
  for (const RunResult& r : report.runs) {
    if (!r.metrics) {
      errors.push_back({{"scheme", std::string(to_string(r.scheme))},
                        {"window", r.window},
                        {"scenario", r.scenario},
                        {"error", r.error}});
    }
  }
  j["failed_runs"] = errors;
  return j.dump(2) + "\n";
}

void write_report(const ExperimentReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_atomic(dir / "metrics.csv", metrics_csv(report));
  write_atomic(dir / "aggregates.csv", aggregates_csv(report));
  write_atomic(dir / "timing.csv", timing_csv(report));
  write_atomic(dir / "summary.json", summary_json(report));
}

std::vector<Verdict> verify_properties(std::span<const Resource> resources, const Horizon& horizon,
                                       const RtConfig& config, std::span<const double> realized,
                                       const VerifyOptions& options) {
  const double tol = options.tolerance;
  std::vector<Verdict> out;
  const ForwardResult forward = clear_forward(resources, horizon);

  const EquilibriumReport eq = verify_competitive_equilibrium(resources, horizon, forward);
  double worst_gap = 0.0;
  for (const EquilibriumEntry& e : eq.entries) worst_gap = std::max(worst_gap, std::abs(e.gap));
  out.push_back({"property 1: competitive equilibrium", eq.passed, "max profit gap " + format_number(worst_gap)});

  const MarginalIdentityReport mi = check_marginal_identity(resources, horizon, forward, tol);
  out.push_back({"property 2: marginal identity", mi.passed,
                 std::to_string(mi.checked) + " marginal points, max error " + format_number(mi.max_error)});

  RtConfig rt = config;
  rt.check_continuation = true;
  const RtTrace trace = run_rolling(resources, horizon, forward, horizon.demand, rt);
  const double gap = std::max(dispatch_gap(trace.dispatch, forward.outcome.schedule),
                              max_gap(trace.lmp, forward.outcome.lmp));
  out.push_back({"property 3: real time reproduces forward", gap <= tol, "max deviation " + format_number(gap)});

  int checked = 0, infeasible = 0;
  for (const WindowRecord& w : trace.windows) {
    if (!w.continuation_feasible) continue;
    ++checked;
    infeasible += *w.continuation_feasible ? 0 : 1;
  }
  out.push_back({"property 4: guideline stays feasible", infeasible == 0,
                 std::to_string(checked) + " windows checked, " + std::to_string(infeasible) + " infeasible"});

  double loc = 0.0;
  for (const auto& [id, v] : compute_loc(resources, horizon, trace.lmp, trace.dispatch)) loc = std::max(loc, std::abs(v));
  out.push_back({"property 5: no lost opportunity cost", loc <= tol, "max |LOC| " + format_number(loc)});

  const auto samples = sample_boundaries(resources, horizon, forward, options.samples, options.seed);
  const LowerCutReport cut = lower_cut_check(resources, horizon, forward, realized, samples, tol);
  const LowerCutReport exact = lower_cut_check(resources, horizon, forward, horizon.demand, samples, tol);
  double eps = 0.0;
  for (const auto& [t0, e] : exact.epsilon) eps = std::max(eps, std::abs(e));
  const bool ok6 = cut.passed && exact.passed && eps <= tol;
  out.push_back({"property 6: forward duals cut past cost", ok6,
                 std::to_string(cut.samples.size()) + " boundaries, max cut excess " + format_number(cut.max_violation) +
                     ", max |epsilon| at forecast " + format_number(eps)});
  return out;
}

}  // namespace mpm
