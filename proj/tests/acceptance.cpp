// One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

#include "mpm/experiment.h"
#include "mpm/synthetic.h"
#include "support/grid_oracle.h"

using namespace mpm;

namespace {

constexpr double kTol = 1e-6;
const std::string kScenarios = MPM_SCENARIO_DIR;

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

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Outcome {
  bool passed = false;
  std::string detail;
};

int failures = 0;

void criterion(int n, const char* title, double limit_seconds, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = secs < limit_seconds;
  const bool ok = out.passed && in_time;
  failures += ok ? 0 : 1;
  std::printf("CRITERION %d %s: %s | %s | %.2fs (limit %.0fs%s)\n", n, ok ? "PASS" : "FAIL", title,
              out.detail.c_str(), secs, limit_seconds, in_time ? "" : ", exceeded");
  std::fflush(stdout);
}

ExperimentReport experiment(const std::string& file) {
  ExperimentOptions options;
  options.threads = 1;  // wall times are compared across schemes
  return run_experiment(load_scenario(kScenarios + "/" + file), options);
}

}  // namespace

int main() {
  criterion(1, "Case A perfect-forecast forward clearing", 1.0, [] {
    const ScenarioFile s = load_scenario(kScenarios + "/case_a_perfect.json");
    const ForwardResult fwd = clear_forward(s.resources, s.horizon);
    const std::vector<double> lmp{10, 63, 63, 100, 100, 63, 63, 100};
    const std::vector<double> esr{-6, 0, 0, 0, 12, -12, 0, 12};
    std::vector<double> net;
    for (const SystemState& x : fwd.outcome.schedule) net.push_back(x[3].output);
    const Resource& st = s.resources[3];
    const auto grid = mpm::testing::grid_clear(
        {{10, 40}, {63, 40}, {100, 30}},
        {st.offer[0], st.bid, st.eco_max, st.soc_max, st.soc_initial}, s.horizon.demand, 1.0);
    const double lmp_gap = max_gap(fwd.outcome.lmp, lmp);
    const double esr_gap = max_gap(net, esr);
    const double obj_gap = std::abs(fwd.outcome.objective - grid.cost);
    std::ostringstream d;
    d << "LMP max dev " << num(lmp_gap) << ", ESR net max dev " << num(esr_gap) << ", objective "
      << num(fwd.outcome.objective) << " vs grid oracle " << num(grid.cost);
    return Outcome{lmp_gap <= kTol && esr_gap <= kTol && obj_gap <= kTol, d.str()};
  });

  criterion(2, "properties 3 and 5 on 50 random systems, realized = forecast", 120.0, [] {
    double worst_dispatch = 0.0, worst_price = 0.0, worst_loc = 0.0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      const System sys = random_system(seed);
      const ForwardResult fwd = clear_forward(sys.resources, sys.horizon);
      RtConfig config;
      config.window = 1 + static_cast<int>(seed % std::min(4, sys.horizon.periods));
      config.stride = seed % 2 == 0 ? config.window : 1;
      const RtTrace trace = run_rolling(sys.resources, sys.horizon, fwd, sys.horizon.demand, config);
      worst_dispatch = std::max(worst_dispatch, dispatch_gap(trace.dispatch, fwd.outcome.schedule));
      worst_price = std::max(worst_price, max_gap(trace.lmp, fwd.outcome.lmp));
      for (const auto& [id, v] : compute_loc(sys.resources, sys.horizon, trace.lmp, trace.dispatch)) {
        worst_loc = std::max(worst_loc, v);
      }
    }
    std::ostringstream d;
    d << "max dispatch dev " << num(worst_dispatch) << ", max price dev " << num(worst_price) << ", max LOC "
      << num(worst_loc);
    return Outcome{worst_dispatch <= kTol && worst_price <= kTol && worst_loc <= kTol, d.str()};
  });

  criterion(3, "Case A imperfect forecast: forward prices, perfect-information dispatch", 60.0, [] {
    const ScenarioFile s = load_scenario(kScenarios + "/case_a_imperfect.json");
    const std::vector<double> realized = generate_realizations(s.realization, s.horizon.demand).front();
    const ForwardResult fwd = clear_forward(s.resources, s.horizon);
    const RtTrace trace = run_rolling(s.resources, s.horizon, fwd, realized, s.rt);
    const MarketOutcome perfect = perfect_information_run(s.resources, s.horizon, realized);
    const double price_gap = max_gap(trace.lmp, fwd.outcome.lmp);
    const double disp_gap = dispatch_gap(trace.dispatch, perfect.schedule);
    std::ostringstream d;
    d << "RT vs forward price max dev " << num(price_gap) << ", RT vs perfect-information dispatch max dev "
      << num(disp_gap);
    return Outcome{price_gap <= kTol && disp_gap <= kTol, d.str()};
  });

  criterion(4, "properties 1 and 2 on Case A and 50 random systems", 120.0, [] {
    const ScenarioFile s = load_scenario(kScenarios + "/case_a_perfect.json");
    std::vector<System> systems{{s.resources, s.horizon}};
    for (std::uint64_t seed = 1; seed <= 50; ++seed) systems.push_back(random_system(seed));
    double worst_gap = 0.0, worst_identity = 0.0;
    int marginal = 0, failed = 0;
    for (const System& sys : systems) {
      const ForwardResult fwd = clear_forward(sys.resources, sys.horizon);
      const EquilibriumReport eq = verify_competitive_equilibrium(sys.resources, sys.horizon, fwd);
      for (const EquilibriumEntry& e : eq.entries) worst_gap = std::max(worst_gap, std::abs(e.gap));
      const MarginalIdentityReport mi = check_marginal_identity(sys.resources, sys.horizon, fwd, kTol);
      marginal += mi.checked;
      worst_identity = std::max(worst_identity, mi.max_error);
      failed += (eq.passed && mi.passed) ? 0 : 1;
    }
    std::ostringstream d;
    d << systems.size() << " systems, max equilibrium gap " << num(worst_gap) << ", " << marginal
      << " marginal points with max identity error " << num(worst_identity);
    return Outcome{failed == 0 && worst_gap <= kTol && worst_identity <= kTol, d.str()};
  });

  criterion(5, "property 6 lower cut on sampled boundaries", 120.0, [] {
    int samples = 0, infinite = 0;
    double worst_excess = 0.0, worst_eps = 0.0;
    bool ok = true;
    auto check = [&](std::span<const Resource> res, const Horizon& h, std::span<const double> realized, int count,
                     std::uint64_t seed) {
      const ForwardResult fwd = clear_forward(res, h);
      const auto pts = sample_boundaries(res, h, fwd, count, seed);
      const LowerCutReport cut = lower_cut_check(res, h, fwd, realized, pts, kTol);
      const LowerCutReport exact = lower_cut_check(res, h, fwd, h.demand, pts, kTol);
      samples += static_cast<int>(cut.samples.size());
      for (const CutSample& c : cut.samples) infinite += std::isinf(c.value) ? 1 : 0;
      worst_excess = std::max(worst_excess, cut.max_violation);
      for (const auto& [t0, e] : exact.epsilon) worst_eps = std::max(worst_eps, std::abs(e));
      ok = ok && cut.passed && exact.passed;
    };
    const ScenarioFile a = load_scenario(kScenarios + "/case_a_imperfect.json");
    check(a.resources, a.horizon, generate_realizations(a.realization, a.horizon.demand).front(), 60, 5);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const System sys = random_system(seed);
      Rng rng(seed);
      std::vector<double> realized = sys.horizon.demand;
      for (double& d : realized) d *= rng.uniform(0.95, 1.05);
      check(sys.resources, sys.horizon, realized, 10, seed);
    }
    std::ostringstream d;
    d << samples << " boundaries (" << infinite << " with infeasible past), max cut excess " << num(worst_excess)
      << ", max |epsilon| at realized = forecast " << num(worst_eps);
    return Outcome{ok && samples >= 100 && worst_eps <= kTol, d.str()};
  });

  ExperimentReport case_b;
  double case_b_seconds = 0.0;
  criterion(6, "Case B directional reproduction at desk scale", 600.0, [&] {
    const auto start = std::chrono::steady_clock::now();
    case_b = experiment("case_b_synthetic.json");
    case_b_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const int w = 2;
    const Aggregate* myopic = case_b.find(SchemeId::kMyopic, w);
    const Aggregate* first = case_b.find(SchemeId::kFirstOnly, w);
    const Aggregate* proposed = case_b.find(SchemeId::kProposed, w);
    const Aggregate* hua = case_b.find(SchemeId::kHua, w);
    if (!myopic || !first || !proposed || !hua) return Outcome{false, "scenario lacks a required scheme"};
    const bool complete = myopic->failed + first->failed + proposed->failed + hua->failed == 0;
    const bool ss = proposed->ss > myopic->ss;
    const bool hua_lt_proposed = hua->total_loc < proposed->total_loc;
    const bool proposed_lt_first = proposed->total_loc < first->total_loc;
    const bool first_lt_myopic = first->total_loc < myopic->total_loc;
    const bool misses = myopic->target_miss_scenarios >= 24;
    const bool reliable = proposed->violations == 0;
    std::ostringstream d;
    d << "SS proposed " << num(proposed->ss) << (ss ? " > " : " <= ") << "myopic " << num(myopic->ss)
      << "; mean LOC hua " << num(hua->total_loc) << (hua_lt_proposed ? " < " : " >= ") << "proposed "
      << num(proposed->total_loc) << (proposed_lt_first ? " < " : " >= ") << "first_only " << num(first->total_loc)
      << (first_lt_myopic ? " < " : " >= ") << "myopic " << num(myopic->total_loc) << "; myopic target misses "
      << myopic->target_miss_scenarios << "/" << myopic->runs << "; proposed violations " << proposed->violations;
    return Outcome{complete && ss && hua_lt_proposed && proposed_lt_first && first_lt_myopic && misses && reliable,
                   d.str()};
  });

  criterion(7, "look-ahead sweep W = 1..4 for the proposed scheme", 600.0, [] {
    const ExperimentReport r = experiment("case_b_windows.json");
    bool ok = true;
    double previous = std::numeric_limits<double>::infinity();
    std::ostringstream d;
    d << "mean LOC";
    for (int w = 1; w <= 4; ++w) {
      const Aggregate* a = r.find(SchemeId::kProposed, w);
      if (!a || a->failed > 0) return Outcome{false, "missing proposed run at W=" + std::to_string(w)};
      ok = ok && a->total_loc <= previous + kTol && a->violations == 0;
      previous = a->total_loc;
      d << " W" << w << "=" << num(a->total_loc) << " (" << a->violations << " violations)";
    }
    return Outcome{ok, d.str()};
  });

  criterion(8, "pricing wall-time ordering myopic <= proposed <= hua <= hogan", 600.0 - case_b_seconds, [&] {
    const int w = 2;
    const Aggregate* m = case_b.find(SchemeId::kMyopic, w);
    const Aggregate* p = case_b.find(SchemeId::kProposed, w);
    const Aggregate* hua = case_b.find(SchemeId::kHua, w);
    const Aggregate* hogan = case_b.find(SchemeId::kHogan, w);
    if (!m || !p || !hua || !hogan) return Outcome{false, "criterion 6 experiment missing a scheme"};
    const bool ok = m->pricing_seconds <= p->pricing_seconds && p->pricing_seconds <= hua->pricing_seconds &&
                    hua->pricing_seconds <= hogan->pricing_seconds;
    std::ostringstream d;
    d << "mean pricing seconds myopic " << num(m->pricing_seconds) << ", proposed " << num(p->pricing_seconds)
      << ", hua " << num(hua->pricing_seconds) << ", hogan " << num(hogan->pricing_seconds);
    return Outcome{ok, d.str()};
  });

  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
