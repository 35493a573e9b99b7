// Command-line front end: forward clearing, real-time runs, experiments,
// property verification and synthetic scenario generation.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "mpm/experiment.h"
#include "mpm/synthetic.h"

using namespace mpm;

namespace {

constexpr int kGoldenFailure = 1;
constexpr int kConfigError = 2;

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write " + path);
  file << text;
}

const std::vector<double>& pick_realization(const std::vector<std::vector<double>>& series, int k) {
  if (k < 0 || k >= static_cast<int>(series.size())) {
    throw std::invalid_argument("realization index " + std::to_string(k) + " outside 0.." +
                                std::to_string(series.size() - 1));
  }
  return series[k];
}

int clear_forward_cmd(const std::string& path, const std::string& out) {
  const ScenarioFile s = load_scenario(path);
  const ForwardResult fwd = clear_forward(s.resources, s.horizon);
  std::cout << "period,demand,lmp";
  for (const Resource& r : s.resources) std::cout << ',' << r.id;
  std::cout << '\n';
  for (int t = 1; t <= s.horizon.periods; ++t) {
    std::cout << t << ',' << format_number(s.horizon.demand[t - 1]) << ',' << format_number(fwd.outcome.lmp_at(t));
    for (const ResourceState& x : fwd.outcome.at(t)) std::cout << ',' << format_number(x.output);
    std::cout << '\n';
  }
  std::cerr << "objective " << format_number(fwd.outcome.objective) << '\n';
  if (!out.empty()) write_forward(out, s.resources, fwd);
  return 0;
}

int run_rt_cmd(const std::string& path, const std::string& scheme_name, int window, int stride, int realization,
               const std::string& out) {
  const ScenarioFile s = load_scenario(path);
  SchemeConfig config;
  config.rt = s.rt;
  if (window > 0) config.rt.window = window;
  if (stride > 0) config.rt.stride = stride;
  config.rt.stride = std::min(config.rt.stride, config.rt.window);
  config.hogan_fix_past = s.hogan_fix_past;
  validate(config.rt, s.horizon.periods);
  const SchemeId scheme = scheme_name.empty() ? s.schemes.front() : parse_scheme(scheme_name);
  const auto series = generate_realizations(s.realization, s.horizon.demand);
  const std::vector<double>& realized = pick_realization(series, realization);

  const ForwardResult fwd = clear_forward(s.resources, s.horizon);
  const RtTrace trace = run_scheme(scheme, s.resources, s.horizon, fwd, realized, config);
  const MetricsReport m = compute_metrics(s.resources, s.horizon, fwd, trace, s.rt.value_of_load);

  std::ostringstream csv;
  csv << "period,demand,lmp,forward_lmp,shed";
  for (const Resource& r : s.resources) csv << ',' << r.id;
  csv << '\n';
  for (int t = 1; t <= s.horizon.periods; ++t) {
    csv << t << ',' << format_number(realized[t - 1]) << ',' << format_number(trace.lmp[t - 1]) << ','
        << format_number(fwd.outcome.lmp_at(t)) << ',' << format_number(trace.shed[t - 1]);
    for (const ResourceState& x : trace.dispatch[t - 1]) csv << ',' << format_number(x.output);
    csv << '\n';
  }
  emit(csv.str(), out);
  std::cerr << to_string(scheme) << ": SS " << format_number(m.surplus.ss) << ", total LOC "
            << format_number(m.total_loc) << ", violations " << m.violations << ", re-optimizations "
            << m.reoptimizations << '\n';
  return 0;
}

int run_experiment_cmd(const std::string& path, const std::string& out, int threads) {
  const ScenarioFile s = load_scenario(path);
  ExperimentOptions options;
  options.threads = threads;
  const ExperimentReport report = run_experiment(s, options);
  if (!out.empty()) write_report(report, out);
  std::cout << aggregates_csv(report);
  for (const Verdict& v : report.golden) {
    std::cout << (v.passed ? "PASS " : "FAIL ") << v.check << " (" << v.detail << ")\n";
  }
  int failed = 0;
  for (const RunResult& r : report.runs) failed += r.metrics ? 0 : 1;
  if (failed > 0) std::cerr << failed << " runs failed; see summary.json\n";
  return report.golden_passed() ? 0 : kGoldenFailure;
}

int verify_cmd(const std::string& path, int samples, std::uint64_t seed, int realization) {
  const ScenarioFile s = load_scenario(path);
  const auto series = generate_realizations(s.realization, s.horizon.demand);
  VerifyOptions options;
  options.samples = samples;
  options.seed = seed;
  options.tolerance = s.golden.tolerance;
  bool all = true;
  for (const Verdict& v :
       verify_properties(s.resources, s.horizon, s.rt, pick_realization(series, realization), options)) {
    std::cout << (v.passed ? "PASS " : "FAIL ") << v.check << " (" << v.detail << ")\n";
    all = all && v.passed;
  }
  return all ? 0 : kGoldenFailure;
}

int generate_cmd(std::uint64_t seed, std::uint64_t realization_seed, int count, const std::string& out) {
  const System sys = synthetic_day(seed);
  ScenarioFile s;
  s.name = "synthetic_day_" + std::to_string(seed);
  s.resources = sys.resources;
  s.horizon = sys.horizon;
  s.realization.uniform = UniformRealization{1.0, 1.1, true, count, realization_seed};
  s.rt.window = 2;
  s.rt.stride = 1;
  s.schemes.assign(kAllSchemes.begin(), kAllSchemes.end());
  s.windows = {2};
  s.golden.zero_violations = true;
  emit(scenario_to_json(s) + "\n", out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-period market clearing: forward, real-time and comparison pricing schemes"};
  app.require_subcommand(1);

  std::string scenario, out, scheme;
  int window = 0, stride = 0, realization = 0, threads = 0, samples = 100, count = 25;
  std::uint64_t seed = 1, realization_seed = 42;

  auto* fwd = app.add_subcommand("clear-forward", "Clear the forecast horizon; print LMPs and schedules");
  fwd->add_option("-s,--scenario", scenario, "Scenario file")->required();
  fwd->add_option("-o,--out", out, "Write the forward result as JSON");

  auto* rt = app.add_subcommand("run-rt", "Run one scheme against one realization; print the realized series");
  rt->add_option("-s,--scenario", scenario, "Scenario file")->required();
  rt->add_option("--scheme", scheme, "myopic, first_only, proposed, hogan or hua (default: first listed)");
  rt->add_option("-w,--window", window, "Look-ahead length (default: scenario rt.window)");
  rt->add_option("--stride", stride, "Periods committed per window (default: scenario rt.stride)");
  rt->add_option("-r,--realization", realization, "Realized series index");
  rt->add_option("-o,--out", out, "Write the CSV here instead of stdout");

  auto* ex = app.add_subcommand("run-experiment", "Every scheme x window x realization, with golden checks");
  ex->add_option("-s,--scenario", scenario, "Scenario file")->required();
  ex->add_option("-o,--out", out, "Output directory for metrics.csv, aggregates.csv, timing.csv, summary.json");
  ex->add_option("-j,--threads", threads, "Worker threads (0: all cores)");

  auto* ver = app.add_subcommand("verify", "Check properties 1-6 on a scenario");
  ver->add_option("-s,--scenario", scenario, "Scenario file")->required();
  ver->add_option("--samples", samples, "Boundaries sampled for the lower-cut check");
  ver->add_option("--seed", seed, "Sampling seed");
  ver->add_option("-r,--realization", realization, "Realized series index for the lower-cut check");

  auto* gen = app.add_subcommand("generate-synthetic", "Write a synthetic desk-scale scenario file");
  gen->add_option("--seed", seed, "System seed");
  gen->add_option("--realization-seed", realization_seed, "Seed for the load realizations");
  gen->add_option("--count", count, "Number of realizations");
  gen->add_option("-o,--out", out, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*fwd) return clear_forward_cmd(scenario, out);
    if (*rt) return run_rt_cmd(scenario, scheme, window, stride, realization, out);
    if (*ex) return run_experiment_cmd(scenario, out, threads);
    if (*ver) return verify_cmd(scenario, samples, seed, realization);
    if (*gen) return generate_cmd(seed, realization_seed, count, out);
  } catch (const ScenarioError& e) {
    std::cerr << "scenario error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return 0;
}
