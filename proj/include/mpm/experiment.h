#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mpm/scenario.h"
#include "mpm/settlement_metrics.h"

namespace mpm {

struct RunResult {
  SchemeId scheme = SchemeId::kProposed;
  int window = 1;
  int scenario = 0;  // index into the realized series
  std::optional<MetricsReport> metrics;  // empty when the run failed
  bool target_missed = false;
  std::string error;
};

// Means over the successful runs of one (scheme, window).
struct Aggregate {
  SchemeId scheme = SchemeId::kProposed;
  int window = 1;
  int runs = 0;
  int failed = 0;
  double ss = 0.0, ps = 0.0, cs = 0.0, esrs = 0.0;
  double total_loc = 0.0, storage_loc = 0.0;
  int violations = 0;            // summed over runs
  int target_miss_scenarios = 0;
  int violation_scenarios = 0;
  double pricing_seconds = 0.0;  // mean per-solve wall time
  double schedule_seconds = 0.0;
  // Percent change against the myopic aggregate of the same experiment.
  std::optional<double> ss_vs_myopic, ps_vs_myopic, cs_vs_myopic, esrs_vs_myopic, loc_vs_myopic,
      pricing_vs_myopic;
};

struct Verdict {
  std::string check;
  bool passed = false;
  std::string detail;
};

struct ExperimentReport {
  std::string scenario;
  std::vector<double> forward_lmp;
  std::vector<RunResult> runs;  // ordered by scheme, window, scenario
  std::vector<Aggregate> aggregates;
  std::vector<Verdict> golden;

  bool golden_passed() const;
  const Aggregate* find(SchemeId scheme, int window) const;
};

struct ExperimentOptions {
  int threads = 0;  // 0: hardware concurrency
};

// Forward clearing once on the forecast, then every scheme x window x
// realization in a worker pool. A failed run is recorded and skipped.
// Throws InfeasibleClearing when the forward clearing itself fails.
ExperimentReport run_experiment(const ScenarioFile& scenario, const ExperimentOptions& options = {});

// metrics.csv and aggregates.csv are deterministic for a scenario file;
// wall times go to timing.csv and summary.json only.
std::string metrics_csv(const ExperimentReport& report);
std::string aggregates_csv(const ExperimentReport& report);
std::string timing_csv(const ExperimentReport& report);
std::string summary_json(const ExperimentReport& report);
// Writes all four files into `dir`, each through a temporary and a rename.
void write_report(const ExperimentReport& report, const std::filesystem::path& dir);

struct VerifyOptions {
  int samples = 100;  // boundaries for the lower-cut check
  std::uint64_t seed = 1;
  double tolerance = 1e-6;
};

// Properties 1-6 on one system: equilibrium, marginal identity, real-time
// reproduction of forward, continuation feasibility, zero lost opportunity
// cost, and the lower cut against `realized`.
std::vector<Verdict> verify_properties(std::span<const Resource> resources, const Horizon& horizon,
                                       const RtConfig& config, std::span<const double> realized,
                                       const VerifyOptions& options = {});

// Formats a number in its shortest round-trip form.
std::string format_number(double value);

}  // namespace mpm
