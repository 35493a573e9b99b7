#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mpm/forward_market.h"
#include "mpm/market_model.h"

namespace mpm {

struct RtConfig {
  int window = 3;
  int stride = 1;
  // Relative L-infinity deviation of window demand from the guideline
  // forecast above which the remaining horizon is re-optimized.
  double deviation_threshold = 0.05;
  double time_limit_seconds = 300.0;
  double value_of_load = 1000.0;
  bool tie_break = true;
  // Check after each window that the guideline beyond it stays feasible from
  // the window's end state.
  bool check_continuation = false;
};

// Throws std::invalid_argument unless 1 <= stride <= window <= periods and
// the threshold is nonnegative.
void validate(const RtConfig& config, int periods);

// One market run inside a rolling simulation.
struct WindowRecord {
  Window window;
  MarketOutcome schedule;       // scheduling solution over the window
  std::vector<double> prices;   // $/MWh for window periods
  SystemState past;             // realized state at window.start - 1
  std::optional<SystemState> anchor;
  OfferAdjustments adjustments;
  int commit_last = 0;  // periods window.start..commit_last become realized
  int settle_last = 0;  // periods window.start..settle_last are settled
  bool reoptimized = false;
  bool elastic = false;
  double schedule_seconds = 0.0;
  double pricing_seconds = 0.0;
  std::optional<bool> continuation_feasible;
};

// Realized outcome of a rolling simulation.
struct RtTrace {
  std::string scheme;
  std::vector<WindowRecord> windows;
  std::vector<SystemState> dispatch;  // x*, [t - 1]
  std::vector<double> lmp;            // LMP*, from the window committing t
  std::vector<double> demand;         // realized
  std::vector<double> shed;
  std::vector<double> spill;
  std::map<std::string, double> target_miss;
  int reoptimizations = 0;

  int violations(double tolerance = 1e-6) const;
  double production_cost(std::span<const Resource> resources, double period_hours) const;
};

// Guideline the real-time market follows: schedules, intertemporal duals and
// the forecast they were cleared against. Re-optimization overwrites the
// tail from the re-optimized period on.
struct Guideline {
  std::vector<SystemState> schedule;  // [t - 1]
  std::map<std::string, double> pi;
  std::vector<double> demand;

  static Guideline from(const ForwardResult& forward);
  void replace_from(int period, const MarketOutcome& outcome);
};

RtTrace run_rolling(std::span<const Resource> resources, const Horizon& horizon,
                    const ForwardResult& forward, std::span<const double> realized_demand,
                    const RtConfig& config);

// Full-horizon clearing against realized demand.
MarketOutcome perfect_information_run(std::span<const Resource> resources, const Horizon& horizon,
                                      std::span<const double> realized_demand,
                                      const BuildOptions& options = {});

// True when `schedule` over periods from..T (indexed [t - 1]) satisfies every
// row of the program starting from `state` at from - 1 against `demand`.
bool continuation_feasible(std::span<const Resource> resources, const Horizon& horizon, int from,
                           const SystemState& state, std::span<const SystemState> schedule,
                           std::span<const double> demand, double tolerance = 1e-6);

// Appends the committed periods of `record` to the trace's realized series.
void commit(RtTrace& trace, const WindowRecord& record);

// Fills terminal SOC misses from the final realized state.
void finish(RtTrace& trace, std::span<const Resource> resources, const Horizon& horizon);

}  // namespace mpm
