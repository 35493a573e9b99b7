#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mpm/forward_market.h"
#include "mpm/market_model.h"
#include "mpm/realtime_engine.h"

namespace mpm {

inline constexpr const char* kLoadId = "load";

// One cashflow. Quantities are MWh injected (negative for withdrawals); the
// forward market settles full quantities, each real-time market the change
// from the previous market's quantity for that period.
struct LedgerEntry {
  std::string market;    // "forward" or "rt-<k>", k the window index from 1
  std::string resource;  // resource id or kLoadId
  int period = 0;
  double quantity = 0.0;
  double price = 0.0;
  double cashflow = 0.0;  // received; price * quantity
};

struct SettlementLedger {
  std::vector<LedgerEntry> entries;

  double total(const std::string& resource) const;
  double total(const std::string& resource, int period) const;
};

// Load withdraws its served demand plus any spilled energy, so producer
// receipts and load payments cancel in every market.
SettlementLedger settle(std::span<const Resource> resources, const Horizon& horizon,
                        const ForwardResult* forward, const RtTrace& trace);
SettlementLedger settle_forward(std::span<const Resource> resources, const Horizon& horizon,
                                const ForwardResult& forward);

struct Surpluses {
  double ps = 0.0;    // thermal cashflow minus offered cost
  double esrs = 0.0;  // storage cashflow minus discharge offers plus charge bids
  double cs = 0.0;    // value of served load minus load payments
  double ss = 0.0;
};

// `dispatch` is the realized quantity path the ledger settled to.
Surpluses compute_surpluses(const SettlementLedger& ledger, std::span<const Resource> resources,
                            const Horizon& horizon, std::span<const SystemState> dispatch,
                            std::span<const double> served, double value_of_load);

// Lost opportunity cost per resource id: best price-taking profit over the
// resource's own feasible set at `prices`, minus the profit of `dispatch`.
// A storage unit that ended off its target is held to the terminal SOC it
// actually reached, so the realized path stays feasible for the comparison.
std::map<std::string, double> compute_loc(std::span<const Resource> resources, const Horizon& horizon,
                                          std::span<const double> prices,
                                          std::span<const SystemState> dispatch);

struct MetricsReport {
  std::string scheme;
  Surpluses surplus;
  std::map<std::string, double> loc;
  double total_loc = 0.0;
  double storage_loc = 0.0;
  int violations = 0;
  int reoptimizations = 0;
  double production_cost = 0.0;
  double mean_schedule_seconds = 0.0;
  double mean_pricing_seconds = 0.0;
};

MetricsReport compute_metrics(std::span<const Resource> resources, const Horizon& horizon,
                              const ForwardResult& forward, const RtTrace& trace,
                              double value_of_load = 1000.0);

// Least past production cost over periods 1..t0-1 against `realized_demand`
// (indexed [t - 1], at least t0 - 1 long) with the state at t0 fixed to
// `boundary`; +infinity when infeasible. Requires 2 <= t0 <= T.
double backward_profit(std::span<const Resource> resources, const Horizon& horizon, int t0,
                       const SystemState& boundary, std::span<const double> realized_demand);

// Least future production cost over t_end+1..T against `demand` (indexed
// [t - 1]) starting from `boundary` at t_end; +infinity when infeasible.
// Requires 1 <= t_end < T.
double forward_profit(std::span<const Resource> resources, const Horizon& horizon, int t_end,
                      const SystemState& boundary, std::span<const double> demand);

struct CutSample {
  int t0 = 0;
  SystemState boundary;
  double value = 0.0;  // backward_profit
  double cut = 0.0;    // linear cut from the forward duals
};

struct LowerCutReport {
  std::vector<CutSample> samples;
  // Per t0, backward_profit minus the cut at the forward schedule.
  std::map<int, double> epsilon;
  double max_violation = 0.0;  // max over samples of cut - value, floored at 0
  bool passed = false;
};

// Value of the cut the forward duals define for backward_profit at t0:
// forward duals of every past row times that row's right-hand side with
// `boundary` substituted.
double backward_cut(std::span<const Resource> resources, const Horizon& horizon,
                     const ForwardResult& forward, int t0, const SystemState& boundary,
                     std::span<const double> realized_demand);

// Random states at t0 in [2, T]: the forward state, thermal outputs
// perturbed within capacity, storage SOC redrawn with the period's flows
// kept. Deterministic for a seed.
std::vector<std::pair<int, SystemState>> sample_boundaries(std::span<const Resource> resources,
                                                           const Horizon& horizon,
                                                           const ForwardResult& forward, int count,
                                                           std::uint64_t seed);

LowerCutReport lower_cut_check(std::span<const Resource> resources, const Horizon& horizon,
                               const ForwardResult& forward, std::span<const double> realized_demand,
                               std::span<const std::pair<int, SystemState>> samples,
                               double tolerance = 1e-6);

}  // namespace mpm
