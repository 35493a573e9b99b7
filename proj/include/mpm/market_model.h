#pragma once

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mpm/lp/linear_program.h"
#include "mpm/lp/solver.h"

namespace mpm {

enum class ResourceKind { kThermal, kStorage };

std::string_view to_string(ResourceKind kind);

// A generator or a storage unit. Prices are $/MWh, powers MW, energies MWh.
// Storage eco_min is negative: its magnitude is the maximum charge rate.
struct Resource {
  std::string id;
  ResourceKind kind = ResourceKind::kThermal;
  std::vector<double> offer;  // one value (constant) or one per period
  double bid = 0.0;           // storage charge bid
  double eco_max = 0.0;
  double eco_min = 0.0;
  std::optional<double> ramp_up;
  std::optional<double> ramp_down;
  double initial_output = 0.0;
  double soc_max = 0.0;
  double soc_initial = 0.0;
  double charge_efficiency = 1.0;
  double discharge_efficiency = 1.0;
  std::optional<double> soc_target;

  bool is_storage() const { return kind == ResourceKind::kStorage; }
  double offer_at(int period) const;  // period is 1-based
};

struct Horizon {
  int periods = 0;
  double period_hours = 1.0;
  std::vector<double> demand;  // MW, one per period
};

// Invariant breach on a named field, relative to the object validated.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string field, const std::string& reason)
      : std::invalid_argument(field + ": " + reason), field_(std::move(field)), reason_(reason) {}
  const std::string& field() const { return field_; }
  const std::string& reason() const { return reason_; }

 private:
  std::string field_;
  std::string reason_;
};

void validate(const Resource& resource, int periods);
void validate(const Horizon& horizon);
void validate(std::span<const Resource> resources, const Horizon& horizon);

// Returns a message when some period's demand exceeds total capacity plus
// the largest discharge storage could deliver in one period.
std::optional<std::string> preflight_screen(std::span<const Resource> resources,
                                            const Horizon& horizon);

// Contiguous block of periods {start..end} inside a horizon of `periods`.
struct Window {
  int start = 1;
  int end = 1;
  int periods = 1;

  static Window make(int start, int length, int periods);
  int length() const { return end - start + 1; }
  bool has_future_boundary() const { return end < periods; }
  bool contains(int t) const { return start <= t && t <= end; }
};

// Operating point of one resource in one period. For storage, output is the
// net injection discharge - charge.
struct ResourceState {
  double output = 0.0;
  double charge = 0.0;
  double discharge = 0.0;
  double soc = 0.0;
};

using SystemState = std::vector<ResourceState>;  // indexed like resources

SystemState initial_state(std::span<const Resource> resources);

// Result of one clearing run over periods {start..end}.
struct MarketOutcome {
  lp::SolveStatus status = lp::SolveStatus::kInfeasible;
  int start = 1;
  std::vector<SystemState> schedule;  // [t - start][resource]
  std::vector<double> lmp;            // $/MWh
  std::vector<double> demand;
  std::vector<double> shed;   // elastic slack, zero for hard programs
  std::vector<double> spill;
  std::map<std::string, double> target_miss;  // storage id -> |soc_T - target|
  std::map<std::string, double> intertemporal_duals;  // pi by row name
  std::map<std::string, double> resource_duals;       // mu by row name
  double objective = 0.0;
  double production_cost = 0.0;  // objective without penalty slacks
  double solve_seconds = 0.0;
  bool elastic = false;

  bool optimal() const { return status == lp::SolveStatus::kOptimal; }
  int end() const { return start + static_cast<int>(schedule.size()) - 1; }
  const SystemState& at(int t) const { return schedule.at(t - start); }
  double lmp_at(int t) const { return lmp.at(t - start); }
  int violations(double tolerance = 1e-6) const;
};

struct BuildOptions {
  // Penalized shed/spill slacks on balance rows and shortfall/excess slacks
  // on terminal SOC targets.
  bool elastic = false;
  double value_of_load = 1000.0;
  // Secondary objective over storage charge/discharge selecting one point of
  // a degenerate optimal face: charge as early and discharge as late as the
  // face allows, lower-indexed units first.
  bool tie_break = true;
};

// Linear cost terms replacing the intertemporal rows a pricing window drops,
// keyed by variable name.
struct OfferAdjustments {
  std::map<std::string, double> backward;  // on first-period variables
  std::map<std::string, double> forward;   // on last-period variables
};

std::string var_name(std::string_view kind, std::string_view id, int t);

lp::LinearProgram build_full_horizon(std::span<const Resource> resources,
                                     const Horizon& horizon,
                                     const BuildOptions& options = {});

// Scheduling program over `window`: the state at start - 1 is a constant and,
// when present, `future_anchor` fixes period end + 1 inside the rows that
// link it to the window (tagged boundary).
lp::LinearProgram build_sp(std::span<const Resource> resources, const Horizon& horizon,
                           const Window& window, const SystemState& past,
                           const std::optional<SystemState>& future_anchor,
                           std::span<const double> window_demand,
                           const BuildOptions& options = {});

// Scheduling program over `window` from the state at start - 1 with a free
// end: no rows reach past window.end. Used by look-ahead schemes without a
// forward guideline.
lp::LinearProgram build_lookahead(std::span<const Resource> resources, const Horizon& horizon,
                                  const Window& window, const SystemState& past,
                                  std::span<const double> window_demand,
                                  const BuildOptions& options = {});

// Offer adjustments from guideline intertemporal duals. Throws
// std::invalid_argument when a needed dual is missing.
OfferAdjustments offer_adjustments(std::span<const Resource> resources, const Horizon& horizon,
                                   const Window& window,
                                   const std::map<std::string, double>& pi);

// Pricing program over `window`: boundary intertemporal rows are dropped and
// replaced by the adjustment cost terms.
lp::LinearProgram build_pp(std::span<const Resource> resources, const Horizon& horizon,
                           const Window& window, const OfferAdjustments& adjustments,
                           std::span<const double> window_demand,
                           const BuildOptions& options = {});

// Price-taking profit maximization of one resource over its own feasible set,
// written as minimization of (cost - revenue). Its optimal value is minus the
// maximum profit. Demand in `horizon` is ignored.
lp::LinearProgram build_profit_max(const Resource& resource, const Horizon& horizon,
                                   std::span<const double> prices);

// Profit of following `path` (one state per period) at `prices`.
double resource_profit(const Resource& resource, const Horizon& horizon,
                       std::span<const double> prices, std::span<const ResourceState> path);

// Reads a clearing solution back into domain terms. `first` and `last` bound
// the periods the program spans.
MarketOutcome extract_outcome(std::span<const Resource> resources, const Horizon& horizon,
                              int first, int last, std::span<const double> demand,
                              const lp::LinearProgram& program, const lp::LpSolution& solution);

// Solves `program` and extracts the outcome. Schedules are empty unless the
// solve is optimal.
MarketOutcome solve_outcome(std::span<const Resource> resources, const Horizon& horizon,
                            int first, int last, std::span<const double> demand,
                            const lp::LinearProgram& program,
                            const lp::SolveOptions& solve_options = {});

}  // namespace mpm
