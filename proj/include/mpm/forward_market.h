#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mpm/market_model.h"

namespace mpm {

// Forward (full-horizon) clearing and the guideline it hands to real time.
struct ForwardResult {
  MarketOutcome outcome;
  // -sum over intertemporal rows of coef * dual, per MWh, indexed
  // [resource][t - 1]. Output means thermal output or storage discharge.
  std::vector<std::vector<double>> output_opportunity_cost;
  std::vector<std::vector<double>> charge_opportunity_cost;  // zero for thermal
  double dual_objective = 0.0;  // Lagrangian bound at the extracted duals
};

class InfeasibleClearing : public std::runtime_error {
 public:
  InfeasibleClearing(std::string group, const std::string& detail)
      : std::runtime_error("infeasible clearing (" + group + "): " + detail),
        group_(std::move(group)) {}
  const std::string& group() const { return group_; }

 private:
  std::string group_;
};

// Throws InfeasibleClearing naming the constraint group that cannot be met.
ForwardResult clear_forward(std::span<const Resource> resources, const Horizon& horizon,
                            const BuildOptions& options = {},
                            const lp::SolveOptions& solve_options = {});

struct EquilibriumEntry {
  std::string id;
  double max_profit = 0.0;
  double realized_profit = 0.0;
  double gap = 0.0;  // max_profit - realized_profit
};

struct EquilibriumReport {
  std::vector<EquilibriumEntry> entries;
  double max_balance_residual = 0.0;
  bool passed = false;
};

// Each resource's price-taking profit maximum at `prices` against the profit
// of its schedule in `outcome`, plus the supply/demand residual.
EquilibriumReport verify_competitive_equilibrium(std::span<const Resource> resources,
                                                 const Horizon& horizon,
                                                 const MarketOutcome& outcome,
                                                 std::span<const double> prices);
EquilibriumReport verify_competitive_equilibrium(std::span<const Resource> resources,
                                                 const Horizon& horizon,
                                                 const ForwardResult& forward);

struct MarginalIdentityReport {
  int checked = 0;        // (resource, period, variable) triples found marginal
  double max_error = 0.0;  // |marginal profit - opportunity cost|
  bool passed = false;
};

// At every variable strictly inside its bounds whose capacity duals vanish,
// LMP - offer (or bid - LMP for charge) equals the stored opportunity cost.
MarginalIdentityReport check_marginal_identity(std::span<const Resource> resources,
                                               const Horizon& horizon,
                                               const ForwardResult& forward,
                                               double tolerance = 1e-6);

std::string forward_to_json(std::span<const Resource> resources, const ForwardResult& forward);
ForwardResult forward_from_json(std::span<const Resource> resources, const std::string& text);
void write_forward(const std::filesystem::path& path, std::span<const Resource> resources,
                   const ForwardResult& forward);
ForwardResult read_forward(const std::filesystem::path& path, std::span<const Resource> resources);

}  // namespace mpm
