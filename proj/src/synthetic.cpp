#include "mpm/synthetic.h"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mpm {

namespace {

bool clears(const System& system) {
  if (preflight_screen(system.resources, system.horizon)) return false;
  BuildOptions options;
  options.tie_break = false;
  const lp::LinearProgram prog = build_full_horizon(system.resources, system.horizon, options);
  lp::SolveOptions solve;
  solve.tie_break = false;
  return lp::solve(prog, solve).optimal();
}

}  // namespace

System random_system(std::uint64_t seed) {
  Rng rng(seed);
  System system;
  const int thermal = rng.integer(2, 7);
  const int storage = rng.integer(1, 3);
  const int periods = rng.integer(3, 12);
  double capacity = 0.0;
  for (int i = 0; i < thermal; ++i) {
    Resource r;
    r.id = "G" + std::to_string(i + 1);
    r.offer = {rng.uniform(5, 150)};
    r.eco_max = rng.uniform(10, 60);
    r.eco_min = rng.chance(0.3) ? rng.uniform(0, 0.3) * r.eco_max : 0.0;
    r.initial_output = rng.uniform(r.eco_min, r.eco_max);
    if (rng.chance(0.6)) {
      r.ramp_up = rng.uniform(0.2, 0.6) * r.eco_max;
      r.ramp_down = rng.uniform(0.2, 0.6) * r.eco_max;
    }
    capacity += r.eco_max;
    system.resources.push_back(r);
  }
  for (int i = 0; i < storage; ++i) {
    Resource r;
    r.id = "S" + std::to_string(i + 1);
    r.kind = ResourceKind::kStorage;
    r.bid = rng.uniform(0, 60);
    r.offer = {r.bid + rng.uniform(1, 30)};
    r.eco_max = rng.uniform(5, 20);
    r.eco_min = -rng.uniform(5, 20);
    r.soc_max = rng.uniform(5, 40);
    r.soc_initial = rng.uniform(0, r.soc_max);
    r.charge_efficiency = rng.chance(0.5) ? 1.0 : rng.uniform(0.85, 1.0);
    r.discharge_efficiency = rng.chance(0.5) ? 1.0 : rng.uniform(0.85, 1.0);
    if (rng.chance(0.4)) r.soc_target = rng.uniform(0, r.soc_max);
    system.resources.push_back(r);
  }
  system.horizon.periods = periods;
  system.horizon.period_hours = 1.0;
  for (double scale = 0.8; scale > 0.05; scale *= 0.7) {
    system.horizon.demand.clear();
    for (int t = 0; t < periods; ++t) system.horizon.demand.push_back(rng.uniform(0.2, 1.0) * scale * capacity);
    if (clears(system)) return system;
  }
  // Relax the storage targets as a last resort; zero demand always clears then.
  for (Resource& r : system.resources) r.soc_target.reset();
  std::fill(system.horizon.demand.begin(), system.horizon.demand.end(), 0.0);
  return system;
}

System synthetic_day(std::uint64_t seed) {
  Rng rng(seed);
  System system;
  constexpr int kThermal = 20;
  constexpr int kPeriods = 24;
  double capacity = 0.0;
  for (int i = 0; i < kThermal; ++i) {
    Resource r;
    r.id = "G" + std::to_string(i + 1);
    // Offers spread over 10-200 $/MWh with mild jitter so no two tie.
    r.offer = {10.0 + 190.0 * (i + rng.uniform(0.1, 0.9)) / kThermal};
    r.eco_max = rng.uniform(150, 400);
    r.ramp_up = rng.uniform(0.10, 0.30) * r.eco_max;
    r.ramp_down = rng.uniform(0.10, 0.30) * r.eco_max;
    capacity += r.eco_max;
    system.resources.push_back(r);
  }
  const double sizes[2][2] = {{300, 1500}, {200, 1000}};
  for (int k = 0; k < 2; ++k) {
    Resource r;
    r.id = "ESR" + std::to_string(k + 1);
    r.kind = ResourceKind::kStorage;
    r.eco_max = sizes[k][0];
    r.eco_min = -sizes[k][0];
    r.soc_max = sizes[k][1];
    r.soc_initial = 0.5 * r.soc_max;
    r.soc_target = 0.5 * r.soc_max;
    r.charge_efficiency = 0.9;
    r.discharge_efficiency = 0.9;
    r.bid = 8.0 + k;
    r.offer = {12.0 + k};
    system.resources.push_back(r);
  }
  // Two-peak daily shape between 45% and 75% of thermal capacity.
  std::vector<double> demand;
  for (int t = 0; t < kPeriods; ++t) {
    const double morning = std::exp(-0.5 * std::pow((t - 8.5) / 2.5, 2));
    const double evening = std::exp(-0.5 * std::pow((t - 18.5) / 2.0, 2));
    const double shape = 0.45 + 0.25 * morning + 0.30 * evening;
    demand.push_back(capacity * std::min(shape, 0.75) * rng.uniform(0.98, 1.02));
  }
  system.horizon = Horizon{kPeriods, 1.0, demand};
  // Start each unit at its merit-order share of the first-period load.
  std::vector<int> order(kThermal);
  for (int i = 0; i < kThermal; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return system.resources[a].offer[0] < system.resources[b].offer[0];
  });
  double remaining = demand[0];
  for (int i : order) {
    Resource& r = system.resources[i];
    r.initial_output = std::min(r.eco_max, std::max(remaining, 0.0));
    remaining -= r.initial_output;
  }
  return system;
}

}  // namespace mpm
