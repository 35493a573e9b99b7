#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "mpm/market_model.h"

namespace mpm {

// Portable uniform draws: the standard distributions are implementation
// defined, so map raw engine output to [0, 1) by hand.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(uniform() * (hi - lo + 1));
  }
  bool chance(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

struct System {
  std::vector<Resource> resources;
  Horizon horizon;
};

// Small random system: at most 10 resources and 12 periods, random ramps,
// storage sizes, efficiencies and terminal targets. Demand is redrawn until
// the forward clearing is feasible.
System random_system(std::uint64_t seed);

// Desk-scale day-ahead system: 20 thermal units with offers spanning
// 10-200 $/MWh and ramp limits of 10-30% of capacity, two storage units with
// end-of-day SOC targets, 24 hourly periods with a two-peak load shape.
System synthetic_day(std::uint64_t seed);

}  // namespace mpm
