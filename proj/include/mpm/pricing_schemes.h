#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "mpm/forward_market.h"
#include "mpm/market_model.h"
#include "mpm/realtime_engine.h"

namespace mpm {

enum class SchemeId { kMyopic, kFirstOnly, kProposed, kHogan, kHua };

inline constexpr std::array<SchemeId, 5> kAllSchemes = {
    SchemeId::kMyopic, SchemeId::kFirstOnly, SchemeId::kProposed, SchemeId::kHogan, SchemeId::kHua};

std::string_view to_string(SchemeId scheme);
// Accepts myopic, first_only, proposed, hogan, hua; throws std::invalid_argument otherwise.
SchemeId parse_scheme(std::string_view name);

struct SchemeConfig {
  RtConfig rt;  // window and stride are used by first_only and proposed
  // Hogan pricing normally re-optimizes past periods against realized load;
  // when set, past dispatch is pinned to the realized values instead.
  bool hogan_fix_past = false;
};

// Each single-step scheme returns a record whose window starts at t, commits
// and settles t only. Later window periods are advisory. Infeasible programs
// are re-solved with shedding and target slacks priced at the value of load.

// One-period dispatch from the state at t - 1; the terminal target row is
// included only when t is the last period.
WindowRecord price_myopic(std::span<const Resource> resources, const Horizon& horizon, int t,
                          const SystemState& state, double demand, const RtConfig& config = {});

// `window_demand.size()`-period dispatch from the state at t - 1 with a free end.
WindowRecord price_first_only(std::span<const Resource> resources, const Horizon& horizon, int t,
                              const SystemState& state, std::span<const double> window_demand,
                              const RtConfig& config = {});

// Remainder-horizon program t..T from the state at t - 1; `demand_tail`
// holds realized load at t and the forecast after.
WindowRecord price_hua(std::span<const Resource> resources, const Horizon& horizon, int t,
                       const SystemState& state, std::span<const double> demand_tail,
                       const RtConfig& config = {});

// Full-horizon pricing program 1..T from the initial state; `demand` holds
// realized load for 1..t and the forecast after. `history` is the realized
// dispatch for 1..t-1, used only when `fix_past` is set. Returns the
// full-horizon outcome; the price at t is outcome.lmp_at(t).
MarketOutcome price_hogan(std::span<const Resource> resources, const Horizon& horizon, int t,
                          std::span<const SystemState> history, std::span<const double> demand,
                          bool fix_past, const RtConfig& config = {});

// Runs `scheme` over the horizon against realized load. `horizon.demand` is
// the forecast; `forward` is the shared forward clearing (used by proposed).
RtTrace run_scheme(SchemeId scheme, std::span<const Resource> resources, const Horizon& horizon,
                   const ForwardResult& forward, std::span<const double> realized_demand,
                   const SchemeConfig& config = {});

}  // namespace mpm
