#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mpm/market_model.h"
#include "mpm/pricing_schemes.h"
#include "mpm/realtime_engine.h"

namespace mpm {

inline constexpr const char* kScenarioSchema = "mpm-scenario/1";

// Schema or invariant breach, naming the offending field by JSON path
// (for example "resources[3].soc_initial").
class ScenarioError : public std::invalid_argument {
 public:
  ScenarioError(std::string field, const std::string& reason)
      : std::invalid_argument(field + ": " + reason), field_(std::move(field)), reason_(reason) {}
  const std::string& field() const { return field_; }
  const std::string& reason() const { return reason_; }

 private:
  std::string field_;
  std::string reason_;
};

// Multiplicative load deviations: realized = forecast * factor with factor
// uniform in [lo, hi], drawn per period or once per scenario.
struct UniformRealization {
  double lo = 1.0;
  double hi = 1.1;
  bool per_period = true;
  int count = 1;
  std::uint64_t seed = 0;
};

struct RealizationSpec {
  std::vector<std::vector<double>> series;  // explicit realized series
  std::optional<UniformRealization> uniform;
};

// Expected results checked after a run. Series checks apply to the forward
// clearing; run checks apply to every proposed-scheme run.
struct GoldenSpec {
  double tolerance = 1e-6;
  std::optional<std::vector<double>> forward_lmp;
  std::map<std::string, std::vector<double>> forward_storage_net;
  bool rt_matches_forward = false;                     // dispatch and prices
  bool rt_prices_equal_forward = false;
  bool rt_dispatch_equals_perfect_information = false;
  bool zero_violations = false;
  bool zero_loc = false;

  bool empty() const;
};

struct ScenarioFile {
  std::string name;
  std::vector<Resource> resources;
  Horizon horizon;  // demand is the forecast
  RealizationSpec realization;
  RtConfig rt;
  std::vector<SchemeId> schemes{SchemeId::kProposed};
  std::vector<int> windows;  // look-ahead lengths to sweep; defaults to {rt.window}
  bool hogan_fix_past = false;
  GoldenSpec golden;
};

// Parses and validates; every failure is a ScenarioError.
ScenarioFile parse_scenario(const std::string& text);
ScenarioFile load_scenario(const std::filesystem::path& path);
std::string scenario_to_json(const ScenarioFile& scenario);

// Explicit series first, then generated ones. Deterministic for a seed.
std::vector<std::vector<double>> generate_realizations(const RealizationSpec& spec,
                                                       std::span<const double> forecast);
std::vector<std::vector<double>> generate_realizations(const UniformRealization& spec,
                                                       std::span<const double> forecast);

}  // namespace mpm
