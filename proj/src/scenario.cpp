#include "mpm/scenario.h"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <iterator>

#include "json.hpp"
#include "mpm/synthetic.h"

namespace mpm {

namespace {

using json = nlohmann::ordered_json;

// JSON node with the path that reached it, so every error names its field.
class Node {
 public:
  Node(const json& value, std::string path) : value_(value), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  [[noreturn]] void fail(const std::string& reason) const { throw ScenarioError(path_, reason); }

  Node at(const std::string& key) const {
    require_object();
    const auto it = value_.find(key);
    if (it == value_.end()) throw ScenarioError(child(key), "is required");
    return Node(*it, child(key));
  }
  std::optional<Node> find(const std::string& key) const {
    require_object();
    const auto it = value_.find(key);
    if (it == value_.end() || it->is_null()) return std::nullopt;
    return Node(*it, child(key));
  }
  void only(std::initializer_list<const char*> keys) const {
    require_object();
    for (const auto& [key, unused] : value_.items()) {
      bool known = false;
      for (const char* k : keys) known = known || key == k;
      if (!known) throw ScenarioError(child(key), "unknown field");
    }
  }

  bool is_array() const { return value_.is_array(); }
  std::size_t size() const {
    if (!value_.is_array()) fail("must be an array");
    return value_.size();
  }
  Node operator[](std::size_t i) const { return Node(value_.at(i), path_ + "[" + std::to_string(i) + "]"); }

  double number() const {
    if (!value_.is_number()) fail("must be a number");
    return value_.get<double>();
  }
  int integer() const {
    if (!value_.is_number_integer()) fail("must be an integer");
    return value_.get<int>();
  }
  std::uint64_t unsigned_integer() const {
    if (!value_.is_number_unsigned()) fail("must be a nonnegative integer");
    return value_.get<std::uint64_t>();
  }
  bool boolean() const {
    if (!value_.is_boolean()) fail("must be true or false");
    return value_.get<bool>();
  }
  std::string string() const {
    if (!value_.is_string()) fail("must be a string");
    return value_.get<std::string>();
  }
  std::vector<double> numbers() const {
    std::vector<double> out;
    for (std::size_t i = 0; i < size(); ++i) out.push_back((*this)[i].number());
    return out;
  }

 private:
  void require_object() const {
    if (!value_.is_object()) fail("must be an object");
  }
  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& value_;
  std::string path_;
};

Resource parse_resource(const Node& n) {
  n.only({"id", "kind", "offer", "bid", "eco_max", "eco_min", "ramp_up", "ramp_down", "initial_output",
          "soc_max", "soc_initial", "charge_efficiency", "discharge_efficiency", "soc_target"});
  Resource r;
  r.id = n.at("id").string();
  const std::string kind = n.at("kind").string();
  if (kind == "storage") {
    r.kind = ResourceKind::kStorage;
  } else if (kind != "thermal") {
    n.at("kind").fail("must be \"thermal\" or \"storage\"");
  }
  const Node offer = n.at("offer");
  r.offer = offer.is_array() ? offer.numbers() : std::vector<double>{offer.number()};
  r.eco_max = n.at("eco_max").number();
  if (auto v = n.find("eco_min")) r.eco_min = v->number();
  if (auto v = n.find("ramp_up")) r.ramp_up = v->number();
  if (auto v = n.find("ramp_down")) r.ramp_down = v->number();
  if (auto v = n.find("initial_output")) r.initial_output = v->number();
  const char* storage_only[] = {"bid", "soc_max", "soc_initial", "charge_efficiency", "discharge_efficiency",
                                "soc_target"};
  if (r.is_storage()) {
    r.bid = n.at("bid").number();
    r.soc_max = n.at("soc_max").number();
    r.soc_initial = n.at("soc_initial").number();
    if (auto v = n.find("charge_efficiency")) r.charge_efficiency = v->number();
    if (auto v = n.find("discharge_efficiency")) r.discharge_efficiency = v->number();
    if (auto v = n.find("soc_target")) r.soc_target = v->number();
  } else {
    for (const char* key : storage_only) {
      if (n.find(key)) n.at(key).fail("applies to storage only");
    }
  }
  return r;
}

json resource_json(const Resource& r) {
  json j;
  j["id"] = r.id;
  j["kind"] = std::string(to_string(r.kind));
  j["offer"] = r.offer.size() == 1 ? json(r.offer[0]) : json(r.offer);
  if (r.is_storage()) j["bid"] = r.bid;
  j["eco_max"] = r.eco_max;
  j["eco_min"] = r.eco_min;
  if (r.ramp_up) j["ramp_up"] = *r.ramp_up;
  if (r.ramp_down) j["ramp_down"] = *r.ramp_down;
  if (!r.is_storage()) j["initial_output"] = r.initial_output;
  if (r.is_storage()) {
    j["soc_max"] = r.soc_max;
    j["soc_initial"] = r.soc_initial;
    j["charge_efficiency"] = r.charge_efficiency;
    j["discharge_efficiency"] = r.discharge_efficiency;
    if (r.soc_target) j["soc_target"] = *r.soc_target;
  }
  return j;
}

RealizationSpec parse_realization(const Node& n, int periods) {
  n.only({"series", "uniform"});
  RealizationSpec spec;
  if (auto series = n.find("series")) {
    for (std::size_t k = 0; k < series->size(); ++k) {
      const Node s = (*series)[k];
      spec.series.push_back(s.numbers());
      if (static_cast<int>(spec.series.back().size()) != periods) s.fail("length must equal horizon.periods");
      for (double d : spec.series.back()) {
        if (!(d >= 0) || !std::isfinite(d)) s.fail("loads must be finite and >= 0");
      }
    }
  }
  if (auto u = n.find("uniform")) {
    u->only({"lo", "hi", "per", "count", "seed"});
    UniformRealization g;
    g.lo = u->at("lo").number();
    g.hi = u->at("hi").number();
    if (!(g.lo >= 0) || !(g.hi >= g.lo)) u->at("hi").fail("needs 0 <= lo <= hi");
    if (auto per = u->find("per")) {
      const std::string p = per->string();
      if (p != "period" && p != "scenario") per->fail("must be \"period\" or \"scenario\"");
      g.per_period = p == "period";
    }
    g.count = u->at("count").integer();
    if (g.count < 1) u->at("count").fail("must be >= 1");
    g.seed = u->at("seed").unsigned_integer();
    spec.uniform = g;
  }
  if (spec.series.empty() && !spec.uniform) n.fail("needs series or uniform");
  return spec;
}

}  // namespace

bool GoldenSpec::empty() const {
  return !forward_lmp && forward_storage_net.empty() && !rt_matches_forward && !rt_prices_equal_forward &&
         !rt_dispatch_equals_perfect_information && !zero_violations && !zero_loc;
}

ScenarioFile parse_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError("(document)", std::string("not valid JSON: ") + e.what());
  }
  const Node root(doc, "");
  root.only({"schema", "name", "horizon", "resources", "realization", "rt", "schemes", "windows",
             "hogan_fix_past", "value_of_load", "golden"});
  const std::string schema = root.at("schema").string();
  if (schema != kScenarioSchema) {
    root.at("schema").fail("unknown schema version \"" + schema + "\", expected \"" + kScenarioSchema + "\"");
  }
  ScenarioFile s;
  if (auto v = root.find("name")) s.name = v->string();

  const Node h = root.at("horizon");
  h.only({"periods", "period_hours", "forecast"});
  s.horizon.periods = h.at("periods").integer();
  if (auto v = h.find("period_hours")) s.horizon.period_hours = v->number();
  s.horizon.demand = h.at("forecast").numbers();

  const Node res = root.at("resources");
  for (std::size_t i = 0; i < res.size(); ++i) s.resources.push_back(parse_resource(res[i]));
  try {
    validate(s.horizon);
  } catch (const ValidationError& e) {
    std::string field = e.field();
    if (field.rfind("demand", 0) == 0) field = "forecast" + field.substr(6);
    throw ScenarioError("horizon." + field, e.reason());
  }
  try {
    validate(s.resources, s.horizon);
  } catch (const ValidationError& e) {
    throw ScenarioError(e.field(), e.reason());
  }

  s.realization = parse_realization(root.at("realization"), s.horizon.periods);

  if (auto rt = root.find("rt")) {
    rt->only({"window", "stride", "deviation_threshold", "time_limit_seconds", "tie_break"});
    if (auto v = rt->find("window")) s.rt.window = v->integer();
    if (auto v = rt->find("stride")) s.rt.stride = v->integer();
    if (auto v = rt->find("deviation_threshold")) s.rt.deviation_threshold = v->number();
    if (auto v = rt->find("time_limit_seconds")) s.rt.time_limit_seconds = v->number();
    if (auto v = rt->find("tie_break")) s.rt.tie_break = v->boolean();
  }
  if (auto v = root.find("value_of_load")) {
    s.rt.value_of_load = v->number();
    if (!(s.rt.value_of_load > 0)) v->fail("must be positive");
  }
  if (auto v = root.find("hogan_fix_past")) s.hogan_fix_past = v->boolean();
  if (auto v = root.find("schemes")) {
    s.schemes.clear();
    for (std::size_t k = 0; k < v->size(); ++k) {
      try {
        s.schemes.push_back(parse_scheme((*v)[k].string()));
      } catch (const std::invalid_argument& e) {
        (*v)[k].fail(e.what());
      }
    }
    if (s.schemes.empty()) v->fail("must name at least one scheme");
  }
  if (auto v = root.find("windows")) {
    for (std::size_t k = 0; k < v->size(); ++k) s.windows.push_back((*v)[k].integer());
    if (s.windows.empty()) v->fail("must list at least one window length");
  } else {
    s.windows = {s.rt.window};
  }
  for (std::size_t k = 0; k < s.windows.size(); ++k) {
    RtConfig c = s.rt;
    c.window = s.windows[k];
    c.stride = std::min(c.stride, c.window);
    try {
      validate(c, s.horizon.periods);
    } catch (const std::invalid_argument& e) {
      throw ScenarioError(root.find("windows") ? "windows[" + std::to_string(k) + "]" : "rt", e.what());
    }
  }

  if (auto g = root.find("golden")) {
    g->only({"tolerance", "forward_lmp", "forward_storage_net", "rt_matches_forward", "rt_prices_equal_forward",
             "rt_dispatch_equals_perfect_information", "zero_violations", "zero_loc"});
    GoldenSpec& golden = s.golden;
    if (auto v = g->find("tolerance")) golden.tolerance = v->number();
    if (auto v = g->find("forward_lmp")) {
      golden.forward_lmp = v->numbers();
      if (static_cast<int>(golden.forward_lmp->size()) != s.horizon.periods) {
        v->fail("length must equal horizon.periods");
      }
    }
    if (auto v = g->find("forward_storage_net")) {
      for (const Resource& r : s.resources) {
        if (auto series = v->find(r.id)) golden.forward_storage_net[r.id] = series->numbers();
      }
      if (golden.forward_storage_net.empty()) v->fail("names no storage resource");
    }
    auto flag = [&](const char* key, bool& out) {
      if (auto v = g->find(key)) out = v->boolean();
    };
    flag("rt_matches_forward", golden.rt_matches_forward);
    flag("rt_prices_equal_forward", golden.rt_prices_equal_forward);
    flag("rt_dispatch_equals_perfect_information", golden.rt_dispatch_equals_perfect_information);
    flag("zero_violations", golden.zero_violations);
    flag("zero_loc", golden.zero_loc);
  }
  return s;
}

ScenarioFile load_scenario(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) throw ScenarioError(path.string(), "cannot open scenario file");
  const std::string text((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
  return parse_scenario(text);
}

std::string scenario_to_json(const ScenarioFile& s) {
  json j;
  j["schema"] = kScenarioSchema;
  if (!s.name.empty()) j["name"] = s.name;
  j["horizon"] = {{"periods", s.horizon.periods},
                  {"period_hours", s.horizon.period_hours},
                  {"forecast", s.horizon.demand}};
  j["resources"] = json::array();
  for (const Resource& r : s.resources) j["resources"].push_back(resource_json(r));
  json real;
  if (!s.realization.series.empty()) real["series"] = s.realization.series;
  if (const auto& u = s.realization.uniform) {
    real["uniform"] = {{"lo", u->lo},
                       {"hi", u->hi},
                       {"per", u->per_period ? "period" : "scenario"},
                       {"count", u->count},
                       {"seed", u->seed}};
  }
  j["realization"] = real;
  j["rt"] = {{"window", s.rt.window},
             {"stride", s.rt.stride},
             {"deviation_threshold", s.rt.deviation_threshold},
             {"time_limit_seconds", s.rt.time_limit_seconds},
             {"tie_break", s.rt.tie_break}};
  j["value_of_load"] = s.rt.value_of_load;
  j["schemes"] = json::array();
  for (SchemeId id : s.schemes) j["schemes"].push_back(std::string(to_string(id)));
  j["windows"] = s.windows;
  j["hogan_fix_past"] = s.hogan_fix_past;
  if (!s.golden.empty()) {
    const GoldenSpec& g = s.golden;
    json gj;
    gj["tolerance"] = g.tolerance;
    if (g.forward_lmp) gj["forward_lmp"] = *g.forward_lmp;
    if (!g.forward_storage_net.empty()) gj["forward_storage_net"] = g.forward_storage_net;
    if (g.rt_matches_forward) gj["rt_matches_forward"] = true;
    if (g.rt_prices_equal_forward) gj["rt_prices_equal_forward"] = true;
    if (g.rt_dispatch_equals_perfect_information) gj["rt_dispatch_equals_perfect_information"] = true;
    if (g.zero_violations) gj["zero_violations"] = true;
    if (g.zero_loc) gj["zero_loc"] = true;
    j["golden"] = gj;
  }
  return j.dump(2);
}

std::vector<std::vector<double>> generate_realizations(const UniformRealization& spec,
                                                       std::span<const double> forecast) {
  Rng rng(spec.seed);
  std::vector<std::vector<double>> out;
  for (int k = 0; k < spec.count; ++k) {
    std::vector<double> series(forecast.begin(), forecast.end());
    if (spec.per_period) {
      for (double& d : series) d *= rng.uniform(spec.lo, spec.hi);
    } else {
      const double factor = rng.uniform(spec.lo, spec.hi);
      for (double& d : series) d *= factor;
    }
    out.push_back(std::move(series));
  }
  return out;
}

std::vector<std::vector<double>> generate_realizations(const RealizationSpec& spec,
                                                       std::span<const double> forecast) {
  std::vector<std::vector<double>> out = spec.series;
  if (spec.uniform) {
    for (auto& series : generate_realizations(*spec.uniform, forecast)) out.push_back(std::move(series));
  }
  return out;
}

}  // namespace mpm
