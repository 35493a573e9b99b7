#include "mpm/market_model.h"

#include <cmath>
#include <sstream>

namespace mpm {

using lp::ConstraintTag;
using lp::kInfinity;
using lp::Sense;

std::string_view to_string(ResourceKind kind) {
  return kind == ResourceKind::kThermal ? "thermal" : "storage";
}

double Resource::offer_at(int period) const {
  if (offer.size() == 1) return offer.front();
  return offer.at(period - 1);
}

void validate(const Resource& r, int periods) {
  auto finite = [](double v) { return std::isfinite(v); };
  if (r.id.empty()) throw ValidationError("id", "must be non-empty");
  if (r.offer.empty()) throw ValidationError("offer", "must hold one value or one per period");
  if (r.offer.size() != 1 && static_cast<int>(r.offer.size()) != periods) {
    throw ValidationError("offer", "length must be 1 or " + std::to_string(periods));
  }
  for (double c : r.offer) {
    if (!finite(c)) throw ValidationError("offer", "must be finite");
  }
  if (!finite(r.eco_max) || !finite(r.eco_min)) {
    throw ValidationError("eco_max", "eco_min and eco_max must be finite");
  }
  if (r.eco_min > r.eco_max) throw ValidationError("eco_min", "exceeds eco_max");
  if (r.ramp_up && !(*r.ramp_up >= 0)) throw ValidationError("ramp_up", "must be >= 0");
  if (r.ramp_down && !(*r.ramp_down >= 0)) throw ValidationError("ramp_down", "must be >= 0");
  if (!r.is_storage()) {
    if (r.initial_output < r.eco_min || r.initial_output > r.eco_max) {
      // Only binding through ramp rows, which start from this value.
      if (r.ramp_up || r.ramp_down) {
        throw ValidationError("initial_output", "must lie in [eco_min, eco_max]");
      }
    }
    return;
  }
  if (r.eco_min > 0) throw ValidationError("eco_min", "storage eco_min must be <= 0");
  if (r.eco_max < 0) throw ValidationError("eco_max", "storage eco_max must be >= 0");
  if (!(r.soc_max >= 0) || !finite(r.soc_max)) throw ValidationError("soc_max", "must be >= 0");
  if (!(r.soc_initial >= 0) || r.soc_initial > r.soc_max) {
    throw ValidationError("soc_initial", "must lie in [0, soc_max]");
  }
  if (!(r.charge_efficiency > 0) || r.charge_efficiency > 1) {
    throw ValidationError("charge_efficiency", "must lie in (0, 1]");
  }
  if (!(r.discharge_efficiency > 0) || r.discharge_efficiency > 1) {
    throw ValidationError("discharge_efficiency", "must lie in (0, 1]");
  }
  if (r.soc_target && (!(*r.soc_target >= 0) || *r.soc_target > r.soc_max)) {
    throw ValidationError("soc_target", "must lie in [0, soc_max]");
  }
  if (!finite(r.bid)) throw ValidationError("bid", "must be finite");
  for (int t = 1; t <= periods; ++t) {
    if (r.offer_at(t) <= r.bid) {
      throw ValidationError("bid", "storage offer must exceed its bid in every period");
    }
  }
}

void validate(const Horizon& h) {
  if (h.periods < 1) throw ValidationError("periods", "must be >= 1");
  if (!(h.period_hours > 0) || !std::isfinite(h.period_hours)) {
    throw ValidationError("period_hours", "must be positive");
  }
  if (static_cast<int>(h.demand.size()) != h.periods) {
    throw ValidationError("demand", "length must equal periods");
  }
  for (std::size_t t = 0; t < h.demand.size(); ++t) {
    if (!(h.demand[t] >= 0) || !std::isfinite(h.demand[t])) {
      throw ValidationError("demand[" + std::to_string(t) + "]", "must be finite and >= 0");
    }
  }
}

void validate(std::span<const Resource> resources, const Horizon& horizon) {
  validate(horizon);
  std::map<std::string, int> seen;
  for (std::size_t i = 0; i < resources.size(); ++i) {
    try {
      validate(resources[i], horizon.periods);
    } catch (const ValidationError& e) {
      throw ValidationError("resources[" + std::to_string(i) + "]." + e.field(), e.reason());
    }
    if (!seen.emplace(resources[i].id, static_cast<int>(i)).second) {
      throw ValidationError("resources[" + std::to_string(i) + "].id",
                            "duplicate id '" + resources[i].id + "'");
    }
  }
}

std::optional<std::string> preflight_screen(std::span<const Resource> resources,
                                            const Horizon& horizon) {
  double capacity = 0.0;
  for (const Resource& r : resources) {
    if (r.is_storage()) {
      capacity += std::min(r.eco_max, r.discharge_efficiency * r.soc_max / horizon.period_hours);
    } else {
      capacity += r.eco_max;
    }
  }
  for (int t = 1; t <= horizon.periods; ++t) {
    if (horizon.demand[t - 1] > capacity + 1e-9) {
      std::ostringstream out;
      out << "demand " << horizon.demand[t - 1] << " MW at period " << t
          << " exceeds deliverable capacity " << capacity << " MW";
      return out.str();
    }
  }
  return std::nullopt;
}

Window Window::make(int start, int length, int periods) {
  if (periods < 1 || start < 1 || start > periods || length < 1) {
    throw std::invalid_argument("window out of range");
  }
  return Window{start, std::min(start + length - 1, periods), periods};
}

SystemState initial_state(std::span<const Resource> resources) {
  SystemState state(resources.size());
  for (std::size_t i = 0; i < resources.size(); ++i) {
    if (resources[i].is_storage()) {
      state[i].soc = resources[i].soc_initial;
    } else {
      state[i].output = resources[i].initial_output;
    }
  }
  return state;
}

int MarketOutcome::violations(double tolerance) const {
  int count = 0;
  for (std::size_t k = 0; k < shed.size(); ++k) {
    if (shed[k] > tolerance || spill[k] > tolerance) ++count;
  }
  for (const auto& [id, miss] : target_miss) {
    if (miss > tolerance) ++count;
  }
  return count;
}

std::string var_name(std::string_view kind, std::string_view id, int t) {
  std::string out(kind);
  out += '[';
  out += id;
  out += ',';
  out += std::to_string(t);
  out += ']';
  return out;
}

namespace {

enum class Kind { kOutput, kCharge, kDischarge, kSoc };

struct Key {
  int resource;
  Kind kind;
  int period;
};

struct SymRow {
  std::string name;
  ConstraintTag tag;
  std::vector<std::pair<Key, double>> terms;
  Sense sense;
  double rhs;
};

std::string_view kind_name(Kind kind) {
  switch (kind) {
    case Kind::kOutput:
      return "p";
    case Kind::kCharge:
      return "ch";
    case Kind::kDischarge:
      return "dis";
    case Kind::kSoc:
      return "soc";
  }
  return "?";
}

double state_value(const ResourceState& s, Kind kind) {
  switch (kind) {
    case Kind::kOutput:
      return s.output;
    case Kind::kCharge:
      return s.charge;
    case Kind::kDischarge:
      return s.discharge;
    case Kind::kSoc:
      return s.soc;
  }
  return 0.0;
}

// Rows coupling period t - 1 to period t.
std::vector<SymRow> link_rows(std::span<const Resource> resources, const Horizon& horizon, int t) {
  std::vector<SymRow> rows;
  const double dt = horizon.period_hours;
  for (int i = 0; i < static_cast<int>(resources.size()); ++i) {
    const Resource& r = resources[i];
    if (r.is_storage()) {
      rows.push_back({var_name("soc_rec", r.id, t),
                      ConstraintTag::kIntertemporal,
                      {{{i, Kind::kSoc, t}, 1.0},
                       {{i, Kind::kSoc, t - 1}, -1.0},
                       {{i, Kind::kCharge, t}, -r.charge_efficiency * dt},
                       {{i, Kind::kDischarge, t}, dt / r.discharge_efficiency}},
                      Sense::kEqual,
                      0.0});
      continue;
    }
    const std::vector<std::pair<Key, double>> delta = {{{i, Kind::kOutput, t}, 1.0},
                                                       {{i, Kind::kOutput, t - 1}, -1.0}};
    if (r.ramp_up) {
      rows.push_back({var_name("ramp_up", r.id, t), ConstraintTag::kIntertemporal, delta,
                      Sense::kLessEqual, *r.ramp_up});
    }
    if (r.ramp_down) {
      rows.push_back({var_name("ramp_dn", r.id, t), ConstraintTag::kIntertemporal, delta,
                      Sense::kGreaterEqual, -*r.ramp_down});
    }
  }
  return rows;
}

struct Segment {
  int first = 1;
  int last = 1;
  std::span<const double> demand;
  const SystemState* past = nullptr;    // null: rows linking first - 1 are dropped
  const SystemState* anchor = nullptr;  // non-null: rows linking last + 1 are kept
  const OfferAdjustments* adjustments = nullptr;
  std::span<const double> prices = {};  // non-empty: price-taking profit program, no balance rows
};

class Builder {
 public:
  Builder(std::span<const Resource> resources, const Horizon& horizon, const BuildOptions& options)
      : resources_(resources), horizon_(horizon), options_(options) {}

  lp::LinearProgram build(const Segment& seg) {
    seg_ = seg;
    if (static_cast<int>(seg.demand.size()) != seg.last - seg.first + 1) {
      throw std::invalid_argument("window demand length does not match the window");
    }
    add_variables();
    for (int t = seg.first; t <= seg.last; ++t) add_period_rows(t);
    for (int t = seg.first; t <= seg.last + (seg.anchor ? 1 : 0); ++t) {
      for (const SymRow& row : link_rows(resources_, horizon_, t)) add_link_row(row);
    }
    add_terminal_rows();
    if (seg.adjustments) apply_adjustments(*seg.adjustments);
    return std::move(program_);
  }

 private:
  int n() const { return static_cast<int>(resources_.size()); }

  int& slot(int i, Kind kind, int t) {
    return index_[((t - seg_.first) * n() + i) * 4 + static_cast<int>(kind)];
  }

  void add_variables() {
    index_.assign(static_cast<std::size_t>(seg_.last - seg_.first + 1) * n() * 4, -1);
    const double dt = horizon_.period_hours;
    for (int t = seg_.first; t <= seg_.last; ++t) {
      int storage_rank = 0;
      for (int i = 0; i < n(); ++i) {
        const Resource& r = resources_[i];
        if (!r.is_storage()) {
          slot(i, Kind::kOutput, t) =
              program_.add_variable(var_name("p", r.id, t), -kInfinity, kInfinity, dt * r.offer_at(t));
          continue;
        }
        const int ch = program_.add_variable(var_name("ch", r.id, t), 0, kInfinity, -dt * r.bid);
        const int dis =
            program_.add_variable(var_name("dis", r.id, t), 0, kInfinity, dt * r.offer_at(t));
        slot(i, Kind::kCharge, t) = ch;
        slot(i, Kind::kDischarge, t) = dis;
        slot(i, Kind::kSoc, t) = program_.add_variable(var_name("soc", r.id, t), 0, kInfinity, 0.0);
        if (options_.tie_break) {
          const double unit = 1.0 + 0.1 * storage_rank;
          program_.set_tie_break(ch, t * unit);
          program_.set_tie_break(dis, (horizon_.periods + 1 - t) * unit);
        }
        ++storage_rank;
      }
    }
  }

  void add_period_rows(int t) {
    const double demand = seg_.demand[t - seg_.first];
    std::vector<lp::Term> balance;
    for (int i = 0; i < n(); ++i) {
      const Resource& r = resources_[i];
      if (!r.is_storage()) {
        const int p = slot(i, Kind::kOutput, t);
        balance.push_back({p, 1.0});
        program_.add_constraint(var_name("pmax", r.id, t), ConstraintTag::kResource, {{p, 1.0}},
                                Sense::kLessEqual, r.eco_max);
        program_.add_constraint(var_name("pmin", r.id, t), ConstraintTag::kResource, {{p, 1.0}},
                                Sense::kGreaterEqual, r.eco_min);
        continue;
      }
      const int ch = slot(i, Kind::kCharge, t);
      const int dis = slot(i, Kind::kDischarge, t);
      balance.push_back({dis, 1.0});
      balance.push_back({ch, -1.0});
      program_.add_constraint(var_name("chmax", r.id, t), ConstraintTag::kResource, {{ch, 1.0}},
                              Sense::kLessEqual, -r.eco_min);
      program_.add_constraint(var_name("dismax", r.id, t), ConstraintTag::kResource, {{dis, 1.0}},
                              Sense::kLessEqual, r.eco_max);
      program_.add_constraint(var_name("socmax", r.id, t), ConstraintTag::kResource,
                              {{slot(i, Kind::kSoc, t), 1.0}}, Sense::kLessEqual, r.soc_max);
    }
    if (!seg_.prices.empty()) {
      const double revenue = horizon_.period_hours * seg_.prices[t - seg_.first];
      for (const lp::Term& term : balance) program_.add_cost(term.var, -revenue * term.coef);
      return;
    }
    if (options_.elastic) {
      const double penalty = options_.value_of_load * horizon_.period_hours;
      balance.push_back({program_.add_variable("shed[" + std::to_string(t) + "]", 0, kInfinity, penalty), 1.0});
      balance.push_back({program_.add_variable("spill[" + std::to_string(t) + "]", 0, kInfinity, penalty), -1.0});
    }
    program_.add_constraint("balance[" + std::to_string(t) + "]", ConstraintTag::kSystem,
                            std::move(balance), Sense::kEqual, demand);
  }

  void add_link_row(const SymRow& row) {
    std::vector<lp::Term> terms;
    double rhs = row.rhs;
    bool boundary = false;
    for (const auto& [key, coef] : row.terms) {
      if (key.period >= seg_.first && key.period <= seg_.last) {
        terms.push_back({slot(key.resource, key.kind, key.period), coef});
      } else if (key.period == seg_.first - 1) {
        if (!seg_.past) return;
        rhs -= coef * state_value((*seg_.past)[key.resource], key.kind);
      } else {
        rhs -= coef * state_value((*seg_.anchor)[key.resource], key.kind);
        boundary = true;
      }
    }
    program_.add_constraint(row.name, boundary ? ConstraintTag::kBoundary : row.tag,
                            std::move(terms), row.sense, rhs);
  }

  void add_terminal_rows() {
    if (seg_.last != horizon_.periods) return;
    const int t = horizon_.periods;
    for (int i = 0; i < n(); ++i) {
      const Resource& r = resources_[i];
      if (!r.is_storage() || !r.soc_target) continue;
      std::vector<lp::Term> terms = {{slot(i, Kind::kSoc, t), 1.0}};
      if (options_.elastic) {
        terms.push_back({program_.add_variable(var_name("target_short", r.id, t), 0, kInfinity,
                                               options_.value_of_load),
                         1.0});
        terms.push_back({program_.add_variable(var_name("target_excess", r.id, t), 0, kInfinity,
                                               options_.value_of_load),
                         -1.0});
      }
      program_.add_constraint("soc_target[" + r.id + "]", ConstraintTag::kResource,
                              std::move(terms), Sense::kEqual, *r.soc_target);
    }
  }

  void apply_adjustments(const OfferAdjustments& adj) {
    for (const auto* side : {&adj.backward, &adj.forward}) {
      for (const auto& [name, delta] : *side) {
        const auto j = program_.find_variable(name);
        if (!j) throw std::invalid_argument("offer adjustment on unknown variable '" + name + "'");
        program_.add_cost(*j, delta);
      }
    }
  }

  std::span<const Resource> resources_;
  const Horizon& horizon_;
  BuildOptions options_;
  Segment seg_;
  std::vector<int> index_;
  lp::LinearProgram program_;
};

}  // namespace

lp::LinearProgram build_full_horizon(std::span<const Resource> resources, const Horizon& horizon,
                                     const BuildOptions& options) {
  validate(resources, horizon);
  if (!options.elastic) {
    if (auto problem = preflight_screen(resources, horizon)) throw std::invalid_argument(*problem);
  }
  const SystemState start = initial_state(resources);
  Segment seg{1, horizon.periods, horizon.demand, &start, nullptr, nullptr};
  return Builder(resources, horizon, options).build(seg);
}

lp::LinearProgram build_sp(std::span<const Resource> resources, const Horizon& horizon,
                           const Window& window, const SystemState& past,
                           const std::optional<SystemState>& future_anchor,
                           std::span<const double> window_demand, const BuildOptions& options) {
  if (future_anchor.has_value() != window.has_future_boundary()) {
    throw std::invalid_argument("future anchor must be given exactly when the window ends before T");
  }
  Segment seg{window.start, window.end, window_demand, &past,
              future_anchor ? &*future_anchor : nullptr, nullptr};
  return Builder(resources, horizon, options).build(seg);
}

lp::LinearProgram build_lookahead(std::span<const Resource> resources, const Horizon& horizon,
                                  const Window& window, const SystemState& past,
                                  std::span<const double> window_demand, const BuildOptions& options) {
  Segment seg{window.start, window.end, window_demand, &past, nullptr, nullptr};
  return Builder(resources, horizon, options).build(seg);
}

OfferAdjustments offer_adjustments(std::span<const Resource> resources, const Horizon& horizon,
                                   const Window& window, const std::map<std::string, double>& pi) {
  OfferAdjustments adj;
  auto collect = [&](int link_period, int own_period, std::map<std::string, double>& out) {
    for (const SymRow& row : link_rows(resources, horizon, link_period)) {
      const auto it = pi.find(row.name);
      if (it == pi.end()) {
        throw std::invalid_argument("missing intertemporal dual for '" + row.name + "'");
      }
      if (it->second == 0.0) continue;
      for (const auto& [key, coef] : row.terms) {
        if (key.period != own_period) continue;
        const std::string name = var_name(kind_name(key.kind), resources[key.resource].id, own_period);
        out[name] -= it->second * coef;
      }
    }
  };
  collect(window.start, window.start, adj.backward);
  if (window.has_future_boundary()) collect(window.end + 1, window.end, adj.forward);
  return adj;
}

lp::LinearProgram build_pp(std::span<const Resource> resources, const Horizon& horizon,
                           const Window& window, const OfferAdjustments& adjustments,
                           std::span<const double> window_demand, const BuildOptions& options) {
  Segment seg{window.start, window.end, window_demand, nullptr, nullptr, &adjustments};
  return Builder(resources, horizon, options).build(seg);
}

lp::LinearProgram build_profit_max(const Resource& resource, const Horizon& horizon,
                                   std::span<const double> prices) {
  if (static_cast<int>(prices.size()) != horizon.periods) {
    throw std::invalid_argument("price series length must equal the horizon");
  }
  const std::span<const Resource> one(&resource, 1);
  const SystemState start = initial_state(one);
  Segment seg{1, horizon.periods, horizon.demand, &start, nullptr, nullptr, prices};
  BuildOptions options;
  options.tie_break = false;
  return Builder(one, horizon, options).build(seg);
}

double resource_profit(const Resource& resource, const Horizon& horizon,
                       std::span<const double> prices, std::span<const ResourceState> path) {
  double profit = 0.0;
  for (int t = 1; t <= horizon.periods; ++t) {
    const ResourceState& s = path[t - 1];
    const double cost = resource.is_storage()
                            ? resource.offer_at(t) * s.discharge - resource.bid * s.charge
                            : resource.offer_at(t) * s.output;
    profit += horizon.period_hours * (prices[t - 1] * s.output - cost);
  }
  return profit;
}

MarketOutcome extract_outcome(std::span<const Resource> resources, const Horizon& horizon,
                              int first, int last, std::span<const double> demand,
                              const lp::LinearProgram& program, const lp::LpSolution& solution) {
  MarketOutcome out;
  out.status = solution.status;
  out.start = first;
  out.solve_seconds = solution.solve_seconds;
  if (!solution.optimal()) return out;
  out.objective = solution.objective;
  const double dt = horizon.period_hours;
  auto value = [&](const std::string& name) {
    const auto j = program.find_variable(name);
    return j ? solution.primal[*j] : 0.0;
  };
  for (int t = first; t <= last; ++t) {
    SystemState state(resources.size());
    for (std::size_t i = 0; i < resources.size(); ++i) {
      const Resource& r = resources[i];
      ResourceState& s = state[i];
      if (r.is_storage()) {
        s.charge = value(var_name("ch", r.id, t));
        s.discharge = value(var_name("dis", r.id, t));
        s.soc = value(var_name("soc", r.id, t));
        s.output = s.discharge - s.charge;
        out.production_cost += dt * (r.offer_at(t) * s.discharge - r.bid * s.charge);
      } else {
        s.output = value(var_name("p", r.id, t));
        out.production_cost += dt * r.offer_at(t) * s.output;
      }
    }
    out.schedule.push_back(std::move(state));
    out.demand.push_back(demand[t - first]);
    out.lmp.push_back(solution.dual_of(program, "balance[" + std::to_string(t) + "]") / dt);
    const std::string ts = std::to_string(t);
    const auto shed = program.find_variable("shed[" + ts + "]");
    out.elastic = out.elastic || shed.has_value();
    out.shed.push_back(shed ? solution.primal[*shed] : 0.0);
    const auto spill = program.find_variable("spill[" + ts + "]");
    out.spill.push_back(spill ? solution.primal[*spill] : 0.0);
  }
  if (last == horizon.periods) {
    for (std::size_t i = 0; i < resources.size(); ++i) {
      const Resource& r = resources[i];
      if (r.is_storage() && r.soc_target) {
        out.target_miss[r.id] = std::abs(out.at(last)[i].soc - *r.soc_target);
      }
    }
  }
  for (int i = 0; i < program.num_constraints(); ++i) {
    const lp::Constraint& c = program.constraint(i);
    if (c.tag == ConstraintTag::kIntertemporal) {
      out.intertemporal_duals[c.name] = solution.dual[i];
    } else if (c.tag == ConstraintTag::kResource) {
      out.resource_duals[c.name] = solution.dual[i];
    }
  }
  return out;
}

MarketOutcome solve_outcome(std::span<const Resource> resources, const Horizon& horizon, int first,
                            int last, std::span<const double> demand,
                            const lp::LinearProgram& program, const lp::SolveOptions& solve_options) {
  const lp::LpSolution solution = lp::solve(program, solve_options);
  return extract_outcome(resources, horizon, first, last, demand, program, solution);
}

}  // namespace mpm
