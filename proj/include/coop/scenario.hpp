#pragma once

// Scenario description, the built-in scenarios and the scenario driver.
//
// Scenario files are JSON. Every section is optional when "base" names a
// built-in scenario; the fields present override the base. Without a base,
// the library defaults are used.
//
//   {
//     "base": "paper-fig3",
//     "params":   {"m_u", "I_u", "m_c", "m_b", "I_b", "L", "d_G", "g"},
//     "limits":   {"U_max", "T_max", "F_max"},
//     "controller": {
//       "ugv":   {"k_p_x", "k_d_x", "lambda_1", "lambda_2"},
//       "outer": {"k_p_alpha", "k_d_alpha", "epsilon"},
//       "inner": {"k_p_beta", "k_d_beta"},
//       "thrust_law": "basic" | "improved"
//     },
//     "initial_state": {"x", "x_dot", "alpha", "alpha_dot", "beta", "beta_dot"},
//     "desired": {"x_ref", "alpha_ref"},
//     "rg": null | {"sample_time", "horizon", "bisection_tol", "max_bisection_iters",
//                   "margin_mu", "terminal_tol", "enforce_actuator_limits",
//                   "enforce_alpha_range", "terminal_check"},
//     "initial_applied": {"x_ref", "alpha_ref"},
//     "dynamics_model": "full" | "simplified",
//     "dt": 0.001,
//     "duration": 30.0
//   }
//
// gamma is not read: it is derived from epsilon and U_max.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "coop/control.hpp"
#include "coop/errors.hpp"
#include "coop/model.hpp"
#include "coop/refgov.hpp"
#include "coop/simulation.hpp"

namespace coop {

struct Scenario {
  std::string name = "custom";
  PhysicalParams params;
  ActuatorLimits limits;
  ControllerConfig controller;
  State initial_state;
  Reference desired;
  std::optional<RgConfig> rg;
  /// Reference applied at t = 0 when the governor is active. Defaults to the
  /// initial position and inclination (clamped into the admissible window).
  std::optional<Reference> initial_applied;
  DynamicsModel dynamics_model = DynamicsModel::Simplified;
  double dt = 1e-3;
  double duration = 30.0;

  ClosedLoop closed_loop() const { return ClosedLoop{controller, params, limits, dynamics_model, dt}; }

  Reference starting_reference() const {
    if (initial_applied) return *initial_applied;
    if (!rg) return desired;
    const AlphaRange w = admissible_alpha_window(params, limits, *rg);
    return Reference{initial_state.x, std::clamp(initial_state.alpha, w.alpha_min, w.alpha_max)};
  }

  void validate() const {
    params.validate();
    limits.validate();
    controller.validate(limits);
    if (!initial_state.is_finite()) throw InvalidParameter("initial_state: all fields must be finite");
    if (!(std::isfinite(desired.x_ref) && std::isfinite(desired.alpha_ref))) {
      throw InvalidParameter("desired: all fields must be finite");
    }
    if (!(dt > 0.0)) throw InvalidParameter("dt must be > 0");
    if (!(duration > 0.0)) throw InvalidParameter("duration must be > 0");
    if (rg) {
      rg->validate();
      if (dt > rg->sample_time) throw InvalidParameter("dt must not exceed rg.sample_time");
      const AlphaRange w = admissible_alpha_window(params, limits, *rg);
      if (!w.contains(desired.alpha_ref)) {
        throw InvalidParameter("desired.alpha_ref must lie in [alpha_min + margin_mu, alpha_max - margin_mu]");
      }
    }
  }
};

// =============================================================================
// Built-in scenarios
// =============================================================================

/// Regulation to a vertical object with the basic thrust law.
inline Scenario fig3_scenario() {
  Scenario sc;
  sc.name = "paper-fig3";
  sc.params = PhysicalParams{};  // m_u 0.2, I_u 0.881e-3, m_c 2, m_b 1, I_b 0.33, L 1, d_G 0.5
  sc.limits = ActuatorLimits{5.0, 1.3, 10.0};
  sc.controller.ugv = UgvGains{3.0, 3.0, 10.0, 2.0};
  sc.controller.outer = OuterGains::make(20.0, 5.0, 1.0, sc.limits.U_max);
  sc.controller.inner = InnerGains{0.5, 0.01};
  sc.controller.thrust_law = ThrustLaw::Basic;
  sc.initial_state = State{0.0, 0.0, kPi / 3.0, 0.0, kPi / 4.0, 0.0};
  sc.desired = Reference{0.3, kPi / 2.0};
  sc.dynamics_model = DynamicsModel::Simplified;
  sc.dt = 1e-3;
  sc.duration = 30.0;
  return sc;
}

/// Inclination 2 pi / 3 with the improved thrust law and a heavier UAV,
/// under the reference governor.
inline Scenario fig4_scenario() {
  Scenario sc = fig3_scenario();
  sc.name = "paper-fig4";
  sc.params.I_u = 1.762e-3;
  sc.controller.thrust_law = ThrustLaw::Improved;
  sc.desired = Reference{0.3, 2.0 * kPi / 3.0};
  sc.rg = RgConfig{};
  sc.duration = 50.0;
  return sc;
}

inline std::optional<Scenario> builtin_scenario(const std::string& name) {
  if (name == "paper-fig3") return fig3_scenario();
  if (name == "paper-fig4") return fig4_scenario();
  return std::nullopt;
}

inline std::vector<std::string> builtin_scenario_names() { return {"paper-fig3", "paper-fig4"}; }

// =============================================================================
// JSON loading
// =============================================================================

namespace detail {

using nlohmann::json;

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ScenarioError(where() + ": expected an object");
  }

  void number(const char* key, double& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number()) throw ScenarioError(where(key) + ": expected a number");
    out = v.get<double>();
  }

  void integer(const char* key, int& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) throw ScenarioError(where(key) + ": expected an integer");
    out = v.get<int>();
  }

  void boolean(const char* key, bool& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw ScenarioError(where(key) + ": expected true or false");
    out = v.get<bool>();
  }

  template <typename Enum>
  void choice(const char* key, Enum& out, const std::vector<std::pair<std::string, Enum>>& options) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    if (v.is_string()) {
      for (const auto& [label, value] : options) {
        if (v.get<std::string>() == label) {
          out = value;
          return;
        }
      }
    }
    std::string allowed;
    for (const auto& [label, value] : options) allowed += (allowed.empty() ? "" : ", ") + label;
    throw ScenarioError(where(key) + ": expected one of " + allowed);
  }

  /// Child object, or nullptr if absent.
  const json* child(const char* key) {
    seen_.insert(key);
    if (!j_.contains(key)) return nullptr;
    return &j_.at(key);
  }

  std::string where(const std::string& key = {}) const {
    if (key.empty()) return path_.empty() ? "<root>" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  void reject_unknown() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ScenarioError(where(key) + ": unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline void read_reference(const json& j, const std::string& path, Reference& ref) {
  Reader r(j, path);
  r.number("x_ref", ref.x_ref);
  r.number("alpha_ref", ref.alpha_ref);
  r.reject_unknown();
}

inline void read_rg(const json& j, RgConfig& rg) {
  Reader r(j, "rg");
  r.number("sample_time", rg.sample_time);
  r.number("horizon", rg.horizon);
  r.number("bisection_tol", rg.bisection_tol);
  r.integer("max_bisection_iters", rg.max_bisection_iters);
  r.number("margin_mu", rg.margin_mu);
  r.number("terminal_tol", rg.terminal_tol);
  r.boolean("enforce_actuator_limits", rg.enforce_actuator_limits);
  r.boolean("enforce_alpha_range", rg.enforce_alpha_range);
  r.boolean("terminal_check", rg.terminal_check);
  r.reject_unknown();
}

}  // namespace detail

/// Builds a scenario from parsed JSON. Errors carry the dotted field path.
inline Scenario scenario_from_json(const nlohmann::json& root) {
  using detail::Reader;
  Reader top(root, "");

  Scenario sc;
  if (const auto* base = top.child("base")) {
    if (!base->is_string()) throw ScenarioError("base: expected a built-in scenario name");
    auto b = builtin_scenario(base->get<std::string>());
    if (!b) throw ScenarioError("base: unknown built-in scenario '" + base->get<std::string>() + "'");
    sc = *b;
  }
  if (const auto* name = top.child("name")) {
    if (!name->is_string()) throw ScenarioError("name: expected a string");
    sc.name = name->get<std::string>();
  }

  if (const auto* j = top.child("params")) {
    Reader r(*j, "params");
    auto& p = sc.params;
    r.number("m_u", p.m_u);
    r.number("I_u", p.I_u);
    r.number("m_c", p.m_c);
    r.number("m_b", p.m_b);
    r.number("I_b", p.I_b);
    r.number("L", p.L);
    r.number("d_G", p.d_G);
    r.number("g", p.g);
    r.reject_unknown();
  }
  if (const auto* j = top.child("limits")) {
    Reader r(*j, "limits");
    r.number("U_max", sc.limits.U_max);
    r.number("T_max", sc.limits.T_max);
    r.number("F_max", sc.limits.F_max);
    r.reject_unknown();
  }
  if (const auto* j = top.child("controller")) {
    Reader r(*j, "controller");
    auto& c = sc.controller;
    if (const auto* u = r.child("ugv")) {
      Reader ru(*u, "controller.ugv");
      ru.number("k_p_x", c.ugv.k_p_x);
      ru.number("k_d_x", c.ugv.k_d_x);
      ru.number("lambda_1", c.ugv.lambda_1);
      ru.number("lambda_2", c.ugv.lambda_2);
      ru.reject_unknown();
    }
    if (const auto* o = r.child("outer")) {
      Reader ro(*o, "controller.outer");
      ro.number("k_p_alpha", c.outer.k_p_alpha);
      ro.number("k_d_alpha", c.outer.k_d_alpha);
      ro.number("epsilon", c.outer.epsilon);
      ro.reject_unknown();
    }
    if (const auto* i = r.child("inner")) {
      Reader ri(*i, "controller.inner");
      ri.number("k_p_beta", c.inner.k_p_beta);
      ri.number("k_d_beta", c.inner.k_d_beta);
      ri.reject_unknown();
    }
    r.choice<ThrustLaw>("thrust_law", c.thrust_law, {{"basic", ThrustLaw::Basic}, {"improved", ThrustLaw::Improved}});
    r.reject_unknown();
  }
  if (const auto* j = top.child("initial_state")) {
    Reader r(*j, "initial_state");
    auto& s = sc.initial_state;
    r.number("x", s.x);
    r.number("x_dot", s.x_dot);
    r.number("alpha", s.alpha);
    r.number("alpha_dot", s.alpha_dot);
    r.number("beta", s.beta);
    r.number("beta_dot", s.beta_dot);
    r.reject_unknown();
  }
  if (const auto* j = top.child("desired")) detail::read_reference(*j, "desired", sc.desired);
  if (const auto* j = top.child("rg")) {
    if (j->is_null()) {
      sc.rg.reset();
    } else {
      RgConfig rg = sc.rg.value_or(RgConfig{});
      detail::read_rg(*j, rg);
      sc.rg = rg;
    }
  }
  if (const auto* j = top.child("initial_applied")) {
    Reference ref = sc.initial_applied.value_or(sc.desired);
    detail::read_reference(*j, "initial_applied", ref);
    sc.initial_applied = ref;
  }
  top.choice<DynamicsModel>("dynamics_model", sc.dynamics_model,
                            {{"full", DynamicsModel::Full}, {"simplified", DynamicsModel::Simplified}});
  top.number("dt", sc.dt);
  top.number("duration", sc.duration);
  top.reject_unknown();

  // The mapping gain follows epsilon and U_max.
  sc.controller.outer.gamma = mapping_gamma(sc.controller.outer.epsilon, sc.limits.U_max);

  try {
    sc.validate();
  } catch (const InvalidParameter& e) {
    throw ScenarioError(std::string("invariant violated: ") + e.what());
  }
  return sc;
}

/// Loads a built-in scenario by name, or a JSON scenario file.
inline Scenario load_scenario(const std::string& path_or_name) {
  if (auto b = builtin_scenario(path_or_name)) return *b;
  std::ifstream in(path_or_name);
  if (!in) throw ScenarioError(path_or_name + ": cannot open scenario file");
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioError(path_or_name + ": " + e.what());
  }
  return scenario_from_json(root);
}

inline nlohmann::json scenario_to_json(const Scenario& sc) {
  nlohmann::json j;
  j["name"] = sc.name;
  const auto& p = sc.params;
  j["params"] = {{"m_u", p.m_u}, {"I_u", p.I_u}, {"m_c", p.m_c}, {"m_b", p.m_b},
                 {"I_b", p.I_b}, {"L", p.L},     {"d_G", p.d_G}, {"g", p.g}};
  j["limits"] = {{"U_max", sc.limits.U_max}, {"T_max", sc.limits.T_max}, {"F_max", sc.limits.F_max}};
  const auto& c = sc.controller;
  j["controller"] = {
      {"ugv", {{"k_p_x", c.ugv.k_p_x}, {"k_d_x", c.ugv.k_d_x}, {"lambda_1", c.ugv.lambda_1}, {"lambda_2", c.ugv.lambda_2}}},
      {"outer", {{"k_p_alpha", c.outer.k_p_alpha}, {"k_d_alpha", c.outer.k_d_alpha}, {"epsilon", c.outer.epsilon}}},
      {"inner", {{"k_p_beta", c.inner.k_p_beta}, {"k_d_beta", c.inner.k_d_beta}}},
      {"thrust_law", c.thrust_law == ThrustLaw::Basic ? "basic" : "improved"}};
  const auto& s = sc.initial_state;
  j["initial_state"] = {{"x", s.x},         {"x_dot", s.x_dot}, {"alpha", s.alpha},
                        {"alpha_dot", s.alpha_dot}, {"beta", s.beta}, {"beta_dot", s.beta_dot}};
  j["desired"] = {{"x_ref", sc.desired.x_ref}, {"alpha_ref", sc.desired.alpha_ref}};
  if (sc.rg) {
    const auto& r = *sc.rg;
    j["rg"] = {{"sample_time", r.sample_time},
               {"horizon", r.horizon},
               {"bisection_tol", r.bisection_tol},
               {"max_bisection_iters", r.max_bisection_iters},
               {"margin_mu", r.margin_mu},
               {"terminal_tol", r.terminal_tol},
               {"enforce_actuator_limits", r.enforce_actuator_limits},
               {"enforce_alpha_range", r.enforce_alpha_range},
               {"terminal_check", r.terminal_check}};
  } else {
    j["rg"] = nullptr;
  }
  if (sc.initial_applied) {
    j["initial_applied"] = {{"x_ref", sc.initial_applied->x_ref}, {"alpha_ref", sc.initial_applied->alpha_ref}};
  }
  j["dynamics_model"] = sc.dynamics_model == DynamicsModel::Full ? "full" : "simplified";
  j["dt"] = sc.dt;
  j["duration"] = sc.duration;
  return j;
}

// =============================================================================
// Driver
// =============================================================================

struct SimulationResult {
  Trajectory trajectory;
  std::vector<RgStepResult> rg_updates;  // empty without a governor
};

/// Runs the scenario closed loop, through the governor when one is
/// configured. Deterministic for a given scenario.
inline SimulationResult simulate(const Scenario& sc) {
  sc.validate();
  const ClosedLoop loop = sc.closed_loop();
  if (sc.rg) {
    RgRunResult r = rg_run(sc.initial_state, sc.starting_reference(), sc.desired, loop, *sc.rg, sc.duration);
    return SimulationResult{std::move(r.trajectory), std::move(r.updates)};
  }
  return SimulationResult{simulate_fixed(loop, sc.initial_state, sc.desired, sc.duration), {}};
}

}  // namespace coop
