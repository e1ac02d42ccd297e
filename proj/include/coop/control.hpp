#pragma once

// Decentralized controllers: nested saturated PD on the UGV, and a cascade on
// the UAV (tangential-force PD with gravity compensation in the outer loop,
// attitude PD in the inner loop).

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "coop/errors.hpp"
#include "coop/model.hpp"

namespace coop {

/// Below this tangential force the basic thrust law returns its analytic
/// limit instead of evaluating 0/0.
inline constexpr double kForceTolerance = 1e-9;

struct UgvGains {
  double k_p_x = 3.0;
  double k_d_x = 3.0;
  double lambda_1 = 10.0;
  double lambda_2 = 2.0;

  void validate(const ActuatorLimits& lim) const {
    if (!(k_p_x > 0.0)) throw InvalidParameter("controller.ugv.k_p_x must be > 0");
    if (!(k_d_x > 0.0)) throw InvalidParameter("controller.ugv.k_d_x must be > 0");
    if (!(lambda_1 > 0.0)) throw InvalidParameter("controller.ugv.lambda_1 must be > 0");
    if (!(lambda_2 > 0.0)) throw InvalidParameter("controller.ugv.lambda_2 must be > 0");
    if (lambda_1 > lim.F_max) throw InvalidParameter("controller.ugv.lambda_1 must not exceed limits.F_max");
    if (!(lambda_2 < 0.5 * lambda_1 * k_d_x)) {
      throw InvalidParameter(
          "controller.ugv.lambda_2: global asymptotic stability of the UGV loop requires "
          "lambda_2 < lambda_1 * k_d_x / 2");
    }
  }
};

/// gamma such that a tangential force of U_max maps to a relative attitude
/// of exactly pi/2.
inline double mapping_gamma(double epsilon, double U_max) { return kPi / (2.0 * std::atan(epsilon * U_max)); }

struct OuterGains {
  double k_p_alpha = 20.0;
  double k_d_alpha = 5.0;
  double epsilon = 1.0;
  double gamma = mapping_gamma(1.0, 5.0);

  static OuterGains make(double k_p_alpha, double k_d_alpha, double epsilon, double U_max) {
    return OuterGains{k_p_alpha, k_d_alpha, epsilon, mapping_gamma(epsilon, U_max)};
  }

  /// Removable-singularity value of f_t / sin(theta_ref) at f_t = 0.
  double thrust_at_zero_force() const { return 1.0 / (gamma * epsilon); }

  void validate(const ActuatorLimits& lim) const {
    if (!(k_p_alpha > 0.0)) throw InvalidParameter("controller.outer.k_p_alpha must be > 0");
    if (!(k_d_alpha > 0.0)) throw InvalidParameter("controller.outer.k_d_alpha must be > 0");
    if (!(epsilon > 0.0 && std::isfinite(epsilon))) throw InvalidParameter("controller.outer.epsilon must be > 0");
    const double expected = mapping_gamma(epsilon, lim.U_max);
    if (!(std::abs(gamma - expected) <= 1e-12 * expected)) {
      throw InvalidParameter("controller.outer.gamma must equal pi / (2 atan(epsilon * U_max))");
    }
  }
};

struct InnerGains {
  double k_p_beta = 0.5;
  double k_d_beta = 0.01;

  void validate() const {
    if (!(k_p_beta > 0.0)) throw InvalidParameter("controller.inner.k_p_beta must be > 0");
    if (!(k_d_beta > 0.0)) throw InvalidParameter("controller.inner.k_d_beta must be > 0");
  }
};

enum class ThrustLaw {
  Basic,     // u1 = f_t / sin(theta_ref)
  Improved,  // u1 = pos_sat(f_t / sin(theta), U_max) with the measured theta
};

struct ControllerConfig {
  UgvGains ugv;
  OuterGains outer;
  InnerGains inner;
  ThrustLaw thrust_law = ThrustLaw::Basic;

  void validate(const ActuatorLimits& lim) const {
    ugv.validate(lim);
    outer.validate(lim);
    inner.validate();
  }
};

/// Controller internals at one evaluation. The *_pre_clamp fields are the
/// commanded values before the actuator saturations are applied.
struct ControlDebug {
  double f_t = 0.0;
  double theta_ref = 0.0;
  double beta_ref = 0.0;
  double u1_pre_clamp = 0.0;
  double u2_pre_clamp = 0.0;
  double u3_pre_clamp = 0.0;
};

// =============================================================================
// Individual laws
// =============================================================================

/// Nested saturated PD steering the cart to x_ref.
inline double ugv_control(const State& s, double x_ref, const UgvGains& g) {
  return -sat(g.k_d_x * s.x_dot + sat(g.k_p_x * (s.x - x_ref), g.lambda_2), g.lambda_1);
}

/// Outer-loop virtual input: PD on the inclination plus gravity compensation.
inline double tangential_force(const State& s, double alpha_ref, const OuterGains& g, const PhysicalParams& p) {
  return -g.k_p_alpha * (s.alpha - alpha_ref) - g.k_d_alpha * s.alpha_dot +
         p.apparent_mass() * p.g * std::cos(s.alpha);
}

/// Relative attitude reference for a requested tangential force.
inline double theta_ref(double f_t, const OuterGains& g) {
  return sat(g.gamma * std::atan(g.epsilon * f_t), kPi / 2.0);
}

/// Thrust paired with `theta_ref(f_t)` so that u1 sin(theta_ref) = f_t.
/// Always strictly positive.
inline double thrust_basic(double f_t, double theta_ref_value, const OuterGains& g) {
  if (std::abs(f_t) <= kForceTolerance) return g.thrust_at_zero_force();
  return f_t / std::sin(theta_ref_value);
}

/// Thrust computed from the measured relative attitude and saturated onto
/// [0, U_max]. When sin(theta) vanishes the quotient is taken as +-infinity
/// in the direction of f_t.
inline double thrust_improved(double f_t, double theta_actual, const OuterGains& g, const ActuatorLimits& lim) {
  const double s = std::sin(theta_actual);
  if (s == 0.0) {
    if (std::abs(f_t) <= kForceTolerance) return pos_sat(g.thrust_at_zero_force(), lim.U_max);
    return f_t > 0.0 ? lim.U_max : 0.0;
  }
  return pos_sat(f_t / s, lim.U_max);
}

/// Attitude PD of the inner loop.
inline double inner_control(const State& s, double beta_ref, const InnerGains& g) {
  return -g.k_p_beta * (s.beta - beta_ref) - g.k_d_beta * s.beta_dot;
}

// =============================================================================
// Full cascade
// =============================================================================

struct Reference {
  double x_ref = 0.0;
  double alpha_ref = kPi / 2.0;

  friend bool operator==(const Reference&, const Reference&) = default;
};

struct ControlOutput {
  ControlInput input;
  ControlDebug debug;
};

inline ControlOutput cascade_step(const State& s, const Reference& ref, const ControllerConfig& cfg,
                                  const PhysicalParams& p, const ActuatorLimits& lim) {
  ControlDebug dbg;
  dbg.f_t = tangential_force(s, ref.alpha_ref, cfg.outer, p);
  dbg.theta_ref = theta_ref(dbg.f_t, cfg.outer);
  dbg.beta_ref = dbg.theta_ref + s.alpha;
  dbg.u1_pre_clamp = cfg.thrust_law == ThrustLaw::Basic ? thrust_basic(dbg.f_t, dbg.theta_ref, cfg.outer)
                                                        : thrust_improved(dbg.f_t, s.theta(), cfg.outer, lim);
  dbg.u2_pre_clamp = inner_control(s, dbg.beta_ref, cfg.inner);
  dbg.u3_pre_clamp = ugv_control(s, ref.x_ref, cfg.ugv);
  return ControlOutput{ControlInput::clamped(dbg.u1_pre_clamp, dbg.u2_pre_clamp, dbg.u3_pre_clamp, lim), dbg};
}

/// Callable adapter for `rk4_step`.
struct CascadeController {
  Reference ref;
  const ControllerConfig* cfg;
  const PhysicalParams* params;
  const ActuatorLimits* limits;

  ControlInput operator()(const State& s) const { return cascade_step(s, ref, *cfg, *params, *limits).input; }
};

}  // namespace coop
