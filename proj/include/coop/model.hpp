#pragma once

// Planar UGV + object + UAV model: parameters, state, saturation primitives,
// equations of motion, energy and a fixed-step RK4 integrator.
//
// Coordinates: x is the cart position, alpha the inclination of the object
// and beta the attitude of the UAV, both measured from the horizon. The UAV
// sits at the far end of the object, at distance L from the cart joint.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "coop/errors.hpp"

namespace coop {

inline constexpr double kPi = std::numbers::pi;

// =============================================================================
// Saturation primitives
// =============================================================================

/// Symmetric saturation: sign(v) * min(|v|, lambda).
inline double sat(double v, double lambda) {
  return std::clamp(v, -lambda, lambda);
}

/// One-sided saturation onto [0, lambda].
inline double pos_sat(double v, double lambda) {
  return v >= 0.0 ? std::min(v, lambda) : 0.0;
}

// =============================================================================
// Parameters
// =============================================================================

struct PhysicalParams {
  double m_u = 0.2;       // UAV mass [kg]
  double I_u = 0.881e-3;  // UAV inertia [kg m^2]
  double m_c = 2.0;       // UGV mass [kg]
  double m_b = 1.0;       // object mass [kg]
  double I_b = 0.33;      // object inertia [kg m^2]
  double L = 1.0;         // object length [m]
  double d_G = 0.5;       // cart joint to object center of mass [m]
  double g = 9.81;        // gravity [m/s^2]

  double total_mass() const { return m_c + m_b + m_u; }
  /// Apparent mass of object and UAV seen by the tilt dynamics.
  double apparent_mass() const { return m_b * d_G / L + m_u; }
  /// Moment of inertia about the cart joint divided by L.
  double reduced_inertia() const { return (m_b * d_G * d_G + I_b) / L + m_u * L; }

  void validate() const {
    const std::array<std::pair<const char*, double>, 8> fields{{{"m_u", m_u},
                                                                {"I_u", I_u},
                                                                {"m_c", m_c},
                                                                {"m_b", m_b},
                                                                {"I_b", I_b},
                                                                {"L", L},
                                                                {"d_G", d_G},
                                                                {"g", g}}};
    for (const auto& [name, value] : fields) {
      if (!(std::isfinite(value) && value > 0.0)) {
        throw InvalidParameter(std::string("params.") + name + " must be finite and > 0");
      }
    }
    if (d_G > L) throw InvalidParameter("params.d_G must not exceed params.L");
    const double M = apparent_mass();
    if (!(total_mass() * reduced_inertia() > M * M * L)) {
      throw InvalidParameter("params: M_tot * I_0 > M^2 * L is required for an invertible mass matrix");
    }
  }
};

struct ActuatorLimits {
  double U_max = 5.0;   // thrust [N]
  double T_max = 1.3;   // UAV torque [N m]
  double F_max = 10.0;  // UGV force [N]

  void validate() const {
    if (!(U_max > 0.0 && std::isfinite(U_max))) throw InvalidParameter("limits.U_max must be > 0");
    if (!(T_max > 0.0 && std::isfinite(T_max))) throw InvalidParameter("limits.T_max must be > 0");
    if (!(F_max > 0.0 && std::isfinite(F_max))) throw InvalidParameter("limits.F_max must be > 0");
  }
};

// =============================================================================
// State, inputs, accelerations
// =============================================================================

struct State {
  double x = 0.0;
  double x_dot = 0.0;
  double alpha = 0.0;
  double alpha_dot = 0.0;
  double beta = 0.0;
  double beta_dot = 0.0;

  /// Attitude of the UAV relative to the object.
  double theta() const { return beta - alpha; }
  double theta_dot() const { return beta_dot - alpha_dot; }

  bool is_finite() const {
    return std::isfinite(x) && std::isfinite(x_dot) && std::isfinite(alpha) &&
           std::isfinite(alpha_dot) && std::isfinite(beta) && std::isfinite(beta_dot);
  }

  friend bool operator==(const State&, const State&) = default;
};

/// Actuator inputs. Built through `clamped`, which applies the physical
/// saturations, so an instance always satisfies the actuator limits it was
/// made against.
struct ControlInput {
  double u1 = 0.0;  // thrust [N]
  double u2 = 0.0;  // UAV torque [N m]
  double u3 = 0.0;  // UGV force [N]

  static ControlInput clamped(double u1, double u2, double u3, const ActuatorLimits& lim) {
    return ControlInput{pos_sat(u1, lim.U_max), sat(u2, lim.T_max), sat(u3, lim.F_max)};
  }
};

struct Accel {
  double x_ddot = 0.0;
  double alpha_ddot = 0.0;
  double beta_ddot = 0.0;
};

enum class DynamicsModel { Full, Simplified };

// =============================================================================
// Equations of motion
// =============================================================================

/// Determinant of the (x, alpha) mass matrix of the coupled model.
inline double mass_matrix_determinant(double alpha, const PhysicalParams& p) {
  const double M = p.apparent_mass();
  const double s = std::sin(alpha);
  return p.total_mass() * p.reduced_inertia() - M * M * p.L * s * s;
}

/// Coupled cart / object / UAV dynamics.
inline Accel full_dynamics(const State& s, const ControlInput& u, const PhysicalParams& p) {
  const double M = p.apparent_mass();
  const double I0 = p.reduced_inertia();
  const double Mt = p.total_mass();
  const double sa = std::sin(s.alpha);
  const double ca = std::cos(s.alpha);

  // [ Mt        -M L sa ] [x_ddot    ]   [ u3 + M L alpha_dot^2 ca         ]
  // [ -M sa      I0     ] [alpha_ddot] = [ u1 sin(beta - alpha) - M g ca   ]
  const double a11 = Mt, a12 = -M * p.L * sa;
  const double a21 = -M * sa, a22 = I0;
  const double b1 = u.u3 + M * p.L * s.alpha_dot * s.alpha_dot * ca;
  const double b2 = u.u1 * std::sin(s.beta - s.alpha) - M * p.g * ca;
  const double det = a11 * a22 - a12 * a21;
  if (det <= 1e-12) throw DegenerateMassMatrix("mass matrix determinant is not positive");

  return Accel{(b1 * a22 - a12 * b2) / det, (a11 * b2 - a21 * b1) / det, u.u2 / p.I_u};
}

/// Dynamics with the reaction of object and UAV on the cart neglected.
inline Accel simplified_dynamics(const State& s, const ControlInput& u, const PhysicalParams& p) {
  const double M = p.apparent_mass();
  const double x_ddot = u.u3 / p.m_c;
  const double alpha_ddot =
      (u.u1 * std::sin(s.beta - s.alpha) - M * (-std::sin(s.alpha) * x_ddot + p.g * std::cos(s.alpha))) /
      p.reduced_inertia();
  return Accel{x_ddot, alpha_ddot, u.u2 / p.I_u};
}

inline Accel dynamics(DynamicsModel model, const State& s, const ControlInput& u, const PhysicalParams& p) {
  return model == DynamicsModel::Full ? full_dynamics(s, u, p) : simplified_dynamics(s, u, p);
}

struct Energy {
  double kinetic = 0.0;    // [J]
  double potential = 0.0;  // [J]
  double total() const { return kinetic + potential; }
};

inline Energy energy(const State& s, const PhysicalParams& p) {
  const double xd = s.x_dot, ad = s.alpha_dot, bd = s.beta_dot;
  const double sa = std::sin(s.alpha);
  const double kinetic = 0.5 * p.m_c * xd * xd +
                         0.5 * p.m_b * (xd * xd - 2.0 * xd * p.d_G * ad * sa + p.d_G * p.d_G * ad * ad) +
                         0.5 * p.m_u * (xd * xd - 2.0 * xd * p.L * ad * sa + p.L * p.L * ad * ad) +
                         0.5 * p.I_b * ad * ad + 0.5 * p.I_u * bd * bd;
  const double potential = (p.m_b * p.d_G + p.m_u * p.L) * sa * p.g;
  return Energy{kinetic, potential};
}

// =============================================================================
// Integration
// =============================================================================

namespace detail {

inline State derivative(DynamicsModel model, const State& s, const ControlInput& u, const PhysicalParams& p) {
  const Accel a = dynamics(model, s, u, p);
  return State{s.x_dot, a.x_ddot, s.alpha_dot, a.alpha_ddot, s.beta_dot, a.beta_ddot};
}

inline State axpy(const State& s, double h, const State& k) {
  return State{s.x + h * k.x,         s.x_dot + h * k.x_dot,         s.alpha + h * k.alpha,
               s.alpha_dot + h * k.alpha_dot, s.beta + h * k.beta, s.beta_dot + h * k.beta_dot};
}

}  // namespace detail

/// One classical RK4 step of the closed loop. `controller` maps a State to a
/// ControlInput and is evaluated at each of the four stages. `t` only labels
/// the divergence error.
template <typename Controller>
State rk4_step(const State& s, Controller&& controller, DynamicsModel model, const PhysicalParams& p, double dt,
               double t = 0.0) {
  if (!(dt > 0.0)) throw InvalidParameter("rk4_step: dt must be > 0");
  const State k1 = detail::derivative(model, s, controller(s), p);
  const State s2 = detail::axpy(s, 0.5 * dt, k1);
  const State k2 = detail::derivative(model, s2, controller(s2), p);
  const State s3 = detail::axpy(s, 0.5 * dt, k2);
  const State k3 = detail::derivative(model, s3, controller(s3), p);
  const State s4 = detail::axpy(s, dt, k3);
  const State k4 = detail::derivative(model, s4, controller(s4), p);

  const double w = dt / 6.0;
  State next{s.x + w * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
             s.x_dot + w * (k1.x_dot + 2.0 * k2.x_dot + 2.0 * k3.x_dot + k4.x_dot),
             s.alpha + w * (k1.alpha + 2.0 * k2.alpha + 2.0 * k3.alpha + k4.alpha),
             s.alpha_dot + w * (k1.alpha_dot + 2.0 * k2.alpha_dot + 2.0 * k3.alpha_dot + k4.alpha_dot),
             s.beta + w * (k1.beta + 2.0 * k2.beta + 2.0 * k3.beta + k4.beta),
             s.beta_dot + w * (k1.beta_dot + 2.0 * k2.beta_dot + 2.0 * k3.beta_dot + k4.beta_dot)};
  if (!next.is_finite()) throw IntegrationDiverged("integration diverged: non-finite state", t);
  return next;
}

}  // namespace coop
