#pragma once

// Static equilibria reachable under the thrust saturation.

#include <algorithm>
#include <cmath>
#include <string>

#include "coop/control.hpp"
#include "coop/errors.hpp"
#include "coop/model.hpp"

namespace coop {

struct AlphaRange {
  double alpha_min = 0.0;
  double alpha_max = kPi;

  bool contains(double alpha) const { return alpha >= alpha_min && alpha <= alpha_max; }
};

struct BetaRange {
  double beta_min = 0.0;
  double beta_max = 0.0;

  bool contains(double beta) const { return beta >= beta_min && beta <= beta_max; }
};

/// Inclinations at which gravity can be balanced with u1 <= U_max.
inline AlphaRange attainable_alpha_range(const PhysicalParams& p, const ActuatorLimits& lim) {
  const double weight = p.apparent_mass() * p.g;
  if (lim.U_max >= weight) return AlphaRange{0.0, kPi};
  const double ratio = lim.U_max / weight;
  // acos(-r) = pi - acos(r) keeps the range exactly symmetric about pi/2.
  const double lo = std::acos(ratio);
  return AlphaRange{lo, kPi - lo};
}

/// Attitudes that hold the object at `alpha_bar` with u1 in [0, U_max].
///
/// For alpha_bar <= pi/2 the tangential load is non-negative and the UAV tilts
/// forward of the object (beta above alpha_bar); for alpha_bar > pi/2 the load
/// is negative and the admissible attitudes lie on the other side, where
/// sin(beta - alpha_bar) < 0.
inline BetaRange attainable_beta_range(double alpha_bar, const PhysicalParams& p, const ActuatorLimits& lim) {
  const AlphaRange range = attainable_alpha_range(p, lim);
  if (!range.contains(alpha_bar)) throw OutOfRange("alpha_bar outside the attainable inclination range");
  const double k = std::abs(p.apparent_mass() * p.g * std::cos(alpha_bar)) / lim.U_max;
  if (k > 1.0 + 1e-12) throw OutOfRange("alpha_bar outside the attainable inclination range");
  const double a = std::asin(std::min(k, 1.0));
  if (alpha_bar <= kPi / 2.0) return BetaRange{a + alpha_bar, kPi - a + alpha_bar};
  return BetaRange{alpha_bar - kPi + a, alpha_bar - a};
}

/// Steady-state input holding the configuration (alpha_bar, beta_bar).
inline ControlInput steady_state_input(double alpha_bar, double beta_bar, const PhysicalParams& p,
                                       const ActuatorLimits& lim) {
  const double weight = p.apparent_mass() * p.g;
  const double load = weight * std::cos(alpha_bar);
  // cos(pi/2) evaluates to ~6e-17, not 0.
  if (std::abs(load) <= 1e-12 * weight) return ControlInput{0.0, 0.0, 0.0};
  const double s = std::sin(beta_bar - alpha_bar);
  if (std::abs(s) <= 1e-12) throw SingularEquilibrium("sin(beta_bar - alpha_bar) = 0 with a non-zero gravity load");
  double u1 = load / s;
  // Boundary configurations reproduce U_max only up to rounding.
  constexpr double kRelTol = 1e-9;
  if (u1 < 0.0 || u1 > lim.U_max * (1.0 + kRelTol)) {
    throw InfeasibleEquilibrium("required thrust " + std::to_string(u1) + " N is outside [0, U_max]");
  }
  u1 = std::min(u1, lim.U_max);
  return ControlInput{u1, 0.0, 0.0};
}

/// Attitude at which the cascade controller settles when the object rests at
/// alpha_bar.
inline double controller_equilibrium_attitude(double alpha_bar, const ControllerConfig& cfg,
                                              const PhysicalParams& p) {
  const double f_t = p.apparent_mass() * p.g * std::cos(alpha_bar);
  return alpha_bar + theta_ref(f_t, cfg.outer);
}

}  // namespace coop
