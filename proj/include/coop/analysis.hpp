#pragma once

// Numerical counterparts of the stability argument: the disturbance produced
// by an attitude error, Lyapunov feasibility of the outer loop, the l1 gain of
// the inner loop, the small-gain admissibility test, an empirical outer-loop
// gain, and the fictitious attitude error of the improved thrust law.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>

#include "coop/control.hpp"
#include "coop/errors.hpp"
#include "coop/model.hpp"

namespace coop {

// =============================================================================
// Attitude-error disturbance
// =============================================================================

/// Disturbance entering the inclination dynamics when the relative attitude
/// is off by `theta_tilde` from the reference produced by the basic mapping.
inline double delta_theta(double f_t, double theta_tilde, double alpha, const OuterGains& g,
                          const PhysicalParams& p) {
  const double th_ref = theta_ref(f_t, g);
  const double u1 = thrust_basic(f_t, th_ref, g);
  return u1 * std::cos(th_ref) * std::sin(theta_tilde) -
         p.apparent_mass() * p.g * std::cos(alpha) * (1.0 - std::cos(theta_tilde));
}

/// Sharp bound on |u1 cos(theta_ref)| over all f_t: attained at f_t = 0.
inline double disturbance_constant(const OuterGains& g) { return g.thrust_at_zero_force(); }

/// Supremum of `disturbance_constant` over epsilon > 0 (its epsilon -> 0 limit).
inline double disturbance_constant_supremum(const ActuatorLimits& lim) { return 2.0 * lim.U_max / kPi; }

inline double delta_theta_bound(double theta_tilde, const OuterGains& g, const PhysicalParams& p) {
  return disturbance_constant(g) * std::abs(std::sin(theta_tilde)) +
         p.apparent_mass() * p.g * std::abs(1.0 - std::cos(theta_tilde));
}

/// Class-K_infinity majorant of `delta_theta_bound`.
inline double delta_theta_gain(double theta_tilde, const OuterGains& g, const PhysicalParams& p) {
  return disturbance_constant(g) * std::abs(theta_tilde) + p.apparent_mass() * p.g * theta_tilde * theta_tilde;
}

// =============================================================================
// Lyapunov feasibility of the outer loop
// =============================================================================

/// Outer-loop gains normalized as k_p = omega^2, k_d = 2 xi omega, with the
/// Lyapunov cross term eps = 2 xi omega cos(theta_tilde_max) nu.
struct LyapunovParams {
  double xi = 1.0;
  double nu = 0.5;
  double theta_tilde_max = 0.1;
  double omega = 1.0;

  void validate() const {
    if (!(xi > 0.0)) throw InvalidParameter("xi must be > 0");
    if (!(nu > 0.0 && nu < 1.0)) throw InvalidParameter("nu must lie in (0, 1)");
    if (!(theta_tilde_max > 0.0 && theta_tilde_max < kPi / 2.0)) {
      throw InvalidParameter("theta_tilde_max must lie in (0, pi/2)");
    }
    if (!(omega > 0.0)) throw InvalidParameter("omega must be > 0");
  }
};

struct LyapunovVerdict {
  /// 4 xi^2 nu^2 > (1 + 8 nu xi^2 + 16 nu^2 xi^4) (1 - c)^2 / (4 c^2), c = cos(theta_tilde_max),
  /// the closed form usually quoted for this Lyapunov function.
  bool inequality = false;
  double lhs = 0.0;
  double rhs = 0.0;
  /// det Q > 0 with the substitution carried out exactly (omega^4 divided out):
  /// 4 xi^2 c^3 nu (2 - nu) > (1 + 4 xi^2 c nu)^2 (1 - c)^2 / 4.
  bool exact_inequality = false;
  double exact_lhs = 0.0;
  double exact_rhs = 0.0;
  /// Q > 0 from its leading principal minors.
  bool q_positive_definite = false;
  double q11 = 0.0, q12 = 0.0, q22 = 0.0;
};

/// Positive definiteness of the matrix Q bounding the Lyapunov derivative of
/// the outer loop. The quoted closed form and Q > 0 do not coincide
/// everywhere; `exact_inequality` is the one equivalent to Q > 0.
inline LyapunovVerdict lyapunov_feasible(const LyapunovParams& lp) {
  lp.validate();
  const double c = std::cos(lp.theta_tilde_max);
  const double xi2 = lp.xi * lp.xi;
  const double nu = lp.nu;
  const double one_minus_c2 = (1.0 - c) * (1.0 - c);
  LyapunovVerdict v;

  v.lhs = 4.0 * xi2 * nu * nu;
  v.rhs = 0.25 * (1.0 + 8.0 * nu * xi2 + 16.0 * nu * nu * xi2 * xi2) * one_minus_c2 / (c * c);
  v.inequality = v.lhs > v.rhs;

  v.exact_lhs = 4.0 * xi2 * c * c * c * nu * (2.0 - nu);
  const double b = 1.0 + 4.0 * xi2 * c * nu;
  v.exact_rhs = 0.25 * b * b * one_minus_c2;
  v.exact_inequality = v.exact_lhs > v.exact_rhs;

  const double kp = lp.omega * lp.omega;
  const double kd = 2.0 * lp.xi * lp.omega;
  const double eps = 2.0 * lp.xi * lp.omega * c * nu;
  v.q11 = eps * kp * c;
  v.q12 = 0.5 * (kp + eps * kd) * (1.0 - c);
  v.q22 = 2.0 * kd * c - eps;
  v.q_positive_definite = v.q11 > 0.0 && v.q11 * v.q22 - v.q12 * v.q12 > 0.0;
  return v;
}

// =============================================================================
// Inner-loop gain
// =============================================================================

/// l1 gain from the attitude-reference rate to the attitude error for
/// critically damped PD gains (k_p / I_u = omega^2, k_d / I_u = 2 omega).
/// The impulse response is -(1 + omega t) exp(-omega t), whose l1 norm is
/// 2 / omega.
inline double inner_gain_analytic(double k_p_beta, double k_d_beta, double I_u) {
  if (!(k_p_beta > 0.0 && k_d_beta > 0.0 && I_u > 0.0)) throw InvalidParameter("gains and inertia must be > 0");
  const double target = 4.0 * k_p_beta * I_u;
  if (std::abs(k_d_beta * k_d_beta - target) > 1e-9 * target) {
    throw ParameterizationMismatch("inner gains are not critically damped (k_d^2 != 4 k_p I_u)");
  }
  return 2.0 / std::sqrt(k_p_beta / I_u);
}

struct InnerGainEstimate {
  double gain = 0.0;
  double tail_estimate = 0.0;
  bool tail_warning = false;  // tail estimate above 1e-6 of the accumulated integral
};

/// Integrates |w(t)| over [0, horizon], w being the impulse response of the
/// inner loop from the attitude-reference rate to the attitude error. Works
/// for any positive PD gains.
inline InnerGainEstimate inner_gain_numeric(double k_p_beta, double k_d_beta, double I_u, double horizon, double dt) {
  if (!(k_p_beta > 0.0 && k_d_beta > 0.0 && I_u > 0.0)) throw InvalidParameter("gains and inertia must be > 0");
  if (!(horizon > 0.0 && dt > 0.0)) throw InvalidParameter("horizon and dt must be > 0");
  const double a0 = k_p_beta / I_u;
  const double a1 = k_d_beta / I_u;

  struct X {
    double e, r;  // attitude error, attitude rate
  };
  const auto f = [&](const X& x) { return X{x.r, -a0 * x.e - a1 * x.r}; };
  const auto rk4 = [&](const X& x, double h) {
    const X k1 = f(x);
    const X k2 = f({x.e + 0.5 * h * k1.e, x.r + 0.5 * h * k1.r});
    const X k3 = f({x.e + 0.5 * h * k2.e, x.r + 0.5 * h * k2.r});
    const X k4 = f({x.e + h * k3.e, x.r + h * k3.r});
    return X{x.e + h / 6.0 * (k1.e + 2 * k2.e + 2 * k3.e + k4.e), x.r + h / 6.0 * (k1.r + 2 * k2.r + 2 * k3.r + k4.r)};
  };

  // A unit impulse on the reference rate drops the error by one.
  X x{-1.0, 0.0};
  const auto steps = static_cast<std::size_t>(std::ceil(horizon / dt));
  const double h = horizon / static_cast<double>(steps);
  double integral = 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    const X mid = rk4(x, 0.5 * h);
    const X next = rk4(x, h);
    const double y0 = x.e, ym = mid.e, y1 = next.e;
    if ((y0 >= 0.0 && ym >= 0.0 && y1 >= 0.0) || (y0 <= 0.0 && ym <= 0.0 && y1 <= 0.0)) {
      integral += std::abs(h / 6.0 * (y0 + 4.0 * ym + y1));
    } else {
      // Sign change inside the step: trapezoids split at the interpolated zeros.
      const auto piece = [](double ya, double yb, double w) {
        if ((ya >= 0.0) == (yb >= 0.0)) return 0.5 * w * (std::abs(ya) + std::abs(yb));
        const double z = ya / (ya - yb);
        return 0.5 * w * (z * std::abs(ya) + (1.0 - z) * std::abs(yb));
      };
      integral += piece(y0, ym, 0.5 * h) + piece(ym, y1, 0.5 * h);
    }
    x = next;
  }

  // Slowest decay rate of the closed loop.
  const double disc = a1 * a1 - 4.0 * a0;
  const double sigma = disc >= 0.0 ? 0.5 * (a1 - std::sqrt(disc)) : 0.5 * a1;
  InnerGainEstimate est;
  est.gain = integral;
  est.tail_estimate = std::abs(x.e) / sigma + std::abs(x.r) / (sigma * sigma);
  est.tail_warning = est.tail_estimate > 1e-6 * integral;
  return est;
}

// =============================================================================
// Small-gain admissibility
// =============================================================================

struct GainEstimates {
  double gamma_in = 0.0;
  double gamma_out = 0.0;
  double theta_tilde_max = 0.5;

  void validate() const {
    if (!(gamma_in >= 0.0)) throw InvalidParameter("gamma_in must be >= 0");
    if (!(gamma_out >= 0.0)) throw InvalidParameter("gamma_out must be >= 0");
    if (!(theta_tilde_max > 0.0 && theta_tilde_max < kPi / 2.0)) {
      throw InvalidParameter("theta_tilde_max must lie in (0, pi/2)");
    }
  }
};

/// Initial-condition test under which the loop-gain product below one yields
/// asymptotic stability of the cascade.
inline bool small_gain_admissible(const State& s0, const GainEstimates& ge) {
  ge.validate();
  const double loop_gain = ge.gamma_in * ge.gamma_out;
  if (!(loop_gain < 1.0)) return false;
  const double th = s0.theta(), thd = s0.theta_dot();
  const double lhs = std::sqrt(th * th + thd * thd) +
                     ge.gamma_in * std::sqrt(s0.alpha * s0.alpha + s0.alpha_dot * s0.alpha_dot);
  return lhs < (1.0 - loop_gain) * std::abs(ge.theta_tilde_max);
}

// =============================================================================
// Empirical outer-loop gain
// =============================================================================

struct GammaOutOptions {
  double alpha_bar = kPi / 2.0;
  double amplitude_max = 0.3;  // sup |attitude error| of the probe signals [rad]
  double omega_min = 0.2;      // probe frequency range [rad/s]
  double omega_max = 20.0;
  double horizon = 20.0;
  double dt = 1e-3;
  std::uint64_t seed = 0x5eedULL;
};

/// Heuristic estimate of the asymptotic gain from the attitude error to the
/// rate of the attitude reference. Each probe drives the outer loop (ideal
/// thrust mapping, no cart motion) with a sinusoidal attitude error
/// A sin(w t + phi) and records sup |d(beta_ref)/dt| over the second half of
/// the horizon divided by A. Returns the maximum over probes. This is a lower
/// estimate of the true gain, not a certified bound. Probes are drawn from a
/// fixed-seed sequence, so a larger `sample_count` extends the probe set.
inline double estimate_gamma_out(const ControllerConfig& cfg, const PhysicalParams& p, const ActuatorLimits& lim,
                                 int sample_count, const GammaOutOptions& opt = {}) {
  (void)lim;
  if (sample_count < 1) throw InvalidParameter("sample_count must be >= 1");
  if (!(opt.amplitude_max > 0.0)) return 0.0;

  const OuterGains& g = cfg.outer;
  const double M = p.apparent_mass();
  const double I0 = p.reduced_inertia();
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const auto steps = static_cast<std::size_t>(std::llround(opt.horizon / opt.dt));
  double best = 0.0;
  for (int i = 0; i < sample_count; ++i) {
    const double amp = opt.amplitude_max * (0.1 + 0.9 * unit(rng));
    const double w = opt.omega_min * std::pow(opt.omega_max / opt.omega_min, unit(rng));
    const double phase = 2.0 * kPi * unit(rng);
    const auto error = [&](double t) { return amp * std::sin(w * t + phase); };

    // Inclination dynamics with the attitude error superimposed on theta_ref.
    const auto accel = [&](double t, double a, double ad) {
      const double f = -g.k_p_alpha * (a - opt.alpha_bar) - g.k_d_alpha * ad + M * p.g * std::cos(a);
      const double th = theta_ref(f, g);
      const double u1 = thrust_basic(f, th, g);
      return (u1 * std::sin(th + error(t)) - M * p.g * std::cos(a)) / I0;
    };
    const auto reference_rate = [&](double t, double a, double ad) {
      const double f = -g.k_p_alpha * (a - opt.alpha_bar) - g.k_d_alpha * ad + M * p.g * std::cos(a);
      const double add = accel(t, a, ad);
      const double f_dot = -g.k_p_alpha * ad - g.k_d_alpha * add - M * p.g * std::sin(a) * ad;
      const bool saturated = std::abs(g.gamma * std::atan(g.epsilon * f)) >= kPi / 2.0;
      const double dth_df = saturated ? 0.0 : g.gamma * g.epsilon / (1.0 + g.epsilon * f * g.epsilon * f);
      return ad + dth_df * f_dot;
    };

    double a = opt.alpha_bar, ad = 0.0, peak = 0.0;
    const double h = opt.dt;
    for (std::size_t k = 0; k <= steps; ++k) {
      const double t = static_cast<double>(k) * h;
      if (t >= 0.5 * opt.horizon) peak = std::max(peak, std::abs(reference_rate(t, a, ad)));
      if (k == steps) break;
      const double k1a = ad, k1v = accel(t, a, ad);
      const double k2a = ad + 0.5 * h * k1v, k2v = accel(t + 0.5 * h, a + 0.5 * h * k1a, k2a);
      const double k3a = ad + 0.5 * h * k2v, k3v = accel(t + 0.5 * h, a + 0.5 * h * k2a, k3a);
      const double k4a = ad + h * k3v, k4v = accel(t + h, a + h * k3a, k4a);
      a += h / 6.0 * (k1a + 2 * k2a + 2 * k3a + k4a);
      ad += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
    }
    best = std::max(best, peak / amp);
  }
  return best;
}

// =============================================================================
// Fictitious attitude error of the improved thrust law
// =============================================================================

/// Attitude error that, fed to the basic thrust law, delivers the same
/// tangential force as the improved law at the measured attitude
/// `theta_actual`. Among all solutions the one of smallest magnitude is
/// returned.
inline double fictitious_error(double f_t, double theta_ref_value, double theta_actual, const ActuatorLimits& lim) {
  if (std::abs(f_t) <= kForceTolerance) return 0.0;
  const double s = std::sin(theta_actual);
  const double quotient = s == 0.0 ? std::copysign(HUGE_VAL, f_t) : f_t / s;
  // No saturation: the improved law delivers f_t itself.
  if (quotient >= 0.0 && quotient <= lim.U_max) return 0.0;
  const double delivered = pos_sat(quotient, lim.U_max) * s;

  double target = delivered * std::sin(theta_ref_value) / f_t;
  if (std::abs(target) > 1.0 + 1e-12) throw NoSolution("no attitude error reproduces the delivered force");
  target = std::clamp(target, -1.0, 1.0);

  // sin(theta_ref + e) = target: e = asin(target) - theta_ref or pi - asin(target) - theta_ref, modulo 2 pi.
  const double base = std::asin(target);
  const auto wrap = [](double e) { return std::remainder(e, 2.0 * kPi); };
  const double e1 = wrap(base - theta_ref_value);
  const double e2 = wrap(kPi - base - theta_ref_value);
  return std::abs(e1) <= std::abs(e2) ? e1 : e2;
}

}  // namespace coop
