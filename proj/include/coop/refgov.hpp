#pragma once

// Nonlinear reference governor. At every sample it moves the applied
// reference toward the desired one by the largest convex step whose
// constant-reference prediction stays inside the constraints.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "coop/control.hpp"
#include "coop/equilibria.hpp"
#include "coop/errors.hpp"
#include "coop/model.hpp"
#include "coop/simulation.hpp"

namespace coop {

struct RgConfig {
  double sample_time = 0.2;
  double horizon = 8.0;
  double bisection_tol = 1.0 / 1024.0;
  int max_bisection_iters = 12;
  double margin_mu = 0.05;
  /// Prediction must end within this distance (infinity norm over position,
  /// inclination, attitude and their rates) of the candidate equilibrium.
  double terminal_tol = 0.05;
  bool enforce_actuator_limits = true;
  bool enforce_alpha_range = true;
  bool terminal_check = true;

  void validate() const {
    if (!(sample_time > 0.0)) throw InvalidParameter("rg.sample_time must be > 0");
    if (!(horizon > 0.0)) throw InvalidParameter("rg.horizon must be > 0");
    if (!(bisection_tol > 0.0 && bisection_tol < 1.0)) throw InvalidParameter("rg.bisection_tol must lie in (0, 1)");
    if (max_bisection_iters < 1) throw InvalidParameter("rg.max_bisection_iters must be >= 1");
    if (!(margin_mu > 0.0)) throw InvalidParameter("rg.margin_mu must be > 0");
    if (!(terminal_tol > 0.0)) throw InvalidParameter("rg.terminal_tol must be > 0");
  }
};

/// Attainable inclination range shrunk by the margin mu on both sides.
inline AlphaRange admissible_alpha_window(const PhysicalParams& p, const ActuatorLimits& lim, const RgConfig& rg) {
  const AlphaRange r = attainable_alpha_range(p, lim);
  return AlphaRange{r.alpha_min + rg.margin_mu, r.alpha_max - rg.margin_mu};
}

/// Constraint test for one sample: commanded inputs within the actuator
/// limits and inclination inside the admissible window.
inline bool sample_ok(const Sample& smp, const AlphaRange& window, const ActuatorLimits& lim, const RgConfig& rg) {
  if (rg.enforce_actuator_limits) {
    const ControlDebug& d = smp.debug;
    if (!(d.u1_pre_clamp >= 0.0 && d.u1_pre_clamp <= lim.U_max)) return false;
    if (!(std::abs(d.u2_pre_clamp) <= lim.T_max)) return false;
    if (!(std::abs(d.u3_pre_clamp) <= lim.F_max)) return false;
  }
  if (rg.enforce_alpha_range && !window.contains(smp.state.alpha)) return false;
  return true;
}

inline bool constraints_ok(const Trajectory& traj, const PhysicalParams& p, const ActuatorLimits& lim,
                           const RgConfig& rg) {
  const AlphaRange window = admissible_alpha_window(p, lim, rg);
  return std::all_of(traj.samples.begin(), traj.samples.end(),
                     [&](const Sample& smp) { return sample_ok(smp, window, lim, rg); });
}

inline Reference blend(const Reference& from, const Reference& to, double c) {
  return Reference{(1.0 - c) * from.x_ref + c * to.x_ref, (1.0 - c) * from.alpha_ref + c * to.alpha_ref};
}

/// Whether holding `candidate` from `s` keeps the predicted closed loop
/// inside the constraints over the horizon and ends near its equilibrium.
inline bool admissible(const ClosedLoop& loop, const State& s, const Reference& candidate, const RgConfig& rg) {
  const AlphaRange window = admissible_alpha_window(loop.params, loop.limits, rg);
  bool completed = false;
  const State end = run_segment(
      loop, s, candidate, 0.0, step_count(rg.horizon, loop.dt),
      [&](const Sample& smp) { return sample_ok(smp, window, loop.limits, rg); }, &completed);
  if (!completed) return false;
  if (!sample_ok(loop.sample(rg.horizon, end, candidate), window, loop.limits, rg)) return false;
  if (!rg.terminal_check) return true;
  const double beta_eq = controller_equilibrium_attitude(candidate.alpha_ref, loop.cfg, loop.params);
  const double dist = std::max({std::abs(end.x - candidate.x_ref), std::abs(end.x_dot),
                                std::abs(end.alpha - candidate.alpha_ref), std::abs(end.alpha_dot),
                                std::abs(end.beta - beta_eq), std::abs(end.beta_dot)});
  return dist <= rg.terminal_tol;
}

struct RgStepResult {
  Reference reference;
  double c = 1.0;
  int predictions = 0;  // forward simulations run
};

inline RgStepResult rg_step(const State& s, const Reference& applied, const Reference& desired,
                            const ClosedLoop& loop, const RgConfig& rg) {
  const AlphaRange window = admissible_alpha_window(loop.params, loop.limits, rg);
  if (!window.contains(desired.alpha_ref)) throw OutOfRange("desired alpha_ref outside [alpha_min + mu, alpha_max - mu]");
  if (desired == applied) return RgStepResult{applied, 1.0, 0};

  RgStepResult res;
  ++res.predictions;
  if (admissible(loop, s, desired, rg)) return RgStepResult{desired, 1.0, res.predictions};

  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < rg.max_bisection_iters && hi - lo > rg.bisection_tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    ++res.predictions;
    if (admissible(loop, s, blend(applied, desired, mid), rg)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (lo == 0.0) {
    ++res.predictions;
    if (!admissible(loop, s, applied, rg)) {
      throw InfeasibleReference("current applied reference is not admissible from the current state");
    }
  }
  res.c = lo;
  res.reference = lo == 0.0 ? applied : blend(applied, desired, lo);
  return res;
}

struct RgRunResult {
  Trajectory trajectory;
  std::vector<RgStepResult> updates;  // one per governor sample
};

/// Closed loop with the governor updating the applied reference every
/// `rg.sample_time` seconds.
inline RgRunResult rg_run(const State& s0, const Reference& initial_applied, const Reference& desired,
                          const ClosedLoop& loop, const RgConfig& rg, double total_time) {
  rg.validate();
  RgRunResult out;
  out.trajectory.dt = loop.dt;
  const std::size_t total = step_count(total_time, loop.dt);
  const std::size_t per_update = std::max<std::size_t>(1, step_count(rg.sample_time, loop.dt));
  out.trajectory.samples.reserve(total + 1);

  State s = s0;
  Reference applied = initial_applied;
  std::size_t k = 0;
  while (k < total) {
    const RgStepResult upd = rg_step(s, applied, desired, loop, rg);
    out.updates.push_back(upd);
    applied = upd.reference;
    const std::size_t n = std::min(per_update, total - k);
    s = run_segment(loop, s, applied, static_cast<double>(k) * loop.dt, n, [&](const Sample& smp) {
      out.trajectory.samples.push_back(smp);
      return true;
    });
    k += n;
  }
  out.trajectory.samples.push_back(loop.sample(static_cast<double>(total) * loop.dt, s, applied));
  return out;
}

}  // namespace coop
