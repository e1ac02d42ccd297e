#pragma once

// Acceptance criteria, shared by the acceptance test binary and the
// `verify` subcommand. Every criterion returns a measured verdict; the
// tolerances below are fixed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "coop/analysis.hpp"
#include "coop/control.hpp"
#include "coop/equilibria.hpp"
#include "coop/model.hpp"
#include "coop/refgov.hpp"
#include "coop/scenario.hpp"
#include "coop/simulation.hpp"

namespace coop::acceptance {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

enum class Suite { All, Model, Control, Analysis, Rg };

namespace detail {

inline std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

inline std::string joined(const std::ostringstream& os) {
  std::string s = os.str();
  while (!s.empty() && (s.back() == ' ' || s.back() == ';')) s.pop_back();
  return s;
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

// -----------------------------------------------------------------------------
// 1. Regulation to the vertical
// -----------------------------------------------------------------------------

inline CriterionResult fig3_convergence() {
  const auto t0 = std::chrono::steady_clock::now();
  const Scenario sc = fig3_scenario();
  const SimulationResult res = simulate(sc);
  const double elapsed = detail::seconds_since(t0);

  double alpha_err = 0.0, x_err = 0.0, min_u1 = HUGE_VAL;
  for (const Sample& s : res.trajectory.samples) {
    min_u1 = std::min({min_u1, s.input.u1, s.debug.u1_pre_clamp});
    if (s.t >= 25.0) {
      alpha_err = std::max(alpha_err, std::abs(s.state.alpha - kPi / 2.0));
      x_err = std::max(x_err, std::abs(s.state.x - 0.3));
    }
  }
  const bool pass = alpha_err < 0.01 && x_err < 0.005 && min_u1 >= 0.0 && elapsed < 5.0;
  return {1, "paper-fig3 convergence", pass,
          detail::fmt("max|alpha-pi/2| (t>=25s) = %.3e < 1e-2, max|x-0.3| = %.3e < 5e-3, min u1 = %.4f >= 0, "
                      "runtime %.2fs < 5s",
                      alpha_err, x_err, min_u1, elapsed)};
}

// -----------------------------------------------------------------------------
// 2. Instability without, and stabilization with, the governor
// -----------------------------------------------------------------------------

inline CriterionResult fig4_governor() {
  const auto t0 = std::chrono::steady_clock::now();
  const Scenario with_rg = fig4_scenario();
  Scenario open = with_rg;
  open.rg.reset();
  const RgConfig rg = *with_rg.rg;
  const AlphaRange window = admissible_alpha_window(with_rg.params, with_rg.limits, rg);

  const SimulationResult open_res = simulate(open);
  bool exceeded = false;
  double t_near_pi = -1.0;
  for (const Sample& s : open_res.trajectory.samples) {
    if (s.state.alpha > window.alpha_max) exceeded = true;
    if (t_near_pi < 0.0 && std::abs(s.state.alpha - kPi) < 0.05) t_near_pi = s.t;
  }
  const bool open_ok = exceeded && t_near_pi >= 0.0 && t_near_pi < 30.0;

  const SimulationResult rg_res = simulate(with_rg);
  double alpha_err = 0.0;
  std::size_t violations = 0;
  for (const Sample& s : rg_res.trajectory.samples) {
    if (!sample_ok(s, window, with_rg.limits, rg)) ++violations;
    if (s.t >= 40.0) alpha_err = std::max(alpha_err, std::abs(s.state.alpha - 2.0 * kPi / 3.0));
  }
  const double elapsed = detail::seconds_since(t0);
  const bool pass = open_ok && alpha_err < 0.01 && violations == 0 && elapsed < 30.0;
  return {2, "paper-fig4 with/without reference governor", pass,
          detail::fmt("open loop: exceeds alpha_max-mu = %s, |alpha-pi|<0.05 first at t = %.3fs (< 30s); "
                      "governed: max|alpha-2pi/3| (t>=40s) = %.3e < 1e-2, violations = %zu, runtime %.2fs < 30s",
                      exceeded ? "yes" : "no", t_near_pi, alpha_err, violations, elapsed)};
}

// -----------------------------------------------------------------------------
// 3. Inner-loop l1 gain
// -----------------------------------------------------------------------------

inline CriterionResult inner_gain() {
  bool pass = true;
  std::ostringstream os;
  for (const double omega : {1.0, 5.0, 20.0}) {
    const double I_u = 1.0;
    const double kp = omega * omega * I_u, kd = 2.0 * omega * I_u;
    const InnerGainEstimate est = inner_gain_numeric(kp, kd, I_u, 100.0 / omega, 1e-3 / omega);
    const double stated = 1.0 / omega;
    const double rel = std::abs(est.gain - stated) / stated;
    const double rel_closed_form = std::abs(est.gain - inner_gain_analytic(kp, kd, I_u)) / inner_gain_analytic(kp, kd, I_u);
    pass = pass && rel < 1e-6;
    os << detail::fmt("omega=%g: numeric %.9f vs 1/omega %.9f rel err %.3e (vs 2/omega: %.1e); ", omega, est.gain,
                      stated, rel, rel_closed_form);
  }
  return {3, "inner-loop gain numeric vs 1/omega", pass, detail::joined(os)};
}

// -----------------------------------------------------------------------------
// 4. Bound on the attitude-error disturbance
// -----------------------------------------------------------------------------

inline CriterionResult disturbance_bound() {
  const ActuatorLimits lim{5.0, 1.3, 10.0};
  const PhysicalParams p;
  bool pass = true;
  std::ostringstream os;
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> force(-10.0 * lim.U_max, 10.0 * lim.U_max);
  std::uniform_real_distribution<double> err(-kPi, kPi);
  std::uniform_real_distribution<double> incl(0.0, kPi);
  for (const double eps : {0.01, 1.0, 100.0}) {
    const OuterGains g = OuterGains::make(20.0, 5.0, eps, lim.U_max);
    constexpr int kGrid = 1'000'000;
    double grid_max = 0.0;
    for (int i = 0; i < kGrid; ++i) {
      const double f = -lim.U_max + 2.0 * lim.U_max * i / (kGrid - 1);
      const double th = theta_ref(f, g);
      grid_max = std::max(grid_max, std::abs(thrust_basic(f, th, g) * std::cos(th)));
    }
    const double constant = disturbance_constant(g);
    const double gap = std::abs(grid_max - constant);

    std::size_t violations = 0;
    for (int i = 0; i < 1'000'000; ++i) {
      const double f = force(rng), tt = err(rng), a = incl(rng);
      if (std::abs(delta_theta(f, tt, a, g, p)) > delta_theta_bound(tt, g, p)) ++violations;
    }
    pass = pass && gap <= 1e-6 && violations == 0;
    os << detail::fmt("eps=%g: grid max %.9f vs 1/(gamma eps) %.9f (|diff| %.1e), violations %zu/1e6; ", eps,
                      grid_max, constant, gap, violations);
  }
  return {4, "attitude-error disturbance bound", pass, detail::joined(os)};
}

// -----------------------------------------------------------------------------
// 5. Fictitious attitude error
// -----------------------------------------------------------------------------

inline CriterionResult fictitious_error_smaller() {
  const ActuatorLimits lim{5.0, 1.3, 10.0};
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> force(-lim.U_max, lim.U_max);
  std::uniform_real_distribution<double> err(-kPi, kPi);
  std::uniform_real_distribution<double> log_eps(-2.0, 2.0);
  std::size_t violations = 0, saturated = 0;
  double worst = 0.0;
  for (int i = 0; i < 100'000; ++i) {
    const OuterGains g = OuterGains::make(20.0, 5.0, std::pow(10.0, log_eps(rng)), lim.U_max);
    const double f = force(rng);
    const double th_ref = theta_ref(f, g);
    const double tt = err(rng);
    const double tf = fictitious_error(f, th_ref, th_ref + tt, lim);
    if (tf != 0.0) ++saturated;
    if (std::abs(tf) > std::abs(tt)) {
      ++violations;
      worst = std::max(worst, std::abs(tf) - std::abs(tt));
    }
  }
  return {5, "fictitious attitude error no larger than actual", violations == 0,
          detail::fmt("violations %zu/1e5 (worst excess %.2e), samples with active saturation %zu", violations, worst,
                      saturated)};
}

// -----------------------------------------------------------------------------
// 6. Energy conservation
// -----------------------------------------------------------------------------

inline CriterionResult energy_conservation() {
  const PhysicalParams p;
  const auto zero = [](const State&) { return ControlInput{}; };
  State s{0.0, 0.4, kPi / 3.0, 0.5, 0.2, 1.0};
  const double e0 = energy(s, p).total();
  const double dt = 1e-4;
  const std::size_t steps = step_count(5.0, dt);
  double drift = 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    s = rk4_step(s, zero, DynamicsModel::Full, p, dt, static_cast<double>(k) * dt);
    drift = std::max(drift, std::abs(energy(s, p).total() - e0));
  }
  const double rel = drift / std::max(std::abs(e0), 1.0);
  return {6, "energy conservation of the unforced full model", rel < 1e-6,
          detail::fmt("max relative energy drift over 5s at dt=1e-4: %.3e < 1e-6 (E0 = %.6f J)", rel, e0)};
}

// -----------------------------------------------------------------------------
// 7. Model reduction
// -----------------------------------------------------------------------------

inline CriterionResult model_reduction() {
  Scenario sc = fig3_scenario();
  sc.params.m_c *= 100.0;
  ClosedLoop full = sc.closed_loop();
  full.model = DynamicsModel::Full;
  ClosedLoop simple = full;
  simple.model = DynamicsModel::Simplified;
  const Trajectory a = simulate_fixed(full, sc.initial_state, sc.desired, 5.0);
  const Trajectory b = simulate_fixed(simple, sc.initial_state, sc.desired, 5.0);
  double diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a.samples[i].state.alpha - b.samples[i].state.alpha));
  }
  return {7, "full vs simplified dynamics with a heavy cart", diff < 1e-3,
          detail::fmt("m_c x100, paper-fig3 loop over 5s: max|alpha_full - alpha_simplified| = %.3e rad < 1e-3",
                      diff)};
}

// -----------------------------------------------------------------------------
// 8. UGV loop properties
// -----------------------------------------------------------------------------

inline CriterionResult ugv_properties(const ControllerConfig& cfg = fig3_scenario().controller) {
  const Scenario base = fig3_scenario();
  try {
    cfg.ugv.validate(base.limits);
  } catch (const InvalidParameter& e) {
    return {8, "UGV loop acceleration bound and convergence", false, std::string("gain precondition: ") + e.what()};
  }
  ClosedLoop loop = base.closed_loop();
  loop.cfg = cfg;
  const double bound = cfg.ugv.lambda_1 / loop.params.m_c;
  const double x_ref = base.desired.x_ref;

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ux(-3.0, 3.0), uv(-2.0, 2.0), ua(kPi / 3.0, 2.0 * kPi / 3.0),
      uad(-0.5, 0.5), ub(-0.5, 0.5), ubd(-1.0, 1.0);
  double max_acc = 0.0, max_late_acc = 0.0, max_final_err = 0.0;
  for (int run = 0; run < 100; ++run) {
    const double alpha = ua(rng);
    State s{ux(rng), uv(rng), alpha, uad(rng), 0.0, 0.0};
    s.beta = alpha + ub(rng);
    s.beta_dot = ubd(rng);
    const Reference ref{x_ref, base.desired.alpha_ref};
    const std::size_t steps = step_count(40.0, loop.dt);
    const State end = run_segment(loop, s, ref, 0.0, steps, [&](const Sample& smp) {
      const double acc = std::abs(dynamics(loop.model, smp.state, smp.input, loop.params).x_ddot);
      max_acc = std::max(max_acc, acc);
      if (smp.t > 30.0) max_late_acc = std::max(max_late_acc, acc);
      return true;
    });
    max_final_err = std::max(max_final_err, std::abs(end.x - x_ref));
  }
  const bool pass = max_acc <= bound + 1e-9 && max_late_acc < 1e-4 && max_final_err < 1e-3;
  return {8, "UGV loop acceleration bound and convergence", pass,
          detail::fmt("100 runs: max|x_ddot| = %.6f <= lambda_1/m_c = %.6f, max|x_ddot| (t>30s) = %.3e < 1e-4, "
                      "max|x(40s)-x_ref| = %.3e < 1e-3",
                      max_acc, bound, max_late_acc, max_final_err)};
}

// -----------------------------------------------------------------------------
// 9. Attainable equilibria and steady-state thrust
// -----------------------------------------------------------------------------

inline CriterionResult equilibria_sweep() {
  const PhysicalParams p;
  const ActuatorLimits lim{5.0, 1.3, 10.0};
  const AlphaRange r = attainable_alpha_range(p, lim);
  const double lo = std::acos(5.0 / (0.7 * 9.81));
  const double range_err = std::max(std::abs(r.alpha_min - lo), std::abs(r.alpha_max - (kPi - lo)));

  std::size_t violations = 0, points = 0;
  double max_u1 = 0.0;
  for (const double eps : {0.01, 0.1, 1.0, 10.0, 100.0}) {
    ControllerConfig cfg;
    cfg.outer = OuterGains::make(20.0, 5.0, eps, lim.U_max);
    for (int i = 0; i < 1000; ++i) {
      const double a = r.alpha_min + (r.alpha_max - r.alpha_min) * i / 999.0;
      ++points;
      try {
        const ControlInput u = steady_state_input(a, controller_equilibrium_attitude(a, cfg, p), p, lim);
        max_u1 = std::max(max_u1, u.u1);
        if (u.u1 < 0.0 || u.u1 > lim.U_max) ++violations;
      } catch (const Error&) {
        ++violations;
      }
    }
  }
  const bool pass = range_err <= 1e-12 && violations == 0;
  return {9, "attainable range and steady-state thrust sweep", pass,
          detail::fmt("alpha range [%.12f, %.12f], endpoint error %.1e <= 1e-12; sweep %zu points, violations %zu, "
                      "max u1 = %.9f <= 5",
                      r.alpha_min, r.alpha_max, range_err, points, violations, max_u1)};
}

// -----------------------------------------------------------------------------
// 10. Governor bisection vs linear scan
// -----------------------------------------------------------------------------

/// Largest c on the grid {i / (n - 1)} such that every grid value up to it is
/// admissible.
inline double linear_scan_c(const ClosedLoop& loop, const State& s, const Reference& applied,
                            const Reference& desired, const RgConfig& rg, int n = 1000) {
  double last_ok = 0.0;
  for (int i = 1; i < n; ++i) {
    const double c = static_cast<double>(i) / (n - 1);
    if (!admissible(loop, s, blend(applied, desired, c), rg)) return last_ok;
    last_ok = c;
  }
  return last_ok;
}

inline double distance(const Reference& a, const Reference& b) {
  return std::hypot(a.x_ref - b.x_ref, a.alpha_ref - b.alpha_ref);
}

inline CriterionResult governor_bisection() {
  Scenario sc = fig4_scenario();
  sc.dt = 2e-3;
  ClosedLoop loop = sc.closed_loop();
  RgConfig rg = *sc.rg;
  rg.horizon = 5.0;
  const AlphaRange window = admissible_alpha_window(loop.params, loop.limits, rg);
  const double cell = 1.0 / 999.0;

  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> ualpha(window.alpha_min, window.alpha_max), ux(-0.5, 0.5),
      unit(-1.0, 1.0);
  int instances = 0, mismatches = 0, partial = 0;
  double worst = 0.0;
  while (instances < 50) {
    const Reference applied{ux(rng), ualpha(rng)};
    const Reference desired{ux(rng), ualpha(rng)};
    const double beta_eq = controller_equilibrium_attitude(applied.alpha_ref, loop.cfg, loop.params);
    const State s{applied.x_ref + 0.05 * unit(rng), 0.1 * unit(rng), applied.alpha_ref + 0.05 * unit(rng),
                  0.1 * unit(rng), beta_eq + 0.05 * unit(rng), 0.0};
    if (!admissible(loop, s, applied, rg)) continue;
    ++instances;
    const double c_bis = rg_step(s, applied, desired, loop, rg).c;
    const double c_scan = linear_scan_c(loop, s, applied, desired, rg);
    if (c_bis < 1.0) ++partial;
    const double gap = std::abs(c_bis - c_scan);
    worst = std::max(worst, gap);
    if (gap > cell) ++mismatches;
  }

  // Monotone progress of the applied reference over governed runs.
  int regressions = 0;
  const auto check_run = [&](const RgRunResult& run, const Reference& desired, Reference applied) {
    double prev = distance(applied, desired);
    for (const RgStepResult& u : run.updates) {
      const double d = distance(u.reference, desired);
      if (d > prev) ++regressions;
      prev = d;
    }
  };
  const Scenario fig4 = fig4_scenario();
  const RgRunResult fig4_run =
      rg_run(fig4.initial_state, fig4.starting_reference(), fig4.desired, fig4.closed_loop(), *fig4.rg, fig4.duration);
  check_run(fig4_run, fig4.desired, fig4.starting_reference());
  int runs = 1;
  for (int i = 0; i < 4; ++i) {
    const Reference applied{ux(rng), ualpha(rng)};
    const Reference desired{ux(rng), ualpha(rng)};
    const State s{applied.x_ref, 0.0, applied.alpha_ref, 0.0,
                  controller_equilibrium_attitude(applied.alpha_ref, loop.cfg, loop.params), 0.0};
    check_run(rg_run(s, applied, desired, loop, rg, 10.0), desired, applied);
    ++runs;
  }

  const bool pass = mismatches == 0 && regressions == 0;
  return {10, "governor bisection vs linear scan, monotone progress", pass,
          detail::fmt("50 instances (%d with c*<1): max|c_bisect - c_scan| = %.2e <= cell %.2e, mismatches %d; "
                      "%d governed runs, distance-to-desired increases %d",
                      partial, worst, cell, mismatches, runs, regressions)};
}

// -----------------------------------------------------------------------------
// 11. Lyapunov feasibility
// -----------------------------------------------------------------------------

inline CriterionResult lyapunov_grid() {
  int points = 0, disagree = 0, disagree_exact = 0, true_pd_false = 0;
  for (int i = 0; i < 25; ++i) {
    const double xi = 0.05 + (5.0 - 0.05) * i / 24.0;
    for (int j = 0; j < 20; ++j) {
      const double nu = 0.025 + 0.95 * j / 19.0;
      for (int k = 0; k < 20; ++k) {
        const double th = 0.02 + (1.5 - 0.02) * k / 19.0;
        const LyapunovVerdict v = lyapunov_feasible({xi, nu, th, 1.0});
        ++points;
        if (v.inequality != v.q_positive_definite) ++disagree;
        if (v.inequality && !v.q_positive_definite) ++true_pd_false;
        if (v.exact_inequality != v.q_positive_definite) ++disagree_exact;
      }
    }
  }
  return {11, "Lyapunov inequality vs principal minors of Q", disagree == 0,
          detail::fmt("%d grid points: quoted inequality disagrees with Q > 0 at %d (of which %d claim feasibility "
                      "where Q is not positive definite); exactly substituted inequality disagrees at %d",
                      points, disagree, true_pd_false, disagree_exact)};
}

// -----------------------------------------------------------------------------
// Suites
// -----------------------------------------------------------------------------

inline std::vector<std::function<CriterionResult()>> criteria(Suite suite) {
  using F = std::function<CriterionResult()>;
  const std::vector<F> model{energy_conservation, model_reduction, equilibria_sweep};
  const std::vector<F> control{fig3_convergence, [] { return ugv_properties(); }};
  const std::vector<F> analysis{inner_gain, disturbance_bound, fictitious_error_smaller, lyapunov_grid};
  const std::vector<F> rg{fig4_governor, governor_bisection};
  switch (suite) {
    case Suite::Model: return model;
    case Suite::Control: return control;
    case Suite::Analysis: return analysis;
    case Suite::Rg: return rg;
    case Suite::All: break;
  }
  return {fig3_convergence, fig4_governor, inner_gain, disturbance_bound, fictitious_error_smaller,
          energy_conservation, model_reduction, [] { return ugv_properties(); }, equilibria_sweep,
          governor_bisection, lyapunov_grid};
}

inline void print(std::ostream& os, const CriterionResult& r) {
  os << (r.pass ? "PASS" : "FAIL") << " [" << r.id << "] " << r.name << ": " << r.detail << '\n';
}

/// Runs a suite, printing one line per criterion. Returns true if all pass.
inline bool verify(Suite suite, std::ostream& os) {
  bool ok = true;
  for (const auto& criterion : criteria(suite)) {
    const CriterionResult r = criterion();
    print(os, r);
    os.flush();
    ok = ok && r.pass;
  }
  return ok;
}

}  // namespace coop::acceptance
