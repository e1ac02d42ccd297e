#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "coop/refgov.hpp"
#include "coop/scenario.hpp"

using namespace coop;

namespace {

Scenario fast_fig4() {
  Scenario sc = fig4_scenario();
  sc.dt = 2e-3;
  sc.rg->horizon = 5.0;
  return sc;
}

State rest_at(const Reference& r, const ClosedLoop& loop) {
  return State{r.x_ref, 0, r.alpha_ref, 0, controller_equilibrium_attitude(r.alpha_ref, loop.cfg, loop.params), 0};
}

// First-failure scan over c = i / (n - 1).
double scan_oracle(const ClosedLoop& loop, const State& s, const Reference& from, const Reference& to,
                   const RgConfig& rg, int n = 1000) {
  double ok = 0.0;
  for (int i = 1; i < n; ++i) {
    const double c = double(i) / (n - 1);
    if (!admissible(loop, s, blend(from, to, c), rg)) break;
    ok = c;
  }
  return ok;
}

}  // namespace

TEST(Window, ShrinksAttainableRangeByMargin) {
  const PhysicalParams p;
  const ActuatorLimits lim{5, 1.3, 10};
  const AlphaRange r = attainable_alpha_range(p, lim);
  const AlphaRange w = admissible_alpha_window(p, lim, RgConfig{});
  EXPECT_DOUBLE_EQ(w.alpha_min, r.alpha_min + 0.05);
  EXPECT_DOUBLE_EQ(w.alpha_max, r.alpha_max - 0.05);
}

TEST(Constraints, SteadyEquilibriumSatisfies) {
  const Scenario sc = fast_fig4();
  const ClosedLoop loop = sc.closed_loop();
  const Reference r{0.0, 1.2};
  const Trajectory tr = simulate_fixed(loop, rest_at(r, loop), r, 2.0);
  EXPECT_TRUE(constraints_ok(tr, loop.params, loop.limits, *sc.rg));
}

TEST(Constraints, OpenLoopSecondScenarioViolates) {
  Scenario sc = fig4_scenario();
  const Trajectory tr = simulate_fixed(sc.closed_loop(), sc.initial_state, sc.desired, 10.0);
  EXPECT_FALSE(constraints_ok(tr, sc.params, sc.limits, *sc.rg));
}

TEST(Constraints, CrossingUpperBoundViolates) {
  const Scenario sc = fast_fig4();
  const ClosedLoop loop = sc.closed_loop();
  const AlphaRange w = admissible_alpha_window(loop.params, loop.limits, *sc.rg);
  Trajectory tr;
  tr.samples.push_back(loop.sample(0.0, rest_at(Reference{0, 1.5}, loop), Reference{0, 1.5}));
  State s = tr.samples[0].state;
  s.alpha = w.alpha_max + 1e-3;
  tr.samples.push_back(loop.sample(0.001, s, Reference{0, 1.5}));
  EXPECT_FALSE(constraints_ok(tr, loop.params, loop.limits, *sc.rg));
  RgConfig relaxed = *sc.rg;
  relaxed.enforce_alpha_range = false;
  relaxed.enforce_actuator_limits = false;
  EXPECT_TRUE(constraints_ok(tr, loop.params, loop.limits, relaxed));
}

TEST(RgStep, DesiredEqualsAppliedIsImmediate) {
  const Scenario sc = fast_fig4();
  const ClosedLoop loop = sc.closed_loop();
  const Reference r{0.1, 1.4};
  const RgStepResult res = rg_step(rest_at(r, loop), r, r, loop, *sc.rg);
  EXPECT_EQ(res.reference, r);
  EXPECT_EQ(res.c, 1.0);
  EXPECT_EQ(res.predictions, 0);
}

TEST(RgStep, NearbyDesiredFromRestIsAccepted) {
  const Scenario sc = fast_fig4();
  const ClosedLoop loop = sc.closed_loop();
  const Reference applied{0.0, 1.4}, desired{0.05, 1.45};
  const RgStepResult res = rg_step(rest_at(applied, loop), applied, desired, loop, *sc.rg);
  EXPECT_EQ(res.c, 1.0);
  EXPECT_EQ(res.reference, desired);
  EXPECT_GT(scan_oracle(loop, rest_at(applied, loop), applied, desired, *sc.rg), 1.0 - 1.0 / 999 - 1e-12);
}

TEST(RgStep, AggressiveRequestIsCutAndMatchesScan) {
  const Scenario sc = fast_fig4();
  const ClosedLoop loop = sc.closed_loop();
  const Reference applied{0.0, 1.2};
  const AlphaRange w = admissible_alpha_window(loop.params, loop.limits, *sc.rg);
  const Reference desired{0.3, w.alpha_max};
  State s = rest_at(applied, loop);
  s.alpha_dot = 0.4;
  const RgStepResult res = rg_step(s, applied, desired, loop, *sc.rg);
  ASSERT_LT(res.c, 1.0);
  EXPECT_GT(res.c, 0.0);
  EXPECT_GT(res.reference.alpha_ref, applied.alpha_ref);
  EXPECT_LT(res.reference.alpha_ref, desired.alpha_ref);
  EXPECT_LE(std::abs(res.c - scan_oracle(loop, s, applied, desired, *sc.rg)), 1.0 / 999);
}

TEST(RgStep, RejectsDesiredOutsideWindow) {
  const Scenario sc = fast_fig4();
  const ClosedLoop loop = sc.closed_loop();
  const Reference r{0, 1.2};
  EXPECT_THROW(rg_step(rest_at(r, loop), r, Reference{0, 2.5}, loop, *sc.rg), OutOfRange);
}

TEST(RgStep, InfeasibleWhenAppliedIsNotAdmissible) {
  const Scenario sc = fast_fig4();
  const ClosedLoop loop = sc.closed_loop();
  const Reference r{0, 2.2};
  State s = rest_at(r, loop);
  s.alpha_dot = 3.0;  // about to leave the window whatever the reference
  EXPECT_THROW(rg_step(s, r, Reference{0, 2.3}, loop, *sc.rg), InfeasibleReference);
}

TEST(RgRun, StationaryAtEquilibrium) {
  const Scenario sc = fast_fig4();
  const ClosedLoop loop = sc.closed_loop();
  const Reference r{0.1, 1.3};
  const State s0 = rest_at(r, loop);
  const RgRunResult run = rg_run(s0, r, r, loop, *sc.rg, 2.0);
  for (const Sample& smp : run.trajectory.samples) {
    EXPECT_NEAR(smp.state.alpha, r.alpha_ref, 1e-9);
    EXPECT_NEAR(smp.state.x, r.x_ref, 1e-9);
  }
}

TEST(RgRun, SecondScenarioConvergesWithoutViolations) {
  const Scenario sc = fig4_scenario();
  const RgRunResult run = rg_run(sc.initial_state, sc.starting_reference(), sc.desired, sc.closed_loop(), *sc.rg,
                                 sc.duration);
  EXPECT_TRUE(constraints_ok(run.trajectory, sc.params, sc.limits, *sc.rg));
  EXPECT_NEAR(run.trajectory.back().state.alpha, 2 * kPi / 3, 0.01);
  EXPECT_EQ(run.trajectory.size(), step_count(sc.duration, sc.dt) + 1);
}

TEST(RgRun, AppliedReferenceMovesMonotonically) {
  const Scenario sc = fig4_scenario();
  const Reference start = sc.starting_reference();
  const RgRunResult run = rg_run(sc.initial_state, start, sc.desired, sc.closed_loop(), *sc.rg, sc.duration);
  double prev_x = start.x_ref, prev_a = start.alpha_ref;
  const double sx = sc.desired.x_ref >= start.x_ref ? 1 : -1;
  const double sa = sc.desired.alpha_ref >= start.alpha_ref ? 1 : -1;
  for (const RgStepResult& u : run.updates) {
    EXPECT_GE(sx * (u.reference.x_ref - prev_x), -1e-15);
    EXPECT_GE(sa * (u.reference.alpha_ref - prev_a), -1e-15);
    EXPECT_GE(u.c, 0.0);
    EXPECT_LE(u.c, 1.0);
    prev_x = u.reference.x_ref;
    prev_a = u.reference.alpha_ref;
  }
  EXPECT_EQ(run.updates.back().reference, sc.desired);
}

TEST(RgConfig, Validation) {
  RgConfig rg;
  rg.sample_time = 0;
  EXPECT_THROW(rg.validate(), InvalidParameter);
  rg = {};
  rg.bisection_tol = 1.5;
  EXPECT_THROW(rg.validate(), InvalidParameter);
}
