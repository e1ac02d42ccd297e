#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "coop/acceptance.hpp"
#include "coop/control.hpp"
#include "coop/simulation.hpp"

using namespace coop;

namespace {

const PhysicalParams kP{};
const ActuatorLimits kLim{5.0, 1.3, 10.0};
const OuterGains kOuter = OuterGains::make(20.0, 5.0, 1.0, 5.0);

}  // namespace

TEST(UgvControl, ZeroAtTarget) { EXPECT_EQ(ugv_control(State{0.3, 0, 0, 0, 0, 0}, 0.3, UgvGains{}), 0.0); }

TEST(UgvControl, InnerSaturationLimitsPositionTerm) {
  EXPECT_DOUBLE_EQ(ugv_control(State{100.3, 0, 0, 0, 0, 0}, 0.3, UgvGains{3, 3, 10, 2}), -2.0);
}

TEST(UgvControl, OuterSaturationLimitsTotal) {
  EXPECT_DOUBLE_EQ(ugv_control(State{0, 1e6, 0, 0, 0, 0}, 0.0, UgvGains{3, 3, 10, 2}), -10.0);
}

TEST(UgvGains, RejectsLambda2AboveStabilityBound) {
  UgvGains g{3, 3, 10, 15};
  try {
    g.validate(kLim);
    FAIL();
  } catch (const InvalidParameter& e) {
    EXPECT_NE(std::string(e.what()).find("lambda_2"), std::string::npos);
  }
  g = UgvGains{3, 3, 12, 2};
  EXPECT_THROW(g.validate(kLim), InvalidParameter);
  EXPECT_NO_THROW(UgvGains{}.validate(kLim));
}

TEST(TangentialForce, ZeroAtVerticalEquilibrium) {
  EXPECT_NEAR(tangential_force(State{0, 0, kPi / 2, 0, 0, 0}, kPi / 2, kOuter, kP), 0.0, 1e-14);
}

TEST(TangentialForce, PureGravityCompensationAtHorizontal) {
  EXPECT_DOUBLE_EQ(tangential_force(State{0, 0, 0, 0, 0, 0}, 0.0, kOuter, kP), 0.7 * 9.81);
}

TEST(TangentialForce, PdPlusGravity) {
  EXPECT_NEAR(tangential_force(State{0, 0, kPi / 3, 0, 0, 0}, kPi / 2, kOuter, kP),
              -20.0 * (kPi / 3 - kPi / 2) + 0.7 * 9.81 * std::cos(kPi / 3), 1e-12);
}

TEST(MappingGamma, Value) {
  EXPECT_NEAR(mapping_gamma(1.0, 5.0), kPi / (2.0 * std::atan(5.0)), 1e-15);
  EXPECT_NEAR(kOuter.thrust_at_zero_force(), 0.874334084, 1e-9);
}

TEST(OuterGains, RejectsInconsistentGamma) {
  OuterGains g = kOuter;
  g.gamma *= 1.01;
  EXPECT_THROW(g.validate(kLim), InvalidParameter);
  EXPECT_NO_THROW(kOuter.validate(kLim));
}

TEST(ThetaRef, EndpointsAndZero) {
  EXPECT_EQ(theta_ref(0.0, kOuter), 0.0);
  EXPECT_NEAR(theta_ref(5.0, kOuter), kPi / 2, 1e-15);
  EXPECT_NEAR(theta_ref(-5.0, kOuter), -kPi / 2, 1e-15);
  EXPECT_NEAR(theta_ref(50.0, kOuter), kPi / 2, 1e-15);
}

TEST(ThetaRef, OddAndMonotone) {
  double prev = -HUGE_VAL;
  for (int i = 0; i <= 2000; ++i) {
    const double f = -10.0 + 20.0 * i / 2000.0;
    const double th = theta_ref(f, kOuter);
    EXPECT_GE(th, prev);
    EXPECT_DOUBLE_EQ(theta_ref(-f, kOuter), -th);
    prev = th;
  }
}

TEST(ThrustBasic, FullForceAtSaturatedAttitude) { EXPECT_NEAR(thrust_basic(5.0, kPi / 2, kOuter), 5.0, 1e-12); }

TEST(ThrustBasic, ContinuousLimitAtZeroForce) {
  const double limit = kOuter.thrust_at_zero_force();
  EXPECT_DOUBLE_EQ(thrust_basic(0.0, 0.0, kOuter), limit);
  // Oracle: numeric limit from both sides.
  for (double f : {1e-6, -1e-6, 1e-7, -1e-7}) {
    EXPECT_NEAR(thrust_basic(f, theta_ref(f, kOuter), kOuter), limit, 1e-8);
  }
}

TEST(ThrustBasic, AlwaysPositive) {
  for (int i = 0; i <= 4000; ++i) {
    const double f = -20.0 + 40.0 * i / 4000.0;
    EXPECT_GT(thrust_basic(f, theta_ref(f, kOuter), kOuter), 0.0) << f;
  }
  EXPECT_GT(thrust_basic(-3.0, theta_ref(-3.0, kOuter), kOuter), 0.0);
}

TEST(ThrustImproved, Cases) {
  EXPECT_DOUBLE_EQ(thrust_improved(2.0, kPi / 2, kOuter, kLim), 2.0);
  EXPECT_EQ(thrust_improved(2.0, 0.01, kOuter, kLim), 5.0);
  EXPECT_EQ(thrust_improved(2.0, -0.1, kOuter, kLim), 0.0);
  EXPECT_EQ(thrust_improved(2.0, 0.0, kOuter, kLim), 5.0);
  EXPECT_EQ(thrust_improved(-2.0, 0.0, kOuter, kLim), 0.0);
  EXPECT_DOUBLE_EQ(thrust_improved(0.0, 0.0, kOuter, kLim), kOuter.thrust_at_zero_force());
}

TEST(ThrustLaws, AgreeOnReferenceAttitudeWithoutSaturation) {
  for (double f : {-4.0, -1.0, 0.3, 2.0, 4.9}) {
    const double th = theta_ref(f, kOuter);
    EXPECT_NEAR(thrust_improved(f, th, kOuter, kLim), thrust_basic(f, th, kOuter), 1e-12);
  }
}

TEST(InnerControl, Values) {
  EXPECT_EQ(inner_control(State{0, 0, 0, 0, 1.0, 0}, 1.0, InnerGains{}), 0.0);
  EXPECT_NEAR(inner_control(State{0, 0, 0, 0, 1.1, 0}, 1.0, InnerGains{0.5, 0.01}), -0.05, 1e-15);
  EXPECT_DOUBLE_EQ(inner_control(State{0, 0, 0, 0, 1.0, 1.0}, 1.0, InnerGains{0.5, 0.01}), -0.01);
}

TEST(Cascade, VerticalEquilibriumIsFixedPoint) {
  ControllerConfig cfg;
  const Reference ref{0.3, kPi / 2};
  State s{0.3, 0, kPi / 2, 0, kPi / 2, 0};
  const ControlOutput out = cascade_step(s, ref, cfg, kP, kLim);
  EXPECT_NEAR(out.input.u1 * std::sin(s.theta()), 0.0, 1e-12);
  EXPECT_NEAR(out.input.u2, 0.0, 1e-12);
  EXPECT_EQ(out.input.u3, 0.0);
  const CascadeController ctl{ref, &cfg, &kP, &kLim};
  for (int i = 0; i < 1000; ++i) s = rk4_step(s, ctl, DynamicsModel::Full, kP, 1e-3);
  EXPECT_NEAR(s.alpha, kPi / 2, 1e-10);
  EXPECT_NEAR(s.x, 0.3, 1e-10);
}

TEST(Cascade, InitialStateOfFirstScenarioGivesFiniteNonNegativeThrust) {
  ControllerConfig cfg;
  const ControlOutput out = cascade_step(State{0, 0, kPi / 3, 0, kPi / 4, 0}, Reference{0.3, kPi / 2}, cfg, kP, kLim);
  EXPECT_TRUE(std::isfinite(out.input.u1) && std::isfinite(out.input.u2) && std::isfinite(out.input.u3));
  EXPECT_GE(out.input.u1, 0.0);
  EXPECT_LE(out.input.u1, kLim.U_max);
  EXPECT_NEAR(out.debug.beta_ref, out.debug.theta_ref + kPi / 3, 1e-15);
}

TEST(Cascade, AppliedInputsWithinLimits) {
  ControllerConfig cfg;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3, 3);
  for (const ThrustLaw law : {ThrustLaw::Basic, ThrustLaw::Improved}) {
    cfg.thrust_law = law;
    for (int i = 0; i < 500; ++i) {
      const ControlInput in =
          cascade_step(State{u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)}, Reference{0, 1.2}, cfg, kP, kLim).input;
      EXPECT_GE(in.u1, 0.0);
      EXPECT_LE(in.u1, kLim.U_max);
      EXPECT_LE(std::abs(in.u2), kLim.T_max);
      EXPECT_LE(std::abs(in.u3), kLim.F_max);
    }
  }
}

TEST(UgvLoopCriterion, CorruptedLambda2Fails) {
  ControllerConfig cfg;
  cfg.ugv.lambda_2 = 20.0;
  const acceptance::CriterionResult r = acceptance::ugv_properties(cfg);
  EXPECT_FALSE(r.pass);
  EXPECT_NE(r.detail.find("lambda_2"), std::string::npos);
}
