#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "coop/model.hpp"

using namespace coop;

namespace {

const PhysicalParams kDefault{};

// Independent Lagrangian right-hand side: solves the 2x2 system by explicit
// inversion written from the kinetic/potential energy, not from the library.
Accel lagrange_oracle(const State& s, const ControlInput& u, const PhysicalParams& p) {
  const double a = p.m_c + p.m_b + p.m_u;
  const double b = (p.m_b * p.d_G + p.m_u * p.L) * std::sin(s.alpha);  // -dT/dx_dot d alpha_dot coefficient
  const double c = p.m_b * p.d_G * p.d_G + p.m_u * p.L * p.L + p.I_b;
  // d/dt dL/dx_dot:     a x_dd - b a_dd - (m_b d_G + m_u L) cos(alpha) a_d^2 = u3
  // d/dt dL/dalpha_dot: -b x_dd + c a_dd + (m_b d_G + m_u L) g cos(alpha) = L u1 sin(beta - alpha)
  const double k = p.m_b * p.d_G + p.m_u * p.L;
  const double r1 = u.u3 + k * std::cos(s.alpha) * s.alpha_dot * s.alpha_dot;
  const double r2 = p.L * u.u1 * std::sin(s.beta - s.alpha) - k * p.g * std::cos(s.alpha);
  const double det = a * c - b * b;
  return Accel{(c * r1 + b * r2) / det, (b * r1 + a * r2) / det, u.u2 / p.I_u};
}

}  // namespace

TEST(Saturation, SymmetricClampsAndPassesThrough) {
  EXPECT_EQ(sat(3.0, 2.0), 2.0);
  EXPECT_EQ(sat(-3.0, 2.0), -2.0);
  EXPECT_EQ(sat(1.0, 2.0), 1.0);
}

TEST(Saturation, PositiveFloorsAndClamps) {
  EXPECT_EQ(pos_sat(-1.0, 5.0), 0.0);
  EXPECT_EQ(pos_sat(7.0, 5.0), 5.0);
  EXPECT_EQ(pos_sat(3.0, 5.0), 3.0);
}

TEST(Saturation, IdempotentAndOdd) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> v(-20.0, 20.0), l(0.0, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = v(rng), lam = l(rng);
    EXPECT_EQ(sat(sat(x, lam), lam), sat(x, lam));
    EXPECT_EQ(sat(-x, lam), -sat(x, lam));
    EXPECT_EQ(pos_sat(pos_sat(x, lam), lam), pos_sat(x, lam));
  }
}

TEST(Params, DerivedConstants) {
  EXPECT_NEAR(kDefault.apparent_mass(), 0.7, 1e-15);
  EXPECT_NEAR(kDefault.reduced_inertia(), 0.78, 1e-15);
  EXPECT_NEAR(kDefault.total_mass(), 3.2, 1e-15);
}

TEST(Params, RejectsInvalid) {
  PhysicalParams p;
  p.m_u = 0.0;
  EXPECT_THROW(p.validate(), InvalidParameter);
  p = {};
  p.d_G = 2.0;
  EXPECT_THROW(p.validate(), InvalidParameter);
  EXPECT_NO_THROW(kDefault.validate());
  ActuatorLimits lim{5.0, -1.0, 10.0};
  EXPECT_THROW(lim.validate(), InvalidParameter);
}

TEST(FullDynamics, RestAtVerticalIsEquilibrium) {
  const Accel a = full_dynamics(State{0, 0, kPi / 2, 0, kPi / 2, 0}, {}, kDefault);
  EXPECT_NEAR(a.x_ddot, 0.0, 1e-15);
  EXPECT_NEAR(a.alpha_ddot, 0.0, 1e-15);
  EXPECT_EQ(a.beta_ddot, 0.0);
}

TEST(FullDynamics, HorizontalObjectFallsWithGravityOverInertia) {
  const Accel a = full_dynamics(State{0, 0, 0, 0, 0, 0}, {}, kDefault);
  EXPECT_NEAR(a.x_ddot, 0.0, 1e-15);
  EXPECT_NEAR(a.alpha_ddot, -0.7 * 9.81 / 0.78, 1e-12);
  EXPECT_NEAR(a.alpha_ddot, -8.8038, 1e-4);
}

TEST(FullDynamics, AttitudeRowIsDecoupled) {
  for (double alpha : {0.0, 0.7, 2.0}) {
    const Accel a = full_dynamics(State{0, 0, alpha, 0, 0, 0}, ControlInput{0, 0.1, 0}, kDefault);
    EXPECT_DOUBLE_EQ(a.beta_ddot, 0.1 / 0.881e-3);
  }
}

TEST(FullDynamics, MatchesLagrangeOracle) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    const State s{u(rng), u(rng), 1.5 * u(rng), u(rng), u(rng), u(rng)};
    const ControlInput in{std::abs(u(rng)) * 2, u(rng) * 0.5, u(rng) * 4};
    const Accel a = full_dynamics(s, in, kDefault);
    const Accel o = lagrange_oracle(s, in, kDefault);
    EXPECT_NEAR(a.x_ddot, o.x_ddot, 1e-12);
    EXPECT_NEAR(a.alpha_ddot, o.alpha_ddot, 1e-12);
    EXPECT_NEAR(a.beta_ddot, o.beta_ddot, 1e-12);
  }
}

TEST(FullDynamics, DeterminantBoundedBelow) {
  const double lower = kDefault.total_mass() * kDefault.reduced_inertia() -
                       std::pow(kDefault.apparent_mass(), 2) * kDefault.L;
  for (int i = 0; i <= 1000; ++i) {
    const double alpha = -kPi + 2 * kPi * i / 1000.0;
    EXPECT_GE(mass_matrix_determinant(alpha, kDefault), lower - 1e-15);
  }
}

TEST(SimplifiedDynamics, CartForceTiltsObject) {
  const Accel a = simplified_dynamics(State{0, 0, kPi / 2, 0, kPi / 2, 0}, ControlInput{0, 0, 2}, kDefault);
  EXPECT_DOUBLE_EQ(a.x_ddot, 1.0);
  EXPECT_NEAR(a.alpha_ddot, 0.7 * 1.0 / 0.78, 1e-12);
}

TEST(SimplifiedDynamics, AgreesWithFullAtZeroSinAlpha) {
  for (double alpha : {0.0, kPi}) {
    const State s{0.1, 0.2, alpha, 0.0, 0.3, 0.0};
    const ControlInput u{1.0, 0.02, 0.0};
    EXPECT_NEAR(simplified_dynamics(s, u, kDefault).alpha_ddot, full_dynamics(s, u, kDefault).alpha_ddot, 1e-12);
  }
}

TEST(Energy, ZeroAtHorizontalRest) {
  const Energy e = energy(State{0, 0, 0, 0, 0, 0}, kDefault);
  EXPECT_EQ(e.kinetic, 0.0);
  EXPECT_NEAR(e.potential, 0.0, 1e-15);
}

TEST(Energy, PotentialAtVertical) {
  const Energy e = energy(State{0, 0, kPi / 2, 0, 0, 0}, kDefault);
  EXPECT_NEAR(e.potential, (1.0 * 0.5 + 0.2 * 1.0) * 9.81, 1e-12);
}

TEST(Energy, CartOnlyMotion) {
  const Energy e = energy(State{0, 1.0, 0.8, 0, 0, 0}, kDefault);
  EXPECT_NEAR(e.kinetic, 0.5 * kDefault.total_mass(), 1e-12);
}

TEST(Rk4, EquilibriumIsFixedPoint) {
  // Vertical object, UAV aligned: zero tangential load needs no thrust.
  State s{0.3, 0, kPi / 2, 0, kPi / 2, 0};
  const auto hover = [](const State&) { return ControlInput{}; };
  for (int i = 0; i < 100; ++i) s = rk4_step(s, hover, DynamicsModel::Full, kDefault, 1e-3);
  EXPECT_NEAR(s.alpha, kPi / 2, 1e-12);
  EXPECT_NEAR(s.x, 0.3, 1e-12);
  EXPECT_NEAR(s.beta, kPi / 2, 1e-12);
}

TEST(Rk4, ExactOnConstantTorque) {
  const State s0{0, 0, kPi / 2, 0, 0.2, 0};
  const auto torque = [](const State&) { return ControlInput{0, 0.05, 0}; };
  const double dt = 0.01;
  const State s = rk4_step(s0, torque, DynamicsModel::Full, kDefault, dt);
  EXPECT_NEAR(s.beta, 0.2 + 0.5 * (0.05 / 0.881e-3) * dt * dt, 1e-14);
  EXPECT_NEAR(s.beta_dot, 0.05 / 0.881e-3 * dt, 1e-13);
}

TEST(Rk4, ConservesEnergyUnforced) {
  State s{0, 0.4, kPi / 3, 0.5, 0.2, 1.0};
  const double e0 = energy(s, kDefault).total();
  const auto zero = [](const State&) { return ControlInput{}; };
  for (int i = 0; i < 20000; ++i) s = rk4_step(s, zero, DynamicsModel::Full, kDefault, 1e-4);
  EXPECT_LT(std::abs(energy(s, kDefault).total() - e0) / std::max(std::abs(e0), 1.0), 1e-6);
}

TEST(Rk4, RejectsNonPositiveStep) {
  const auto zero = [](const State&) { return ControlInput{}; };
  EXPECT_THROW(rk4_step(State{}, zero, DynamicsModel::Full, kDefault, 0.0), InvalidParameter);
}

TEST(Rk4, ReportsDivergence) {
  const auto blowup = [](const State&) { return ControlInput{0, HUGE_VAL, 0}; };
  try {
    rk4_step(State{}, blowup, DynamicsModel::Simplified, kDefault, 1e-3, 2.5);
    FAIL() << "expected divergence";
  } catch (const IntegrationDiverged& e) {
    EXPECT_EQ(e.last_valid_time(), 2.5);
  }
}

TEST(ControlInput, ClampedRespectsLimits) {
  const ActuatorLimits lim{5, 1.3, 10};
  const ControlInput u = ControlInput::clamped(-1, 3, -20, lim);
  EXPECT_EQ(u.u1, 0.0);
  EXPECT_EQ(u.u2, 1.3);
  EXPECT_EQ(u.u3, -10.0);
}
