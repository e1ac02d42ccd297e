#pragma once

// Closed-loop time stepping with a reference held constant, and the sampled
// trajectory type shared by the governor and the scenario driver.

#include <cmath>
#include <cstddef>
#include <vector>

#include "coop/control.hpp"
#include "coop/model.hpp"

namespace coop {

struct Sample {
  double t = 0.0;
  State state;
  ControlInput input;  // applied, after saturation
  ControlDebug debug;  // includes the commanded, pre-saturation values
  Reference applied;
};

struct Trajectory {
  double dt = 0.0;
  std::vector<Sample> samples;

  bool empty() const { return samples.empty(); }
  std::size_t size() const { return samples.size(); }
  const Sample& back() const { return samples.back(); }
};

/// Everything needed to evaluate the closed loop besides state and reference.
struct ClosedLoop {
  ControllerConfig cfg;
  PhysicalParams params;
  ActuatorLimits limits;
  DynamicsModel model = DynamicsModel::Simplified;
  double dt = 1e-3;

  Sample sample(double t, const State& s, const Reference& ref) const {
    const ControlOutput out = cascade_step(s, ref, cfg, params, limits);
    return Sample{t, s, out.input, out.debug, ref};
  }

  State step(const State& s, const Reference& ref, double t) const {
    return rk4_step(s, CascadeController{ref, &cfg, &params, &limits}, model, params, dt, t);
  }
};

inline std::size_t step_count(double duration, double dt) {
  return static_cast<std::size_t>(std::llround(duration / dt));
}

/// Advances `steps` integrator steps from `s` with `ref` held constant.
/// `visit(const Sample&)` sees the sample at the start of every step and
/// returns false to stop early. Returns the state reached; `completed` tells
/// whether all steps were taken.
template <typename Visitor>
State run_segment(const ClosedLoop& loop, State s, const Reference& ref, double t0, std::size_t steps,
                  Visitor&& visit, bool* completed = nullptr) {
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = t0 + static_cast<double>(k) * loop.dt;
    if (!visit(loop.sample(t, s, ref))) {
      if (completed) *completed = false;
      return s;
    }
    s = loop.step(s, ref, t);
  }
  if (completed) *completed = true;
  return s;
}

/// Simulates for `duration` with a fixed reference, recording every step and
/// the final state.
inline Trajectory simulate_fixed(const ClosedLoop& loop, const State& s0, const Reference& ref, double duration) {
  Trajectory traj;
  traj.dt = loop.dt;
  const std::size_t steps = step_count(duration, loop.dt);
  traj.samples.reserve(steps + 1);
  const State end = run_segment(loop, s0, ref, 0.0, steps, [&](const Sample& smp) {
    traj.samples.push_back(smp);
    return true;
  });
  traj.samples.push_back(loop.sample(static_cast<double>(steps) * loop.dt, end, ref));
  return traj;
}

}  // namespace coop
