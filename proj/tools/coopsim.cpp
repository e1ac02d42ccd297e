// coopsim: scenario driver for the cart / object / quadrotor system.
//
//   coopsim simulate   <scenario> [--csv PATH] [--plot PATH] [--no-rg]
//   coopsim equilibria <scenario>
//   coopsim analyze    <scenario> [--gamma-out-samples N]
//   coopsim rg         <scenario> [--out-dir DIR]
//   coopsim verify     [all|model|control|analysis|rg]
//
// <scenario> is a built-in name (paper-fig3, paper-fig4) or a JSON file.
// Exit status: 0 success, 1 failed verification or runtime error, 2 usage or
// configuration error.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "coop/coop.hpp"

namespace fs = std::filesystem;
using namespace coop;

namespace {

void print_state(const char* label, const State& s) {
  std::printf("%-10s x=%.6f x_dot=%.6f alpha=%.6f alpha_dot=%.6f beta=%.6f beta_dot=%.6f\n", label, s.x, s.x_dot,
              s.alpha, s.alpha_dot, s.beta, s.beta_dot);
}

void summarize(const Scenario& sc, const SimulationResult& res) {
  const Trajectory& tr = res.trajectory;
  std::printf("scenario   %s (%s dynamics, %s thrust law, %s)\n", sc.name.c_str(),
              sc.dynamics_model == DynamicsModel::Full ? "full" : "simplified",
              sc.controller.thrust_law == ThrustLaw::Basic ? "basic" : "improved",
              sc.rg ? "with reference governor" : "no governor");
  std::printf("samples    %zu (dt=%g, duration=%g)\n", tr.size(), tr.dt, sc.duration);
  print_state("initial", tr.samples.front().state);
  print_state("final", tr.back().state);
  double min_u1 = HUGE_VAL, max_u1 = -HUGE_VAL, min_a = HUGE_VAL, max_a = -HUGE_VAL;
  for (const Sample& s : tr.samples) {
    min_u1 = std::min(min_u1, s.input.u1);
    max_u1 = std::max(max_u1, s.input.u1);
    min_a = std::min(min_a, s.state.alpha);
    max_a = std::max(max_a, s.state.alpha);
  }
  std::printf("u1 range   [%.6f, %.6f]\n", min_u1, max_u1);
  std::printf("alpha      [%.6f, %.6f]\n", min_a, max_a);
  std::printf("desired    x_ref=%.6f alpha_ref=%.6f\n", sc.desired.x_ref, sc.desired.alpha_ref);
  if (sc.rg) {
    const AlphaRange w = admissible_alpha_window(sc.params, sc.limits, *sc.rg);
    std::printf("window     [%.6f, %.6f]\n", w.alpha_min, w.alpha_max);
    std::printf("violations %s\n", constraints_ok(tr, sc.params, sc.limits, *sc.rg) ? "none" : "present");
    int predictions = 0;
    for (const auto& u : res.rg_updates) predictions += u.predictions;
    std::printf("governor   %zu updates, %d predictions, final applied x_ref=%.6f alpha_ref=%.6f\n",
                res.rg_updates.size(), predictions, tr.back().applied.x_ref, tr.back().applied.alpha_ref);
  }
}

int cmd_simulate(const std::string& name, const std::string& csv, const std::string& plot, bool no_rg) {
  Scenario sc = load_scenario(name);
  if (no_rg) sc.rg.reset();
  const SimulationResult res = simulate(sc);
  summarize(sc, res);
  if (!csv.empty()) {
    export_csv(res.trajectory, csv);
    std::printf("csv        %s\n", csv.c_str());
  }
  if (!plot.empty()) {
    if (csv.empty()) throw CLI::ValidationError("--plot", "requires --csv");
    emit_plot_script({{csv, sc.name, "-"}}, plot, fs::path(plot).replace_extension(".png"));
    std::printf("plot       %s\n", plot.c_str());
  }
  return 0;
}

int cmd_equilibria(const std::string& name) {
  const Scenario sc = load_scenario(name);
  const AlphaRange r = attainable_alpha_range(sc.params, sc.limits);
  std::printf("M = %.6f kg, I0 = %.6f kg m^2, M g = %.6f N, U_max = %.6f N\n", sc.params.apparent_mass(),
              sc.params.reduced_inertia(), sc.params.apparent_mass() * sc.params.g, sc.limits.U_max);
  std::printf("attainable alpha range [%.12f, %.12f]\n", r.alpha_min, r.alpha_max);
  if (sc.rg) {
    const AlphaRange w = admissible_alpha_window(sc.params, sc.limits, *sc.rg);
    std::printf("governor window        [%.12f, %.12f] (margin %g)\n", w.alpha_min, w.alpha_max, sc.rg->margin_mu);
  }
  const double a = sc.desired.alpha_ref;
  std::printf("desired alpha_ref = %.12f\n", a);
  try {
    const BetaRange b = attainable_beta_range(a, sc.params, sc.limits);
    std::printf("attainable beta range  [%.12f, %.12f]\n", b.beta_min, b.beta_max);
    const double beta = controller_equilibrium_attitude(a, sc.controller, sc.params);
    const ControlInput u = steady_state_input(a, beta, sc.params, sc.limits);
    std::printf("controller equilibrium beta = %.12f (theta = %.12f)\n", beta, beta - a);
    std::printf("steady-state input u1 = %.12f N, u2 = %g, u3 = %g\n", u.u1, u.u2, u.u3);
  } catch (const Error& e) {
    std::printf("desired inclination is not attainable: %s\n", e.what());
    return 1;
  }
  return 0;
}

int cmd_analyze(const std::string& name, int gamma_out_samples) {
  const Scenario sc = load_scenario(name);
  const OuterGains& g = sc.controller.outer;
  const InnerGains& in = sc.controller.inner;
  std::printf("mapping gamma = %.9f (epsilon = %g)\n", g.gamma, g.epsilon);
  std::printf("disturbance constant 1/(gamma eps) = %.9f (supremum over eps 2 U_max/pi = %.9f)\n",
              disturbance_constant(g), disturbance_constant_supremum(sc.limits));

  const double omega = std::sqrt(in.k_p_beta / sc.params.I_u);
  const InnerGainEstimate est = inner_gain_numeric(in.k_p_beta, in.k_d_beta, sc.params.I_u, 200.0 / omega, 1e-3 / omega);
  std::printf("inner gain (numeric l1 norm) = %.9f%s\n", est.gain, est.tail_warning ? " [tail not negligible]" : "");
  try {
    std::printf("inner gain (critically damped closed form 2/omega) = %.9f\n",
                inner_gain_analytic(in.k_p_beta, in.k_d_beta, sc.params.I_u));
  } catch (const ParameterizationMismatch&) {
    std::printf("inner gains are not critically damped; closed form not applicable\n");
  }

  GammaOutOptions opt;
  opt.alpha_bar = sc.desired.alpha_ref;
  const double gamma_out = estimate_gamma_out(sc.controller, sc.params, sc.limits, gamma_out_samples, opt);
  std::printf("outer gain estimate (%d probes, lower estimate) = %.6f\n", gamma_out_samples, gamma_out);
  const GainEstimates ge{est.gain, gamma_out, 0.5};
  const double product = ge.gamma_in * ge.gamma_out;
  std::printf("loop gain product = %.6f (%s 1)\n", product, product < 1.0 ? "<" : ">=");
  std::printf("initial condition small-gain admissible: %s\n", small_gain_admissible(sc.initial_state, ge) ? "yes" : "no");
  return 0;
}

int cmd_rg(const std::string& name, const std::string& out_dir) {
  Scenario sc = load_scenario(name);
  if (!sc.rg) sc.rg = RgConfig{};
  sc.validate();
  Scenario open = sc;
  open.rg.reset();

  fs::create_directories(out_dir);
  const fs::path rg_csv = fs::path(out_dir) / (sc.name + "_rg.csv");
  const fs::path open_csv = fs::path(out_dir) / (sc.name + "_open_loop.csv");
  const fs::path script = fs::path(out_dir) / (sc.name + "_overlay.py");

  const SimulationResult governed = simulate(sc);
  summarize(sc, governed);
  export_csv(governed.trajectory, rg_csv);

  std::printf("-- without governor --\n");
  try {
    const SimulationResult free = simulate(open);
    summarize(open, free);
    export_csv(free.trajectory, open_csv);
  } catch (const IntegrationDiverged& e) {
    std::printf("open loop diverged at t = %g s: %s\n", e.last_valid_time(), e.what());
    return 1;
  }
  emit_plot_script({{rg_csv, "with RG", "b-"}, {open_csv, "without RG", "r--"}}, script,
                   fs::path(script).replace_extension(".png"));
  std::printf("csv        %s\ncsv        %s\nplot       %s\n", rg_csv.c_str(), open_csv.c_str(), script.c_str());
  return 0;
}

int cmd_verify(const std::string& suite_name) {
  acceptance::Suite suite = acceptance::Suite::All;
  if (suite_name == "model") suite = acceptance::Suite::Model;
  else if (suite_name == "control") suite = acceptance::Suite::Control;
  else if (suite_name == "analysis") suite = acceptance::Suite::Analysis;
  else if (suite_name == "rg") suite = acceptance::Suite::Rg;
  return acceptance::verify(suite, std::cout) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and analysis of a cart / object / quadrotor cooperative manipulation system"};
  app.require_subcommand(1);

  std::string scenario, csv, plot, out_dir = "rg_out", suite = "all";
  bool no_rg = false;
  int gamma_out_samples = 64;

  auto* sim = app.add_subcommand("simulate", "Run a scenario and optionally export CSV and a plot script");
  sim->add_option("scenario", scenario, "Built-in name or JSON file")->required();
  sim->add_option("--csv", csv, "Write the trajectory as CSV");
  sim->add_option("--plot", plot, "Write a matplotlib script plotting the CSV");
  sim->add_flag("--no-rg", no_rg, "Ignore the reference governor of the scenario");

  auto* eq = app.add_subcommand("equilibria", "Attainable equilibria and steady-state inputs");
  eq->add_option("scenario", scenario, "Built-in name or JSON file")->required();

  auto* an = app.add_subcommand("analyze", "Gain estimates and small-gain check");
  an->add_option("scenario", scenario, "Built-in name or JSON file")->required();
  an->add_option("--gamma-out-samples", gamma_out_samples, "Probe count for the outer-gain estimate")
      ->check(CLI::PositiveNumber);

  auto* rg = app.add_subcommand("rg", "Compare the closed loop with and without the reference governor");
  rg->add_option("scenario", scenario, "Built-in name or JSON file")->required();
  rg->add_option("--out-dir", out_dir, "Directory for the CSV files and overlay plot script");

  auto* ver = app.add_subcommand("verify", "Run the acceptance criteria");
  ver->add_option("suite", suite, "Criteria subset")->check(CLI::IsMember({"all", "model", "control", "analysis", "rg"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*sim) return cmd_simulate(scenario, csv, plot, no_rg);
    if (*eq) return cmd_equilibria(scenario);
    if (*an) return cmd_analyze(scenario, gamma_out_samples);
    if (*rg) return cmd_rg(scenario, out_dir);
    if (*ver) return cmd_verify(suite);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ScenarioError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const InvalidParameter& e) {
    std::cerr << "error: invariant violated: " << e.what() << '\n';
    return 2;
  } catch (const IntegrationDiverged& e) {
    std::cerr << "error: " << e.what() << " (last valid t = " << e.last_valid_time() << " s)\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
