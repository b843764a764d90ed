// Command-line experiment runner: closed-loop simulation, tuning campaigns,
// multi-run optimizer comparisons, plant-parameter robustness sweeps, and the
// actuator-gating study, all exporting deterministic CSV files.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mgtune/experiments.hpp"

namespace {

using namespace mgtune;

/// Everything a run can depend on, in one place, so `--set key=value`
/// overrides and config files have a single target to mutate.
struct RunSettings {
  Scenario scenario;
  CostSpec cost;
  InfillConfig infill;
  GAConfig ga;
  SwitchingPolicy policy{/*enabled=*/false, /*deadband=*/0.05,
                         /*min_on_time=*/10.0};
  ControllerParams controller_params;  // resolved from preset, then overridden
};

/// Applies one `key=value` override. Returns the canonical key list on error
/// so the message can teach the valid spelling.
void apply_set(RunSettings& s, const std::string& key, double value) {
  const std::map<std::string, double*> doubles = {
      {"k_wtg", &s.scenario.plant.k_wtg},
      {"k_fess", &s.scenario.plant.k_fess},
      {"k_bess", &s.scenario.plant.k_bess},
      {"D", &s.scenario.plant.damping},
      {"2H", &s.scenario.plant.inertia},
      {"R", &s.scenario.plant.droop},
      {"t_fess", &s.scenario.plant.t_fess},
      {"t_bess", &s.scenario.plant.t_bess},
      {"T_FC", &s.scenario.plant.t_fc},
      {"t_wtg", &s.scenario.plant.t_wtg},
      {"T_g", &s.scenario.plant.t_g},
      {"T_t", &s.scenario.plant.t_t},
      {"T_IC", &s.scenario.plant.t_ic},
      {"T_IN", &s.scenario.plant.t_in},
      {"weight", &s.cost.weight},
      {"normalizer", &s.cost.normalizer},
      {"t_min", &s.cost.t_min},
      {"t_max", &s.cost.t_max},
      {"t_end", &s.scenario.t_end},
      {"dt", &s.scenario.dt},
      {"deadband", &s.policy.deadband},
      {"min_on_time", &s.policy.min_on_time},
      {"kp", &s.controller_params.kp},
      {"ki", &s.controller_params.ki},
      {"kd", &s.controller_params.kd},
      {"lambda", &s.controller_params.lambda},
      {"mu", &s.controller_params.mu},
      {"perturbation_scale", &s.infill.perturbation_scale},
      {"duplicate_tol", &s.infill.duplicate_tol},
      {"crossover_fraction", &s.ga.crossover_fraction},
      {"mutation_fraction", &s.ga.mutation_fraction},
      {"mutation_scale", &s.ga.mutation_scale},
      {"blend_alpha", &s.ga.blend_alpha},
  };
  const std::map<std::string, int*> ints = {
      {"n_perturbed", &s.infill.n_perturbed},
      {"n_uniform", &s.infill.n_uniform},
      {"initial_design", &s.infill.initial_design},
      {"mle_evals", &s.infill.mle_evals},
      {"mle_refit_evals", &s.infill.mle_refit_evals},
      {"population", &s.ga.population},
      {"elite_count", &s.ga.elite_count},
  };

  if (key == "noise") {
    const bool on = value != 0.0;
    s.scenario.profiles.wind.noise_enabled = on;
    s.scenario.profiles.solar.noise_enabled = on;
    s.scenario.profiles.load.noise_enabled = on;
    return;
  }
  if (auto it = doubles.find(key); it != doubles.end()) {
    *it->second = value;
    return;
  }
  if (auto it = ints.find(key); it != ints.end()) {
    *it->second = static_cast<int>(std::lround(value));
    return;
  }
  std::string known = "noise";
  for (const auto& [k, _] : doubles) known += ", " + k;
  for (const auto& [k, _] : ints) known += ", " + k;
  throw CLI::ValidationError("--set", "unknown key '" + key +
                                          "'; known keys: " + known);
}

void apply_sets(RunSettings& s, const std::vector<std::string>& sets) {
  for (const std::string& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw CLI::ValidationError("--set", "expected key=value, got '" + kv +
                                              "'");
    double value = 0.0;
    try {
      value = std::stod(kv.substr(eq + 1));
    } catch (const std::exception&) {
      throw CLI::ValidationError("--set", "non-numeric value in '" + kv + "'");
    }
    apply_set(s, kv.substr(0, eq), value);
  }
}

ControllerKind parse_controller(const std::string& name) {
  if (name == "pid") return ControllerKind::pid;
  if (name == "fopid") return ControllerKind::fopid;
  throw CLI::ValidationError("--controller", "must be pid or fopid");
}

std::filesystem::path out_file(const std::string& dir, const char* name) {
  std::filesystem::create_directories(dir);
  return std::filesystem::path(dir) / name;
}

void print_params(const char* label, const ControllerParams& p) {
  std::printf("%s kp=%.6g ki=%.6g kd=%.6g lambda=%.6g mu=%.6g\n", label, p.kp,
              p.ki, p.kd, p.lambda, p.mu);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Microgrid frequency-control tuning bench: fractional-order and "
      "classical PID controllers tuned by kriging-surrogate optimization or "
      "a genetic-algorithm baseline on a stochastic islanded-microgrid "
      "simulation."};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "",
                 "Config file (key=value lines; command-line flags override "
                 "file values)");

  std::string controller = "fopid";
  std::string kernel = "spline";
  std::string optimizer = "kriging";
  std::string preset_name;
  std::string out_dir = "out";
  std::vector<std::string> sets;
  int runs = 5;
  int budget = 150;
  int replicates = 10;
  std::uint64_t seed = 1;

  CLI::Option* controller_opt = app.add_option(
      "--controller", controller,
      "Controller family: pid | fopid (default fopid; compare covers both "
      "families unless this is given)");
  app.add_option("--kernel", kernel,
                 "Correlation kernel: exponential | gaussian | linear | "
                 "spherical | spline | all (default spline)");
  app.add_option("--optimizer", optimizer,
                 "Tuner: kriging | ga | all (default kriging)");
  app.add_option("--preset", preset_name,
                 "Named tuned parameter set, e.g. spline-fopid (default: "
                 "best preset of the chosen controller)");
  app.add_option("--runs", runs, "Independent runs per method (default 5)");
  app.add_option("--seed", seed, "Base seed (default 1)");
  app.add_option("--budget", budget,
                 "Expensive evaluations per campaign (default 150)");
  app.add_option("--replicates", replicates,
                 "Simulation replicates per expensive evaluation (default 10)");
  app.add_option("--out", out_dir, "Output directory (default ./out)");
  app.add_option("--set", sets,
                 "Override any model constant as key=value (repeatable); see "
                 "README for the key list")
      ->take_all();

  CLI::App* cmd_simulate = app.add_subcommand(
      "simulate", "Run one closed-loop simulation and write trace.csv");
  CLI::App* cmd_tune = app.add_subcommand(
      "tune", "Run one tuning campaign and write history.csv");
  CLI::App* cmd_compare = app.add_subcommand(
      "compare",
      "Run multi-run campaigns across methods and write compare.csv + "
      "convergence.csv");
  CLI::App* cmd_robust = app.add_subcommand(
      "robustness",
      "Evaluate preset controllers under plant perturbations and write "
      "robustness.csv");
  CLI::App* cmd_switch = app.add_subcommand(
      "switching",
      "Simulate with the actuator gate enabled and write trace.csv + "
      "gates.csv");

  CLI11_PARSE(app, argc, argv);

  try {
    RunSettings settings;
    const ControllerKind kind = parse_controller(controller);
    const Preset& fallback = kind == ControllerKind::pid ? best_pid_preset()
                                                         : best_fopid_preset();
    settings.controller_params =
        preset_name.empty() ? fallback.params : preset(preset_name).params;
    apply_sets(settings, sets);

    if (cmd_simulate->parsed()) {
      const SimulationTrace tr = simulate(
          settings.scenario.plant, build_controller(settings.controller_params),
          settings.scenario.profiles, settings.policy, seed,
          settings.scenario.t_end, settings.scenario.dt,
          settings.scenario.topology);
      const EvaluationRecord rec =
          expected_cost(settings.controller_params, settings.scenario, seed,
                        replicates, settings.cost);
      write_trace_csv(out_file(out_dir, "trace.csv").string(), tr);
      print_params("controller:", settings.controller_params);
      std::printf("diverged: %s\n", tr.diverged ? "yes" : "no");
      std::printf("expected J over %d replicates: %.6g\n", replicates,
                  rec.j_mean);
      std::printf("wrote %s\n", out_file(out_dir, "trace.csv").string().c_str());
      return 0;
    }

    if (cmd_tune->parsed()) {
      TuneConfig cfg;
      cfg.controller = kind;
      cfg.method = optimizer == "ga" ? "ga" : kernel;
      if (cfg.method == "all")
        throw CLI::ValidationError(
            "--kernel", "tune runs one method; use compare for sweeps");
      cfg.budget = budget;
      cfg.seed = seed;
      cfg.n_replicates = replicates;
      cfg.scenario = settings.scenario;
      cfg.cost = settings.cost;
      cfg.infill = settings.infill;
      cfg.ga = settings.ga;
      const TuneResult res = run_tune(cfg);
      write_history_csv(out_file(out_dir, "history.csv").string(), res);
      std::printf("method: %s  controller: %s  evaluations: %d\n",
                  cfg.method.c_str(), controller_name(kind),
                  res.opt.evaluations);
      print_params("best:", res.best);
      std::printf("best J: %.6g\n", res.opt.best_j);
      std::printf("wrote %s\n",
                  out_file(out_dir, "history.csv").string().c_str());
      return 0;
    }

    if (cmd_compare->parsed()) {
      CompareConfig cfg;
      if (optimizer == "ga") {
        cfg.methods = {"ga"};
      } else {
        cfg.methods.clear();
        if (kernel == "all")
          for (Kernel k : kAllKernels) cfg.methods.push_back(kernel_name(k));
        else
          cfg.methods.push_back(kernel);
        if (optimizer == "all") cfg.methods.push_back("ga");
      }
      if (controller_opt->count() > 0)
        cfg.controllers = {kind};
      else
        cfg.controllers = {ControllerKind::pid, ControllerKind::fopid};
      cfg.n_runs = runs;
      cfg.budget = budget;
      cfg.base_seed = seed;
      cfg.n_replicates = replicates;
      cfg.scenario = settings.scenario;
      cfg.cost = settings.cost;
      cfg.infill = settings.infill;
      cfg.ga = settings.ga;
      const std::vector<CompareRun> rows = run_compare(cfg);
      write_compare_csv(out_file(out_dir, "compare.csv").string(), rows);
      write_convergence_csv(out_file(out_dir, "convergence.csv").string(),
                            rows);
      std::printf("%-12s %-6s %10s %12s %12s\n", "method", "ctrl", "J_min",
                  "J_mean", "J_std");
      for (const CompareSummary& s : summarize(rows))
        std::printf("%-12s %-6s %10.5g %12.5g %12.5g\n", s.method.c_str(),
                    controller_name(s.controller), s.j_min, s.j_mean, s.j_std);
      std::printf("wrote %s and %s\n",
                  out_file(out_dir, "compare.csv").string().c_str(),
                  out_file(out_dir, "convergence.csv").string().c_str());
      return 0;
    }

    if (cmd_robust->parsed()) {
      const auto rows = run_robustness(
          best_pid_preset().params, best_fopid_preset().params,
          standard_robustness_cases(), settings.scenario, seed, replicates,
          settings.cost);
      write_robustness_csv(out_file(out_dir, "robustness.csv").string(), rows);
      std::printf("%-6s %-10s %12s %12s %10s\n", "param", "direction", "J_pid",
                  "J_fopid", "ratio");
      for (const RobustnessRow& r : rows)
        std::printf("%-6s %-10s %12.5g %12.5g %10.3f\n", r.param.c_str(),
                    r.direction.c_str(), r.j_pid, r.j_fopid,
                    r.j_pid / r.j_fopid);
      std::printf("wrote %s\n",
                  out_file(out_dir, "robustness.csv").string().c_str());
      return 0;
    }

    if (cmd_switch->parsed()) {
      const SimulationTrace tr =
          run_switching(settings.controller_params, settings.scenario,
                        settings.policy, seed);
      write_trace_csv(out_file(out_dir, "trace.csv").string(), tr);
      write_gates_csv(out_file(out_dir, "gates.csv").string(), tr);
      print_params("controller:", settings.controller_params);
      std::printf("gate events: %zu\n", tr.gate_events.size());
      for (std::size_t i = 0; i < tr.gate_events.size() && i < 12; ++i)
        std::printf("  t=%8.2f  %s\n", tr.gate_events[i].t,
                    tr.gate_events[i].on ? "on" : "off");
      if (tr.gate_events.size() > 12) std::printf("  ...\n");
      std::printf("wrote %s and %s\n",
                  out_file(out_dir, "trace.csv").string().c_str(),
                  out_file(out_dir, "gates.csv").string().c_str());
      return 0;
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
