#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mgtune/csv.hpp"
#include "mgtune/fopid.hpp"
#include "mgtune/ga.hpp"
#include "mgtune/microgrid.hpp"
#include "mgtune/objective.hpp"
#include "mgtune/presets.hpp"
#include "mgtune/surrogate_opt.hpp"

namespace mgtune {

// ---------------------------------------------------------------------------
// Tuning-method naming
// ---------------------------------------------------------------------------

/// A tuning method is either one of the five kriging kernels (by name) or the
/// genetic-algorithm baseline "ga".
inline bool is_ga_method(const std::string& method) { return method == "ga"; }

inline std::vector<std::string> all_methods() {
  std::vector<std::string> out;
  for (Kernel k : kAllKernels) out.push_back(kernel_name(k));
  out.push_back("ga");
  return out;
}

inline void validate_method(const std::string& method) {
  if (!is_ga_method(method)) kernel_from_name(method);  // throws if unknown
}

inline Bounds controller_bounds(ControllerKind kind) {
  return kind == ControllerKind::pid ? pid_bounds() : fopid_bounds();
}

inline ControllerParams params_from_eigen(const Eigen::VectorXd& x,
                                          ControllerKind kind) {
  return params_from_vector(std::vector<double>(x.data(), x.data() + x.size()),
                            kind);
}

// ---------------------------------------------------------------------------
// One tuning campaign
// ---------------------------------------------------------------------------

struct TuneConfig {
  ControllerKind controller = ControllerKind::fopid;
  std::string method = "spline";  // kernel name or "ga"
  int budget = 150;
  std::uint64_t seed = 1;
  int n_replicates = 10;
  Scenario scenario;
  CostSpec cost;
  InfillConfig infill;  // kriging loop knobs
  GAConfig ga;          // baseline knobs; bounds/seed filled per run
};

struct TuneResult {
  OptResult opt;                          // vector-space view of the run
  ControllerParams best;                  // decoded best parameters
  std::vector<EvaluationRecord> records;  // one per expensive evaluation
};

/// Runs one tuning campaign: wraps the replicate-averaged cost as the
/// expensive objective (shared run seed gives common random numbers across
/// candidates) and dispatches to the requested optimizer. For the GA the
/// evaluation budget must be divisible by the population so generations can
/// be derived as budget / population.
inline TuneResult run_tune(const TuneConfig& cfg) {
  validate_method(cfg.method);
  validate(cfg.scenario.plant);
  validate(cfg.cost);

  TuneResult out;
  const Bounds bounds = controller_bounds(cfg.controller);
  auto objective = [&](const Eigen::VectorXd& x) {
    const EvaluationRecord rec =
        expected_cost(params_from_eigen(x, cfg.controller), cfg.scenario,
                      cfg.seed, cfg.n_replicates, cfg.cost);
    out.records.push_back(rec);
    return rec.j_mean;
  };

  if (is_ga_method(cfg.method)) {
    GAConfig ga = cfg.ga;
    ga.bounds = bounds;
    ga.seed = cfg.seed;
    if (ga.population < 1 || cfg.budget % ga.population != 0)
      throw std::invalid_argument(
          "run_tune: GA budget must be a multiple of the population size");
    ga.generations = cfg.budget / ga.population;
    out.opt = ga_optimize(objective, ga);
  } else {
    out.opt = optimize_kriging(objective, bounds, kernel_from_name(cfg.method),
                               cfg.budget, cfg.seed, cfg.infill);
  }
  out.best = params_from_eigen(out.opt.best_x, cfg.controller);
  return out;
}

// ---------------------------------------------------------------------------
// Multi-run comparison campaign
// ---------------------------------------------------------------------------

struct CompareConfig {
  std::vector<std::string> methods = all_methods();
  std::vector<ControllerKind> controllers = {ControllerKind::pid,
                                             ControllerKind::fopid};
  int n_runs = 5;
  int budget = 150;
  std::uint64_t base_seed = 1;
  int n_replicates = 10;
  Scenario scenario;
  CostSpec cost;
  InfillConfig infill;
  GAConfig ga;
};

struct CompareRun {
  std::string method;
  ControllerKind controller;
  int run = 0;
  std::uint64_t seed = 0;
  double best_j = 0.0;
  ControllerParams best;
  std::vector<double> best_curve;  // best-so-far after each evaluation
};

/// Runs n_runs independent campaigns per (method, controller) pair. Run r of
/// every pair uses seed base_seed + r, so methods are compared under common
/// random numbers.
inline std::vector<CompareRun> run_compare(const CompareConfig& cfg) {
  if (cfg.n_runs < 1)
    throw std::invalid_argument("run_compare: need at least one run");
  std::vector<CompareRun> out;
  for (const std::string& method : cfg.methods) {
    for (ControllerKind kind : cfg.controllers) {
      for (int r = 0; r < cfg.n_runs; ++r) {
        TuneConfig tc;
        tc.controller = kind;
        tc.method = method;
        tc.budget = cfg.budget;
        tc.seed = cfg.base_seed + static_cast<std::uint64_t>(r);
        tc.n_replicates = cfg.n_replicates;
        tc.scenario = cfg.scenario;
        tc.cost = cfg.cost;
        tc.infill = cfg.infill;
        tc.ga = cfg.ga;
        const TuneResult res = run_tune(tc);

        CompareRun row;
        row.method = method;
        row.controller = kind;
        row.run = r;
        row.seed = tc.seed;
        row.best_j = res.opt.best_j;
        row.best = res.best;
        row.best_curve.reserve(res.opt.history.size());
        for (const HistoryEntry& h : res.opt.history)
          row.best_curve.push_back(h.best);
        out.push_back(std::move(row));
      }
    }
  }
  return out;
}

struct CompareSummary {
  std::string method;
  ControllerKind controller;
  int runs = 0;
  double j_min = 0.0;
  double j_mean = 0.0;
  double j_std = 0.0;  // sample standard deviation of final J
};

inline std::vector<CompareSummary> summarize(
    const std::vector<CompareRun>& runs) {
  std::vector<CompareSummary> out;
  for (const CompareRun& run : runs) {
    auto it = std::find_if(out.begin(), out.end(), [&](const CompareSummary& s) {
      return s.method == run.method && s.controller == run.controller;
    });
    if (it == out.end()) {
      out.push_back({run.method, run.controller, 0, 0.0, 0.0, 0.0});
      it = out.end() - 1;
    }
    ++it->runs;
    it->j_mean += run.best_j;  // accumulate; normalized below
  }
  for (CompareSummary& s : out) {
    s.j_mean /= static_cast<double>(s.runs);
    double ss = 0.0;
    double mn = std::numeric_limits<double>::infinity();
    for (const CompareRun& run : runs) {
      if (run.method != s.method || run.controller != s.controller) continue;
      ss += (run.best_j - s.j_mean) * (run.best_j - s.j_mean);
      mn = std::min(mn, run.best_j);
    }
    s.j_min = mn;
    s.j_std = s.runs > 1 ? std::sqrt(ss / static_cast<double>(s.runs - 1)) : 0.0;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Robustness sweep
// ---------------------------------------------------------------------------

/// One plant parameter and the symmetric perturbation fraction applied to it
/// in each direction (0.7 means +70% and -70% cases).
struct RobustnessCase {
  std::string param;
  double fraction = 0.0;
};

/// The standard eight-parameter sweep: damping, inertia, droop, and the five
/// studied actuator time constants, each with its published fraction.
inline std::vector<RobustnessCase> standard_robustness_cases() {
  return {{"D", 0.70},    {"2H", 0.50}, {"R", 0.70},   {"T_FC", 0.20},
          {"T_g", 0.70},  {"T_t", 0.70}, {"T_IC", 0.005}, {"T_IN", 0.50}};
}

/// Returns the plant with one named parameter scaled by (1 + signed_fraction).
inline MicrogridParams perturb_plant(const MicrogridParams& base,
                                     const std::string& param,
                                     double signed_fraction) {
  MicrogridParams p = base;
  double* field = param == "D"      ? &p.damping
                  : param == "2H"   ? &p.inertia
                  : param == "R"    ? &p.droop
                  : param == "T_FC" ? &p.t_fc
                  : param == "T_g"  ? &p.t_g
                  : param == "T_t"  ? &p.t_t
                  : param == "T_IC" ? &p.t_ic
                  : param == "T_IN" ? &p.t_in
                                    : nullptr;
  if (field == nullptr)
    throw std::invalid_argument("perturb_plant: unknown parameter " + param);
  *field *= 1.0 + signed_fraction;
  if (!(*field > 0.0))
    throw std::invalid_argument(
        "perturb_plant: perturbation drives " + param + " non-positive");
  return p;
}

struct RobustnessRow {
  std::string param;
  double fraction = 0.0;
  std::string direction;  // "increase" | "decrease"
  double j_pid = 0.0;
  double j_fopid = 0.0;
};

/// Evaluates both controllers' expected cost under every single-parameter
/// perturbation, both directions, with shared replicate seeds.
inline std::vector<RobustnessRow> run_robustness(
    const ControllerParams& pid, const ControllerParams& fopid,
    const std::vector<RobustnessCase>& cases, const Scenario& nominal,
    std::uint64_t run_seed, int n_rep = 10, const CostSpec& cost = {}) {
  std::vector<RobustnessRow> out;
  for (const RobustnessCase& c : cases) {
    for (const double sign : {+1.0, -1.0}) {
      Scenario s = nominal;
      s.plant = perturb_plant(nominal.plant, c.param, sign * c.fraction);
      RobustnessRow row;
      row.param = c.param;
      row.fraction = c.fraction;
      row.direction = sign > 0 ? "increase" : "decrease";
      row.j_pid = expected_cost(pid, s, run_seed, n_rep, cost).j_mean;
      row.j_fopid = expected_cost(fopid, s, run_seed, n_rep, cost).j_mean;
      out.push_back(std::move(row));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Switching study
// ---------------------------------------------------------------------------

/// Simulates one controller with the actuator gate enabled and returns the
/// trace (gate transitions are recorded on it).
inline SimulationTrace run_switching(const ControllerParams& params,
                                     const Scenario& nominal,
                                     const SwitchingPolicy& policy,
                                     std::uint64_t seed) {
  Scenario s = nominal;
  s.policy = policy;
  s.policy.enabled = true;
  return simulate(s.plant, build_controller(params), s.profiles, s.policy,
                  seed, s.t_end, s.dt, s.topology);
}

// ---------------------------------------------------------------------------
// Canonical CSV schemas
// ---------------------------------------------------------------------------

/// trace.csv: one row per sample of every recorded series.
inline void write_trace_csv(const std::string& path,
                            const SimulationTrace& tr) {
  CsvWriter csv(path);
  csv.row({"t", "delta_f", "u", "delta_p", "p_wtg", "p_pv", "p_fc", "p_deg",
           "p_fess", "p_bess", "p_load"});
  for (std::size_t i = 0; i < tr.t.size(); ++i)
    csv.row({tr.t[i], tr.delta_f[i], tr.u[i], tr.delta_p[i], tr.p_wtg[i],
             tr.p_pv[i], tr.p_fc[i], tr.p_deg[i], tr.p_fess[i], tr.p_bess[i],
             tr.p_load[i]});
}

/// gates.csv: the gate-event log of a switching run (state 1 = on).
inline void write_gates_csv(const std::string& path,
                            const SimulationTrace& tr) {
  CsvWriter csv(path);
  csv.row({"event", "t", "state"});
  for (std::size_t i = 0; i < tr.gate_events.size(); ++i)
    csv.row({static_cast<int>(i), tr.gate_events[i].t,
             tr.gate_events[i].on ? 1 : 0});
}

/// history.csv: one row per expensive evaluation of a tuning campaign.
inline void write_history_csv(const std::string& path, const TuneResult& res) {
  CsvWriter csv(path);
  csv.row({"eval_index", "kp", "ki", "kd", "lambda", "mu", "j_mean",
           "best_so_far"});
  for (std::size_t i = 0; i < res.opt.history.size(); ++i) {
    const EvaluationRecord& rec = res.records[i];
    csv.row({static_cast<int>(i), rec.params.kp, rec.params.ki, rec.params.kd,
             rec.params.lambda, rec.params.mu, rec.j_mean,
             res.opt.history[i].best});
  }
}

inline const char* controller_name(ControllerKind kind) {
  return kind == ControllerKind::pid ? "pid" : "fopid";
}

/// compare.csv: one row per run of every (method, controller) pair.
inline void write_compare_csv(const std::string& path,
                              const std::vector<CompareRun>& runs) {
  CsvWriter csv(path);
  csv.row({"method", "controller", "run", "seed", "best_j", "kp", "ki", "kd",
           "lambda", "mu"});
  for (const CompareRun& r : runs)
    csv.row({r.method, controller_name(r.controller), r.run,
             static_cast<unsigned long long>(r.seed), r.best_j, r.best.kp,
             r.best.ki, r.best.kd, r.best.lambda, r.best.mu});
}

/// convergence.csv: per evaluation index, order statistics of the best-so-far
/// curves across the runs of each (method, controller) pair.
inline void write_convergence_csv(const std::string& path,
                                  const std::vector<CompareRun>& runs) {
  CsvWriter csv(path);
  csv.row({"method", "controller", "eval_index", "best", "worst", "mean",
           "median"});
  for (std::size_t base = 0; base < runs.size();) {
    // Runs of one pair are contiguous by construction.
    std::size_t end = base;
    while (end < runs.size() && runs[end].method == runs[base].method &&
           runs[end].controller == runs[base].controller)
      ++end;
    const std::size_t len = runs[base].best_curve.size();
    for (std::size_t i = 0; i < len; ++i) {
      std::vector<double> v;
      for (std::size_t r = base; r < end; ++r)
        v.push_back(runs[r].best_curve[i]);
      std::sort(v.begin(), v.end());
      double mean = 0.0;
      for (double x : v) mean += x;
      mean /= static_cast<double>(v.size());
      const std::size_t n = v.size();
      const double median =
          n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
      csv.row({runs[base].method, controller_name(runs[base].controller),
               static_cast<int>(i), v.front(), v.back(), mean, median});
    }
    base = end;
  }
}

/// robustness.csv: both controllers' expected cost per perturbation case.
inline void write_robustness_csv(const std::string& path,
                                 const std::vector<RobustnessRow>& rows) {
  CsvWriter csv(path);
  csv.row({"param", "fraction", "direction", "j_pid", "j_fopid",
           "pid_over_fopid"});
  for (const RobustnessRow& r : rows)
    csv.row({r.param, r.fraction, r.direction, r.j_pid, r.j_fopid,
             r.j_pid / r.j_fopid});
}

}  // namespace mgtune
