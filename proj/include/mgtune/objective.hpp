#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mgtune/fopid.hpp"
#include "mgtune/microgrid.hpp"
#include "mgtune/stochastic.hpp"

namespace mgtune {

// ---------------------------------------------------------------------------
// Cost of one trace
// ---------------------------------------------------------------------------

/// Weighted ISE/ISDCO cost: J = integral over [t_min, t_max] of
/// weight*delta_f^2 + ((1-weight)/normalizer)*delta_u^2, with
/// delta_u(t) = u(t) - u(t_min) the incremental control relative to the
/// window start.
struct CostSpec {
  double weight = 0.7;
  double normalizer = 1e4;
  double t_min = 100.0;
  double t_max = 220.0;
};

inline void validate(const CostSpec& spec) {
  if (!(spec.weight >= 0.0 && spec.weight <= 1.0))
    throw std::invalid_argument("cost spec: weight must lie in [0, 1]");
  if (!(spec.normalizer > 0.0))
    throw std::invalid_argument("cost spec: normalizer must be positive");
  if (!(spec.t_min < spec.t_max))
    throw std::invalid_argument("cost spec: window must have t_min < t_max");
}

/// Cost applied to a run that left the finite domain.
inline constexpr double kDivergencePenalty = 1e6;

/// Trapezoidal quadrature of the weighted cost on the trace's own grid.
/// A diverged trace scores the flat penalty; an intact trace must span the
/// scoring window.
inline double cost(const SimulationTrace& trace, const CostSpec& spec = {}) {
  validate(spec);
  if (trace.diverged) return kDivergencePenalty;
  if (trace.size() < 2 || trace.t.back() < spec.t_max - 1e-9)
    throw std::invalid_argument("cost: trace does not span the scoring window");

  std::size_t start = trace.size();
  for (std::size_t i = 0; i < trace.size(); ++i)
    if (trace.t[i] >= spec.t_min - 1e-12) {
      start = i;
      break;
    }
  if (start >= trace.size())
    throw std::invalid_argument("cost: scoring window is empty");

  const double u_ref = trace.u[start];
  const double w_u = (1.0 - spec.weight) / spec.normalizer;
  auto integrand = [&](std::size_t k) {
    const double df = trace.delta_f[k];
    const double du = trace.u[k] - u_ref;
    return spec.weight * df * df + w_u * du * du;
  };

  double j = 0.0;
  for (std::size_t i = start; i + 1 < trace.size(); ++i) {
    if (trace.t[i + 1] > spec.t_max + 1e-12) break;
    j += 0.5 * (integrand(i) + integrand(i + 1)) * (trace.t[i + 1] - trace.t[i]);
  }
  return j;
}

// ---------------------------------------------------------------------------
// Replicate-averaged expensive evaluation
// ---------------------------------------------------------------------------

/// Everything one closed-loop run needs besides the controller: plant
/// constants, exogenous profiles, gating policy, wiring, and the grid.
struct Scenario {
  MicrogridParams plant;
  ProfileSet profiles = standard_profiles();
  SwitchingPolicy policy;
  PlantTopology topology;
  double t_end = 220.0;
  double dt = 0.01;
};

/// Seed of replicate r within the run identified by run_seed. Runs are spaced
/// a million apart so replicate streams of different runs never overlap.
inline std::uint64_t replicate_seed(std::uint64_t run_seed, std::uint64_t r) {
  return run_seed * 1000000ull + r;
}

/// One expensive evaluation: the controller scored as the mean cost over the
/// replicate seed set (diverged replicates contribute the penalty).
struct EvaluationRecord {
  ControllerParams params;
  double j_mean = 0.0;
  std::vector<double> j_replicates;
  int diverged_count = 0;
};

/// Sample standard deviation of the replicate costs (0 for fewer than two).
inline double replicate_stddev(const EvaluationRecord& rec) {
  const std::size_t n = rec.j_replicates.size();
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (double v : rec.j_replicates) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : rec.j_replicates) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(n - 1));
}

/// Runs n_rep simulations with seeds replicate_seed(run_seed, 0..n_rep-1) and
/// averages their costs. Fixed seed set and summation order make the result
/// bit-reproducible, and shared run_seed gives common random numbers across
/// candidate parameter vectors.
inline EvaluationRecord expected_cost(const ControllerParams& params,
                                      const Scenario& scenario,
                                      std::uint64_t run_seed, int n_rep = 10,
                                      const CostSpec& spec = {}) {
  if (n_rep < 1)
    throw std::invalid_argument("expected_cost: n_rep must be at least 1");
  validate(spec);

  EvaluationRecord rec;
  rec.params = params;
  rec.j_replicates.reserve(static_cast<std::size_t>(n_rep));
  double sum = 0.0;
  for (int r = 0; r < n_rep; ++r) {
    const SimulationTrace trace = simulate(
        scenario.plant, build_controller(params), scenario.profiles,
        scenario.policy, replicate_seed(run_seed, static_cast<std::uint64_t>(r)),
        scenario.t_end, scenario.dt, scenario.topology);
    if (trace.diverged) ++rec.diverged_count;
    const double j = cost(trace, spec);
    rec.j_replicates.push_back(j);
    sum += j;
  }
  rec.j_mean = sum / static_cast<double>(n_rep);
  return rec;
}

}  // namespace mgtune
