#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mgtune/fopid.hpp"
#include "mgtune/lti.hpp"
#include "mgtune/rng.hpp"
#include "mgtune/stochastic.hpp"

namespace mgtune {

// ---------------------------------------------------------------------------
// Plant parameters
// ---------------------------------------------------------------------------

/// Gains, damping/inertia, droop, and the block time constants of the
/// islanded microgrid. Units: gains dimensionless, damping pu/Hz, inertia
/// pu*s (M = 2H), droop Hz/pu, time constants s.
struct MicrogridParams {
  double k_wtg = 1.0;
  double k_fess = 1.0;
  double k_bess = 1.0;
  double damping = 0.015;
  double inertia = 0.1667;
  double droop = 3.0;
  double t_fess = 0.1;
  double t_bess = 0.1;
  double t_fc = 0.26;
  double t_wtg = 1.5;
  double t_g = 0.08;
  double t_t = 0.4;
  double t_ic = 0.004;
  double t_in = 0.04;
};

inline void validate(const MicrogridParams& p) {
  const double fields[] = {p.k_wtg, p.k_fess, p.k_bess, p.damping,
                           p.inertia, p.droop, p.t_fess, p.t_bess,
                           p.t_fc,   p.t_wtg,  p.t_g,   p.t_t,
                           p.t_ic,   p.t_in};
  for (double v : fields)
    if (!(v > 0.0))
      throw std::invalid_argument("microgrid parameters must be positive");
}

// ---------------------------------------------------------------------------
// Output limiting
// ---------------------------------------------------------------------------

/// Saturation plus symmetric slew bound, applied in that order once per step.
struct Limiter {
  double lo = 0.0;
  double hi = 0.0;
  double rate = 0.0;
};

inline constexpr Limiter kFcLimiter{0.0, 0.48, 1.0};
inline constexpr Limiter kDegLimiter{0.0, 0.45, 0.5};
inline constexpr Limiter kFessLimiter{-0.11, 0.11, 0.05};
inline constexpr Limiter kBessLimiter{-0.11, 0.11, 0.05};

inline double apply_limiter(const Limiter& l, double requested,
                            double previous, double dt) {
  const double sat = std::clamp(requested, l.lo, l.hi);
  const double dmax = l.rate * dt;
  return std::clamp(sat, previous - dmax, previous + dmax);
}

// ---------------------------------------------------------------------------
// Actuator gating
// ---------------------------------------------------------------------------

/// On-off supervision of FC and DEG: they supply power only while the
/// frequency deviation is outside the deadband, and once on they stay on for
/// at least min_on_time.
struct SwitchingPolicy {
  bool enabled = false;
  double deadband = 0.05;
  double min_on_time = 10.0;
};

struct GateState {
  bool on = false;
  double on_since = 0.0;
};

inline bool actuator_gate(const SwitchingPolicy& policy, double delta_f,
                          GateState& state, double t) {
  const double mag = std::abs(delta_f);
  if (!state.on) {
    if (mag >= policy.deadband) {
      state.on = true;
      state.on_since = t;
    }
  } else if (mag < policy.deadband && t - state.on_since >= policy.min_on_time) {
    state.on = false;
  }
  return state.on;
}

// ---------------------------------------------------------------------------
// Wiring choices
// ---------------------------------------------------------------------------

/// The block-diagram reconstruction knobs that cannot be pinned from the
/// model's published description. Defaults are the adopted canonical wiring;
/// alternatives stay expressible so their effect can be tested.
///
/// command_clamp bounds the FC/DEG actuator commands to each device's output
/// range before the lag dynamics (a valve/flow command cannot go negative or
/// exceed the device rating). Without it the commanded signals wind the lag
/// states far beyond the reachable outputs during the start-up transient and
/// the loop locks into a full-scale relaxation oscillation instead of
/// settling; with it the published tunings settle well before the scoring
/// window opens.
struct PlantTopology {
  enum class DroopEntry { pre_governor, none };
  enum class StorageSource { frequency, control };

  DroopEntry droop = DroopEntry::pre_governor;
  StorageSource storage_source = StorageSource::frequency;
  bool fess_enabled = true;
  bool bess_enabled = true;
  bool command_clamp = true;
};

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

struct GateEvent {
  double t = 0.0;
  bool on = false;
};

struct SimulationTrace {
  std::vector<double> t;
  std::vector<double> delta_f;
  std::vector<double> u;
  std::vector<double> delta_p;
  std::vector<double> p_wtg;
  std::vector<double> p_pv;
  std::vector<double> p_fc;
  std::vector<double> p_deg;
  std::vector<double> p_fess;
  std::vector<double> p_bess;
  std::vector<double> p_load;
  std::vector<GateEvent> gate_events;
  bool diverged = false;

  std::size_t size() const { return t.size(); }
};

/// Derives the per-profile noise stream seeds of one simulation.
inline std::uint64_t stream_seed(std::uint64_t sim_seed, std::uint64_t k) {
  return 4 * sim_seed + k;
}

/// Runs the closed loop on the fixed grid. Signal flow: the swing state
/// gives delta_f; the controller (error -delta_f) gives u; the gate (when
/// enabled) may force the FC/DEG commands to zero; net power
/// delta_p = P_WTG + P_PV + P_FC + P_DEG - P_FESS - P_BESS - P_L closes the
/// loop through 1/(M s + D).
///
/// The whole loop — controller branch filters, generation-path lags, and
/// swing — integrates as one coupled ODE system: every third-order stage
/// re-evaluates the full interconnection algebra (error, control value,
/// commands, saturations) from the stage states, so the continuous coupling
/// carries no per-block hold delay. Held per major step, matching their
/// discrete semantics: the profile staircases, the gate decision, the
/// controller's difference terms, and the slew anchors (each limiter bounds
/// its path output to the previous major-step value plus rate*dt, saturation
/// before slew; anchors advance once per step, which keeps the recorded
/// series inside the slew cone by construction). A non-finite frequency
/// deviation or control value stops the run and marks the trace diverged.
inline SimulationTrace simulate(const MicrogridParams& mp,
                                RealizedController controller,
                                const ProfileSet& profiles,
                                const SwitchingPolicy& policy,
                                std::uint64_t seed, double t_end = 220.0,
                                double dt = 0.01,
                                const PlantTopology& topo = {}) {
  validate(mp);

  const auto wind = generate(profiles.wind, t_end, dt, stream_seed(seed, 0));
  const auto solar = generate(profiles.solar, t_end, dt, stream_seed(seed, 1));
  const auto load = generate(profiles.load, t_end, dt, stream_seed(seed, 2));
  const std::size_t n = wind.size();

  auto chain = [](double gain, std::initializer_list<double> taus) {
    TransferFunction tf{{gain}, {1.0}};
    for (double tau : taus) tf = series(tf, {{1.0}, {tau, 1.0}});
    return tf_to_ss(tf);
  };
  const StateSpaceFilter wtg = chain(mp.k_wtg, {mp.t_wtg});
  const StateSpaceFilter pv = chain(1.0, {mp.t_in, mp.t_ic});
  const StateSpaceFilter fc = chain(1.0, {mp.t_fc, mp.t_ic, mp.t_in});
  const StateSpaceFilter deg = chain(1.0, {mp.t_g, mp.t_t});
  const StateSpaceFilter fess = chain(mp.k_fess, {mp.t_fess});
  const StateSpaceFilter bess = chain(mp.k_bess, {mp.t_bess});
  const StateSpaceFilter swing = tf_to_ss({{1.0}, {mp.inertia, mp.damping}});

  controller.reset();
  const ControllerParams cp = controller.params();
  const StateSpaceFilter* fint =
      cp.ki != 0.0 ? controller.integral_branch().filter() : nullptr;
  const StateSpaceFilter* fder =
      cp.kd != 0.0 ? controller.derivative_branch().filter() : nullptr;

  // Flat state layout: [swing | wtg | pv | fc | deg | fess | bess | int | der]
  const std::size_t o_sw = 0;
  const std::size_t o_wt = o_sw + swing.order();
  const std::size_t o_pv = o_wt + wtg.order();
  const std::size_t o_fc = o_pv + pv.order();
  const std::size_t o_dg = o_fc + fc.order();
  const std::size_t o_fe = o_dg + deg.order();
  const std::size_t o_be = o_fe + fess.order();
  const std::size_t o_in = o_be + bess.order();
  const std::size_t o_de = o_in + (fint ? fint->order() : 0);
  const std::size_t nx = o_de + (fder ? fder->order() : 0);

  std::vector<double> x(nx, 0.0), xs(nx), k1(nx), k2(nx), k3(nx);

  struct Held {
    double wind, solar, load;
    double u_disc;
    bool on;
  };
  struct StageOut {
    double df, u, dp, y_wtg, y_pv, p_fc, p_deg, p_fess, p_bess;
  };

  // Slew anchors: the limited path outputs at the previous major step.
  double a_fc = 0.0, a_deg = 0.0, a_fess = 0.0, a_bess = 0.0;

  auto eval = [&](const double* s, const Held& h, double* dx) -> StageOut {
    StageOut o;
    o.df = swing.output_at(s + o_sw, 0.0);
    const double e = -o.df;
    o.u = controller.continuous_output_at(s + o_in, s + o_de, e) + h.u_disc;

    double fc_cmd = o.u;
    double deg_cmd = o.u;
    if (topo.droop == PlantTopology::DroopEntry::pre_governor)
      deg_cmd -= o.df / mp.droop;
    if (topo.command_clamp) {
      fc_cmd = std::clamp(fc_cmd, kFcLimiter.lo, kFcLimiter.hi);
      deg_cmd = std::clamp(deg_cmd, kDegLimiter.lo, kDegLimiter.hi);
    }
    if (!h.on) fc_cmd = deg_cmd = 0.0;

    const double storage_in =
        topo.storage_source == PlantTopology::StorageSource::frequency ? o.df
                                                                       : o.u;

    o.y_wtg = wtg.output_at(s + o_wt, h.wind);
    o.y_pv = pv.output_at(s + o_pv, h.solar);
    o.p_fc = apply_limiter(kFcLimiter, fc.output_at(s + o_fc, 0.0), a_fc, dt);
    o.p_deg =
        apply_limiter(kDegLimiter, deg.output_at(s + o_dg, 0.0), a_deg, dt);
    o.p_fess = topo.fess_enabled
                   ? apply_limiter(kFessLimiter,
                                   fess.output_at(s + o_fe, 0.0), a_fess, dt)
                   : 0.0;
    o.p_bess = topo.bess_enabled
                   ? apply_limiter(kBessLimiter,
                                   bess.output_at(s + o_be, 0.0), a_bess, dt)
                   : 0.0;
    o.dp = o.y_wtg + o.y_pv + o.p_fc + o.p_deg - o.p_fess - o.p_bess - h.load;

    swing.deriv_at(s + o_sw, o.dp, dx + o_sw);
    wtg.deriv_at(s + o_wt, h.wind, dx + o_wt);
    pv.deriv_at(s + o_pv, h.solar, dx + o_pv);
    fc.deriv_at(s + o_fc, fc_cmd, dx + o_fc);
    deg.deriv_at(s + o_dg, deg_cmd, dx + o_dg);
    fess.deriv_at(s + o_fe, topo.fess_enabled ? storage_in : 0.0, dx + o_fe);
    bess.deriv_at(s + o_be, topo.bess_enabled ? storage_in : 0.0, dx + o_be);
    if (fint) fint->deriv_at(s + o_in, e, dx + o_in);
    if (fder) fder->deriv_at(s + o_de, e, dx + o_de);
    return o;
  };

  GateState gate;
  SimulationTrace tr;
  for (auto* v : {&tr.t, &tr.delta_f, &tr.u, &tr.delta_p, &tr.p_wtg, &tr.p_pv,
                  &tr.p_fc, &tr.p_deg, &tr.p_fess, &tr.p_bess, &tr.p_load})
    v->reserve(n);

  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    const double df = swing.output_at(x.data() + o_sw, 0.0);
    const double e = -df;

    Held h{wind[i], solar[i], load[i], controller.held_terms(e, dt), true};
    if (policy.enabled) {
      const bool was = gate.on;
      h.on = actuator_gate(policy, df, gate, t);
      if (h.on != was) tr.gate_events.push_back({t, h.on});
    }

    const StageOut row = eval(x.data(), h, k1.data());

    if (!std::isfinite(row.df) || !std::isfinite(row.u)) {
      tr.diverged = true;
      break;
    }

    // Rows record the major-step limiter outputs (the anchors), whose
    // step-to-step change is slew-bounded by construction.
    tr.t.push_back(t);
    tr.delta_f.push_back(row.df);
    tr.u.push_back(row.u);
    tr.delta_p.push_back(row.y_wtg + row.y_pv + a_fc + a_deg - a_fess -
                         a_bess - load[i]);
    tr.p_wtg.push_back(row.y_wtg);
    tr.p_pv.push_back(row.y_pv);
    tr.p_fc.push_back(a_fc);
    tr.p_deg.push_back(a_deg);
    tr.p_fess.push_back(a_fess);
    tr.p_bess.push_back(a_bess);
    tr.p_load.push_back(load[i]);

    for (std::size_t j = 0; j < nx; ++j) xs[j] = x[j] + 0.5 * dt * k1[j];
    eval(xs.data(), h, k2.data());
    for (std::size_t j = 0; j < nx; ++j) xs[j] = x[j] + 0.75 * dt * k2[j];
    eval(xs.data(), h, k3.data());
    for (std::size_t j = 0; j < nx; ++j)
      x[j] += dt * (2.0 * k1[j] + 3.0 * k2[j] + 4.0 * k3[j]) / 9.0;

    controller.commit_step(e, dt);

    // Anchors advance to the limited outputs at the new major step; the next
    // step's first stage reproduces these values exactly.
    a_fc = apply_limiter(kFcLimiter, fc.output_at(x.data() + o_fc, 0.0), a_fc,
                         dt);
    a_deg = apply_limiter(kDegLimiter, deg.output_at(x.data() + o_dg, 0.0),
                          a_deg, dt);
    if (topo.fess_enabled)
      a_fess = apply_limiter(kFessLimiter,
                             fess.output_at(x.data() + o_fe, 0.0), a_fess, dt);
    if (topo.bess_enabled)
      a_bess = apply_limiter(kBessLimiter,
                             bess.output_at(x.data() + o_be, 0.0), a_bess, dt);
  }

  return tr;
}

}  // namespace mgtune
