#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mgtune/lti.hpp"
#include "mgtune/rng.hpp"

namespace mgtune {

enum class ProfileKind { wind, solar, load };

/// Deterministic part of an exogenous power profile: a sum of weighted
/// Heaviside steps. The load schedule additionally divides the bracketed sum
/// by the instantaneous noise factor and adds a small constant step, so that
/// the noise enters the realized load only through that constant term.
struct StepTerm {
  double gain = 0.0;
  double onset = 0.0;
};

struct SwitchingSignal {
  std::vector<StepTerm> terms;
  bool divide_by_chi = false;
  double extra_constant = 0.0;
};

inline void validate(const SwitchingSignal& sig) {
  double prev = 0.0;
  for (const auto& term : sig.terms) {
    if (term.onset < 0.0)
      throw std::invalid_argument("switching signal: negative onset");
    if (term.onset < prev)
      throw std::invalid_argument("switching signal: onsets not sorted");
    prev = term.onset;
  }
}

/// Sum of the step gains active at time t. With the divide-by-chi structure
/// the bracketed sum is scaled by 1/chi and the constant term added outside.
inline double gamma_value(const SwitchingSignal& sig, double t,
                          double chi = 1.0) {
  if (t < 0.0) throw std::invalid_argument("gamma_value: t must be >= 0");
  double sum = 0.0;
  for (const auto& term : sig.terms) {
    if (t < term.onset) break;  // onsets sorted ascending
    sum += term.gain;
  }
  if (sig.divide_by_chi) {
    if (chi == 0.0)
      throw std::domain_error("gamma_value: zero noise factor with a divided schedule");
    sum = sum / chi + sig.extra_constant;
  }
  return sum;
}

/// Stochastic power profile template: P = chi * Gamma with
/// chi = 1 + eta * sqrt(beta) * (phi - G[phi]) / beta, phi ~ U(-1,1) redrawn
/// every step and held, G a stable shaping low-pass.
struct ExogenousProfile {
  ProfileKind kind = ProfileKind::wind;
  double eta = 0.0;
  double beta = 1.0;
  TransferFunction shaping;
  SwitchingSignal schedule;
  bool noise_enabled = true;
};

/// Generates the profile on the grid t_i = i*dt, i = 0..floor(t_end/dt).
/// Pure given (profile, seed): the engine seed is mixed through splitmix64,
/// draws use a platform-independent mantissa mapping, and the shaping filter
/// advances by one fixed step per sample, so series are bit-reproducible.
inline std::vector<double> generate(const ExogenousProfile& profile,
                                    double t_end, double dt,
                                    std::uint64_t seed) {
  if (!(t_end > 0.0) || !(dt > 0.0))
    throw std::invalid_argument("generate: need t_end > 0 and dt > 0");
  if (!(profile.beta > 0.0))
    throw std::invalid_argument("generate: beta must be positive");
  validate(profile.schedule);

  const std::size_t n = static_cast<std::size_t>(std::floor(t_end / dt)) + 1;
  std::vector<double> out(n);

  std::mt19937_64 rng(splitmix64(seed));
  StateSpaceFilter g = tf_to_ss(profile.shaping);
  const double amp = profile.eta * std::sqrt(profile.beta) / profile.beta;

  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    double chi = 1.0;
    if (profile.noise_enabled) {
      const double phi = uniform_pm1(rng);
      chi = 1.0 + amp * (phi - g.output(phi));
      rk3_step(g, phi, dt);
    }
    out[i] = chi * gamma_value(profile.schedule, t, chi);
  }
  return out;
}

struct ProfileSet {
  ExogenousProfile wind;
  ExogenousProfile solar;
  ExogenousProfile load;
};

/// The three standard profiles: wind and solar share the very slow unity
/// low-pass G = 1/(1e4 s + 1); the load shaping is the parallel sum of two
/// lags 300/(300s+1) + 1/(1800s+1). Schedules are the fixed switching
/// programs of the study (base levels plus steps at the listed onsets).
inline ProfileSet standard_profiles() {
  ProfileSet p;

  const TransferFunction slow_lp{{1.0}, {1e4, 1.0}};

  p.wind.kind = ProfileKind::wind;
  p.wind.eta = 0.8;
  p.wind.beta = 10.0;
  p.wind.shaping = slow_lp;
  p.wind.schedule.terms = {{0.24, 0.0}, {-0.04, 140.0}};

  p.solar.kind = ProfileKind::solar;
  p.solar.eta = 0.1;
  p.solar.beta = 10.0;
  p.solar.shaping = slow_lp;
  p.solar.schedule.terms = {{0.05, 0.0}, {0.02, 180.0}};

  p.load.kind = ProfileKind::load;
  p.load.eta = 0.9;
  p.load.beta = 10.0;
  p.load.shaping =
      parallel(first_order_lag(300.0, 300.0), first_order_lag(1.0, 1800.0));
  p.load.schedule.terms = {{0.9, 0.0},    {0.03, 110.0}, {0.03, 130.0},
                           {0.03, 150.0}, {-0.15, 170.0}, {0.1, 190.0}};
  p.load.schedule.divide_by_chi = true;
  p.load.schedule.extra_constant = 0.02;

  return p;
}

}  // namespace mgtune
