#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mgtune/lti.hpp"

namespace mgtune {

// ---------------------------------------------------------------------------
// Controller parameters
// ---------------------------------------------------------------------------

/// Gains and fractional orders of C(s) = Kp + Ki / s^lambda + Kd s^mu.
/// lambda = mu = 1 is the classical PID special case.
struct ControllerParams {
  double kp = 0.0;
  double ki = 0.0;
  double kd = 0.0;
  double lambda = 1.0;
  double mu = 1.0;

  bool is_pid() const { return lambda == 1.0 && mu == 1.0; }

  /// Search-box membership: gains in [0,5], orders in [0,2].
  bool within_bounds() const {
    auto in = [](double v, double lo, double hi) { return v >= lo && v <= hi; };
    return in(kp, 0.0, 5.0) && in(ki, 0.0, 5.0) && in(kd, 0.0, 5.0) &&
           in(lambda, 0.0, 2.0) && in(mu, 0.0, 2.0);
  }
};

enum class ControllerKind { pid, fopid };

/// PID searches over {Kp, Ki, Kd} with both orders pinned to 1;
/// FOPID searches over all five parameters.
inline std::size_t parameter_count(ControllerKind kind) {
  return kind == ControllerKind::pid ? 3 : 5;
}

inline std::vector<double> to_vector(const ControllerParams& p,
                                     ControllerKind kind) {
  if (kind == ControllerKind::pid) return {p.kp, p.ki, p.kd};
  return {p.kp, p.ki, p.kd, p.lambda, p.mu};
}

inline ControllerParams params_from_vector(const std::vector<double>& x,
                                           ControllerKind kind) {
  if (x.size() != parameter_count(kind))
    throw std::invalid_argument("params_from_vector: wrong dimension");
  ControllerParams p;
  p.kp = x[0];
  p.ki = x[1];
  p.kd = x[2];
  if (kind == ControllerKind::fopid) {
    p.lambda = x[3];
    p.mu = x[4];
  }
  return p;
}

// ---------------------------------------------------------------------------
// Oustaloup recursive approximation of s^alpha
// ---------------------------------------------------------------------------

/// Band-limited rational approximation of s^alpha over [omega_b, omega_h]
/// with 2*half_order+1 pole/zero pairs.
struct OustaloupSpec {
  double alpha = 0.0;
  double omega_b = 1e-2;
  double omega_h = 1e2;
  int half_order = 2;
};

/// Corner frequencies and gain of the approximation. All corners are
/// positive, so every pole and zero of the realized filter is real and
/// strictly in the left half plane.
struct OustaloupDesign {
  std::vector<double> zero_corners;
  std::vector<double> pole_corners;
  double gain = 1.0;
};

inline void validate_band(const OustaloupSpec& sp) {
  if (!(sp.omega_b > 0.0) || !(sp.omega_h > sp.omega_b))
    throw std::invalid_argument("oustaloup: need 0 < omega_b < omega_h");
  if (sp.half_order < 1)
    throw std::invalid_argument("oustaloup: half_order must be >= 1");
}

/// Lays out the recursive corner grid. For exponent alpha the k-th pole sits
/// at omega_b * r^((k + N + (1+alpha)/2) / (2N+1)) with r = omega_h/omega_b,
/// the matching zero uses (1-alpha)/2, and the overall gain is omega_h^alpha.
/// Integer exponents are excluded: callers split them off as exact stages.
inline OustaloupDesign design_oustaloup(const OustaloupSpec& sp) {
  validate_band(sp);
  if (!(sp.alpha > -1.0 && sp.alpha < 1.0) || sp.alpha == 0.0)
    throw std::invalid_argument("oustaloup: alpha must lie in (-1,1) excluding 0");

  const int n = sp.half_order;
  const double r = sp.omega_h / sp.omega_b;
  const double denom = 2.0 * n + 1.0;
  OustaloupDesign d;
  d.zero_corners.reserve(2 * n + 1);
  d.pole_corners.reserve(2 * n + 1);
  for (int k = -n; k <= n; ++k) {
    const double ez = (k + n + 0.5 * (1.0 - sp.alpha)) / denom;
    const double ep = (k + n + 0.5 * (1.0 + sp.alpha)) / denom;
    d.zero_corners.push_back(sp.omega_b * std::pow(r, ez));
    d.pole_corners.push_back(sp.omega_b * std::pow(r, ep));
  }
  d.gain = std::pow(sp.omega_h, sp.alpha);
  return d;
}

/// The approximation as a transfer function: gain * prod (s + zc) / (s + pc).
inline TransferFunction oustaloup(const OustaloupSpec& sp) {
  const OustaloupDesign d = design_oustaloup(sp);
  return {poly_from_factors(d.zero_corners, d.gain),
          poly_from_factors(d.pole_corners)};
}

// ---------------------------------------------------------------------------
// Realized controller
// ---------------------------------------------------------------------------

/// One term of the controller: 1/s^order or s^order for order in [0, 2].
///
/// Integer orders are exact: integrators enter the rational part directly
/// and s stages are backward differences on the sample grid. A fractional
/// order splits into its integer part and a fractional remainder realized by
/// the band-limited approximation. The whole rational part is combined into
/// a single polynomial ratio before realization so it advances as one ODE,
/// avoiding hold artifacts between cascaded stages.
///
/// Derivative orders in (1,2) compose the exact s with the remainder filter
/// H(s) = num/den. The product s H is improper; it splits exactly into
/// d_inf * s + s (num - d_inf den) / den with d_inf the filter's feedthrough.
/// The second term is proper and advances in state-space form like any other
/// filter (it equals the analytic derivative of the filter's state output),
/// so only the feedthrough tail differences the input on the sample grid.
/// At coarse steps relative to the approximation's fastest pole this tail
/// and the derivative-weighted fast modes make the realized gain deviate
/// from the ideal power law; the deviation is deterministic and shrinks
/// linearly with the step size.
class FractionalBranch {
 public:
  enum class Kind { integral, derivative };

  FractionalBranch() = default;

  FractionalBranch(Kind kind, double order, const OustaloupSpec& band) {
    if (!(order >= 0.0 && order <= 2.0))
      throw std::invalid_argument("branch order must lie in [0,2]");
    const double rounded = std::round(order);
    const bool integer = std::abs(order - rounded) < 1e-12;
    const int whole = integer ? static_cast<int>(rounded)
                              : static_cast<int>(std::floor(order));
    const double frac = integer ? 0.0 : order - whole;

    if (kind == Kind::integral) {
      TransferFunction tf{{1.0}, {1.0}};
      if (!integer) {
        OustaloupSpec sp = band;
        sp.alpha = -frac;
        tf = oustaloup(sp);
      }
      for (int i = 0; i < whole; ++i) tf.den.push_back(0.0);  // multiply by s
      if (tf.den.size() > 1) filter_ = tf_to_ss(tf);
    } else {
      if (integer) {
        exact_diffs_ = whole;
      } else {
        OustaloupSpec sp = band;
        sp.alpha = frac;
        TransferFunction h = oustaloup(sp);
        if (whole == 1) {
          // s H = d_inf s + s (num - d_inf den) / den; den is monic so the
          // leading coefficient of num - d_inf den cancels exactly.
          input_diff_gain_ = h.num[0];
          std::vector<double> rem(h.num.size());
          for (std::size_t i = 0; i < h.num.size(); ++i)
            rem[i] = h.num[i] - input_diff_gain_ * h.den[i];
          rem.erase(rem.begin());
          h.num = poly_mul({1.0, 0.0}, rem);
        }
        filter_ = tf_to_ss(h);
      }
    }
  }

  /// Feeds one sample through the branch and advances the internal state.
  double step(double u, double dt) {
    double v = u;
    if (filter_) v = rk3_step(*filter_, v, dt);
    if (input_diff_gain_ != 0.0) {
      v += input_diff_gain_ * (u - prev1_) / dt;
      prev1_ = u;
      return v;
    }
    for (int k = 0; k < exact_diffs_; ++k) {
      double& prev = k == 0 ? prev1_ : prev2_;
      const double dv = (v - prev) / dt;
      prev = v;
      v = dv;
    }
    return v;
  }

  void reset() {
    if (filter_) filter_->reset();
    prev1_ = prev2_ = 0.0;
  }

  bool finite() const {
    if (filter_ && !filter_->finite()) return false;
    return std::isfinite(prev1_) && std::isfinite(prev2_);
  }

  /// Order of the rational part (0 when the branch is a pure difference or
  /// passthrough).
  std::size_t rational_order() const {
    return filter_ ? filter_->order() : 0;
  }

  int difference_stages() const {
    return input_diff_gain_ != 0.0 ? 1 : exact_diffs_;
  }

  // --- Coupled-integration interface -------------------------------------
  // A closed-loop integrator may co-integrate the branch's rational part
  // with the rest of the system, evaluating it at intermediate stages. The
  // branch then splits into a continuous part (the filter, or a passthrough
  // when the branch is order zero) and a sample-held difference part that
  // advances once per major step via commit_difference.

  const StateSpaceFilter* filter() const {
    return filter_ ? &*filter_ : nullptr;
  }

  /// Continuous stage output given a caller-held state slice and the stage
  /// input. Pure-difference branches contribute nothing here.
  double continuous_output_at(const double* xs, double e) const {
    if (filter_) return filter_->output_at(xs, e);
    return exact_diffs_ == 0 ? e : 0.0;
  }

  /// Sample-held difference contribution for the step starting at the given
  /// major-grid input. Does not advance the difference memory.
  double held_difference(double e, double dt) const {
    if (input_diff_gain_ != 0.0) return input_diff_gain_ * (e - prev1_) / dt;
    if (exact_diffs_ == 0) return 0.0;
    double v = (e - prev1_) / dt;
    if (exact_diffs_ == 2) v = (v - prev2_) / dt;
    return v;
  }

  /// Advances the difference memory to the end of the step.
  void commit_difference(double e, double dt) {
    if (input_diff_gain_ != 0.0) {
      prev1_ = e;
      return;
    }
    if (exact_diffs_ >= 1) {
      const double d1 = (e - prev1_) / dt;
      prev1_ = e;
      if (exact_diffs_ == 2) prev2_ = d1;
    }
  }

 private:
  std::optional<StateSpaceFilter> filter_;
  double input_diff_gain_ = 0.0;
  int exact_diffs_ = 0;
  double prev1_ = 0.0;
  double prev2_ = 0.0;
};

/// Discrete-time realization of the controller acting on the frequency
/// deviation. The tracking error is e = -delta_f (zero frequency reference).
class RealizedController {
 public:
  RealizedController() = default;

  RealizedController(const ControllerParams& p, const OustaloupSpec& band)
      : p_(p),
        integral_(FractionalBranch::Kind::integral, p.lambda, band),
        derivative_(FractionalBranch::Kind::derivative, p.mu, band) {}

  /// Control command for the current frequency deviation sample; advances
  /// the branch states by one step. Branches with a zero gain are skipped,
  /// which leaves the output unchanged.
  double output(double delta_f, double dt) {
    const double e = -delta_f;
    double u = p_.kp * e;
    if (p_.ki != 0.0) u += p_.ki * integral_.step(e, dt);
    if (p_.kd != 0.0) u += p_.kd * derivative_.step(e, dt);
    return u;
  }

  void reset() {
    integral_.reset();
    derivative_.reset();
  }

  bool finite() const { return integral_.finite() && derivative_.finite(); }

  const ControllerParams& params() const { return p_; }
  const FractionalBranch& integral_branch() const { return integral_; }
  const FractionalBranch& derivative_branch() const { return derivative_; }

  // --- Coupled-integration interface -------------------------------------
  // Mirrors output()/step() but lets a closed-loop integrator co-integrate
  // the branch filters: the caller owns the filter states and queries the
  // control value at arbitrary stages, while the sample-held difference
  // terms advance once per major step. Zero-gain branches stay inert,
  // matching output().

  /// Sample-held part of the control value over one step (difference terms
  /// evaluated at the major-grid error). Constant within the step.
  double held_terms(double e, double dt) const {
    double u = 0.0;
    if (p_.ki != 0.0) u += p_.ki * integral_.held_difference(e, dt);
    if (p_.kd != 0.0) u += p_.kd * derivative_.held_difference(e, dt);
    return u;
  }

  /// Continuous part of the control value at a stage: proportional term plus
  /// the branch filters evaluated on caller-held state slices.
  double continuous_output_at(const double* xs_int, const double* xs_der,
                              double e) const {
    double u = p_.kp * e;
    if (p_.ki != 0.0) u += p_.ki * integral_.continuous_output_at(xs_int, e);
    if (p_.kd != 0.0) u += p_.kd * derivative_.continuous_output_at(xs_der, e);
    return u;
  }

  /// Advances the difference memories to the end of the step.
  void commit_step(double e, double dt) {
    if (p_.ki != 0.0) integral_.commit_difference(e, dt);
    if (p_.kd != 0.0) derivative_.commit_difference(e, dt);
  }

 private:
  ControllerParams p_;
  FractionalBranch integral_;
  FractionalBranch derivative_;
};

/// Validates the parameters against the search box and realizes the
/// controller with the given approximation band.
inline RealizedController build_controller(const ControllerParams& p,
                                           const OustaloupSpec& band = {}) {
  if (!p.within_bounds())
    throw std::invalid_argument("build_controller: parameters outside the search box");
  validate_band(band);
  return RealizedController(p, band);
}

}  // namespace mgtune
