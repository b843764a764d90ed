#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace mgtune {

// ---------------------------------------------------------------------------
// Polynomial helpers. Coefficients are stored in descending powers of s, so
// {2, 0, 1} means 2 s^2 + 1.
// ---------------------------------------------------------------------------

inline std::vector<double> poly_mul(const std::vector<double>& p,
                                    const std::vector<double>& q) {
  if (p.empty() || q.empty()) return {};
  std::vector<double> r(p.size() + q.size() - 1, 0.0);
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < q.size(); ++j) r[i + j] += p[i] * q[j];
  return r;
}

inline std::vector<double> poly_add(std::vector<double> p,
                                    std::vector<double> q) {
  if (p.size() < q.size()) p.swap(q);
  const std::size_t off = p.size() - q.size();
  for (std::size_t i = 0; i < q.size(); ++i) p[off + i] += q[i];
  return p;
}

/// Expands gain * prod_k (s + offsets[k]).
inline std::vector<double> poly_from_factors(const std::vector<double>& offsets,
                                             double gain = 1.0) {
  std::vector<double> p{gain};
  for (double w : offsets) p = poly_mul(p, {1.0, w});
  return p;
}

inline std::complex<double> poly_eval(const std::vector<double>& p,
                                      std::complex<double> s) {
  std::complex<double> acc(0.0, 0.0);
  for (double coeff : p) acc = acc * s + coeff;
  return acc;
}

// ---------------------------------------------------------------------------
// Transfer functions
// ---------------------------------------------------------------------------

/// Continuous-time SISO rational transfer function num(s)/den(s),
/// coefficients in descending powers of s.
struct TransferFunction {
  std::vector<double> num;
  std::vector<double> den;

  /// Direct rational evaluation at a complex frequency.
  std::complex<double> eval(std::complex<double> s) const {
    return poly_eval(num, s) / poly_eval(den, s);
  }
};

/// K / (T s + 1)
inline TransferFunction first_order_lag(double gain, double time_constant) {
  return TransferFunction{{gain}, {time_constant, 1.0}};
}

inline TransferFunction series(const TransferFunction& a,
                               const TransferFunction& b) {
  return {poly_mul(a.num, b.num), poly_mul(a.den, b.den)};
}

inline TransferFunction parallel(const TransferFunction& a,
                                 const TransferFunction& b) {
  return {poly_add(poly_mul(a.num, b.den), poly_mul(b.num, a.den)),
          poly_mul(a.den, b.den)};
}

// ---------------------------------------------------------------------------
// State-space realization
// ---------------------------------------------------------------------------

/// Controllable-canonical (companion form) realization of a proper SISO
/// transfer function. The derivative map costs O(n): the state vector is a
/// chain x_i' = x_{i+1} and only the last row carries the denominator
/// coefficients, with the input entering through that row alone.
///
/// Layout: a[i] multiplies s^(n-1-i) in the monic denominator, c[k] weights
/// state x_{k+1} (the transfer from input to x_{k+1} is s^k / den(s)),
/// d is the feedthrough.
struct StateSpaceFilter {
  std::vector<double> a;
  std::vector<double> c;
  double d = 0.0;
  std::vector<double> x;

  std::size_t order() const { return a.size(); }

  void reset() { std::fill(x.begin(), x.end(), 0.0); }

  /// y = C x + d u for the current state.
  double output(double u) const {
    double y = d * u;
    for (std::size_t k = 0; k < c.size(); ++k) y += c[k] * x[k];
    return y;
  }

  bool finite() const {
    for (double v : x)
      if (!std::isfinite(v)) return false;
    return true;
  }

  /// y = C xs + d u for a caller-held state slice (coupled integration).
  double output_at(const double* xs, double u) const {
    double y = d * u;
    for (std::size_t k = 0; k < c.size(); ++k) y += c[k] * xs[k];
    return y;
  }

  /// dx = A xs + B u on caller-held slices (coupled integration).
  void deriv_at(const double* xs, double u, double* dx) const {
    const std::size_t n = a.size();
    if (n == 0) return;
    for (std::size_t i = 0; i + 1 < n; ++i) dx[i] = xs[i + 1];
    double last = u;
    for (std::size_t k = 0; k < n; ++k) last -= a[n - 1 - k] * xs[k];
    dx[n - 1] = last;
  }

  /// dx = A xs + B u with the companion structure.
  void deriv(const std::vector<double>& xs, double u,
             std::vector<double>& dx) const {
    deriv_at(xs.data(), u, dx.data());
  }

  // Stage scratch owned by the filter so stepping never allocates.
  std::vector<double> k1_, k2_, k3_, xs_;
};

/// Builds the companion realization. Requires deg(num) <= deg(den) and a
/// nonzero leading denominator coefficient.
inline StateSpaceFilter tf_to_ss(const TransferFunction& tf) {
  if (tf.den.empty() || tf.num.empty())
    throw std::invalid_argument("tf_to_ss: empty polynomial");
  if (tf.den.front() == 0.0)
    throw std::invalid_argument("tf_to_ss: leading denominator coefficient is zero");
  if (tf.num.size() > tf.den.size())
    throw std::invalid_argument("tf_to_ss: improper transfer function (deg num > deg den)");

  const std::size_t n = tf.den.size() - 1;
  const double lead = tf.den.front();

  // Monic denominator and zero-padded, equally scaled numerator.
  std::vector<double> a(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = tf.den[i + 1] / lead;
  std::vector<double> b(n + 1, 0.0);
  const std::size_t pad = (n + 1) - tf.num.size();
  for (std::size_t i = 0; i < tf.num.size(); ++i) b[pad + i] = tf.num[i] / lead;

  StateSpaceFilter f;
  f.a = a;
  f.d = b[0];
  f.c.resize(n);
  // Strictly proper remainder: c_k picks the s^k coefficient of
  // num - d * den after the monic scaling.
  for (std::size_t k = 0; k < n; ++k) f.c[k] = b[n - k] - a[n - 1 - k] * b[0];
  f.x.assign(n, 0.0);
  f.k1_.assign(n, 0.0);
  f.k2_.assign(n, 0.0);
  f.k3_.assign(n, 0.0);
  f.xs_.assign(n, 0.0);
  return f;
}

/// C (jw I - A)^{-1} B + D. For the companion form the resolvent column is
/// [1, s, ..., s^{n-1}]^T / den(s), so the response reduces to two Horner
/// evaluations. A vanishing characteristic polynomial at jw means a pole on
/// the imaginary axis at that frequency.
inline std::complex<double> freq_response(const StateSpaceFilter& f,
                                          double omega) {
  const std::size_t n = f.order();
  const std::complex<double> s(0.0, omega);
  if (n == 0) return {f.d, 0.0};
  std::complex<double> den(1.0, 0.0);
  for (std::size_t i = 0; i < n; ++i) den = den * s + f.a[i];
  if (std::abs(den) < 1e-150)
    throw std::runtime_error("freq_response: pole on the imaginary axis at the requested frequency");
  std::complex<double> num(0.0, 0.0);
  for (std::size_t k = n; k-- > 0;) num = num * s + f.c[k];
  return num / den + f.d;
}

// ---------------------------------------------------------------------------
// Fixed-step integration
// ---------------------------------------------------------------------------

/// One Bogacki-Shampine third-order step with a piecewise-constant (held)
/// input. Returns the output at the end of the step; the feedthrough term
/// uses the held input value.
inline double rk3_step(StateSpaceFilter& f, double u, double dt) {
  const std::size_t n = f.order();
  if (n == 0) return f.d * u;
  f.deriv(f.x, u, f.k1_);
  for (std::size_t i = 0; i < n; ++i) f.xs_[i] = f.x[i] + 0.5 * dt * f.k1_[i];
  f.deriv(f.xs_, u, f.k2_);
  for (std::size_t i = 0; i < n; ++i) f.xs_[i] = f.x[i] + 0.75 * dt * f.k2_[i];
  f.deriv(f.xs_, u, f.k3_);
  for (std::size_t i = 0; i < n; ++i)
    f.x[i] += dt * (2.0 / 9.0 * f.k1_[i] + 1.0 / 3.0 * f.k2_[i] +
                    4.0 / 9.0 * f.k3_[i]);
  return f.output(u);
}

/// Same step with a time-varying input sampled at the stage times
/// t, t + dt/2, t + 3dt/4. The returned output uses the input at t + dt.
template <class InputFn>
double rk3_step(StateSpaceFilter& f, InputFn&& input, double t, double dt) {
  const std::size_t n = f.order();
  if (n == 0) return f.d * input(t + dt);
  f.deriv(f.x, input(t), f.k1_);
  for (std::size_t i = 0; i < n; ++i) f.xs_[i] = f.x[i] + 0.5 * dt * f.k1_[i];
  f.deriv(f.xs_, input(t + 0.5 * dt), f.k2_);
  for (std::size_t i = 0; i < n; ++i) f.xs_[i] = f.x[i] + 0.75 * dt * f.k2_[i];
  f.deriv(f.xs_, input(t + 0.75 * dt), f.k3_);
  for (std::size_t i = 0; i < n; ++i)
    f.x[i] += dt * (2.0 / 9.0 * f.k1_[i] + 1.0 / 3.0 * f.k2_[i] +
                    4.0 / 9.0 * f.k3_[i]);
  return f.output(input(t + dt));
}

}  // namespace mgtune
