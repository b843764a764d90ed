#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace mgtune {

// ---------------------------------------------------------------------------
// Correlation kernels
// ---------------------------------------------------------------------------

enum class Kernel { exponential, gaussian, linear, spherical, spline };

inline const char* kernel_name(Kernel k) {
  switch (k) {
    case Kernel::exponential: return "exponential";
    case Kernel::gaussian: return "gaussian";
    case Kernel::linear: return "linear";
    case Kernel::spherical: return "spherical";
    case Kernel::spline: return "spline";
  }
  return "?";
}

inline Kernel kernel_from_name(const std::string& s) {
  if (s == "exponential") return Kernel::exponential;
  if (s == "gaussian") return Kernel::gaussian;
  if (s == "linear") return Kernel::linear;
  if (s == "spherical") return Kernel::spherical;
  if (s == "spline") return Kernel::spline;
  throw std::invalid_argument("unknown correlation kernel: " + s);
}

inline const Kernel kAllKernels[] = {Kernel::exponential, Kernel::gaussian,
                                     Kernel::linear, Kernel::spherical,
                                     Kernel::spline};

/// One-dimensional stationary correlation at distance d with range theta.
/// All kernels are even in d (absolute distance), equal 1 at d = 0, and the
/// compactly supported ones (linear, spherical, spline) are exactly 0 once
/// theta*|d| >= 1.
inline double correlation1d(Kernel kind, double theta, double d) {
  const double ad = std::abs(d);
  switch (kind) {
    case Kernel::exponential:
      return std::exp(-theta * ad);
    case Kernel::gaussian:
      return std::exp(-theta * d * d);
    case Kernel::linear:
      return std::max(0.0, 1.0 - theta * ad);
    case Kernel::spherical: {
      const double xi = std::min(1.0, theta * ad);
      return 1.0 - 1.5 * xi + 0.5 * xi * xi * xi;
    }
    case Kernel::spline: {
      const double xi = theta * ad;
      if (xi >= 1.0) return 0.0;
      if (xi <= 0.2) return 1.0 - 15.0 * xi * xi + 30.0 * xi * xi * xi;
      const double c = 1.0 - xi;
      return 1.25 * c * c * c;
    }
  }
  return 0.0;
}

/// Product correlation over coordinates (normalized space).
struct CorrelationSpec {
  Kernel kind = Kernel::spline;
  Eigen::VectorXd theta;
};

inline constexpr double kThetaMin = 1e-3;
inline constexpr double kThetaMax = 20.0;

inline void validate(const CorrelationSpec& spec) {
  for (Eigen::Index j = 0; j < spec.theta.size(); ++j)
    if (!(spec.theta[j] >= kThetaMin && spec.theta[j] <= kThetaMax))
      throw std::invalid_argument("correlation: theta out of [1e-3, 20]");
}

inline double correlation(const CorrelationSpec& spec,
                          const Eigen::VectorXd& w, const Eigen::VectorXd& x) {
  if (w.size() != x.size() || w.size() != spec.theta.size())
    throw std::invalid_argument("correlation: dimension mismatch");
  double phi = 1.0;
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    phi *= correlation1d(spec.kind, spec.theta[j], w[j] - x[j]);
    if (phi == 0.0) break;
  }
  return phi;
}

// ---------------------------------------------------------------------------
// Training data and normalization
// ---------------------------------------------------------------------------

/// k design sites (rows) with their scalar responses.
struct TrainingSet {
  Eigen::MatrixXd sites;   // k x n
  Eigen::VectorXd values;  // k
};

inline void validate(const TrainingSet& ts) {
  if (ts.sites.rows() != ts.values.size())
    throw std::invalid_argument("training set: site/value count mismatch");
  if (ts.sites.rows() < ts.sites.cols() + 2)
    throw std::invalid_argument(
        "training set: need at least n+2 sites for a meaningful fit");
  if (!ts.sites.allFinite() || !ts.values.allFinite())
    throw std::invalid_argument("training set: non-finite entries");
}

/// Affine column statistics mapping raw data to zero-mean, unit-variance
/// coordinates. Constant site columns are degenerate (no scale); a constant
/// response keeps scale 1 so that flat data stays representable.
struct NormalizationStats {
  Eigen::VectorXd site_mean;
  Eigen::VectorXd site_std;
  double value_mean = 0.0;
  double value_std = 1.0;

  Eigen::VectorXd to_normalized(const Eigen::VectorXd& x) const {
    return (x - site_mean).cwiseQuotient(site_std);
  }
};

inline NormalizationStats compute_stats(const TrainingSet& ts) {
  validate(ts);
  const auto k = ts.sites.rows();
  const auto n = ts.sites.cols();
  NormalizationStats st;
  st.site_mean = ts.sites.colwise().mean();
  st.site_std.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double ss =
        (ts.sites.col(j).array() - st.site_mean[j]).square().sum();
    st.site_std[j] = std::sqrt(ss / static_cast<double>(k - 1));
    if (!(st.site_std[j] > 0.0))
      throw std::invalid_argument("normalize: constant design-site column");
  }
  st.value_mean = ts.values.mean();
  const double vss = (ts.values.array() - st.value_mean).square().sum();
  st.value_std = std::sqrt(vss / static_cast<double>(k - 1));
  if (!(st.value_std > 0.0)) st.value_std = 1.0;
  return st;
}

/// Thrown when the correlation matrix stays numerically singular after the
/// maximum jitter escalation.
struct FitFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Fitted model
// ---------------------------------------------------------------------------

/// Constant-basis kriging predictor fitted by generalized least squares
/// through a Cholesky factorization of the correlation matrix.
class KrigingModel {
 public:
  KrigingModel() = default;

  double predict(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd q = site_correlations(x);
    const double y_norm = zeta_ + q.dot(gamma_);
    return stats_.value_mean + stats_.value_std * y_norm;
  }

  /// Mean squared error estimate of the predictor (original response scale).
  double mse(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd q = site_correlations(x);
    const Eigen::VectorXd w = llt_.matrixL().solve(q);
    const double qt_qi_q = w.squaredNorm();
    const double ft_qi_q = lf_.dot(w);
    const double b = ft_qi_q - 1.0;  // constant basis: f(x) = 1
    const double phi = sigma2_ * (1.0 + b * b / ft_qi_f_ - qt_qi_q);
    return std::max(0.0, phi) * stats_.value_std * stats_.value_std;
  }

  const TrainingSet& training() const { return raw_; }
  const NormalizationStats& stats() const { return stats_; }
  const CorrelationSpec& correlation() const { return spec_; }
  double sigma2() const { return sigma2_; }
  double zeta() const { return zeta_; }
  /// Concentrated log-likelihood of the fitted theta (up to a constant).
  double log_likelihood() const { return loglik_; }

  friend KrigingModel fit(const TrainingSet&, Kernel, const Eigen::VectorXd&);

 private:
  Eigen::VectorXd site_correlations(const Eigen::VectorXd& x) const {
    if (!x.allFinite())
      throw std::invalid_argument("kriging: non-finite query point");
    const Eigen::VectorXd xn = stats_.to_normalized(x);
    const auto k = sites_norm_.rows();
    Eigen::VectorXd q(k);
    for (Eigen::Index i = 0; i < k; ++i)
      q[i] = mgtune::correlation(spec_, sites_norm_.row(i).transpose(), xn);
    return q;
  }

  TrainingSet raw_;
  Eigen::MatrixXd sites_norm_;
  NormalizationStats stats_;
  CorrelationSpec spec_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd gamma_;  // Q^{-1} (Y - F zeta)
  Eigen::VectorXd lf_;     // L^{-1} F
  double ft_qi_f_ = 0.0;
  double zeta_ = 0.0;
  double sigma2_ = 0.0;
  double loglik_ = 0.0;
};

/// Fits the model at a fixed theta. The correlation matrix receives a
/// baseline diagonal jitter (10+k)*eps that escalates by a factor 10 up to
/// three times if the Cholesky factorization fails; a matrix still singular
/// after that raises FitFailure.
inline KrigingModel fit(const TrainingSet& ts, Kernel kind,
                        const Eigen::VectorXd& theta) {
  validate(ts);
  KrigingModel m;
  m.raw_ = ts;
  m.stats_ = compute_stats(ts);
  m.spec_.kind = kind;
  m.spec_.theta = theta;
  validate(m.spec_);

  const auto k = ts.sites.rows();
  const auto n = ts.sites.cols();
  if (theta.size() != n)
    throw std::invalid_argument("fit: theta dimension mismatch");

  m.sites_norm_.resize(k, n);
  for (Eigen::Index i = 0; i < k; ++i)
    m.sites_norm_.row(i) = m.stats_.to_normalized(ts.sites.row(i).transpose());

  // Duplicate sites make the correlation matrix exactly singular.
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = i + 1; j < k; ++j)
      if ((m.sites_norm_.row(i) - m.sites_norm_.row(j)).norm() < 1e-6)
        throw std::invalid_argument(
            "fit: duplicate design sites (closer than 1e-6 normalized)");

  Eigen::MatrixXd q0(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    q0(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < k; ++j) {
      const double v = mgtune::correlation(
          m.spec_, m.sites_norm_.row(i).transpose(),
          m.sites_norm_.row(j).transpose());
      q0(i, j) = v;
      q0(j, i) = v;
    }
  }

  const double eps = std::numeric_limits<double>::epsilon();
  double jitter = (10.0 + static_cast<double>(k)) * eps;
  for (int attempt = 0;; ++attempt) {
    Eigen::MatrixXd q = q0;
    q.diagonal().array() += jitter;
    m.llt_.compute(q);
    if (m.llt_.info() == Eigen::Success) {
      // Guard against a semi-definite factorization slipping through.
      if (m.llt_.matrixLLT().diagonal().minCoeff() > 0.0) break;
    }
    if (attempt == 3)
      throw FitFailure("kriging fit: correlation matrix singular after jitter");
    jitter *= 10.0;
  }

  const Eigen::VectorXd f = Eigen::VectorXd::Ones(k);
  const Eigen::VectorXd y =
      (ts.values.array() - m.stats_.value_mean) / m.stats_.value_std;

  m.lf_ = m.llt_.matrixL().solve(f);
  const Eigen::VectorXd ly = m.llt_.matrixL().solve(y);
  m.ft_qi_f_ = m.lf_.squaredNorm();
  m.zeta_ = m.lf_.dot(ly) / m.ft_qi_f_;
  const Eigen::VectorXd lr = ly - m.zeta_ * m.lf_;  // L^{-1}(Y - F zeta)
  m.sigma2_ = lr.squaredNorm() / static_cast<double>(k);
  m.gamma_ =
      m.llt_.matrixU().solve(lr);  // Q^{-1}(Y - F zeta) via the second solve

  double logdet = 0.0;
  for (Eigen::Index i = 0; i < k; ++i)
    logdet += 2.0 * std::log(m.llt_.matrixLLT()(i, i));
  m.loglik_ = -static_cast<double>(k) *
                  std::log(std::max(m.sigma2_, 1e-300)) -
              logdet;
  return m;
}

// ---------------------------------------------------------------------------
// Maximum-likelihood range search
// ---------------------------------------------------------------------------

/// Hooke-Jeeves pattern search on log(theta) maximizing the concentrated
/// log-likelihood, budget-capped. Returns the best model found; the returned
/// likelihood is never below the starting point's.
inline KrigingModel fit_mle(const TrainingSet& ts, Kernel kind,
                            int max_evals = 200,
                            const Eigen::VectorXd& theta_start = {}) {
  validate(ts);
  const auto n = ts.sites.cols();
  Eigen::VectorXd t0 =
      theta_start.size() == n
          ? theta_start.array().log().matrix().eval()
          : Eigen::VectorXd::Zero(n).eval();  // theta = 1
  const double t_lo = std::log(kThetaMin), t_hi = std::log(kThetaMax);
  auto clamp_log = [&](Eigen::VectorXd t) {
    for (Eigen::Index j = 0; j < t.size(); ++j)
      t[j] = std::clamp(t[j], t_lo, t_hi);
    return t;
  };
  t0 = clamp_log(t0);

  int evals = 0;
  bool have_best = false;
  KrigingModel best;
  double best_ll = -std::numeric_limits<double>::infinity();

  auto evaluate = [&](const Eigen::VectorXd& t) -> double {
    if (evals >= max_evals) return -std::numeric_limits<double>::infinity();
    ++evals;
    try {
      KrigingModel m = fit(ts, kind, t.array().exp().matrix());
      const double ll = m.log_likelihood();
      if (!have_best || ll > best_ll) {
        best_ll = ll;
        best = std::move(m);
        have_best = true;
      }
      return ll;
    } catch (const FitFailure&) {
      return -std::numeric_limits<double>::infinity();
    }
  };

  double f_base = evaluate(t0);
  Eigen::VectorXd base = t0;
  Eigen::VectorXd prev = base;
  double h = 1.0;  // natural-log step: one factor of e

  while (evals < max_evals && h > 1e-2) {
    // Exploratory sweep around the base point.
    Eigen::VectorXd trial = base;
    double f_trial = f_base;
    for (Eigen::Index j = 0; j < n && evals < max_evals; ++j) {
      for (double dir : {+1.0, -1.0}) {
        Eigen::VectorXd probe = trial;
        probe[j] = std::clamp(probe[j] + dir * h, t_lo, t_hi);
        if (probe[j] == trial[j]) continue;
        const double f_probe = evaluate(probe);
        if (f_probe > f_trial) {
          trial = probe;
          f_trial = f_probe;
          break;
        }
        if (evals >= max_evals) break;
      }
    }

    if (f_trial > f_base) {
      // Pattern move: extrapolate along the improving direction.
      const Eigen::VectorXd pattern = clamp_log(trial + (trial - base));
      prev = base;
      base = trial;
      f_base = f_trial;
      if (evals < max_evals && (pattern - base).norm() > 0.0) {
        const double f_pat = evaluate(pattern);
        if (f_pat > f_base) {
          prev = base;
          base = pattern;
          f_base = f_pat;
        }
      }
    } else {
      h *= 0.5;
    }
  }

  if (!have_best)
    throw FitFailure("kriging fit: no theta produced a usable factorization");
  return best;
}

}  // namespace mgtune
