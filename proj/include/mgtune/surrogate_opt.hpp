#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "mgtune/kriging.hpp"
#include "mgtune/rng.hpp"

namespace mgtune {

// ---------------------------------------------------------------------------
// Search-space description shared by both optimizers
// ---------------------------------------------------------------------------

struct Bounds {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  Eigen::Index dim() const { return lo.size(); }
  Eigen::VectorXd range() const { return hi - lo; }
  Eigen::VectorXd clip(Eigen::VectorXd x) const {
    for (Eigen::Index j = 0; j < x.size(); ++j)
      x[j] = std::clamp(x[j], lo[j], hi[j]);
    return x;
  }
};

inline void validate(const Bounds& b) {
  if (b.lo.size() != b.hi.size() || b.lo.size() == 0)
    throw std::invalid_argument("bounds: dimension mismatch");
  for (Eigen::Index j = 0; j < b.lo.size(); ++j)
    if (!(b.lo[j] < b.hi[j]))
      throw std::invalid_argument("bounds: lo must be below hi");
}

/// Gains in [0,5]^3 and both fractional orders in [0,2].
inline Bounds fopid_bounds() {
  Bounds b;
  b.lo = Eigen::VectorXd::Zero(5);
  b.hi.resize(5);
  b.hi << 5.0, 5.0, 5.0, 2.0, 2.0;
  return b;
}

/// Gains in [0,5]^3 with both orders hard-fixed at 1 outside the search.
inline Bounds pid_bounds() {
  Bounds b;
  b.lo = Eigen::VectorXd::Zero(3);
  b.hi = Eigen::VectorXd::Constant(3, 5.0);
  return b;
}

/// One expensive evaluation in an optimization run.
struct HistoryEntry {
  Eigen::VectorXd x;
  double j = 0.0;
  double best = 0.0;  // best-so-far after this evaluation
};

struct OptResult {
  Eigen::VectorXd best_x;
  double best_j = std::numeric_limits<double>::infinity();
  std::vector<HistoryEntry> history;
  int evaluations = 0;
};

// ---------------------------------------------------------------------------
// Symmetric Latin hypercube design
// ---------------------------------------------------------------------------

/// k-point symmetric Latin hypercube over the bounds: every column hits each
/// of the k equal strata exactly once (points at stratum midpoints), and rows
/// come in pairs with s_i + s_pair = lo + hi. Strata pair (v, k-1-v) is
/// assigned to a random row pair with random orientation, independently per
/// column.
inline Eigen::MatrixXd slhs(int k, const Bounds& bounds, std::uint64_t seed) {
  validate(bounds);
  const auto n = bounds.dim();
  if (k % 2 != 0) throw std::invalid_argument("slhs: k must be even");
  if (k < 2 * n) throw std::invalid_argument("slhs: k must be at least 2n");

  std::mt19937_64 rng(splitmix64(seed));
  Eigen::MatrixXd design(k, n);
  std::vector<int> pair_order(k / 2);
  for (Eigen::Index j = 0; j < n; ++j) {
    std::iota(pair_order.begin(), pair_order.end(), 0);
    // Fisher-Yates on the stratum pairs.
    for (int i = k / 2 - 1; i > 0; --i) {
      const int r = static_cast<int>(uniform01(rng) * (i + 1));
      std::swap(pair_order[i], pair_order[std::min(r, i)]);
    }
    for (int i = 0; i < k / 2; ++i) {
      int a = pair_order[i];
      int b = k - 1 - a;
      if (uniform01(rng) < 0.5) std::swap(a, b);
      design(i, j) = (a + 0.5) / k;
      design(k - 1 - i, j) = (b + 0.5) / k;
    }
  }
  for (int i = 0; i < k; ++i)
    design.row(i) = (bounds.lo +
                     design.row(i).transpose().cwiseProduct(bounds.range()))
                        .transpose();
  return design;
}

// ---------------------------------------------------------------------------
// Candidate-point infill
// ---------------------------------------------------------------------------

struct InfillConfig {
  int n_perturbed = 500;
  int n_uniform = 500;
  double perturbation_scale = 0.2;  // gaussian sigma as a fraction of range
  std::vector<double> weight_cycle{0.3, 0.5, 0.8, 0.95};
  double duplicate_tol = 1e-6;  // in range-normalized coordinates
  int initial_design = 50;
  int mle_evals = 200;        // likelihood budget for the first model fit
  int mle_refit_evals = 50;   // warm-started budget for each model update
};

inline void validate(const InfillConfig& cfg) {
  if (cfg.n_perturbed < 0 || cfg.n_uniform < 0 ||
      cfg.n_perturbed + cfg.n_uniform == 0)
    throw std::invalid_argument("infill: need a positive candidate count");
  if (!(cfg.perturbation_scale >= 0.0))
    throw std::invalid_argument("infill: negative perturbation scale");
  if (cfg.weight_cycle.empty())
    throw std::invalid_argument("infill: empty weight cycle");
  for (double w : cfg.weight_cycle)
    if (!(w >= 0.0 && w <= 1.0))
      throw std::invalid_argument("infill: weights must lie in [0,1]");
  if (cfg.initial_design < 2 || cfg.initial_design % 2 != 0)
    throw std::invalid_argument("infill: initial design must be even and >= 2");
  if (cfg.mle_evals < 1 || cfg.mle_refit_evals < 1)
    throw std::invalid_argument("infill: likelihood budgets must be positive");
}

namespace detail {

/// Distance in range-normalized coordinates (each axis scaled to unit width),
/// making the duplicate tolerance and the exploration criterion scale-free.
inline double normalized_distance(const Eigen::VectorXd& a,
                                  const Eigen::VectorXd& b,
                                  const Eigen::VectorXd& range) {
  return ((a - b).cwiseQuotient(range)).norm();
}

inline double min_site_distance(const Eigen::VectorXd& x,
                                const Eigen::MatrixXd& sites,
                                const Eigen::VectorXd& range) {
  double d = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < sites.rows(); ++i)
    d = std::min(d, normalized_distance(x, sites.row(i).transpose(), range));
  return d;
}

}  // namespace detail

/// Two candidate groups: gaussian perturbations of the incumbent best
/// (sigma = perturbation_scale * range per coordinate, clipped to bounds) and
/// uniform draws over the whole box. Candidates landing within the duplicate
/// tolerance of an already-sampled site are dropped.
inline std::vector<Eigen::VectorXd> propose_candidates(
    const Eigen::VectorXd& best, const Bounds& bounds, const InfillConfig& cfg,
    const Eigen::MatrixXd& sites, std::mt19937_64& rng) {
  validate(cfg);
  const auto n = bounds.dim();
  const Eigen::VectorXd range = bounds.range();
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<std::size_t>(cfg.n_perturbed + cfg.n_uniform));

  auto keep = [&](const Eigen::VectorXd& c) {
    return detail::min_site_distance(c, sites, range) >= cfg.duplicate_tol;
  };

  for (int i = 0; i < cfg.n_perturbed; ++i) {
    Eigen::VectorXd c(n);
    for (Eigen::Index j = 0; j < n; ++j)
      c[j] = best[j] + cfg.perturbation_scale * range[j] * normal01(rng);
    c = bounds.clip(c);
    if (keep(c)) out.push_back(std::move(c));
  }
  for (int i = 0; i < cfg.n_uniform; ++i) {
    Eigen::VectorXd c(n);
    for (Eigen::Index j = 0; j < n; ++j)
      c[j] = bounds.lo[j] + range[j] * uniform01(rng);
    if (keep(c)) out.push_back(std::move(c));
  }
  return out;
}

/// Scores candidates by w_rs * V_rs + (1 - w_rs) * V_dist, where V_rs is the
/// min-max-normalized surrogate prediction (lower is better) and V_dist is
/// the min-max-normalized negated distance to the sampled set (so the
/// farthest candidate scores 0). With model == nullptr the selection falls
/// back to the distance criterion alone.
inline std::size_t score_and_select(const KrigingModel* model,
                                    const std::vector<Eigen::VectorXd>& cands,
                                    const Eigen::MatrixXd& sites,
                                    const Bounds& bounds, double w_rs) {
  if (cands.empty())
    throw std::invalid_argument("score_and_select: empty candidate set");
  const Eigen::VectorXd range = bounds.range();
  const std::size_t m = cands.size();

  std::vector<double> dist(m);
  for (std::size_t i = 0; i < m; ++i)
    dist[i] = detail::min_site_distance(cands[i], sites, range);
  const auto [dmin_it, dmax_it] = std::minmax_element(dist.begin(), dist.end());
  const double dmin = *dmin_it, dmax = *dmax_it;

  std::vector<double> pred(m, 0.0);
  double pmin = 0.0, pmax = 0.0;
  if (model != nullptr) {
    for (std::size_t i = 0; i < m; ++i) pred[i] = model->predict(cands[i]);
    const auto [a, b] = std::minmax_element(pred.begin(), pred.end());
    pmin = *a;
    pmax = *b;
  }

  auto minmax_norm = [](double v, double lo, double hi) {
    return hi > lo ? (v - lo) / (hi - lo) : 0.0;
  };

  std::size_t best_i = 0;
  double best_score = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    const double v_dist = minmax_norm(dmax - dist[i], 0.0, dmax - dmin);
    const double score =
        model != nullptr
            ? w_rs * minmax_norm(pred[i], pmin, pmax) + (1.0 - w_rs) * v_dist
            : v_dist;
    if (score < best_score) {
      best_score = score;
      best_i = i;
    }
  }
  return best_i;
}

// ---------------------------------------------------------------------------
// The optimization loop
// ---------------------------------------------------------------------------

/// Kriging-guided minimization of an expensive objective: evaluate a
/// symmetric Latin hypercube design, then repeatedly fit the surrogate
/// (maximum-likelihood ranges, warm-started between iterations), propose
/// candidates around the incumbent and across the box, pick one by the cycled
/// response-surface/distance score, and spend one expensive evaluation on it.
/// Consumes exactly `budget` objective calls; if a surrogate fit fails the
/// iteration falls back to the pure distance criterion.
inline OptResult optimize_kriging(
    const std::function<double(const Eigen::VectorXd&)>& objective,
    const Bounds& bounds, Kernel kind, int budget, std::uint64_t seed,
    const InfillConfig& cfg = {}) {
  validate(bounds);
  validate(cfg);
  if (budget < cfg.initial_design)
    throw std::invalid_argument(
        "optimize: budget cannot be below the initial design size");

  std::mt19937_64 rng(splitmix64(seed * 2654435761ull + 1));
  const Eigen::VectorXd range = bounds.range();
  const auto n = bounds.dim();

  OptResult res;
  Eigen::MatrixXd sites(budget, n);
  Eigen::VectorXd values(budget);
  int k = 0;

  auto spend = [&](const Eigen::VectorXd& x) {
    const double j = objective(x);
    sites.row(k) = x.transpose();
    values[k] = j;
    ++k;
    ++res.evaluations;
    if (j < res.best_j) {
      res.best_j = j;
      res.best_x = x;
    }
    res.history.push_back({x, j, res.best_j});
  };

  const Eigen::MatrixXd design = slhs(cfg.initial_design, bounds, seed);
  for (int i = 0; i < cfg.initial_design && k < budget; ++i)
    spend(design.row(i).transpose());

  Eigen::VectorXd theta_warm;
  for (int iter = 0; k < budget; ++iter) {
    const double w_rs = cfg.weight_cycle[iter % cfg.weight_cycle.size()];

    const KrigingModel* model_ptr = nullptr;
    KrigingModel model;
    try {
      TrainingSet ts{sites.topRows(k), values.head(k)};
      model = theta_warm.size() == n
                  ? fit_mle(ts, kind, cfg.mle_refit_evals, theta_warm)
                  : fit_mle(ts, kind, cfg.mle_evals);
      theta_warm = model.correlation().theta;
      model_ptr = &model;
    } catch (const std::exception&) {
      // Singular or degenerate model: explore by distance this iteration.
      model_ptr = nullptr;
    }

    auto cands =
        propose_candidates(res.best_x, bounds, cfg, sites.topRows(k), rng);
    if (cands.empty())
      cands =
          propose_candidates(res.best_x, bounds, cfg, sites.topRows(k), rng);
    Eigen::VectorXd next(n);
    if (cands.empty()) {
      for (Eigen::Index j = 0; j < n; ++j)
        next[j] = bounds.lo[j] + range[j] * uniform01(rng);
    } else {
      next = cands[score_and_select(model_ptr, cands, sites.topRows(k),
                                    bounds, w_rs)];
    }
    spend(next);
  }
  return res;
}

}  // namespace mgtune
