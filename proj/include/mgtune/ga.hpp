#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "mgtune/rng.hpp"
#include "mgtune/surrogate_opt.hpp"

namespace mgtune {

// ---------------------------------------------------------------------------
// Real-coded genetic algorithm baseline
// ---------------------------------------------------------------------------

struct GAConfig {
  int population = 10;
  int generations = 15;
  int elite_count = 2;
  double crossover_fraction = 0.8;
  double mutation_fraction = 0.2;
  double mutation_scale = 0.1;  // gaussian sigma as a fraction of range
  double blend_alpha = 0.5;     // blend-crossover expansion beyond the parents
  Bounds bounds;
  std::uint64_t seed = 0;
};

inline void validate(const GAConfig& cfg) {
  validate(cfg.bounds);
  if (cfg.population < 2)
    throw std::invalid_argument("ga: population must be at least 2");
  if (cfg.generations < 1)
    throw std::invalid_argument("ga: need at least one generation");
  if (cfg.elite_count < 0 || cfg.elite_count >= cfg.population)
    throw std::invalid_argument("ga: elite count must be below population");
  if (!(cfg.crossover_fraction >= 0.0 && cfg.crossover_fraction <= 1.0) ||
      !(cfg.mutation_fraction >= 0.0 && cfg.mutation_fraction <= 1.0))
    throw std::invalid_argument("ga: fractions must lie in [0,1]");
  if (std::abs(cfg.crossover_fraction + cfg.mutation_fraction - 1.0) > 1e-12)
    throw std::invalid_argument(
        "ga: crossover and mutation fractions must partition the offspring");
  if (!(cfg.mutation_scale > 0.0))
    throw std::invalid_argument("ga: mutation scale must be positive");
  if (!(cfg.blend_alpha >= 0.0))
    throw std::invalid_argument("ga: blend expansion must be non-negative");
}

/// Budget-exact generational loop: the uniform initial population costs
/// `population` evaluations, and each of the remaining generations produces
/// and evaluates a full batch of `population` offspring (crossover_fraction
/// of the slots by blend crossover, the rest by clipped gaussian mutation),
/// so the counter lands on exactly population*generations. The elite
/// individuals survive in the parent pool with cached fitness and are never
/// re-evaluated; survivors are the elites plus the best offspring. Parents
/// are drawn by linear rank selection. Blend crossover draws each child
/// coordinate uniformly from the parents' interval widened by blend_alpha
/// times its length on both sides (clipped to bounds); interpolation-only
/// blending cannot reach past the population's hull toward a boundary
/// optimum, which on corner-seeking problems stalls convergence well short
/// of what the widened draw achieves.
inline OptResult ga_optimize(
    const std::function<double(const Eigen::VectorXd&)>& objective,
    const GAConfig& cfg) {
  validate(cfg);
  const Bounds& bounds = cfg.bounds;
  const auto n = bounds.dim();
  const Eigen::VectorXd range = bounds.range();
  const int pop_n = cfg.population;

  std::mt19937_64 rng(splitmix64(cfg.seed * 0x9e3779b9ull + 17));

  struct Individual {
    Eigen::VectorXd x;
    double j = std::numeric_limits<double>::infinity();
  };

  OptResult res;
  auto spend = [&](const Eigen::VectorXd& x) {
    const double j = objective(x);
    ++res.evaluations;
    if (j < res.best_j) {
      res.best_j = j;
      res.best_x = x;
    }
    res.history.push_back({x, j, res.best_j});
    return j;
  };

  // Linear rank selection over a population sorted best-first: the r-th
  // ranked individual is drawn with weight pop_n - r.
  auto select_parent = [&](const std::vector<Individual>& pop) -> const Individual& {
    const double total = 0.5 * pop_n * (pop_n + 1);
    double ticket = uniform01(rng) * total;
    for (int r = 0; r < pop_n; ++r) {
      ticket -= static_cast<double>(pop_n - r);
      if (ticket <= 0.0) return pop[static_cast<std::size_t>(r)];
    }
    return pop.back();
  };

  std::vector<Individual> pop(static_cast<std::size_t>(pop_n));
  for (auto& ind : pop) {
    ind.x.resize(n);
    for (Eigen::Index j = 0; j < n; ++j)
      ind.x[j] = bounds.lo[j] + range[j] * uniform01(rng);
    ind.j = spend(ind.x);
  }
  auto by_fitness = [](const Individual& a, const Individual& b) {
    return a.j < b.j;
  };
  std::stable_sort(pop.begin(), pop.end(), by_fitness);

  const int n_cross = static_cast<int>(
      std::lround(cfg.crossover_fraction * static_cast<double>(pop_n)));

  for (int gen = 1; gen < cfg.generations; ++gen) {
    std::vector<Individual> offspring(static_cast<std::size_t>(pop_n));
    for (int i = 0; i < pop_n; ++i) {
      Eigen::VectorXd child(n);
      if (i < n_cross) {
        const Individual& p1 = select_parent(pop);
        const Individual& p2 = select_parent(pop);
        for (Eigen::Index j = 0; j < n; ++j) {
          const double lo = std::min(p1.x[j], p2.x[j]);
          const double hi = std::max(p1.x[j], p2.x[j]);
          const double d = hi - lo;
          child[j] = lo - cfg.blend_alpha * d +
                     (1.0 + 2.0 * cfg.blend_alpha) * d * uniform01(rng);
        }
      } else {
        const Individual& p = select_parent(pop);
        for (Eigen::Index j = 0; j < n; ++j)
          child[j] = p.x[j] + cfg.mutation_scale * range[j] * normal01(rng);
      }
      offspring[static_cast<std::size_t>(i)].x = bounds.clip(child);
      offspring[static_cast<std::size_t>(i)].j =
          spend(offspring[static_cast<std::size_t>(i)].x);
    }
    std::stable_sort(offspring.begin(), offspring.end(), by_fitness);

    // Survivors: cached elites plus the best offspring fill the population.
    std::vector<Individual> next;
    next.reserve(static_cast<std::size_t>(pop_n));
    for (int e = 0; e < cfg.elite_count; ++e)
      next.push_back(pop[static_cast<std::size_t>(e)]);
    for (int i = 0; next.size() < static_cast<std::size_t>(pop_n); ++i)
      next.push_back(offspring[static_cast<std::size_t>(i)]);
    std::stable_sort(next.begin(), next.end(), by_fitness);
    pop = std::move(next);
  }
  return res;
}

}  // namespace mgtune
