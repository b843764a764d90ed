#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <vector>

#include "mgtune/ga.hpp"

using namespace mgtune;

namespace {

double sphere(const Eigen::VectorXd& x) { return x.squaredNorm(); }

GAConfig base_config(std::uint64_t seed) {
  GAConfig cfg;
  cfg.bounds = fopid_bounds();
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("population of 10 over 15 generations costs exactly 150 evaluations",
          "[ga]") {
  int calls = 0;
  auto counted = [&](const Eigen::VectorXd& x) {
    ++calls;
    return sphere(x);
  };
  const OptResult res = ga_optimize(counted, base_config(5));
  REQUIRE(calls == 150);
  REQUIRE(res.evaluations == 150);
  REQUIRE(res.history.size() == 150);
}

TEST_CASE("every individual respects the bounds and the best curve is exact",
          "[ga]") {
  const GAConfig cfg = base_config(12);
  const OptResult res = ga_optimize(sphere, cfg);

  double best = std::numeric_limits<double>::infinity();
  for (const auto& h : res.history) {
    for (Eigen::Index j = 0; j < h.x.size(); ++j) {
      REQUIRE(h.x[j] >= cfg.bounds.lo[j]);
      REQUIRE(h.x[j] <= cfg.bounds.hi[j]);
    }
    best = std::min(best, h.j);
    REQUIRE(h.best == best);
  }
  REQUIRE(res.best_j == best);
  REQUIRE(res.best_j == sphere(res.best_x));
}

TEST_CASE("identical seeds replay the identical evolution", "[ga]") {
  const OptResult a = ga_optimize(sphere, base_config(33));
  const OptResult b = ga_optimize(sphere, base_config(33));
  const OptResult c = ga_optimize(sphere, base_config(34));

  REQUIRE(a.history.size() == b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    REQUIRE(a.history[i].x == b.history[i].x);
    REQUIRE(a.history[i].j == b.history[i].j);
  }
  REQUIRE(a.best_x == b.best_x);

  bool differs = false;
  for (std::size_t i = 0; i < c.history.size() && !differs; ++i)
    differs = (a.history[i].j != c.history[i].j);
  REQUIRE(differs);
}

TEST_CASE("sphere benchmark improves at least tenfold from the first "
          "generation",
          "[ga]") {
  std::vector<double> ratios;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const OptResult res = ga_optimize(sphere, base_config(seed));
    double gen0_best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 10; ++i)
      gen0_best = std::min(gen0_best, res.history[i].j);
    ratios.push_back(gen0_best / res.best_j);
  }
  std::sort(ratios.begin(), ratios.end());
  const double median = 0.5 * (ratios[4] + ratios[5]);
  REQUIRE(median >= 10.0);
}

TEST_CASE("configuration validation rejects inconsistent settings", "[ga]") {
  GAConfig cfg = base_config(1);
  REQUIRE_NOTHROW(validate(cfg));

  GAConfig bad = cfg;
  bad.elite_count = bad.population;
  REQUIRE_THROWS_AS(validate(bad), std::invalid_argument);

  bad = cfg;
  bad.crossover_fraction = 0.7;  // 0.7 + 0.2 leaves an unassigned slot share
  REQUIRE_THROWS_AS(validate(bad), std::invalid_argument);

  bad = cfg;
  bad.mutation_fraction = -0.1;
  REQUIRE_THROWS_AS(validate(bad), std::invalid_argument);

  bad = cfg;
  bad.population = 0;
  REQUIRE_THROWS_AS(validate(bad), std::invalid_argument);

  bad = cfg;
  bad.generations = 0;
  REQUIRE_THROWS_AS(validate(bad), std::invalid_argument);

  bad = cfg;
  bad.mutation_scale = 0.0;
  REQUIRE_THROWS_AS(validate(bad), std::invalid_argument);
}
