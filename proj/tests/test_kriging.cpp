#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <random>

#include "mgtune/kriging.hpp"

using namespace mgtune;

namespace {

TrainingSet random_training(int k, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  TrainingSet ts;
  ts.sites.resize(k, n);
  ts.values.resize(k);
  for (int i = 0; i < k; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) {
      ts.sites(i, j) = 5.0 * unif(rng);
      s += (ts.sites(i, j) - 2.0) * (ts.sites(i, j) - 2.0);
    }
    ts.values[i] = s + std::sin(3.0 * ts.sites(i, 0));
  }
  return ts;
}

Eigen::VectorXd constant_theta(int n, double v) {
  return Eigen::VectorXd::Constant(n, v);
}

}  // namespace

TEST_CASE("one-dimensional kernels match their closed forms") {
  for (Kernel k : kAllKernels) {
    CHECK(correlation1d(k, 0.7, 0.0) == 1.0);
    // Even in the distance argument.
    CHECK(correlation1d(k, 0.7, 0.31) ==
          Catch::Approx(correlation1d(k, 0.7, -0.31)).epsilon(1e-15));
  }

  CHECK(correlation1d(Kernel::exponential, 2.0, 0.5) ==
        Catch::Approx(std::exp(-1.0)));
  CHECK(correlation1d(Kernel::gaussian, 2.0, 0.5) ==
        Catch::Approx(std::exp(-0.5)));
  CHECK(correlation1d(Kernel::linear, 2.0, 0.25) == Catch::Approx(0.5));

  // Spherical closes its support smoothly: 1 - 1.5 + 0.5 = 0 exactly.
  CHECK(correlation1d(Kernel::spherical, 1.0, 1.0) == 0.0);
  CHECK(correlation1d(Kernel::spherical, 1.0, 5.0) == 0.0);
  CHECK(correlation1d(Kernel::spherical, 2.0, 0.25) ==
        Catch::Approx(1.0 - 1.5 * 0.5 + 0.5 * 0.125));

  // Spline branches agree at the seam xi = 0.2 (both give 0.64).
  CHECK(correlation1d(Kernel::spline, 1.0, 0.2) == Catch::Approx(0.64));
  CHECK(correlation1d(Kernel::spline, 1.0, 0.2 + 1e-12) ==
        Catch::Approx(0.64).margin(1e-9));
  CHECK(correlation1d(Kernel::spline, 1.0, 0.5) ==
        Catch::Approx(1.25 * 0.125));
  CHECK(correlation1d(Kernel::spline, 1.0, 1.0) == 0.0);

  // Compact support is exact for linear, spherical, spline.
  for (Kernel k : {Kernel::linear, Kernel::spherical, Kernel::spline}) {
    CHECK(correlation1d(k, 4.0, 0.25) == 0.0);
    CHECK(correlation1d(k, 4.0, 10.0) == 0.0);
  }
}

TEST_CASE("product correlation multiplies coordinates and is symmetric") {
  CorrelationSpec spec{Kernel::gaussian, constant_theta(3, 1.5)};
  Eigen::VectorXd w(3), x(3);
  w << 0.1, 0.4, -0.2;
  x << 0.3, 0.0, 0.5;
  double expect = 1.0;
  for (int j = 0; j < 3; ++j)
    expect *= std::exp(-1.5 * (w[j] - x[j]) * (w[j] - x[j]));
  CHECK(correlation(spec, w, x) == Catch::Approx(expect).epsilon(1e-15));
  CHECK(correlation(spec, w, x) == correlation(spec, x, w));
  CHECK(correlation(spec, w, w) == 1.0);

  // One out-of-support coordinate zeroes the whole product.
  CorrelationSpec lin{Kernel::linear, constant_theta(3, 2.0)};
  Eigen::VectorXd far = x;
  far[1] = x[1] + 0.6;  // theta*|d| = 1.2 >= 1
  CHECK(correlation(lin, x, far) == 0.0);
}

TEST_CASE("theta bounds are enforced") {
  CorrelationSpec spec{Kernel::gaussian, constant_theta(2, 1e-4)};
  CHECK_THROWS_AS(validate(spec), std::invalid_argument);
  spec.theta = constant_theta(2, 25.0);
  CHECK_THROWS_AS(validate(spec), std::invalid_argument);
  spec.theta = constant_theta(2, 1.0);
  CHECK_NOTHROW(validate(spec));
}

TEST_CASE("normalization produces zero mean and unit sample variance") {
  TrainingSet ts;
  ts.sites.resize(3, 1);
  ts.sites << 0.0, 1.0, 2.0;
  ts.values.resize(3);
  ts.values << 5.0, 7.0, 12.0;
  const auto st = compute_stats(ts);
  CHECK(st.site_mean[0] == Catch::Approx(1.0));
  CHECK(st.site_std[0] == Catch::Approx(1.0));  // sample std of {0,1,2}

  // Normalized columns really have mean 0, sample variance 1.
  Eigen::VectorXd col(3);
  for (int i = 0; i < 3; ++i)
    col[i] = st.to_normalized(ts.sites.row(i).transpose())[0];
  CHECK(col.mean() == Catch::Approx(0.0).margin(1e-12));
  CHECK((col.array() - col.mean()).square().sum() / 2.0 ==
        Catch::Approx(1.0).epsilon(1e-12));

  // Round trip back to raw coordinates.
  const Eigen::VectorXd xn = st.to_normalized(ts.sites.row(2).transpose());
  CHECK(xn[0] * st.site_std[0] + st.site_mean[0] ==
        Catch::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("degenerate training data is rejected") {
  TrainingSet ts = random_training(8, 2, 1);
  ts.sites.col(1).setConstant(3.0);
  CHECK_THROWS_AS(compute_stats(ts), std::invalid_argument);

  TrainingSet small = random_training(3, 2, 2);
  CHECK_THROWS_AS(fit(small, Kernel::gaussian, constant_theta(2, 1.0)),
                  std::invalid_argument);

  TrainingSet dup = random_training(8, 2, 3);
  dup.sites.row(5) = dup.sites.row(2);
  CHECK_THROWS_AS(fit(dup, Kernel::gaussian, constant_theta(2, 1.0)),
                  std::invalid_argument);
}

TEST_CASE("every kernel interpolates its training data") {
  const TrainingSet ts = random_training(20, 3, 11);
  const double scale = 1.0 + ts.values.cwiseAbs().maxCoeff();
  for (Kernel k : kAllKernels) {
    const auto m = fit(ts, k, constant_theta(3, 2.0));
    double worst = 0.0, worst_mse = 0.0;
    for (int i = 0; i < 20; ++i) {
      const Eigen::VectorXd x = ts.sites.row(i).transpose();
      worst = std::max(worst, std::abs(m.predict(x) - ts.values[i]));
      worst_mse = std::max(worst_mse, m.mse(x));
    }
    INFO(kernel_name(k));
    CHECK(worst <= 1e-8 * scale);
    CHECK(worst_mse <= 1e-8 * scale * scale);
  }
}

TEST_CASE("generalized least squares matches the dense-inverse oracle") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const TrainingSet ts = random_training(8, 3, 100 + seed);
    const auto m = fit(ts, Kernel::gaussian, constant_theta(3, 1.0));

    // Rebuild the jittered correlation matrix from public state.
    const int k = 8;
    Eigen::MatrixXd sn(k, 3);
    for (int i = 0; i < k; ++i)
      sn.row(i) = m.stats().to_normalized(ts.sites.row(i).transpose());
    Eigen::MatrixXd q(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        q(i, j) = correlation(m.correlation(), sn.row(i).transpose(),
                              sn.row(j).transpose());
    q.diagonal().array() +=
        (10.0 + k) * std::numeric_limits<double>::epsilon();

    const Eigen::MatrixXd qinv = q.inverse();
    const Eigen::VectorXd f = Eigen::VectorXd::Ones(k);
    const Eigen::VectorXd y =
        (ts.values.array() - m.stats().value_mean) / m.stats().value_std;
    const double zeta_dense =
        (f.dot(qinv * y)) / (f.dot(qinv * f));
    const Eigen::VectorXd r = y - zeta_dense * f;
    const double sigma2_dense = r.dot(qinv * r) / k;

    CHECK(m.zeta() == Catch::Approx(zeta_dense).margin(1e-10));
    CHECK(m.sigma2() ==
          Catch::Approx(sigma2_dense).epsilon(1e-10).margin(1e-12));
  }
}

TEST_CASE("constant responses predict the constant everywhere") {
  TrainingSet ts = random_training(10, 2, 21);
  ts.values.setConstant(4.2);
  const auto m = fit(ts, Kernel::spline, constant_theta(2, 1.0));
  Eigen::VectorXd x(2);
  x << 1.0, 3.0;
  CHECK(m.predict(x) == Catch::Approx(4.2).epsilon(1e-12));
  x << -7.0, 40.0;
  CHECK(m.predict(x) == Catch::Approx(4.2).epsilon(1e-12));
}

TEST_CASE("far extrapolation falls back to the regression mean") {
  const TrainingSet ts = random_training(12, 2, 31);
  const auto m = fit(ts, Kernel::gaussian, constant_theta(2, 5.0));
  Eigen::VectorXd far(2);
  far << 1e4, -1e4;
  const double mean_pred =
      m.stats().value_mean + m.stats().value_std * m.zeta();
  CHECK(m.predict(far) == Catch::Approx(mean_pred).epsilon(1e-12));

  // With all correlations zero the error estimate reaches its ceiling
  // sigma^2 (1 + 1/(F' Q^-1 F)) in normalized units.
  Eigen::MatrixXd sn(12, 2);
  for (int i = 0; i < 12; ++i)
    sn.row(i) = m.stats().to_normalized(ts.sites.row(i).transpose());
  Eigen::MatrixXd q(12, 12);
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j)
      q(i, j) = correlation(m.correlation(), sn.row(i).transpose(),
                            sn.row(j).transpose());
  q.diagonal().array() +=
      (10.0 + 12) * std::numeric_limits<double>::epsilon();
  const Eigen::VectorXd f = Eigen::VectorXd::Ones(12);
  const double ft_qi_f = f.dot(q.inverse() * f);
  const double ceiling = m.sigma2() * (1.0 + 1.0 / ft_qi_f) *
                         m.stats().value_std * m.stats().value_std;
  CHECK(m.mse(far) == Catch::Approx(ceiling).epsilon(1e-9));
}

TEST_CASE("error estimate is nonnegative and grows away from the data") {
  const TrainingSet ts = random_training(15, 2, 41);
  for (Kernel k : kAllKernels) {
    const auto m = fit(ts, k, constant_theta(2, 1.0));
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(-1.0, 6.0);
    for (int trial = 0; trial < 1000; ++trial) {
      Eigen::VectorXd x(2);
      x << unif(rng), unif(rng);
      INFO(kernel_name(k));
      REQUIRE(m.mse(x) >= 0.0);
    }
  }

  // Strict positivity off the data for the globally supported kernels.
  for (Kernel k : {Kernel::gaussian, Kernel::exponential}) {
    const auto m = fit(ts, k, constant_theta(2, 1.0));
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> unif(0.0, 5.0);
    int tested = 0;
    while (tested < 50) {
      Eigen::VectorXd x(2);
      x << unif(rng), unif(rng);
      double dmin = std::numeric_limits<double>::infinity();
      for (int i = 0; i < ts.sites.rows(); ++i) {
        const Eigen::VectorXd dn = m.stats().to_normalized(x) -
                                   m.stats().to_normalized(
                                       ts.sites.row(i).transpose());
        dmin = std::min(dmin, dn.norm());
      }
      if (dmin < 0.1) continue;
      ++tested;
      INFO(kernel_name(k));
      REQUIRE(m.mse(x) > 0.0);
    }
  }
}

TEST_CASE("one-dimensional quadratic is recovered exactly at the sites") {
  TrainingSet ts;
  ts.sites.resize(5, 1);
  ts.sites << 0.0, 0.5, 1.0, 1.5, 2.0;
  ts.values.resize(5);
  for (int i = 0; i < 5; ++i) ts.values[i] = ts.sites(i, 0) * ts.sites(i, 0);
  const auto m = fit(ts, Kernel::gaussian, constant_theta(1, 1.0));
  for (int i = 0; i < 5; ++i)
    CHECK(m.predict(ts.sites.row(i).transpose()) ==
          Catch::Approx(ts.values[i]).margin(1e-8));
}

TEST_CASE("likelihood search never ends below its starting point") {
  const TrainingSet ts = random_training(25, 3, 77);
  for (Kernel k : kAllKernels) {
    const auto start = fit(ts, k, constant_theta(3, 1.0));
    const auto tuned = fit_mle(ts, k, 200);
    INFO(kernel_name(k));
    CHECK(tuned.log_likelihood() >= start.log_likelihood());
    // The tuned model still interpolates.
    double worst = 0.0;
    for (int i = 0; i < 25; ++i)
      worst = std::max(
          worst, std::abs(tuned.predict(ts.sites.row(i).transpose()) -
                          ts.values[i]));
    CHECK(worst <= 1e-8 * (1.0 + ts.values.cwiseAbs().maxCoeff()));
    for (Eigen::Index j = 0; j < 3; ++j) {
      CHECK(tuned.correlation().theta[j] >= kThetaMin);
      CHECK(tuned.correlation().theta[j] <= kThetaMax);
    }
  }
}
