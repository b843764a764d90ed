#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "mgtune/fopid.hpp"

using namespace mgtune;

namespace {

// Least-squares slope of 20 log10|H| against log10(omega).
double bode_slope_db_per_decade(const TransferFunction& tf, double w_lo,
                                double w_hi, int n = 50) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const double lw =
        std::log10(w_lo) + (std::log10(w_hi) - std::log10(w_lo)) * i / (n - 1);
    const double mag = std::abs(tf.eval({0.0, std::pow(10.0, lw)}));
    const double db = 20.0 * std::log10(mag);
    sx += lw;
    sy += db;
    sxx += lw * lw;
    sxy += lw * db;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_CASE("corner grid for a half-order differentiator", "[fopid]") {
  // alpha = 0.5, band [1e-2, 1e2], half_order 2: exponent arithmetic done by
  // hand gives poles at 10^{-1.4, -0.6, 0.2, 1.0, 1.8} and zeros at
  // 10^{-1.8, -1.0, -0.2, 0.6, 1.4}, gain 100^0.5 = 10.
  auto d = design_oustaloup({0.5, 1e-2, 1e2, 2});
  REQUIRE(d.pole_corners.size() == 5);
  REQUIRE(d.zero_corners.size() == 5);
  const double pole_exp[] = {-1.4, -0.6, 0.2, 1.0, 1.8};
  const double zero_exp[] = {-1.8, -1.0, -0.2, 0.6, 1.4};
  for (int k = 0; k < 5; ++k) {
    CHECK(d.pole_corners[k] ==
          Catch::Approx(std::pow(10.0, pole_exp[k])).epsilon(1e-12));
    CHECK(d.zero_corners[k] ==
          Catch::Approx(std::pow(10.0, zero_exp[k])).epsilon(1e-12));
  }
  CHECK(d.gain == Catch::Approx(10.0));
}

TEST_CASE("corner grid is positive and interlaced", "[fopid]") {
  for (double alpha : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    auto d = design_oustaloup({alpha, 1e-2, 1e2, 2});
    for (int k = 0; k < 5; ++k) {
      CHECK(d.zero_corners[k] > 0.0);
      CHECK(d.pole_corners[k] > 0.0);
      // for a differentiator each zero precedes its pole
      CHECK(d.zero_corners[k] < d.pole_corners[k]);
      if (k > 0) CHECK(d.pole_corners[k - 1] < d.zero_corners[k]);
    }
  }
}

TEST_CASE("approximation magnitude tracks the ideal power law", "[fopid]") {
  for (double alpha : {0.3, 0.5, 0.7}) {
    auto tf = oustaloup({alpha, 1e-2, 1e2, 2});
    const double slope = bode_slope_db_per_decade(tf, 0.1, 10.0);
    CHECK(slope == Catch::Approx(20.0 * alpha).margin(1.0));
    const auto h1 = tf.eval({0.0, 1.0});
    CHECK(std::abs(h1) == Catch::Approx(1.0).margin(0.05));
    CHECK(std::arg(h1) * 180.0 / M_PI ==
          Catch::Approx(90.0 * alpha).margin(2.0));
  }
}

TEST_CASE("zero-frequency gain equals omega_b^alpha", "[fopid]") {
  // the symmetric corner grid makes prod(zeros)/prod(poles) = (wb/wh)^alpha
  for (double alpha : {0.3, -0.4, 0.7, -0.9}) {
    auto tf = oustaloup({alpha, 1e-2, 1e2, 2});
    const double dc = std::abs(tf.eval({0.0, 0.0}));
    CHECK(dc == Catch::Approx(std::pow(1e-2, alpha)).epsilon(1e-9));
  }
}

TEST_CASE("approximation rejects out-of-range exponents and bands", "[fopid]") {
  CHECK_THROWS_AS(design_oustaloup({0.0, 1e-2, 1e2, 2}), std::invalid_argument);
  CHECK_THROWS_AS(design_oustaloup({1.0, 1e-2, 1e2, 2}), std::invalid_argument);
  CHECK_THROWS_AS(design_oustaloup({-1.2, 1e-2, 1e2, 2}),
                  std::invalid_argument);
  CHECK_THROWS_AS(design_oustaloup({0.5, 1e2, 1e-2, 2}), std::invalid_argument);
  CHECK_THROWS_AS(design_oustaloup({0.5, 1e-2, 1e2, 0}), std::invalid_argument);
}

TEST_CASE("branch structure follows the order split", "[fopid]") {
  OustaloupSpec band;
  using Kind = FractionalBranch::Kind;

  FractionalBranch i0(Kind::integral, 0.0, band);
  CHECK(i0.rational_order() == 0);
  CHECK(i0.step(3.5, 0.01) == 3.5);  // passthrough

  FractionalBranch i1(Kind::integral, 1.0, band);
  CHECK(i1.rational_order() == 1);

  FractionalBranch i14(Kind::integral, 1.4, band);
  CHECK(i14.rational_order() == 6);  // five corners plus one exact integrator

  FractionalBranch i2(Kind::integral, 2.0, band);
  CHECK(i2.rational_order() == 2);

  FractionalBranch d1(Kind::derivative, 1.0, band);
  CHECK(d1.rational_order() == 0);
  CHECK(d1.difference_stages() == 1);

  FractionalBranch d07(Kind::derivative, 0.7, band);
  CHECK(d07.rational_order() == 5);
  CHECK(d07.difference_stages() == 0);

  FractionalBranch d15(Kind::derivative, 1.5, band);
  CHECK(d15.rational_order() == 5);
  CHECK(d15.difference_stages() == 1);

  CHECK_THROWS_AS(FractionalBranch(Kind::integral, 2.3, band),
                  std::invalid_argument);
}

TEST_CASE("unit integral branch accumulates a held error", "[fopid]") {
  // constant error 0.5 for 2 s at dt = 0.01 integrates to 1.0
  FractionalBranch br(FractionalBranch::Kind::integral, 1.0, {});
  double y = 0.0;
  for (int i = 0; i < 200; ++i) y = br.step(0.5, 0.01);
  CHECK(y == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("double integral of a constant matches t^2/2", "[fopid]") {
  FractionalBranch br(FractionalBranch::Kind::integral, 2.0, {});
  double y = 0.0;
  for (int i = 0; i < 200; ++i) y = br.step(1.0, 0.01);
  CHECK(y == Catch::Approx(2.0).margin(1e-9));
}

TEST_CASE("unit derivative branch differences a sampled ramp", "[fopid]") {
  FractionalBranch br(FractionalBranch::Kind::derivative, 1.0, {});
  CHECK(br.step(0.0, 0.01) == 0.0);
  for (int i = 1; i <= 50; ++i)
    CHECK(br.step(i * 0.01, 0.01) == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("second derivative branch recovers a parabola's curvature",
          "[fopid]") {
  FractionalBranch br(FractionalBranch::Kind::derivative, 2.0, {});
  double y = 0.0;
  for (int i = 0; i <= 50; ++i) {
    const double t = i * 0.01;
    y = br.step(0.5 * t * t, 0.01);
  }
  CHECK(y == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("sesqui-order derivative converges to the ideal gain", "[fopid]") {
  // drive s^1.5 with sin(t); the steady response amplitude is |j|^1.5 = 1.
  // The derivative-weighted fast modes make the gain step-size dependent, so
  // the check is on convergence: the error shrinks roughly linearly in dt.
  auto steady_peak = [](double dt) {
    FractionalBranch br(FractionalBranch::Kind::derivative, 1.5, {});
    double peak = 0.0;
    for (int i = 0; i * dt < 80.0; ++i) {
      const double y = br.step(std::sin(i * dt), dt);
      if (i * dt > 80.0 - 6.3) peak = std::max(peak, std::abs(y));
    }
    return peak;
  };
  const double e1 = std::abs(steady_peak(0.01) - 1.0);
  const double e2 = std::abs(steady_peak(0.002) - 1.0);
  const double e3 = std::abs(steady_peak(0.0004) - 1.0);
  CHECK(e2 < 0.5 * e1);
  CHECK(e3 < 0.5 * e2);
  CHECK(steady_peak(0.0004) == Catch::Approx(1.0).margin(0.10));
}

TEST_CASE("integer-order mode matches a textbook parallel PID", "[fopid]") {
  const double kp = 1.8, ki = 0.9, kd = 0.4, dt = 0.01;
  auto ctrl = build_controller({kp, ki, kd, 1.0, 1.0});
  REQUIRE(ctrl.params().is_pid());

  double acc = 0.0, prev_e = 0.0;
  for (int i = 0; i < 500; ++i) {
    const double df = 0.2 * std::sin(0.3 * i * dt) + 0.05 * std::cos(1.7 * i * dt);
    const double e = -df;
    acc += dt * e;
    const double ref = kp * e + ki * acc + kd * (e - prev_e) / dt;
    prev_e = e;
    const double u = ctrl.output(df, dt);
    REQUIRE(u == Catch::Approx(ref).margin(1e-9));
  }
}

TEST_CASE("controller construction enforces the search box", "[fopid]") {
  CHECK_THROWS_AS(build_controller({-0.1, 1.0, 1.0, 1.0, 1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_controller({1.0, 5.1, 1.0, 1.0, 1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_controller({1.0, 1.0, 1.0, 2.3, 1.0}),
                  std::invalid_argument);
  CHECK_NOTHROW(build_controller({5.0, 5.0, 5.0, 2.0, 2.0}));
  CHECK_NOTHROW(build_controller({0.0, 0.0, 0.0, 0.0, 0.0}));
}

TEST_CASE("reset restores the initial response", "[fopid]") {
  auto ctrl = build_controller({0.95, 4.35, 1.25, 0.66, 0.70});
  std::vector<double> first;
  for (int i = 0; i < 300; ++i)
    first.push_back(ctrl.output(0.1 * std::sin(0.5 * i * 0.01), 0.01));
  ctrl.reset();
  for (int i = 0; i < 300; ++i) {
    const double u = ctrl.output(0.1 * std::sin(0.5 * i * 0.01), 0.01);
    REQUIRE(u == first[static_cast<std::size_t>(i)]);
  }
}

TEST_CASE("zero gains silence their branches", "[fopid]") {
  auto ctrl = build_controller({0.4, 0.0, 0.0, 0.66, 0.7});
  CHECK(ctrl.output(-0.5, 0.01) == Catch::Approx(0.2));
}
