#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "bmlab/functionals.hpp"
#include "bmlab/mcstats.hpp"

using namespace bmlab;

namespace {

HermiteExpansion h2() {
  HermiteExpansion e;
  e.coeffs = {0.0, 0.0, 1.0};
  return e;
}

}  // namespace

TEST_CASE("compute_Z basics") {
  const auto plan = plan_circulant(StationaryModel::fgn(0.6), 64, 0.25);
  const auto y = sample_stationary(plan, 3, 0);

  SECTION("zero expansion gives identically zero") {
    HermiteExpansion z;
    z.coeffs = {0.0, 0.0, 0.0};
    const auto r = compute_Z(y, z, 0.125, {0.5, 1.0});
    for (double v : r.values) CHECK(v == 0.0);
  }
  SECTION("t = 0 gives 0") {
    const auto r = compute_Z(y, h2(), 0.125, {0.0, 1.0});
    CHECK(r.values[0] == 0.0);
  }
  SECTION("linearity in the expansion, pathwise") {
    HermiteExpansion e1, e2, sum;
    e1.coeffs = {0.0, 1.0, 0.5, 0.0, 0.25};
    e2.coeffs = {0.0, -0.3, 0.7, 0.2, 0.0};
    sum.coeffs = {0.0, 0.7, 1.2, 0.2, 0.25};
    const auto r1 = compute_Z(y, e1, 0.125, {1.0});
    const auto r2 = compute_Z(y, e2, 0.125, {1.0});
    const auto rs = compute_Z(y, sum, 0.125, {1.0});
    CHECK(rs.values[0] == Catch::Approx(r1.values[0] + r2.values[0]).margin(1e-12));
  }
  SECTION("additivity over adjacent intervals via partial cells") {
    // t/eps off the grid exercises the proportional endpoint weight
    const auto ra = compute_Z(y, h2(), 0.13, {0.4});
    const auto rb = compute_Z(y, h2(), 0.13, {0.9});
    const auto rc = compute_Z(y, h2(), 0.13, {0.4, 0.9});
    CHECK(rc.values[0] == Catch::Approx(ra.values[0]).margin(1e-14));
    CHECK(rc.values[1] == Catch::Approx(rb.values[0]).margin(1e-14));
  }
  SECTION("coverage error") {
    CHECK_THROWS_AS(compute_Z(y, h2(), 0.01, {1.0}), input_error);
  }
}

TEST_CASE("compute_Z white-noise variance matches the exact discrete oracle") {
  const auto wn = StationaryModel::tabulated({0.0, 0.2, 4.0}, {1.0, 0.0, 0.0});
  const double eps = 1.0 / 32.0, delta = 0.25, t = 1.0;
  const auto plan = plan_circulant(wn, 160, delta);
  HermiteExpansion h1;
  h1.coeffs = {0.0, 1.0};
  const int R = 20000;
  double v = 0.0;
  for (int r = 0; r < R; ++r) {
    const auto y = sample_stationary(plan, 41, static_cast<std::uint64_t>(r));
    const double z = compute_Z(y, h1, eps, {t}).values[0];
    v += z * z;
  }
  v /= R;
  const double oracle = discretized_variance(
      h1, [&](double h) { return rho_eval(wn, h); }, eps, delta, t);
  CHECK(oracle == Catch::Approx(t * delta).epsilon(1e-12));  // white noise: eps d^2 n = t d
  CHECK(v == Catch::Approx(oracle).margin(3.5 * oracle * std::sqrt(2.0 / R)));
}

TEST_CASE("compute_F on fbm coincides in law with compute_Z on fGn") {
  const double H = 0.6, eps = 1.0 / 32.0, delta = 0.25, t = 1.0;
  const auto e = h2();
  const double oracle = discretized_variance(
      e, [&](double h) { return a_alpha(2.0 * H, h); }, eps, delta, t);
  const int R = 8000;
  const double se = oracle * std::sqrt(2.0 / R);

  // route 1: stationary fGn + Z
  {
    const auto plan = plan_circulant(StationaryModel::fgn(H), 160, delta);
    double v = 0.0;
    for (int r = 0; r < R; ++r) {
      const auto y = sample_stationary(plan, 4001, static_cast<std::uint64_t>(r));
      const double z = compute_Z(y, e, eps, {t}).values[0];
      v += z * z;
    }
    v /= R;
    CHECK(v == Catch::Approx(oracle).margin(3.5 * se));
  }
  // route 2: fbm path + unit-lag normalized increments + F
  {
    const auto m = SelfSimilarModel::fbm(H);
    const std::size_t n = static_cast<std::size_t>((t / eps + 1.0) / delta) + 2;
    const auto plan = plan_fbm(H, n, delta);
    double v = 0.0;
    for (int r = 0; r < R; ++r) {
      const auto x = sample_fbm_plan(plan, 4002, static_cast<std::uint64_t>(r));
      const double f = compute_F(m, x, e, eps, {t}).values[0];
      v += f * f;
    }
    v /= R;
    CHECK(v == Catch::Approx(oracle).margin(3.5 * se));
  }
}

TEST_CASE("compute_F rejects a lag off the grid") {
  const auto m = SelfSimilarModel::fbm(0.6);
  GridPath x;
  x.delta = 0.3;  // 1/0.3 is not an integer
  x.values.assign(64, 0.0);
  CHECK_THROWS_AS(compute_F(m, x, h2(), 0.125, {1.0}), input_error);
}

TEST_CASE("regularized length") {
  SECTION("zero path has zero length") {
    GridPath x;
    x.delta = 0.125;
    x.values.assign(64, 0.0);
    const auto r = regularized_length(x, 0.25, {0.5, 1.0});
    CHECK(r.values[0] == 0.0);
    CHECK(r.values[1] == 0.0);
  }
  SECTION("eps off the grid raises an alignment error") {
    GridPath x;
    x.delta = 0.125;
    x.values.assign(64, 0.0);
    CHECK_THROWS_AS(regularized_length(x, 0.3, {1.0}), input_error);
  }
  SECTION("pathwise monotone in t") {
    const auto plan = plan_fbm(0.55, 200, 1.0 / 128.0);
    const auto x = sample_fbm_plan(plan, 8, 0);
    const auto r = regularized_length(x, 1.0 / 16.0, {0.25, 0.5, 0.75, 1.0});
    for (std::size_t i = 1; i < r.values.size(); ++i) CHECK(r.values[i] >= r.values[i - 1]);
    for (double v : r.values) CHECK(v >= 0.0);
  }
  SECTION("fbm mean: E L = t eps^{H-1} sqrt(2/pi) exactly on aligned grids") {
    const double H = 0.5, eps = 1.0 / 64.0, delta = eps / 8.0;
    const auto m = SelfSimilarModel::fbm(H);
    const auto means = length_mean_exact(m, delta, eps, {1.0});
    CHECK(means[0] == Catch::Approx(std::pow(eps, H - 1.0) * kSqrt2OverPi).epsilon(1e-12));
    // Monte Carlo agreement at modest replication
    const std::size_t n = static_cast<std::size_t>((1.0 + eps) / delta) + 2;
    const auto plan = plan_fbm(H, n, delta);
    const int R = 4000;
    double mean = 0.0;
    for (int r = 0; r < R; ++r) {
      const auto x = sample_fbm_plan(plan, 91, static_cast<std::uint64_t>(r));
      mean += regularized_length(x, eps, {1.0}).values[0];
    }
    mean /= R;
    CHECK(mean == Catch::Approx(means[0]).epsilon(0.01));
  }
}

TEST_CASE("length scaling identity on the same driving noise") {
  // eps^{-1} d sum |Delta X| == eps^{H-1} * d sum |Delta X / eps^H| exactly
  const double H = 0.62, eps = 1.0 / 16.0, delta = eps / 8.0;
  const auto m = SelfSimilarModel::fbm(H);
  const std::size_t n = static_cast<std::size_t>((1.0 + eps) / delta) + 2;
  const auto x = sample_fbm_plan(plan_fbm(H, n, delta), 55, 7);
  const auto direct = regularized_length(x, eps, {0.5, 1.0});
  const auto y = normalized_increments(x, 8, m);  // lag eps = 8 steps, sd = eps^H
  KahanSum s;
  std::vector<double> zform(2, 0.0);
  std::size_t j = 0;
  const std::vector<double> bounds = {0.5, 1.0};
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    const auto full = static_cast<std::size_t>(std::floor(bounds[i] / delta + 1e-9));
    for (; j < full; ++j) s.add(delta * std::abs(y.values[j]));
    zform[i] = std::pow(eps, H - 1.0) * s.value();
  }
  CHECK(direct.values[0] == Catch::Approx(zform[0]).epsilon(1e-10));
  CHECK(direct.values[1] == Catch::Approx(zform[1]).epsilon(1e-10));
}

TEST_CASE("length fluctuation") {
  const double H = 0.55, eps = 1.0 / 64.0, delta = eps / 8.0;
  const auto m = SelfSimilarModel::fbm(H);
  const auto regime = classify_regime(m.alpha, 2);
  CHECK(regime.regime == Regime::Central);

  SECTION("regime mismatch raises") {
    const auto wrong = classify_regime(1.8, 2);
    const auto x = sample_fbm_plan(plan_fbm(H, 600, delta), 5, 0);
    CHECK_THROWS_AS(length_fluctuation(m, x, eps, {1.0}, wrong), regime_error);
  }
  SECTION("exact centering: fluctuation mean within 3 SE of 0") {
    const std::size_t n = static_cast<std::size_t>((1.0 + eps) / delta) + 2;
    const auto plan = plan_fbm(H, n, delta);
    const int R = 4000;
    double mean = 0.0, m2 = 0.0;
    for (int r = 0; r < R; ++r) {
      const auto x = sample_fbm_plan(plan, 123, static_cast<std::uint64_t>(r));
      const double v = length_fluctuation(m, x, eps, {1.0}, regime).values[0];
      mean += v;
      m2 += v * v;
    }
    mean /= R;
    m2 /= R;
    const double se = std::sqrt((m2 - mean * mean) / R);
    CHECK(std::abs(mean) < 3.0 * se);
  }
}
