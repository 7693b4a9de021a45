#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "bmlab/asymptotics.hpp"

using namespace bmlab;

namespace {

HermiteExpansion single(int q, double c) {
  HermiteExpansion e;
  e.coeffs.assign(static_cast<std::size_t>(q) + 1, 0.0);
  e.coeffs.back() = c;
  return e;
}

// closed form of Int_0^s Int_0^t |u-v|^g du dv for g in (-1,0)
double power_double_integral(double g, double s, double t) {
  return (std::pow(s, g + 2.0) + std::pow(t, g + 2.0) - std::pow(std::abs(t - s), g + 2.0)) /
         ((g + 1.0) * (g + 2.0));
}

}  // namespace

TEST_CASE("regime classification") {
  CHECK(classify_regime(1.2, 2).regime == Regime::Central);
  CHECK(classify_regime(1.5, 2).regime == Regime::LogCentral);
  const auto r = classify_regime(1.8, 2);
  CHECK(r.regime == Regime::Noncentral);
  CHECK(r.normalization_exponent == Catch::Approx(0.3).epsilon(1e-13));
  // d = 2 boundary sits exactly at H = 3/4 under alpha = 2H
  CHECK(classify_regime(2.0 * 0.75, 2).regime == Regime::LogCentral);
  CHECK(classify_regime(2.0 * 0.749999, 2).regime == Regime::Central);
}

TEST_CASE("normalization factors") {
  CHECK(normalization(1.2, 2, 0.25) == 1.0);
  CHECK(normalization(1.5, 2, std::exp(-4.0)) == Catch::Approx(0.5).epsilon(1e-13));
  CHECK(normalization(1.8, 2, 0.01) == Catch::Approx(std::pow(0.01, 0.3)).epsilon(1e-13));
  CHECK_THROWS_AS(normalization(1.2, 2, 1.0), input_error);
  // noncentral factor decreases toward 0 with eps
  CHECK(normalization(1.8, 2, 0.005) < normalization(1.8, 2, 0.01));
}

TEST_CASE("sigma2_central analytic cases") {
  SECTION("triangle kernel squared: 2! * 2/3 = 4/3") {
    const auto s = sigma2_central(single(2, 1.0), StationaryModel::a_alpha_model(1.0), 2);
    CHECK(s.value == Catch::Approx(4.0 / 3.0).epsilon(1e-6));
    CHECK(s.tail_bound < 1e-8);
  }
  SECTION("exponential: 1! * Int e^{-|h|} = 2") {
    const auto s = sigma2_central(single(1, 1.0), StationaryModel::exponential(1.0), 1);
    CHECK(s.value == Catch::Approx(2.0).epsilon(1e-8));
  }
  SECTION("integrability error at the boundary and beyond") {
    CHECK_THROWS_AS(sigma2_central(single(2, 1.0), StationaryModel::a_alpha_model(1.5), 2),
                    input_error);
    CHECK_THROWS_AS(sigma2_central(single(2, 1.0), StationaryModel::a_alpha_model(1.8), 2),
                    input_error);
  }
  SECTION("fGn H=0.6, f=H_2: frozen quadrature oracle") {
    // independent dense-quadrature value (scipy-grade): 2 * Int a_{1.2}^2
    const auto s = sigma2_central(single(2, 1.0), StationaryModel::fgn(0.6), 2);
    CHECK(s.value == Catch::Approx(1.755758069907477).epsilon(1e-7));
  }
}

TEST_CASE("sigma2_log closed form") {
  CHECK(sigma2_log(1.0, 2, 1.5, 0.75) == Catch::Approx(9.0 / 32.0).epsilon(1e-13));
  CHECK(sigma2_log(0.0, 2, 1.5, 0.75) == 0.0);
  // the (1 + (beta - alpha/2) d) factor is 1 whenever beta = alpha/2
  const double v1 = sigma2_log(0.7, 3, 2.0 - 1.0 / 3.0, (2.0 - 1.0 / 3.0) / 2.0);
  double fact = 6.0;
  const double want = 0.49 * fact * std::pow(1.0 - 1.0 / 6.0, 3) * std::pow(1.0 - 1.0 / 3.0, 3);
  CHECK(v1 == Catch::Approx(want).epsilon(1e-13));
  CHECK_THROWS_AS(sigma2_log(1.0, 2, 1.4, 0.75), regime_error);
}

TEST_CASE("kd_covariance against the fbm closed form") {
  for (double H : {0.8, 0.9, 0.95}) {
    const auto m = SelfSimilarModel::fbm(H);
    const double g = (2.0 * H - 2.0) * 2.0;
    const double coef = 2.0 * std::pow(H * (2.0 * H - 1.0), 2.0);  // d!/(2l)^d (H(2H-1))^d
    for (auto [s, t] : {std::pair{1.0, 1.0}, std::pair{1.0, 2.0}, std::pair{0.5, 2.0}}) {
      const double closed = coef * power_double_integral(g, s, t);
      CHECK(kd_covariance(m, 2, s, t) == Catch::Approx(closed).epsilon(1e-3));
    }
  }
}

TEST_CASE("kd_covariance structure") {
  const auto m = SelfSimilarModel::fbm(0.9);
  CHECK(kd_covariance(m, 2, 0.0, 1.0) == 0.0);
  CHECK(kd_covariance(m, 2, 1.0, 2.0) == Catch::Approx(kd_covariance(m, 2, 2.0, 1.0)).epsilon(1e-12));
  CHECK(kd_covariance(m, 2, 1.0, 1.0) == Catch::Approx(2.16).epsilon(1e-3));
  CHECK_THROWS_AS(kd_covariance(SelfSimilarModel::fbm(0.7), 2, 1.0, 1.0), regime_error);
  // noncentral bifbm is finite and symmetric as well
  const auto bi = SelfSimilarModel::bifbm(0.95, 0.9 / 0.95);
  const double v = kd_covariance(bi, 2, 1.0, 1.0);
  CHECK(std::isfinite(v));
  CHECK(v > 0.0);
}

TEST_CASE("benhariz_check") {
  SECTION("single-chaos expansion is trivially summable") {
    const auto rep = benhariz_check(single(2, 1.0), StationaryModel::a_alpha_model(1.0), 2.0, 2);
    CHECK(rep.bh1_verdict == "convergent");
    CHECK(rep.bh2_all_positive);
    CHECK(rep.bh2_holds);
  }
  SECTION("centered |x| expansion: alternating signs defeat (bh2), f is in L^4") {
    const auto e = abs_expansion(12, true);
    const auto rep = benhariz_check(e, StationaryModel::a_alpha_model(1.0), 2.0, 2);
    CHECK_FALSE(rep.bh2_all_positive);
    CHECK_FALSE(rep.bh2_holds);
    CHECK(std::isfinite(rep.l4_norm));
    CHECK(rep.l4_norm > 0.0);
    CHECK(rep.bh1_verdict == "convergent");  // coefficients decay much faster than R^q grows
  }
  SECTION("positive-coefficient variant satisfies (bh2)") {
    HermiteExpansion e;
    e.coeffs = {0.0, 0.0, 0.4, 0.0, 0.03, 0.0, 0.003};
    const auto rep = benhariz_check(e, StationaryModel::a_alpha_model(1.0), 2.0, 2);
    CHECK(rep.bh2_all_positive);
    CHECK(rep.bh2_holds);
  }
  SECTION("geometric growth against a bounded integral diverges") {
    HermiteExpansion e;
    e.coeffs.assign(13, 0.0);
    for (int q = 1; q <= 12; ++q) e.coeffs[static_cast<std::size_t>(q)] = std::pow(3.0, q);
    const auto rep = benhariz_check(e, StationaryModel::exponential(1.0), 2.0, 1);
    CHECK(rep.bh1_verdict == "divergent");
  }
}

TEST_CASE("sigma2_length") {
  SECTION("frozen first-principles values") {
    const auto r05 = sigma2_length(0.5);
    CHECK(r05.value == Catch::Approx(0.2265848668635429).epsilon(2e-4));
    const auto r055 = sigma2_length(0.55);
    CHECK(r055.value == Catch::Approx(0.2559160030574895).epsilon(2e-4));
  }
  SECTION("leading term dominates at H = 1/2") {
    const double lead = 0.3989422804014327 * 0.3989422804014327 * 2.0 * (2.0 / 3.0);
    const auto r = sigma2_length(0.5);
    CHECK(r.value > lead);
    CHECK(r.value < lead + 0.05);
  }
  SECTION("monotone truncation: partial sums nondecreasing in Qmax") {
    double prev = 0.0;
    for (int qmax : {2, 4, 8, 12, 16}) {
      const auto e = abs_expansion(qmax, true);
      const auto s = sigma2_central(e, StationaryModel::a_alpha_model(1.0), 2);
      CHECK(s.value >= prev - 1e-15);
      prev = s.value;
    }
  }
  SECTION("regime guard") {
    CHECK_THROWS_AS(sigma2_length(0.75), regime_error);
    CHECK_THROWS_AS(sigma2_length(0.9), regime_error);
  }
  SECTION("displayed series is reported but differs from first principles") {
    const auto r = sigma2_length(0.5);
    CHECK(std::isfinite(r.displayed_series));
    CHECK(r.displayed_series != Catch::Approx(r.value).epsilon(0.01));
  }
}
