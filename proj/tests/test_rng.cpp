#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "bmlab/rng.hpp"

using namespace bmlab;

namespace {

// Reference Philox-4x32-10 round chain, written independently of the
// library's version (64-bit arithmetic throughout).
std::array<std::uint32_t, 4> philox_reference(std::array<std::uint32_t, 4> c,
                                              std::array<std::uint32_t, 2> k) {
  const std::uint64_t M0 = 0xD2511F53ull, M1 = 0xCD9E8D57ull;
  for (int r = 0; r < 10; ++r) {
    const std::uint64_t p0 = M0 * c[0];
    const std::uint64_t p1 = M1 * c[2];
    const std::uint32_t out0 = static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0];
    const std::uint32_t out1 = static_cast<std::uint32_t>(p1 & 0xFFFFFFFFull);
    const std::uint32_t out2 = static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1];
    const std::uint32_t out3 = static_cast<std::uint32_t>(p0 & 0xFFFFFFFFull);
    c = {out0, out1, out2, out3};
    k[0] += 0x9E3779B9u;
    k[1] += 0xBB67AE85u;
  }
  return c;
}

}  // namespace

TEST_CASE("philox known-answer vectors") {
  const auto z = philox4x32({0, 0, 0, 0}, {0, 0});
  CHECK(z[0] == 0x6627e8d5u);
  CHECK(z[1] == 0xe169c58du);
  CHECK(z[2] == 0xbc57ac4cu);
  CHECK(z[3] == 0x9b00dbd8u);

  const std::uint32_t F = 0xffffffffu;
  const auto o = philox4x32({F, F, F, F}, {F, F});
  CHECK(o[0] == 0x408f276du);
  CHECK(o[1] == 0x41c83b0eu);
  CHECK(o[2] == 0xa20bc7c6u);
  CHECK(o[3] == 0x6d5451fdu);

  const auto p = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                            {0xa4093822u, 0x299f31d0u});
  CHECK(p[0] == 0xd16cfe09u);
  CHECK(p[1] == 0x94fdccebu);
  CHECK(p[2] == 0x5001e420u);
  CHECK(p[3] == 0x24126ea1u);
}

TEST_CASE("philox matches an independent reference on random inputs") {
  NormalStream seedsrc(1, 1);
  for (int i = 0; i < 50; ++i) {
    std::array<std::uint32_t, 4> c;
    std::array<std::uint32_t, 2> k;
    for (auto& v : c) v = static_cast<std::uint32_t>(seedsrc.next_uniform() * 4294967296.0);
    for (auto& v : k) v = static_cast<std::uint32_t>(seedsrc.next_uniform() * 4294967296.0);
    CHECK(philox4x32(c, k) == philox_reference(c, k));
  }
}

TEST_CASE("normal quantile accuracy") {
  CHECK(normal_quantile(0.5) == Catch::Approx(0.0).margin(1e-15));
  CHECK(normal_quantile(0.975) == Catch::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(normal_quantile(0.025) == Catch::Approx(-1.959963984540054).epsilon(1e-12));
  CHECK(normal_quantile(0.841344746068543) == Catch::Approx(1.0).epsilon(1e-10));
  CHECK(normal_quantile(1e-10) == Catch::Approx(-6.361340902404056).epsilon(1e-9));
  CHECK_THROWS_AS(normal_quantile(0.0), input_error);
  CHECK_THROWS_AS(normal_quantile(1.0), input_error);
  // round trip through the CDF
  for (double p : {1e-8, 1e-4, 0.2, 0.5, 0.77, 1.0 - 1e-6}) {
    const double x = normal_quantile(p);
    CHECK(0.5 * std::erfc(-x / std::sqrt(2.0)) == Catch::Approx(p).epsilon(1e-12));
  }
}

TEST_CASE("streams are deterministic and replicate-disjoint") {
  NormalStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  std::vector<double> va, vb, vc, vd;
  for (int i = 0; i < 256; ++i) {
    va.push_back(a.next_uniform());
    vb.push_back(b.next_uniform());
    vc.push_back(c.next_uniform());
    vd.push_back(d.next_uniform());
  }
  CHECK(va == vb);
  CHECK(va != vc);
  CHECK(va != vd);
  for (double u : va) {
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("stream moments are sane") {
  NormalStream s(2024, 0);
  const int n = 200000;
  double m1 = 0, m2 = 0, m4 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = s.next_normal();
    m1 += x;
    m2 += x * x;
    m4 += x * x * x * x;
  }
  m1 /= n;
  m2 /= n;
  m4 /= n;
  CHECK(std::abs(m1) < 3.0 / std::sqrt(static_cast<double>(n)));
  CHECK(m2 == Catch::Approx(1.0).margin(0.01));
  CHECK(m4 == Catch::Approx(3.0).margin(0.1));
}
