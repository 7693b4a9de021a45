#pragma once

// Numeric validators for the structural hypotheses on phi: (H.1) bounds on
// psi' and psi'' plus the boundary identity psi'(1) = beta psi(1) for
// alpha >= 1, and (H.2) decay bounds on phi', phi'' for x >= c. Both are
// asymptotic statements; the checks fit the constants on a finite grid and
// demand the bound ratios stay bounded and non-increasing over the top
// decade of the grid.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "bmlab/common.hpp"
#include "bmlab/models.hpp"

namespace bmlab {

struct BoundFit {
  double constant = 0.0;   // sup over the grid of |target| / bound-form
  double top_decade_slope = 0.0;  // log-log slope of the ratio over the top decade
  bool bounded = false;
};

struct HypothesisReport {
  bool pass = false;
  BoundFit first;          // (H.1)(a) or (H.2)(d)
  BoundFit second;         // (H.1)(b) or (H.2)(e)
  bool boundary_ok = true; // (H.1)(c), only enforced when alpha >= 1
  double boundary_residual = 0.0;
  double fitted_nu = 0.0;  // (H.2), alpha < 1 branch
  std::string failure;     // name of the first failing bound, empty on pass
};

namespace detail {

/// Fit sup ratio and the top-decade log-log trend; "bounded" means the ratio
/// does not keep growing: slope over the top decade below a small tolerance.
inline BoundFit fit_bound(const std::vector<double>& x, const std::vector<double>& ratio) {
  BoundFit f;
  f.constant = 0.0;
  for (double r : ratio) {
    require_finite(r, "hypothesis bound ratio");
    f.constant = std::max(f.constant, r);
  }
  const double xmax = x.back();
  std::vector<double> lx, lr;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] >= 0.1 * xmax && ratio[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      lr.push_back(std::log(ratio[i]));
    }
  }
  f.top_decade_slope = (lx.size() >= 2) ? fit_slope(lx, lr) : 0.0;
  f.bounded = f.top_decade_slope <= 0.05;
  return f;
}

inline std::vector<double> default_grid(double lo, double hi, int n) {
  std::vector<double> g(static_cast<std::size_t>(n));
  const double r = std::log(hi / lo) / (n - 1);
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = lo * std::exp(r * i);
  return g;
}

}  // namespace detail

/// psi'(1) by the analytic forms (finite limit; avoids the x->1 grid edge).
inline double psi_prime_at_one(const SelfSimilarModel& m) {
  switch (m.kind) {
    case SelfSimilarKind::Fbm: return m.H;
    case SelfSimilarKind::Bifbm:
      return std::pow(2.0, -m.K) * m.K * std::pow(2.0, m.K - 1.0) * 2.0 * m.H;  // = H K
    case SelfSimilarKind::Subfbm:
      return 2.0 * m.H - m.H * std::pow(2.0, 2.0 * m.H - 1.0);
    case SelfSimilarKind::Custom: {
      // one-sided: psi is only defined on [1, infinity)
      auto psi = [&](double y) { return m.psi(y); };
      auto fwd = [&](double h) {
        return (4.0 * psi(1.0 + h) - 3.0 * psi(1.0) - psi(1.0 + 2.0 * h)) / (2.0 * h);
      };
      const double h = 1e-5;
      return (4.0 * fwd(0.5 * h) - fwd(h)) / 3.0;
    }
  }
  return 0.0;
}

/// (H.1): |psi'(x)| <= C x^{alpha-1}, |psi''(x)| <= C x^{-1}(x-1)^{alpha-1},
/// and psi'(1) = beta psi(1) when alpha >= 1 (tolerance 1e-6).
inline HypothesisReport check_h1(const SelfSimilarModel& m, std::vector<double> x_grid = {}) {
  if (x_grid.empty()) x_grid = detail::default_grid(1.0 + 1e-3, 1e4, 200);
  for (double x : x_grid) require(x > 1.0, "check_h1: grid must lie in (1, infinity)");
  std::sort(x_grid.begin(), x_grid.end());

  HypothesisReport rep;
  std::vector<double> ra, rb;
  ra.reserve(x_grid.size());
  rb.reserve(x_grid.size());
  for (double x : x_grid) {
    ra.push_back(std::abs(psi_prime(m, x)) / std::pow(x, m.alpha - 1.0));
    rb.push_back(std::abs(psi_second(m, x)) * x / std::pow(x - 1.0, m.alpha - 1.0));
  }
  rep.first = detail::fit_bound(x_grid, ra);
  rep.second = detail::fit_bound(x_grid, rb);

  rep.boundary_residual = psi_prime_at_one(m) - m.beta * m.psi(1.0);
  rep.boundary_ok = (m.alpha < 1.0) || std::abs(rep.boundary_residual) <= 1e-6;

  rep.pass = rep.first.bounded && rep.second.bounded && rep.boundary_ok;
  if (!rep.first.bounded) rep.failure = "(H.1)(a) |psi'| <= C x^{alpha-1}";
  else if (!rep.second.bounded) rep.failure = "(H.1)(b) |psi''| <= C x^{-1}(x-1)^{alpha-1}";
  else if (!rep.boundary_ok) rep.failure = "(H.1)(c) psi'(1) = beta psi(1)";
  return rep;
}

/// (H.2): for x >= c, |phi'| <= C x^{-nu}, |phi''| <= C x^{-nu-1} when
/// alpha < 1 (nu fitted as the largest passing value in (1,2]);
/// |phi'| <= C x^{alpha-2}, |phi''| <= C x^{alpha-3} when alpha >= 1.
inline HypothesisReport check_h2(const SelfSimilarModel& m, std::vector<double> x_grid = {}) {
  if (x_grid.empty()) x_grid = detail::default_grid(m.h2_c, 1e4, 200);
  for (double x : x_grid) require(x >= m.h2_c, "check_h2: grid must lie in [c, infinity)");
  std::sort(x_grid.begin(), x_grid.end());

  HypothesisReport rep;
  if (m.alpha >= 1.0) {
    std::vector<double> rd, re;
    for (double x : x_grid) {
      rd.push_back(std::abs(phi_prime(m, x)) / std::pow(x, m.alpha - 2.0));
      re.push_back(std::abs(phi_second(m, x)) / std::pow(x, m.alpha - 3.0));
    }
    rep.first = detail::fit_bound(x_grid, rd);
    rep.second = detail::fit_bound(x_grid, re);
    rep.fitted_nu = 2.0 - m.alpha;  // informational on this branch
    rep.pass = rep.first.bounded && rep.second.bounded;
  } else {
    // Measure the decay exponents of |phi'| and |phi''| over the top decade;
    // the largest admissible nu is their common cap, clipped to (1,2].
    std::vector<double> lx, l1, l2;
    const double xmax = x_grid.back();
    for (double x : x_grid) {
      if (x < 0.1 * xmax) continue;
      const double p1 = std::abs(phi_prime(m, x)), p2 = std::abs(phi_second(m, x));
      if (p1 > 0.0 && p2 > 0.0) {
        lx.push_back(std::log(x));
        l1.push_back(std::log(p1));
        l2.push_back(std::log(p2));
      }
    }
    if (lx.size() < 2) throw numeric_error("check_h2: degenerate derivative samples");
    const double decay1 = -fit_slope(lx, l1);         // |phi'| ~ x^{-decay1}
    const double decay2 = -fit_slope(lx, l2) - 1.0;   // |phi''| ~ x^{-(nu+1)}
    rep.fitted_nu = std::min(2.0, std::min(decay1, decay2));
    rep.pass = rep.fitted_nu > 1.0;
    std::vector<double> rd, re;
    for (double x : x_grid) {
      rd.push_back(std::abs(phi_prime(m, x)) * std::pow(x, rep.fitted_nu));
      re.push_back(std::abs(phi_second(m, x)) * std::pow(x, rep.fitted_nu + 1.0));
    }
    rep.first = detail::fit_bound(x_grid, rd);
    rep.second = detail::fit_bound(x_grid, re);
    rep.pass = rep.pass && rep.first.bounded && rep.second.bounded;
  }
  if (!rep.pass) {
    rep.failure = !rep.first.bounded ? "(H.2)(d) phi' decay" :
                  !rep.second.bounded ? "(H.2)(e) phi'' decay" : "(H.2) no admissible nu in (1,2]";
  }
  return rep;
}

}  // namespace bmlab
