#pragma once

// Probabilists' Hermite polynomials, Gauss-Hermite quadrature against the
// standard Gaussian measure, chaos-coefficient projections, Hermite rank,
// and the coefficient-space Malliavin operators D, delta, L^{-1}.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "bmlab/common.hpp"

namespace bmlab {

constexpr int kMaxHermiteOrder = 200;

/// H_q(x) in the probabilists' convention: H_0=1, H_1=x,
/// H_{q+1} = x H_q - q H_{q-1}, so that E[H_q(N)H_r(N)] = q! 1_{q=r}.
inline double eval_hermite(int q, double x) {
  require(q >= 0, "eval_hermite: order must be nonnegative");
  if (q > kMaxHermiteOrder) throw input_error("eval_hermite: unsupported order > 200");
  if (q == 0) return 1.0;
  double hm = 1.0, h = x;
  for (int k = 1; k < q; ++k) {
    const double hp = x * h - k * hm;
    hm = h;
    h = hp;
  }
  return h;
}

/// Truncated Hermite-chaos expansion f = sum_q coeffs[q] H_q.
struct HermiteExpansion {
  std::vector<double> coeffs;  // c_0 .. c_Qmax
  int rank = 0;                // smallest q >= 1 with |c_q| above tol_rank; 0 if undetermined
  double tol_rank = 1e-8;      // relative to max_{q>=1} |c_q|

  int qmax() const { return static_cast<int>(coeffs.size()) - 1; }
  double coeff(int q) const {
    return (q >= 0 && q < static_cast<int>(coeffs.size())) ? coeffs[static_cast<std::size_t>(q)] : 0.0;
  }
  bool centered(double tol = 1e-14) const { return std::abs(coeff(0)) <= tol; }

  /// sum c_q^2 q!, the L^2(gamma) norm of the centered part plus c_0^2.
  double l2_norm_sq() const {
    KahanSum s;
    double fact = 1.0;
    for (int q = 0; q <= qmax(); ++q) {
      if (q > 0) fact *= q;
      s.add(coeff(q) * coeff(q) * fact);
    }
    const double v = s.value();
    require_finite(v, "HermiteExpansion: sum c_q^2 q!");
    return v;
  }

  double operator()(double x) const {
    // Clenshaw-free synthesis by the forward recurrence; Qmax is small.
    double acc = coeff(0);
    double hm = 1.0, h = x;
    for (int q = 1; q <= qmax(); ++q) {
      acc += coeff(q) * h;
      const double hp = x * h - q * hm;
      hm = h;
      h = hp;
    }
    return acc;
  }
};

/// Gauss-Hermite rule for the weight e^{-x^2/2}/sqrt(2 pi): sum w_i = 1 and
/// sum w_i p(x_i) = E[p(N)] exactly for polynomials of degree <= 2n-1.
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

namespace detail {

/// Golub-Welsch for the probabilists' Hermite Jacobi matrix (diagonal 0,
/// off-diagonal sqrt(k)): implicit-QL eigenvalues with first-row eigenvector
/// accumulation. Robust at any n; used above the Newton marching's range.
inline GaussHermiteRule gauss_hermite_golub_welsch(int n) {
  std::vector<double> d(static_cast<std::size_t>(n), 0.0);
  std::vector<double> e(static_cast<std::size_t>(n), 0.0);
  std::vector<double> z(static_cast<std::size_t>(n), 0.0);
  for (int k = 1; k < n; ++k) e[static_cast<std::size_t>(k - 1)] = std::sqrt(static_cast<double>(k));
  z[0] = 1.0;
  auto sign_of = [](double a, double b) { return b >= 0.0 ? std::abs(a) : -std::abs(a); };
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= 1e-16 * dd) break;
      }
      if (m != l) {
        if (++iter > 50) throw numeric_error("gauss_hermite: QL iteration did not converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + sign_of(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        for (int i = m - 1; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          f = z[i + 1];
          z[i + 1] = s * z[i] + c * f;
          z[i] = c * z[i] - s * f;
        }
        if (r == 0.0 && m - 1 >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
  std::vector<std::size_t> order(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
  GaussHermiteRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < order.size(); ++i) {
    rule.nodes[i] = d[order[i]];
    rule.weights[i] = z[order[i]] * z[order[i]];  // mu_0 = 1: weights sum to 1
  }
  return rule;
}

}  // namespace detail

/// Nodes by Newton iteration on the physicists' orthonormal recurrence with
/// the classical asymptotic initial guesses, then mapped to the
/// probabilists' convention (x -> sqrt(2) x, w -> w/sqrt(pi)). The marching
/// initial guesses degrade beyond a couple hundred nodes, where the
/// Golub-Welsch tridiagonal path takes over.
inline GaussHermiteRule gauss_hermite(int n) {
  require(n >= 1, "gauss_hermite: need n >= 1");
  if (n > 200) return detail::gauss_hermite_golub_welsch(n);
  const double eps = 1e-15;
  const int m = (n + 1) / 2;
  std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
  double z = 0.0;
  for (int i = 0; i < m; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * x[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * x[1];
    } else {
      z = 2.0 * z - x[static_cast<std::size_t>(i - 2)];
    }
    double pp = 0.0;
    int rescales = 0;
    for (int iter = 0; iter < 100; ++iter) {
      // Orthonormal physicists' recurrence, rescaled on the fly: the values
      // overflow double range near large |z| before the normalization wins,
      // but Newton only needs the ratio p1/pp.
      double p1 = 0.7511255444649425;  // pi^{-1/4}
      double p2 = 0.0;
      rescales = 0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1.0)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1.0)) * p3;
        if (std::abs(p1) > 0x1.0p+512) {
          p1 *= 0x1.0p-512;
          p2 *= 0x1.0p-512;
          ++rescales;
        }
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= eps) break;
    }
    x[static_cast<std::size_t>(i)] = z;
    x[static_cast<std::size_t>(n - 1 - i)] = -z;
    // undo the rescaling; far-tail weights may underflow to 0, which is
    // harmless for projections
    double wv = 2.0 / (pp * pp);
    for (int r = 0; r < rescales; ++r) wv *= 0x1.0p-1024;
    w[static_cast<std::size_t>(i)] = wv;
    w[static_cast<std::size_t>(n - 1 - i)] = wv;
  }
  if (n % 2 == 1) x[static_cast<std::size_t>(m - 1)] = 0.0;  // center node is exact

  GaussHermiteRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  const double sqrt2 = std::sqrt(2.0);
  const double inv_sqrt_pi = 1.0 / std::sqrt(kPi);
  for (int i = 0; i < n; ++i) {
    // descending physicists' roots -> ascending probabilists' nodes
    rule.nodes[static_cast<std::size_t>(i)] = -sqrt2 * x[static_cast<std::size_t>(i)];
    rule.weights[static_cast<std::size_t>(i)] = w[static_cast<std::size_t>(i)] * inv_sqrt_pi;
  }
  return rule;
}

/// Chaos projection c_q = E[f(N) H_q(N)]/q! by Gauss-Hermite quadrature.
/// Exact (to roundoff) for polynomial f of degree <= n_nodes*2-1-Qmax; for
/// kinked f the convergence is only algebraic in n_nodes.
inline HermiteExpansion project(const std::function<double(double)>& f, int Qmax, int n_nodes) {
  require(Qmax >= 0, "project: Qmax must be >= 0");
  require(n_nodes >= 2 * Qmax + 2, "project: need n_nodes >= 2*Qmax + 2");
  const GaussHermiteRule rule = gauss_hermite(n_nodes);
  const std::size_t n = rule.nodes.size();
  std::vector<double> fv(n);
  for (std::size_t i = 0; i < n; ++i) {
    fv[i] = f(rule.nodes[i]);
    if (!std::isfinite(fv[i]))
      throw numeric_error("project: f not finite at quadrature node x=" + std::to_string(rule.nodes[i]));
  }
  HermiteExpansion e;
  e.coeffs.assign(static_cast<std::size_t>(Qmax) + 1, 0.0);
  std::vector<double> hm(n, 1.0), h(n);
  for (std::size_t i = 0; i < n; ++i) h[i] = rule.nodes[i];
  double fact = 1.0;
  for (int q = 0; q <= Qmax; ++q) {
    if (q > 0) fact *= q;
    KahanSum s;
    for (std::size_t i = 0; i < n; ++i) {
      const double hq = (q == 0) ? 1.0 : h[i];
      s.add(rule.weights[i] * fv[i] * hq);
    }
    e.coeffs[static_cast<std::size_t>(q)] = s.value() / fact;
    if (q >= 1) {
      for (std::size_t i = 0; i < n; ++i) {
        const double hp = rule.nodes[i] * h[i] - q * hm[i];
        hm[i] = h[i];
        h[i] = hp;
      }
    }
  }
  return e;
}

inline HermiteExpansion project(const std::function<double(double)>& f, int Qmax) {
  return project(f, Qmax, 2 * Qmax + 16);
}

/// Closed-form chaos expansion of |x|:
///   |x| = sqrt(2/pi) + sum_{q>=1} (-1)^{q-1} sqrt(2/pi) / (2^q q! (2q-1)) H_{2q}(x).
/// Odd coefficients vanish by symmetry. The centered variant sets c_0 = 0.
inline HermiteExpansion abs_expansion(int Qmax, bool centered = false) {
  require(Qmax >= 2 && Qmax % 2 == 0, "abs_expansion: Qmax must be even and >= 2");
  HermiteExpansion e;
  e.coeffs.assign(static_cast<std::size_t>(Qmax) + 1, 0.0);
  e.coeffs[0] = centered ? 0.0 : kSqrt2OverPi;
  double denom = 1.0;  // 2^q q!
  for (int q = 1; 2 * q <= Qmax; ++q) {
    denom *= 2.0 * q;
    const double sign = (q % 2 == 1) ? 1.0 : -1.0;
    e.coeffs[static_cast<std::size_t>(2 * q)] = sign * kSqrt2OverPi / (denom * (2.0 * q - 1.0));
  }
  e.rank = 2;
  return e;
}

/// Smallest q >= 1 with |c_q| > tol * max_{r>=1} |c_r|; c_0 is ignored.
inline int hermite_rank(const HermiteExpansion& e, double tol = 1e-8) {
  double cmax = 0.0;
  for (int q = 1; q <= e.qmax(); ++q) cmax = std::max(cmax, std::abs(e.coeff(q)));
  const double thresh = tol * cmax;
  if (cmax == 0.0) throw input_error("hermite_rank: all coefficients vanish, rank undetermined");
  for (int q = 1; q <= e.qmax(); ++q)
    if (std::abs(e.coeff(q)) > thresh) return q;
  throw input_error("hermite_rank: all coefficients below tolerance, rank undetermined");
}

/// f_d(x) = sum_{q>=d} c_q H_{q-d}(x): the index shift realized by (-D L^{-1})^d.
inline HermiteExpansion shift_expansion(const HermiteExpansion& e, int d) {
  require(d >= 0, "shift_expansion: d must be >= 0");
  if (d > e.qmax()) throw input_error("shift_expansion: shift exceeds Qmax, empty expansion");
  HermiteExpansion out;
  out.coeffs.assign(e.coeffs.begin() + d, e.coeffs.end());
  out.tol_rank = e.tol_rank;
  return out;
}

enum class MalliavinOp { D, Delta, Linv };

/// Coefficient actions: D: c_q H_q -> q c_q H_{q-1}; delta: c_q H_q -> c_q H_{q+1};
/// L^{-1}: c_q -> -c_q/q for q >= 1 (requires a centered expansion).
inline HermiteExpansion malliavin_apply(MalliavinOp op, const HermiteExpansion& e) {
  HermiteExpansion out;
  out.tol_rank = e.tol_rank;
  switch (op) {
    case MalliavinOp::D: {
      if (e.qmax() < 1) {
        out.coeffs.assign(1, 0.0);
        return out;
      }
      out.coeffs.assign(static_cast<std::size_t>(e.qmax()), 0.0);
      for (int q = 1; q <= e.qmax(); ++q)
        out.coeffs[static_cast<std::size_t>(q - 1)] = q * e.coeff(q);
      return out;
    }
    case MalliavinOp::Delta: {
      out.coeffs.assign(static_cast<std::size_t>(e.qmax()) + 2, 0.0);
      for (int q = 0; q <= e.qmax(); ++q)
        out.coeffs[static_cast<std::size_t>(q + 1)] = e.coeff(q);
      return out;
    }
    case MalliavinOp::Linv: {
      if (!e.centered())
        throw input_error("malliavin_apply: L^{-1} requires a centered expansion");
      out.coeffs.assign(e.coeffs.size(), 0.0);
      for (int q = 1; q <= e.qmax(); ++q)
        out.coeffs[static_cast<std::size_t>(q)] = -e.coeff(q) / q;
      return out;
    }
  }
  throw input_error("malliavin_apply: unknown operator");
}

/// (integral of |f|^p dgamma)^{1/p} by Gauss-Hermite quadrature.
inline double lp_norm_gaussian(const std::function<double(double)>& f, double p, int n_nodes = 96) {
  require(p > 0.0 && std::isfinite(p), "lp_norm_gaussian: p must be finite and positive");
  const GaussHermiteRule rule = gauss_hermite(n_nodes);
  KahanSum s;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double v = f(rule.nodes[i]);
    if (!std::isfinite(v))
      throw numeric_error("lp_norm_gaussian: f not finite at node x=" + std::to_string(rule.nodes[i]));
    s.add(rule.weights[i] * std::pow(std::abs(v), p));
  }
  return std::pow(s.value(), 1.0 / p);
}

}  // namespace bmlab
