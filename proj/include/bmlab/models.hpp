#pragma once

// Covariance models: stationary rho(h) with rho(0)=1 and self-similar
// processes with cov(s,t) = s^{2 beta} phi(t/s), plus increment covariances,
// correlations, mixed partials and the u1/u2 perturbation profiles.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "bmlab/common.hpp"

namespace bmlab {

/// a_alpha(h) = ((|h-1|^a + |h+1|^a - 2|h|^a)) / 2 : the unit-lag increment
/// covariance of fBm when alpha = 2H; even in h, a_alpha(0) = 1.
inline double a_alpha(double alpha, double h) {
  h = std::abs(h);
  return 0.5 * (std::pow(std::abs(h - 1.0), alpha) + std::pow(h + 1.0, alpha) -
                2.0 * std::pow(h, alpha));
}

// ---------------------------------------------------------------------------
// Stationary models
// ---------------------------------------------------------------------------

enum class StationaryKind { Fgn, AAlpha, Exponential, Tabulated };

struct StationaryModel {
  StationaryKind kind = StationaryKind::Fgn;
  double param = 0.5;               // H, alpha or theta
  std::vector<double> grid_h;       // tabulated: ascending, grid_h[0] == 0
  std::vector<double> grid_rho;

  static StationaryModel fgn(double H) {
    require(H > 0.0 && H < 1.0, "fgn: H must lie in (0,1)");
    return {StationaryKind::Fgn, H, {}, {}};
  }
  static StationaryModel a_alpha_model(double alpha) {
    require(alpha > 0.0 && alpha <= 2.0, "a_alpha: alpha must lie in (0,2]");
    return {StationaryKind::AAlpha, alpha, {}, {}};
  }
  static StationaryModel exponential(double theta) {
    require(theta > 0.0, "exponential: theta must be positive");
    return {StationaryKind::Exponential, theta, {}, {}};
  }
  static StationaryModel tabulated(std::vector<double> h, std::vector<double> rho) {
    require(h.size() == rho.size() && h.size() >= 2, "tabulated: need matching grids, size >= 2");
    require(h.front() == 0.0, "tabulated: grid must start at h = 0");
    require(std::abs(rho.front() - 1.0) < 1e-12, "tabulated: rho(0) must equal 1");
    for (std::size_t i = 1; i < h.size(); ++i)
      require(h[i] > h[i - 1], "tabulated: grid must be strictly increasing");
    StationaryModel m{StationaryKind::Tabulated, 0.0, std::move(h), std::move(rho)};
    return m;
  }

  /// Effective alpha of the power-law tail |rho(h)| <= C h^{alpha-2}; only
  /// meaningful for the fgn / a_alpha kinds.
  double tail_alpha() const {
    switch (kind) {
      case StationaryKind::Fgn: return 2.0 * param;
      case StationaryKind::AAlpha: return param;
      default: return 0.0;
    }
  }

  bool has_power_tail() const {
    return kind == StationaryKind::Fgn || kind == StationaryKind::AAlpha;
  }

  std::string id() const {
    switch (kind) {
      case StationaryKind::Fgn: return "fgn:" + std::to_string(param);
      case StationaryKind::AAlpha: return "a_alpha:" + std::to_string(param);
      case StationaryKind::Exponential: return "exponential:" + std::to_string(param);
      case StationaryKind::Tabulated: return "tabulated[" + std::to_string(grid_h.size()) + "]";
    }
    return "?";
  }
};

/// rho(|h|); tabulated models interpolate linearly and refuse extrapolation.
inline double rho_eval(const StationaryModel& m, double h) {
  h = std::abs(h);
  double v = 0.0;
  switch (m.kind) {
    case StationaryKind::Fgn:
      v = a_alpha(2.0 * m.param, h);
      break;
    case StationaryKind::AAlpha:
      v = a_alpha(m.param, h);
      break;
    case StationaryKind::Exponential:
      v = std::exp(-m.param * h);
      break;
    case StationaryKind::Tabulated: {
      if (h > m.grid_h.back())
        throw input_error("rho_eval: tabulated lookup out of range (extrapolation forbidden)");
      const auto it = std::lower_bound(m.grid_h.begin(), m.grid_h.end(), h);
      const std::size_t j = static_cast<std::size_t>(it - m.grid_h.begin());
      if (j == 0 || m.grid_h[j] == h) {
        v = m.grid_rho[j];
      } else {
        const double t = (h - m.grid_h[j - 1]) / (m.grid_h[j] - m.grid_h[j - 1]);
        v = (1.0 - t) * m.grid_rho[j - 1] + t * m.grid_rho[j];
      }
      break;
    }
  }
  if (std::abs(v) > 1.0 + 1e-12)
    throw numeric_error("rho_eval: |rho| > 1 violates Cauchy-Schwarz at h=" + std::to_string(h));
  return v;
}

// ---------------------------------------------------------------------------
// Self-similar models
// ---------------------------------------------------------------------------

enum class SelfSimilarKind { Fbm, Bifbm, Subfbm, Custom };

/// Self-similar centered Gaussian process of order beta with
/// cov(s,t) = s^{2 beta} phi(t/s), phi(x) = -lambda (x-1)^alpha + psi(x).
struct SelfSimilarModel {
  SelfSimilarKind kind = SelfSimilarKind::Fbm;
  double H = 0.5;   // fbm/bifbm/subfbm index
  double K = 1.0;   // bifbm second index
  double beta = 0.5;
  double alpha = 1.0;
  double lambda = 0.5;
  double h2_c = 2.0;          // the constant c > 1 of the (H.2) region
  double h2_nu = 2.0;         // nu in (1,2] (alpha < 1 branch); fitted by check_h2
  std::function<double(double)> phi_fn;  // custom only, on [1, infinity)

  static SelfSimilarModel fbm(double Hv) {
    require(Hv > 0.0 && Hv < 1.0, "fbm: H must lie in (0,1)");
    SelfSimilarModel m;
    m.kind = SelfSimilarKind::Fbm;
    m.H = Hv;
    m.beta = Hv;
    m.alpha = 2.0 * Hv;
    m.lambda = 0.5;
    return m;
  }
  static SelfSimilarModel bifbm(double Hv, double Kv) {
    require(Hv > 0.0 && Hv < 1.0, "bifbm: H must lie in (0,1)");
    require(Kv > 0.0 && Kv <= 1.0, "bifbm: K must lie in (0,1]");
    SelfSimilarModel m;
    m.kind = SelfSimilarKind::Bifbm;
    m.H = Hv;
    m.K = Kv;
    m.beta = Hv * Kv;
    m.alpha = 2.0 * Hv * Kv;
    m.lambda = std::pow(2.0, -Kv);
    return m;
  }
  static SelfSimilarModel subfbm(double Hv) {
    require(Hv > 0.0 && Hv < 1.0, "subfbm: H must lie in (0,1)");
    SelfSimilarModel m;
    m.kind = SelfSimilarKind::Subfbm;
    m.H = Hv;
    m.beta = Hv;
    m.alpha = 2.0 * Hv;
    m.lambda = 0.5;
    return m;
  }
  static SelfSimilarModel custom(std::function<double(double)> phi, double beta_, double alpha_,
                                 double lambda_) {
    require(beta_ > 0.0 && beta_ < 1.0, "custom: beta must lie in (0,1)");
    require(alpha_ > 0.0 && alpha_ <= 2.0 * beta_, "custom: need alpha in (0, 2 beta]");
    require(lambda_ > 0.0, "custom: lambda must be positive");
    SelfSimilarModel m;
    m.kind = SelfSimilarKind::Custom;
    m.beta = beta_;
    m.alpha = alpha_;
    m.lambda = lambda_;
    m.phi_fn = std::move(phi);
    return m;
  }

  double phi(double x) const {
    require(x >= 1.0, "phi: argument must be >= 1");
    switch (kind) {
      case SelfSimilarKind::Fbm:
        return 0.5 * (1.0 + std::pow(x, 2.0 * H) - std::pow(x - 1.0, 2.0 * H));
      case SelfSimilarKind::Bifbm:
        return std::pow(2.0, -K) *
               (std::pow(1.0 + std::pow(x, 2.0 * H), K) - std::pow(x - 1.0, 2.0 * H * K));
      case SelfSimilarKind::Subfbm:
        return 1.0 + std::pow(x, 2.0 * H) -
               0.5 * (std::pow(1.0 + x, 2.0 * H) + std::pow(x - 1.0, 2.0 * H));
      case SelfSimilarKind::Custom:
        return phi_fn(x);
    }
    return 0.0;
  }

  /// psi(x) = phi(x) + lambda (x-1)^alpha, the smooth part under (H.1).
  double psi(double x) const { return phi(x) + lambda * std::pow(x - 1.0, alpha); }

  std::string id() const {
    switch (kind) {
      case SelfSimilarKind::Fbm: return "fbm:" + std::to_string(H);
      case SelfSimilarKind::Bifbm: return "bifbm:" + std::to_string(H) + "," + std::to_string(K);
      case SelfSimilarKind::Subfbm: return "subfbm:" + std::to_string(H);
      case SelfSimilarKind::Custom: return "custom";
    }
    return "?";
  }
};

/// E[X(s)X(t)] = (s^t ordering handled); 0 on the axes since X(0) = 0.
inline double cov_self_similar(const SelfSimilarModel& m, double s, double t) {
  if (s < 0.0 || t < 0.0) throw input_error("cov_self_similar: negative time");
  if (s > t) std::swap(s, t);
  if (s == 0.0) return 0.0;
  return std::pow(s, 2.0 * m.beta) * m.phi(t / s);
}

/// E[(X(s+lag)-X(s))(X(t+lag)-X(t))], exact from the covariance.
inline double increment_cov(const SelfSimilarModel& m, double s, double t, double lag = 1.0) {
  require(lag > 0.0, "increment_cov: lag must be positive");
  return cov_self_similar(m, s + lag, t + lag) - cov_self_similar(m, s + lag, t) -
         cov_self_similar(m, s, t + lag) + cov_self_similar(m, s, t);
}

/// Increment covariance with different lags on the two slots (the Phi_{eps,delta} kernel).
inline double increment_cov2(const SelfSimilarModel& m, double eps, double del, double u, double v) {
  return cov_self_similar(m, u + eps, v + del) - cov_self_similar(m, u + eps, v) -
         cov_self_similar(m, u, v + del) + cov_self_similar(m, u, v);
}

/// Exact standard deviation of X(s+lag)-X(s).
inline double increment_sd(const SelfSimilarModel& m, double s, double lag = 1.0) {
  const double v = increment_cov(m, s, s, lag);
  if (!(v > 0.0)) throw numeric_error("increment_sd: degenerate increment variance at s=" + std::to_string(s));
  return std::sqrt(v);
}

/// Phi(s,t): correlation of the unit-lag increments at s and t.
inline double increment_corr(const SelfSimilarModel& m, double s, double t) {
  if (s < 0.0 || t < 0.0) throw input_error("increment_corr: negative time");
  if (s == t) {
    increment_sd(m, s);  // still surface degeneracy
    return 1.0;
  }
  const double c = increment_cov(m, s, t) / (increment_sd(m, s) * increment_sd(m, t));
  return std::clamp(c, -1.0, 1.0);
}

/// Phi_{eps,del}(u,v): correlation of Delta_eps X(u) and Delta_del X(v).
inline double increment_corr_scaled(const SelfSimilarModel& m, double eps, double del, double u,
                                    double v) {
  require(eps > 0.0 && del > 0.0, "increment_corr_scaled: lags must be positive");
  if (u < 0.0 || v < 0.0) throw input_error("increment_corr_scaled: negative time");
  if (u == v && eps == del) {
    increment_sd(m, u, eps);
    return 1.0;
  }
  const double c =
      increment_cov2(m, eps, del, u, v) / (increment_sd(m, u, eps) * increment_sd(m, v, del));
  return std::clamp(c, -1.0, 1.0);
}

/// d^2/du dv of cov(u,v); analytic for the built-in kinds, Richardson-
/// extrapolated central differences for custom models.
inline double mixed_partial(const SelfSimilarModel& m, double u, double v) {
  require(u > 0.0 && v > 0.0, "mixed_partial: need u,v > 0");
  if (u == v && m.alpha < 2.0)
    throw numeric_error("mixed_partial: diagonal is singular for alpha < 2");
  switch (m.kind) {
    case SelfSimilarKind::Fbm: {
      const double H = m.H;
      return H * (2.0 * H - 1.0) * std::pow(std::abs(u - v), 2.0 * H - 2.0);
    }
    case SelfSimilarKind::Bifbm: {
      const double H = m.H, K = m.K;
      const double smooth = 4.0 * H * H * K * (K - 1.0) *
                            std::pow(std::pow(u, 2.0 * H) + std::pow(v, 2.0 * H), K - 2.0) *
                            std::pow(u * v, 2.0 * H - 1.0);
      const double sing =
          2.0 * H * K * (2.0 * H * K - 1.0) * std::pow(std::abs(u - v), 2.0 * H * K - 2.0);
      return std::pow(2.0, -K) * (smooth + sing);
    }
    case SelfSimilarKind::Subfbm: {
      const double H = m.H;
      return H * (2.0 * H - 1.0) *
             (std::pow(std::abs(u - v), 2.0 * H - 2.0) - std::pow(u + v, 2.0 * H - 2.0));
    }
    case SelfSimilarKind::Custom: {
      const double h0 = 1e-4 * std::min(std::min(u, v), std::abs(u - v));
      auto cross = [&](double h) {
        return (cov_self_similar(m, u + h, v + h) - cov_self_similar(m, u + h, v - h) -
                cov_self_similar(m, u - h, v + h) + cov_self_similar(m, u - h, v - h)) /
               (4.0 * h * h);
      };
      const double d1 = cross(h0), d2 = cross(0.5 * h0);
      const double val = (4.0 * d2 - d1) / 3.0;  // Richardson, O(h^4)
      require_finite(val, "mixed_partial finite difference");
      return val;
    }
  }
  throw input_error("mixed_partial: unknown kind");
}

/// u1(s) solved from E[(X(s+1)-X(s))^2] = 2 lambda s^{2 beta - alpha} (1 + u1(s)).
inline double u1_profile(const SelfSimilarModel& m, double s) {
  require(s > 0.0, "u1_profile: need s > 0");
  return increment_cov(m, s, s) / (2.0 * m.lambda * std::pow(s, 2.0 * m.beta - m.alpha)) - 1.0;
}

/// u2(s,t) solved from E[D1X(s) D1X(t)] = lambda (s^t)^{2b-a} (2 a_alpha(s-t) + u2).
inline double u2_profile(const SelfSimilarModel& m, double s, double t) {
  require(s > 0.0 && t > 0.0, "u2_profile: need s,t > 0");
  const double mn = std::min(s, t);
  return increment_cov(m, s, t) / (m.lambda * std::pow(mn, 2.0 * m.beta - m.alpha)) -
         2.0 * a_alpha(m.alpha, s - t);
}

// Derivatives of phi and psi: analytic closed forms for the built-in kinds,
// 5-point central differences with Richardson extrapolation otherwise.

namespace detail {

inline double central_diff1(const std::function<double(double)>& f, double x, double h) {
  return (8.0 * (f(x + h) - f(x - h)) - (f(x + 2.0 * h) - f(x - 2.0 * h))) / (12.0 * h);
}
inline double central_diff2(const std::function<double(double)>& f, double x, double h) {
  return (-(f(x + 2.0 * h) + f(x - 2.0 * h)) + 16.0 * (f(x + h) + f(x - h)) - 30.0 * f(x)) /
         (12.0 * h * h);
}

}  // namespace detail

inline double psi_prime(const SelfSimilarModel& m, double x) {
  const double H = m.H, K = m.K;
  switch (m.kind) {
    case SelfSimilarKind::Fbm:
      return H * std::pow(x, 2.0 * H - 1.0);
    case SelfSimilarKind::Bifbm:
      return std::pow(2.0, -K) * K * std::pow(1.0 + std::pow(x, 2.0 * H), K - 1.0) * 2.0 * H *
             std::pow(x, 2.0 * H - 1.0);
    case SelfSimilarKind::Subfbm:
      return 2.0 * H * std::pow(x, 2.0 * H - 1.0) - H * std::pow(1.0 + x, 2.0 * H - 1.0);
    case SelfSimilarKind::Custom: {
      auto psi = [&](double y) { return m.psi(y); };
      const double h = 1e-4 * std::max(1.0, x);
      const double d1 = detail::central_diff1(psi, x, h);
      const double d2 = detail::central_diff1(psi, x, 0.5 * h);
      return (16.0 * d2 - d1) / 15.0;
    }
  }
  return 0.0;
}

inline double psi_second(const SelfSimilarModel& m, double x) {
  const double H = m.H, K = m.K;
  switch (m.kind) {
    case SelfSimilarKind::Fbm:
      return H * (2.0 * H - 1.0) * std::pow(x, 2.0 * H - 2.0);
    case SelfSimilarKind::Bifbm: {
      const double xp = std::pow(x, 2.0 * H);
      const double base = std::pow(1.0 + xp, K - 2.0);
      return std::pow(2.0, -K) * 2.0 * H * K * std::pow(x, 2.0 * H - 2.0) * base *
             ((2.0 * H - 1.0) * (1.0 + xp) + (K - 1.0) * 2.0 * H * xp);
    }
    case SelfSimilarKind::Subfbm:
      return 2.0 * H * (2.0 * H - 1.0) * std::pow(x, 2.0 * H - 2.0) -
             H * (2.0 * H - 1.0) * std::pow(1.0 + x, 2.0 * H - 2.0);
    case SelfSimilarKind::Custom: {
      auto psi = [&](double y) { return m.psi(y); };
      const double h = 1e-4 * std::max(1.0, x);
      const double d1 = detail::central_diff2(psi, x, h);
      const double d2 = detail::central_diff2(psi, x, 0.5 * h);
      return (4.0 * d2 - d1) / 3.0;
    }
  }
  return 0.0;
}

inline double phi_prime(const SelfSimilarModel& m, double x) {
  return psi_prime(m, x) - m.lambda * m.alpha * std::pow(x - 1.0, m.alpha - 1.0);
}

inline double phi_second(const SelfSimilarModel& m, double x) {
  return psi_second(m, x) - m.lambda * m.alpha * (m.alpha - 1.0) * std::pow(x - 1.0, m.alpha - 2.0);
}

}  // namespace bmlab
