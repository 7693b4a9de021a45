#pragma once

// Path functionals on sampled grids: the stationary functional Z_eps, the
// self-similar functional F_eps on the unit-lag scale, the regularized
// length process, and its centered/normalized fluctuations. All Riemann
// sums are left rectangles with a proportionally weighted partial cell at
// each requested time, which keeps the functionals exactly additive over
// adjacent intervals.

#include <cmath>
#include <string>
#include <vector>

#include "bmlab/asymptotics.hpp"
#include "bmlab/common.hpp"
#include "bmlab/hermite.hpp"
#include "bmlab/models.hpp"
#include "bmlab/sampler.hpp"

namespace bmlab {

enum class FunctionalKind { Z, F, Length, LengthFluct };

inline std::string functional_kind_name(FunctionalKind k) {
  switch (k) {
    case FunctionalKind::Z: return "Z";
    case FunctionalKind::F: return "F";
    case FunctionalKind::Length: return "length";
    case FunctionalKind::LengthFluct: return "length_fluct";
  }
  return "?";
}

struct FunctionalResult {
  std::vector<double> times;
  std::vector<double> values;
  double eps = 0.0;
  double delta = 0.0;          // grid step of the driving path
  double normalization = 1.0;  // multiplicative factor already applied
  FunctionalKind kind = FunctionalKind::Z;
};

namespace detail {

/// Left-rectangle sums of g over [0, b_i) for an increasing list of b_i,
/// with the endpoint cell weighted by its covered fraction.
template <typename G>
std::vector<double> riemann_prefix(const G& g, std::size_t n_avail, double step,
                                   const std::vector<double>& bounds) {
  std::vector<double> out(bounds.size());
  KahanSum acc;
  std::size_t j = 0;  // cells fully consumed
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    const double b = bounds[i];
    require(b >= 0.0, "riemann_prefix: negative endpoint");
    const std::size_t full = static_cast<std::size_t>(std::floor(b / step + 1e-9));
    require(full <= n_avail, "functional: insufficient grid coverage");
    for (; j < full; ++j) acc.add(step * g(j));
    double v = acc.value();
    const double frac = b - static_cast<double>(full) * step;
    if (frac > 1e-9 * step) {
      require(full < n_avail, "functional: insufficient grid coverage");
      v += frac * g(full);
    }
    out[i] = v;
  }
  return out;
}

inline void check_times(const std::vector<double>& times) {
  require(!times.empty(), "functional: empty time list");
  for (std::size_t i = 0; i < times.size(); ++i) {
    require(times[i] >= 0.0, "functional: negative time");
    if (i > 0) require(times[i] > times[i - 1], "functional: times must be strictly increasing");
  }
}

}  // namespace detail

/// Z_eps(t) = sqrt(eps) Int_0^{t/eps} f(Y(s)) ds on the grid of y.
/// The expansion must be centered (c_0 is excluded from the synthesis).
inline FunctionalResult compute_Z(const GridPath& y, const HermiteExpansion& e, double eps,
                                  const std::vector<double>& times) {
  require(eps > 0.0, "compute_Z: eps must be positive");
  detail::check_times(times);
  HermiteExpansion ec = e;
  if (!ec.coeffs.empty()) ec.coeffs[0] = 0.0;
  std::vector<double> fv(y.size());
  for (std::size_t j = 0; j < y.size(); ++j) fv[j] = ec(y.values[j]);

  std::vector<double> bounds(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) bounds[i] = times[i] / eps;
  FunctionalResult res;
  res.times = times;
  res.values = detail::riemann_prefix([&](std::size_t j) { return fv[j]; }, y.size(), y.delta, bounds);
  const double se = std::sqrt(eps);
  for (double& v : res.values) v *= se;
  res.eps = eps;
  res.delta = y.delta;
  res.kind = FunctionalKind::Z;
  return res;
}

/// F_eps(t) = sqrt(eps) Int_0^{t/eps} f(Y_1(u)) du, with Y_1 the unit-lag
/// normalized increments of x (exact model normalization).
inline FunctionalResult compute_F(const SelfSimilarModel& m, const GridPath& x,
                                  const HermiteExpansion& e, double eps,
                                  const std::vector<double>& times) {
  require(eps > 0.0, "compute_F: eps must be positive");
  detail::check_times(times);
  const double steps_d = 1.0 / x.delta;
  const auto lag_steps = static_cast<std::size_t>(std::llround(steps_d));
  require(std::abs(steps_d - static_cast<double>(lag_steps)) < 1e-9 && lag_steps >= 1,
          "compute_F: unit lag must be an integer number of grid steps");
  const GridPath y = normalized_increments(x, lag_steps, m);
  FunctionalResult res = compute_Z(y, e, eps, times);
  res.kind = FunctionalKind::F;
  return res;
}

/// L(X^eps; [0,t]) = eps^{-1} Int_0^t |X(u+eps) - X(u)| du; eps must sit on
/// the grid (no silent interpolation), and the result is nondecreasing in t.
inline FunctionalResult regularized_length(const GridPath& x, double eps,
                                           const std::vector<double>& times) {
  require(eps > 0.0, "regularized_length: eps must be positive");
  detail::check_times(times);
  const double steps_d = eps / x.delta;
  const auto eps_steps = static_cast<std::size_t>(std::llround(steps_d));
  if (std::abs(steps_d - static_cast<double>(eps_steps)) > 1e-9 || eps_steps < 1)
    throw input_error("regularized_length: eps is not an integer multiple of the grid step");
  const std::size_t n_avail = x.size() > eps_steps ? x.size() - eps_steps : 0;
  FunctionalResult res;
  res.times = times;
  res.values = detail::riemann_prefix(
      [&](std::size_t j) { return std::abs(x.values[j + eps_steps] - x.values[j]); }, n_avail,
      x.delta, times);
  for (double& v : res.values) v /= eps;
  res.eps = eps;
  res.delta = x.delta;
  res.kind = FunctionalKind::Length;
  return res;
}

/// Exact mean of the discretized length estimator: E|Delta_eps X(u)| summed
/// with the same cell weights, using E|N(0,s^2)| = s sqrt(2/pi).
inline std::vector<double> length_mean_exact(const SelfSimilarModel& m, double delta, double eps,
                                             const std::vector<double>& times) {
  const std::size_t n_need = static_cast<std::size_t>(std::ceil(times.back() / delta)) + 1;
  std::vector<double> means = detail::riemann_prefix(
      [&](std::size_t j) {
        return kSqrt2OverPi * increment_sd(m, static_cast<double>(j) * delta, eps);
      },
      n_need, delta, times);
  for (double& v : means) v /= eps;
  return means;
}

/// Centered and regime-scaled length fluctuation:
///   central:    eps^{1/2-beta} (L - E L)
///   log:        eps^{1/2-beta} / sqrt(|log eps|) (L - E L)
///   noncentral: eps^{beta-1}   (L - E L)
/// Centering uses exact model means, never sample means.
inline FunctionalResult length_fluctuation(const SelfSimilarModel& m, const GridPath& x, double eps,
                                           const std::vector<double>& times,
                                           const RegimeReport& regime) {
  const RegimeReport expect = classify_regime(m.alpha, regime.d);
  if (expect.regime != regime.regime)
    throw regime_error("length_fluctuation: regime report inconsistent with the model's alpha");
  FunctionalResult res = regularized_length(x, eps, times);
  const std::vector<double> means = length_mean_exact(m, x.delta, eps, times);
  double scale = 0.0;
  switch (regime.regime) {
    case Regime::Central: scale = std::pow(eps, 0.5 - m.beta); break;
    case Regime::LogCentral:
      scale = std::pow(eps, 0.5 - m.beta) / std::sqrt(std::abs(std::log(eps)));
      break;
    case Regime::Noncentral: scale = std::pow(eps, m.beta - 1.0); break;
  }
  for (std::size_t i = 0; i < res.values.size(); ++i)
    res.values[i] = scale * (res.values[i] - means[i]);
  res.normalization = scale;
  res.kind = FunctionalKind::LengthFluct;
  return res;
}

}  // namespace bmlab
