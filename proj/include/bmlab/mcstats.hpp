#pragma once

// Monte Carlo harness: replicated ensembles with per-replicate substreams
// and fixed aggregation order, empirical f.d.d. statistics with jackknife
// standard errors, a one-sample Kolmogorov-Smirnov test, moment-scaling
// fits, and the exact discretized-variance oracle that separates
// discretization bias from Monte Carlo error.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "bmlab/asymptotics.hpp"
#include "bmlab/common.hpp"
#include "bmlab/functionals.hpp"
#include "bmlab/hermite.hpp"
#include "bmlab/models.hpp"
#include "bmlab/sampler.hpp"

namespace bmlab {

struct FluctuationEnsemble {
  std::uint64_t config_hash = 0;
  std::vector<double> times;
  double eps = 0.0;
  std::size_t replicates = 0;
  std::vector<double> values;  // row-major [replicates][times.size()]
  double normalization = 1.0;
  FunctionalKind kind = FunctionalKind::Z;

  double at(std::size_t r, std::size_t i) const { return values[r * times.size() + i]; }

  double mean(std::size_t i) const {
    KahanSum s;
    for (std::size_t r = 0; r < replicates; ++r) s.add(at(r, i));
    return s.value() / static_cast<double>(replicates);
  }
  double variance(std::size_t i) const {
    const double mu = mean(i);
    KahanSum s;
    for (std::size_t r = 0; r < replicates; ++r) {
      const double d = at(r, i) - mu;
      s.add(d * d);
    }
    return s.value() / static_cast<double>(replicates - 1);
  }
  std::vector<double> column(std::size_t i) const {
    std::vector<double> c(replicates);
    for (std::size_t r = 0; r < replicates; ++r) c[r] = at(r, i);
    return c;
  }
};

/// Run fn(replicate) for replicate = 0..R-1, possibly concurrently; rows are
/// stored by replicate index so the result is schedule-independent.
inline std::vector<double> run_matrix(std::size_t R, std::size_t width, int threads,
                                      const std::function<std::vector<double>(std::uint64_t)>& fn) {
  require(R >= 1, "run_matrix: need at least one replicate");
  std::vector<double> out(R * width);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string first_error;
  std::mutex err_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t r = next.fetch_add(1);
      if (r >= R || failed.load()) return;
      try {
        const std::vector<double> row = fn(r);
        require(row.size() == width, "run_matrix: row width mismatch");
        std::copy(row.begin(), row.end(), out.begin() + static_cast<std::ptrdiff_t>(r * width));
      } catch (const std::exception& ex) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!failed.exchange(true))
          first_error = "replicate " + std::to_string(r) + ": " + ex.what();
        return;
      }
    }
  };
  const int nt = std::max(1, threads);
  if (nt == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nt));
    for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failed.load()) throw numeric_error("run_matrix: " + first_error);
  return out;
}

/// Everything needed to replicate one functional; exactly one model is set.
struct EnsembleSpec {
  std::optional<StationaryModel> stationary;
  std::optional<SelfSimilarModel> self_similar;
  HermiteExpansion f;          // ignored for length kinds
  FunctionalKind kind = FunctionalKind::Z;
  double eps = 0.0;
  double delta = 0.25;
  std::vector<double> times;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  int threads = 1;
  bool normalize = true;       // apply the regime normalization to F values

  std::uint64_t hash() const {
    std::ostringstream os;
    os.precision(17);
    os << functional_kind_name(kind) << '|';
    if (stationary) os << stationary->id();
    if (self_similar) os << self_similar->id();
    os << '|';
    for (double c : f.coeffs) os << c << ',';
    os << '|' << eps << '|' << delta << '|';
    for (double t : times) os << t << ',';
    os << '|' << replicates << '|' << seed << '|' << normalize;
    return fnv1a(os.str());
  }
};

inline FluctuationEnsemble run_ensemble(const EnsembleSpec& spec) {
  require(spec.replicates >= 2, "run_ensemble: need at least 2 replicates");
  require(spec.eps > 0.0 && spec.eps < 1.0, "run_ensemble: need eps in (0,1)");
  require(!spec.times.empty(), "run_ensemble: empty time list");
  require(static_cast<bool>(spec.stationary) != static_cast<bool>(spec.self_similar),
          "run_ensemble: exactly one model must be set");
  const double tmax = spec.times.back();
  FluctuationEnsemble ens;
  ens.config_hash = spec.hash();
  ens.times = spec.times;
  ens.eps = spec.eps;
  ens.replicates = spec.replicates;
  ens.kind = spec.kind;

  std::function<std::vector<double>(std::uint64_t)> fn;
  double norm = 1.0;

  if (spec.kind == FunctionalKind::Z) {
    require(static_cast<bool>(spec.stationary), "run_ensemble: Z needs a stationary model");
    const std::size_t n =
        static_cast<std::size_t>(std::ceil(tmax / spec.eps / spec.delta - 1e-9)) + 2;
    require(n <= (1u << 22), "run_ensemble: grid size exceeds the 2^22 guard");
    const CirculantPlan plan = plan_circulant(*spec.stationary, n, spec.delta);
    fn = [&, plan](std::uint64_t r) {
      const GridPath y = sample_stationary(plan, spec.seed, r);
      return compute_Z(y, spec.f, spec.eps, spec.times).values;
    };
  } else if (spec.kind == FunctionalKind::F) {
    require(static_cast<bool>(spec.self_similar), "run_ensemble: F needs a self-similar model");
    const SelfSimilarModel& m = *spec.self_similar;
    const std::size_t n =
        static_cast<std::size_t>(std::ceil((tmax / spec.eps + 1.0) / spec.delta - 1e-9)) + 2;
    if (spec.normalize) {
      const int d = hermite_rank(spec.f, spec.f.tol_rank);
      norm = normalization(m.alpha, d, spec.eps);
    }
    if (m.kind == SelfSimilarKind::Fbm) {
      const FbmPlan plan = plan_fbm(m.H, n, spec.delta);
      fn = [&, plan, m](std::uint64_t r) {
        const GridPath x = sample_fbm_plan(plan, spec.seed, r);
        return compute_F(m, x, spec.f, spec.eps, spec.times).values;
      };
    } else {
      const CholeskyPlan plan = plan_cholesky(m, n, spec.delta);
      fn = [&, plan, m](std::uint64_t r) {
        const GridPath x = sample_self_similar(plan, spec.seed, r);
        return compute_F(m, x, spec.f, spec.eps, spec.times).values;
      };
    }
  } else {  // Length or LengthFluct
    require(static_cast<bool>(spec.self_similar),
            "run_ensemble: length kinds need a self-similar model");
    const SelfSimilarModel& m = *spec.self_similar;
    const std::size_t n =
        static_cast<std::size_t>(std::ceil((tmax + spec.eps) / spec.delta - 1e-9)) + 2;
    const bool fluct = spec.kind == FunctionalKind::LengthFluct;
    const RegimeReport regime = classify_regime(m.alpha, 2);
    auto make_fn = [&](auto plan, auto sampler) {
      return [&, plan, m, fluct, regime, sampler](std::uint64_t r) {
        const GridPath x = sampler(plan, spec.seed, r);
        if (fluct) return length_fluctuation(m, x, spec.eps, spec.times, regime).values;
        return regularized_length(x, spec.eps, spec.times).values;
      };
    };
    if (m.kind == SelfSimilarKind::Fbm) {
      fn = make_fn(plan_fbm(m.H, n, spec.delta),
                   [](const FbmPlan& p, std::uint64_t s, std::uint64_t r) {
                     return sample_fbm_plan(p, s, r);
                   });
    } else {
      fn = make_fn(plan_cholesky(m, n, spec.delta),
                   [](const CholeskyPlan& p, std::uint64_t s, std::uint64_t r) {
                     return sample_self_similar(p, s, r);
                   });
    }
  }

  ens.values = run_matrix(spec.replicates, spec.times.size(), spec.threads, fn);
  if (norm != 1.0)
    for (double& v : ens.values) v *= norm;
  ens.normalization = norm;
  return ens;
}

struct CovEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
};

/// Unbiased sample covariance of columns i and j with a jackknife SE over
/// replicates (replicates are exactly independent by construction).
inline CovEstimate empirical_cov(const FluctuationEnsemble& ens, std::size_t i, std::size_t j) {
  const std::size_t R = ens.replicates;
  require(R >= 30, "empirical_cov: need at least 30 replicates for the jackknife SE");
  KahanSum sx, sy, sxy;
  for (std::size_t r = 0; r < R; ++r) {
    sx.add(ens.at(r, i));
    sy.add(ens.at(r, j));
    sxy.add(ens.at(r, i) * ens.at(r, j));
  }
  const double Sx = sx.value(), Sy = sy.value(), Sxy = sxy.value();
  const double n = static_cast<double>(R);
  CovEstimate out;
  out.estimate = (Sxy - Sx * Sy / n) / (n - 1.0);

  // leave-one-out covariances from the same totals
  const double np = n - 1.0;
  std::vector<double> loo(R);
  KahanSum lsum;
  for (std::size_t r = 0; r < R; ++r) {
    const double x = ens.at(r, i), y = ens.at(r, j);
    const double mx = (Sx - x) / np, my = (Sy - y) / np;
    loo[r] = (Sxy - x * y - np * mx * my) / (np - 1.0);
    lsum.add(loo[r]);
  }
  const double lbar = lsum.value() / n;
  KahanSum dev;
  for (std::size_t r = 0; r < R; ++r) {
    const double d = loo[r] - lbar;
    dev.add(d * d);
  }
  out.standard_error = std::sqrt((n - 1.0) / n * dev.value());
  return out;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

struct KsResult {
  double statistic = 0.0;
  double p_value = 0.0;
};

/// Asymptotic Kolmogorov tail Q(x) = 2 sum_{k>=1} (-1)^{k-1} e^{-2 k^2 x^2}.
inline double kolmogorov_q(double x) {
  if (x <= 0.0) return 1.0;
  double s = 0.0;
  for (int k = 1; k <= 20; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    s += (k % 2 == 1) ? term : -term;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

/// One-sample KS test of the samples against a given CDF.
inline KsResult ks_test_cdf(std::vector<double> samples, const std::function<double(double)>& cdf) {
  require(samples.size() >= 20, "ks_test: need at least 20 samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double F = cdf(samples[i]);
    d = std::max(d, std::max(static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n));
  }
  KsResult out;
  out.statistic = d;
  out.p_value = kolmogorov_q(std::sqrt(n) * d);
  return out;
}

inline KsResult ks_normal_test(const std::vector<double>& samples, double mean, double var) {
  if (!(var > 0.0)) throw input_error("ks_normal_test: variance must be positive");
  const double sd = std::sqrt(var);
  return ks_test_cdf(samples, [=](double x) { return normal_cdf((x - mean) / sd); });
}

/// Fitted exponent kappa of E|Z(t)-Z(s)|^p ~ |t-s|^kappa across the distinct
/// gaps available in the ensemble's time grid (needs at least 4).
inline double moment_scaling(const FluctuationEnsemble& ens, double p) {
  require(p > 0.0, "moment_scaling: p must be positive");
  std::map<long long, std::pair<KahanSum, std::size_t>> by_gap;
  const std::size_t nt = ens.times.size();
  for (std::size_t i = 0; i < nt; ++i) {
    for (std::size_t j = i + 1; j < nt; ++j) {
      const double gap = ens.times[j] - ens.times[i];
      const long long key = std::llround(gap * 1e12);
      auto& slot = by_gap[key];
      for (std::size_t r = 0; r < ens.replicates; ++r) {
        slot.first.add(std::pow(std::abs(ens.at(r, j) - ens.at(r, i)), p));
        ++slot.second;
      }
    }
  }
  if (by_gap.size() < 4) throw input_error("moment_scaling: need at least 4 distinct gaps");
  std::vector<double> lx, ly;
  for (const auto& [key, slot] : by_gap) {
    const double m = slot.first.value() / static_cast<double>(slot.second);
    if (!(m > 0.0)) throw numeric_error("moment_scaling: degenerate moment, fit impossible");
    lx.push_back(std::log(static_cast<double>(key) * 1e-12));
    ly.push_back(std::log(m));
  }
  return fit_slope(lx, ly);
}

/// Exact variance of the discretized functional sqrt(eps) delta sum f(Y(s_j)):
///   eps delta^2 sum_{j,k} sum_q c_q^2 q! corr(s_j, s_k)^q,
/// via O(n) lag sums for stationary correlations.
inline double discretized_variance(const HermiteExpansion& e,
                                   const std::function<double(double)>& rho_of_lag, double eps,
                                   double delta, double t) {
  const auto n = static_cast<std::size_t>(std::llround(t / (eps * delta)));
  require(n >= 1 && n <= (1u << 22), "discretized_variance: grid size outside (0, 2^22]");
  std::vector<double> rho(n);
  for (std::size_t l = 0; l < n; ++l) rho[l] = rho_of_lag(static_cast<double>(l) * delta);
  KahanSum total;
  double fact = 1.0;
  for (int q = 1; q <= e.qmax(); ++q) {
    fact *= q;
    const double c = e.coeff(q);
    if (c == 0.0) continue;
    KahanSum s;
    s.add(static_cast<double>(n) * std::pow(rho[0], q));
    for (std::size_t l = 1; l < n; ++l)
      s.add(2.0 * static_cast<double>(n - l) * std::pow(rho[l], q));
    total.add(c * c * fact * s.value());
  }
  return eps * delta * delta * total.value();
}

/// Dense variant for non-stationary correlation evaluators (unit-lag scale).
inline double discretized_variance(const HermiteExpansion& e,
                                   const std::function<double(double, double)>& corr, double eps,
                                   double delta, double t) {
  const auto n = static_cast<std::size_t>(std::llround(t / (eps * delta)));
  require(n >= 1 && n <= 4096, "discretized_variance(dense): grid size outside (0, 4096]");
  std::vector<double> phi(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = corr(static_cast<double>(i) * delta, static_cast<double>(j) * delta);
      phi[i * n + j] = v;
      phi[j * n + i] = v;
    }
  std::vector<double> pw(phi);  // running power of phi, elementwise
  KahanSum total;
  double fact = 1.0;
  int cur_pow = 1;
  for (int q = 1; q <= e.qmax(); ++q) {
    fact *= q;
    const double c = e.coeff(q);
    if (c == 0.0) continue;
    while (cur_pow < q) {
      for (std::size_t k = 0; k < pw.size(); ++k) pw[k] *= phi[k];
      ++cur_pow;
    }
    KahanSum s;
    for (double v : pw) s.add(v);
    total.add(c * c * fact * s.value());
  }
  return eps * delta * delta * total.value();
}

}  // namespace bmlab
