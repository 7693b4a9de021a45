#pragma once

// Exact Gaussian path sampling on uniform grids. Stationary models go
// through circulant embedding (one complex FFT per draw, exact covariance,
// eigenvalue clipping with bookkeeping); self-similar models through a
// reusable dense Cholesky factor; fBm through cumulative fGn sums.

#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "bmlab/common.hpp"
#include "bmlab/fft.hpp"
#include "bmlab/models.hpp"
#include "bmlab/rng.hpp"

namespace bmlab {

struct GridPath {
  double delta = 1.0;
  std::vector<double> values;
  std::string model_id;
  std::uint64_t seed = 0;
  std::uint64_t replicate = 0;

  std::size_t size() const { return values.size(); }
  double time_of(std::size_t j) const { return static_cast<double>(j) * delta; }
};

// ---------------------------------------------------------------------------
// Circulant embedding for stationary models
// ---------------------------------------------------------------------------

struct CirculantPlan {
  std::size_t n = 0;        // requested grid length
  double delta = 1.0;
  std::size_t m = 0;        // half embedding size; embedding is 2m
  std::vector<double> scale;  // sqrt(lambda_k / (2m)) for k = 0..2m-1, clipped
  double clipped_mass = 0.0;  // |sum of clipped negative eigenvalues|
  double total_mass = 0.0;    // sum |lambda_k| before clipping
  std::string model_id;
};

/// Embed c_k = rho(k delta), k = 0..m, into the symmetric circulant of size
/// 2m and diagonalize by FFT. If the spectrum dips below -tol_psd * max, the
/// embedding is doubled (up to 2^10 n); residual negatives are clipped to 0.
inline CirculantPlan plan_circulant(const StationaryModel& rho, std::size_t n, double delta,
                                    double tol_psd = 1e-9) {
  require(n >= 2, "plan_circulant: need n >= 2");
  require(delta > 0.0, "plan_circulant: need delta > 0");
  std::size_t m = 1;
  while (m < n) m <<= 1;
  const std::size_t m_cap = n << 10;
  CirculantPlan plan;
  plan.n = n;
  plan.delta = delta;
  plan.model_id = rho.id();
  for (;;) {
    const std::size_t N = 2 * m;
    std::vector<std::complex<double>> row(N);
    for (std::size_t k = 0; k <= m; ++k) row[k] = rho_eval(rho, static_cast<double>(k) * delta);
    for (std::size_t k = 1; k < m; ++k) row[N - k] = row[k];
    fft(row);
    double minev = row[0].real(), maxev = row[0].real();
    for (const auto& z : row) {
      minev = std::min(minev, z.real());
      maxev = std::max(maxev, z.real());
    }
    if (minev >= -tol_psd * maxev || m >= m_cap) {
      if (minev < -tol_psd * maxev)
        throw numeric_error("plan_circulant: embedding not PSD after doubling cap; min eigenvalue " +
                            std::to_string(minev));
      plan.m = m;
      plan.scale.resize(N);
      plan.clipped_mass = 0.0;
      plan.total_mass = 0.0;
      for (std::size_t k = 0; k < N; ++k) {
        double ev = row[k].real();
        plan.total_mass += std::abs(ev);
        if (ev < 0.0) {
          plan.clipped_mass += -ev;
          ev = 0.0;
        }
        plan.scale[k] = std::sqrt(ev / static_cast<double>(N));
      }
      return plan;
    }
    m <<= 1;
  }
}

/// One exact draw of (Y(0), ..., Y((n-1) delta)). The Hermitian-symmetrized
/// spectral noise makes the FFT output exactly real with covariance
/// rho(|i-j| delta); normals are consumed in a fixed order so the draw is a
/// pure function of (seed, replicate).
inline GridPath sample_stationary(const CirculantPlan& plan, std::uint64_t seed,
                                  std::uint64_t replicate) {
  const std::size_t m = plan.m, N = 2 * m;
  NormalStream rng(seed, replicate);
  std::vector<std::complex<double>> w(N);
  w[0] = plan.scale[0] * rng.next_normal();
  w[m] = plan.scale[m] * rng.next_normal();
  const double inv_sqrt2 = 0.70710678118654752440;
  for (std::size_t k = 1; k < m; ++k) {
    const double a = rng.next_normal();
    const double b = rng.next_normal();
    w[k] = plan.scale[k] * std::complex<double>(a * inv_sqrt2, b * inv_sqrt2);
    w[N - k] = std::conj(w[k]);
  }
  fft(w);
  GridPath path;
  path.delta = plan.delta;
  path.model_id = plan.model_id;
  path.seed = seed;
  path.replicate = replicate;
  path.values.resize(plan.n);
  for (std::size_t j = 0; j < plan.n; ++j) {
    path.values[j] = w[j].real();
    require_finite(path.values[j], "sample_stationary value");
  }
  return path;
}

// ---------------------------------------------------------------------------
// fBm by cumulative fGn
// ---------------------------------------------------------------------------

struct FbmPlan {
  CirculantPlan steps;  // step-increment process: rho(k) = a_{2H}(k), unit grid
  double H = 0.5;
  double delta = 1.0;
  std::size_t n = 0;
};

inline FbmPlan plan_fbm(double H, std::size_t n, double delta, double tol_psd = 1e-9) {
  require(H > 0.0 && H < 1.0, "plan_fbm: H must lie in (0,1)");
  require(n >= 2, "plan_fbm: need n >= 2");
  FbmPlan plan;
  plan.steps = plan_circulant(StationaryModel::fgn(H), n - 1, 1.0, tol_psd);
  plan.H = H;
  plan.delta = delta;
  plan.n = n;
  return plan;
}

/// Exact fBm on the grid: X(0) = 0, increments are delta^H-scaled fGn.
inline GridPath sample_fbm_plan(const FbmPlan& plan, std::uint64_t seed, std::uint64_t replicate) {
  GridPath incr = sample_stationary(plan.steps, seed, replicate);
  GridPath path;
  path.delta = plan.delta;
  path.model_id = "fbm:" + std::to_string(plan.H);
  path.seed = seed;
  path.replicate = replicate;
  path.values.resize(plan.n);
  path.values[0] = 0.0;
  const double scale = std::pow(plan.delta, plan.H);
  KahanSum cum;
  for (std::size_t j = 1; j < plan.n; ++j) {
    cum.add(scale * incr.values[j - 1]);
    path.values[j] = cum.value();
  }
  return path;
}

inline GridPath sample_fbm(double H, std::size_t n, double delta, std::uint64_t seed,
                           std::uint64_t replicate) {
  return sample_fbm_plan(plan_fbm(H, n, delta), seed, replicate);
}

// ---------------------------------------------------------------------------
// Dense Cholesky for self-similar models
// ---------------------------------------------------------------------------

constexpr std::size_t kCholeskyGridCap = 8192;  // O(n^3) factorization guard

struct CholeskyPlan {
  std::size_t n = 0;    // grid length including the pinned X(0) = 0
  double delta = 1.0;
  std::vector<double> factor;  // packed lower triangle, (n-1) x (n-1)
  std::string model_id;
};

namespace detail {

/// In-place packed Cholesky; returns the failing pivot index or -1.
inline long packed_cholesky(std::vector<double>& a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double* ri = a.data() + i * (i + 1) / 2;
    for (std::size_t j = 0; j <= i; ++j) {
      const double* rj = a.data() + j * (j + 1) / 2;
      double s = ri[j];
      for (std::size_t k = 0; k < j; ++k) s -= ri[k] * rj[k];
      if (i == j) {
        if (s <= 0.0) return static_cast<long>(i);
        ri[j] = std::sqrt(s);
      } else {
        ri[j] = s / rj[j];
      }
    }
  }
  return -1;
}

}  // namespace detail

/// Covariance factor for X on {0, delta, ..., (n-1) delta}. The degenerate
/// first row (X(0) = 0) is pinned and the remaining submatrix factored; a
/// near-singular matrix gets one retry with 1e-12 * max-diagonal jitter.
inline CholeskyPlan plan_cholesky(const SelfSimilarModel& m, std::size_t n, double delta) {
  require(n >= 2, "plan_cholesky: need n >= 2");
  require(delta > 0.0, "plan_cholesky: need delta > 0");
  if (n > kCholeskyGridCap)
    throw input_error("plan_cholesky: grid length exceeds the 2^13 cost cap");
  const std::size_t nn = n - 1;
  std::vector<double> a(nn * (nn + 1) / 2);
  double max_diag = 0.0;
  for (std::size_t i = 0; i < nn; ++i) {
    const double ti = static_cast<double>(i + 1) * delta;
    double* row = a.data() + i * (i + 1) / 2;
    for (std::size_t j = 0; j <= i; ++j) {
      row[j] = cov_self_similar(m, static_cast<double>(j + 1) * delta, ti);
    }
    max_diag = std::max(max_diag, row[i]);
  }
  std::vector<double> work = a;
  long pivot = detail::packed_cholesky(work, nn);
  if (pivot >= 0) {
    work = a;
    const double jitter = 1e-12 * max_diag;
    for (std::size_t i = 0; i < nn; ++i) work[i * (i + 1) / 2 + i] += jitter;
    pivot = detail::packed_cholesky(work, nn);
    if (pivot >= 0)
      throw numeric_error("plan_cholesky: matrix not positive definite at pivot " +
                          std::to_string(pivot) + " even after jitter");
  }
  CholeskyPlan plan;
  plan.n = n;
  plan.delta = delta;
  plan.factor = std::move(work);
  plan.model_id = m.id();

  // spot-check: L L^T must reproduce the covariance on random entries
  NormalStream probe(0x9e3779b97f4a7c15ull, 0);
  for (int t = 0; t < 16; ++t) {
    const std::size_t i = static_cast<std::size_t>(probe.next_uniform() * nn);
    const std::size_t j = static_cast<std::size_t>(probe.next_uniform() * (i + 1));
    const double* ri = plan.factor.data() + i * (i + 1) / 2;
    const double* rj = plan.factor.data() + j * (j + 1) / 2;
    double s = 0.0;
    for (std::size_t k = 0; k <= j; ++k) s += ri[k] * rj[k];
    const double want = a[i * (i + 1) / 2 + j];
    if (std::abs(s - want) > 1e-8 * std::max(1.0, max_diag))
      throw numeric_error("plan_cholesky: factor reconstruction error " +
                          std::to_string(std::abs(s - want)));
  }
  return plan;
}

inline GridPath sample_self_similar(const CholeskyPlan& plan, std::uint64_t seed,
                                    std::uint64_t replicate) {
  const std::size_t nn = plan.n - 1;
  NormalStream rng(seed, replicate);
  std::vector<double> z(nn);
  rng.fill_normals(z.data(), nn);
  GridPath path;
  path.delta = plan.delta;
  path.model_id = plan.model_id;
  path.seed = seed;
  path.replicate = replicate;
  path.values.assign(plan.n, 0.0);
  for (std::size_t i = 0; i < nn; ++i) {
    const double* row = plan.factor.data() + i * (i + 1) / 2;
    double s = 0.0;
    for (std::size_t k = 0; k <= i; ++k) s += row[k] * z[k];
    path.values[i + 1] = s;
  }
  return path;
}

// ---------------------------------------------------------------------------
// Normalized increments Y(u) = Delta X(u) / ||Delta X(u)||
// ---------------------------------------------------------------------------

/// Denominators come from the model covariance, never from the sample.
inline GridPath normalized_increments(const GridPath& path, std::size_t lag_steps,
                                      const SelfSimilarModel& m) {
  require(lag_steps >= 1, "normalized_increments: lag_steps must be >= 1");
  require(path.size() > lag_steps, "normalized_increments: path shorter than the lag");
  const double lag = static_cast<double>(lag_steps) * path.delta;
  GridPath out;
  out.delta = path.delta;
  out.model_id = path.model_id + "|Y";
  out.seed = path.seed;
  out.replicate = path.replicate;
  out.values.resize(path.size() - lag_steps);
  for (std::size_t j = 0; j < out.values.size(); ++j) {
    const double sd = increment_sd(m, path.time_of(j), lag);
    out.values[j] = (path.values[j + lag_steps] - path.values[j]) / sd;
  }
  return out;
}

inline GridPath normalized_increments(const GridPath& path, std::size_t lag_steps,
                                      const StationaryModel& m) {
  require(lag_steps >= 1, "normalized_increments: lag_steps must be >= 1");
  require(path.size() > lag_steps, "normalized_increments: path shorter than the lag");
  const double lag = static_cast<double>(lag_steps) * path.delta;
  const double var = 2.0 * (rho_eval(m, 0.0) - rho_eval(m, lag));
  if (!(var > 0.0)) throw numeric_error("normalized_increments: degenerate increment variance");
  const double sd = std::sqrt(var);
  GridPath out;
  out.delta = path.delta;
  out.model_id = path.model_id + "|Y";
  out.seed = path.seed;
  out.replicate = path.replicate;
  out.values.resize(path.size() - lag_steps);
  for (std::size_t j = 0; j < out.values.size(); ++j)
    out.values[j] = (path.values[j + lag_steps] - path.values[j]) / sd;
  return out;
}

/// Binary dump: one JSON header line, then little-endian doubles.
inline void write_path(const GridPath& path, const std::string& filename) {
  std::ofstream os(filename, std::ios::binary);
  if (!os) throw input_error("write_path: cannot open " + filename);
  os << "{\"n\": " << path.size() << ", \"delta\": " << path.delta << ", \"model_id\": \""
     << path.model_id << "\", \"seed\": " << path.seed << ", \"replicate\": " << path.replicate
     << "}\n";
  os.write(reinterpret_cast<const char*>(path.values.data()),
           static_cast<std::streamsize>(path.values.size() * sizeof(double)));
}

}  // namespace bmlab
