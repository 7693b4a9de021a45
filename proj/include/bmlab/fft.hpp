#pragma once

// Minimal iterative radix-2 complex FFT; power-of-two lengths only.

#include <complex>
#include <vector>

#include "bmlab/common.hpp"

namespace bmlab {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// In-place forward FFT, X_k = sum_j x_j e^{-2 pi i jk/n}.
inline void fft(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  require(is_pow2(n), "fft: length must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * kPi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        const std::complex<double> u = a[i + j];
        const std::complex<double> v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

/// Inverse FFT (unitary pairing with fft: ifft(fft(x)) == x).
inline void ifft(std::vector<std::complex<double>>& a) {
  for (auto& z : a) z = std::conj(z);
  fft(a);
  const double inv = 1.0 / static_cast<double>(a.size());
  for (auto& z : a) z = std::conj(z) * inv;
}

}  // namespace bmlab
