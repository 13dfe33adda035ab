// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>

#include "mtrx/errors.hpp"

namespace mtrx {

/// Uniform periodic discretization of the square torus [0, L)^2 with n points
/// per side. Samples are stored row-major with x varying fastest, so sample
/// (i, j) sits at x = i*dx, y = j*dx.
class Grid {
public:
  Grid(std::size_t n, double length) : n_(n), length_(length) {
    if (n < 16 || n % 2 != 0)
      throw ConfigError("grid: n must be even and >= 16, got " + std::to_string(n));
    if (!(length > 0.0) || !std::isfinite(length))
      throw ConfigError("grid: length must be positive and finite");
  }

  std::size_t n() const noexcept { return n_; }
  double length() const noexcept { return length_; }
  double dx() const noexcept { return length_ / static_cast<double>(n_); }
  double area() const noexcept { return length_ * length_; }
  double cell_area() const noexcept { return dx() * dx(); }
  std::size_t size() const noexcept { return n_ * n_; }

  /// Number of complex modes kept along x by the real-to-complex transform.
  std::size_t nk() const noexcept { return n_ / 2 + 1; }
  std::size_t spectral_size() const noexcept { return n_ * nk(); }

  double x(std::size_t i) const noexcept { return dx() * static_cast<double>(i); }
  double y(std::size_t j) const noexcept { return x(j); }

  /// Signed mode number of FFT index `idx`, in {-n/2, ..., n/2-1}.
  long mode(std::size_t idx) const noexcept {
    const long m = static_cast<long>(idx);
    const long half = static_cast<long>(n_ / 2);
    return m < half ? m : m - static_cast<long>(n_);
  }

  /// Wavenumber 2*pi*j/L of FFT index `idx`.
  double wavenumber(std::size_t idx) const noexcept {
    return 2.0 * std::numbers::pi * static_cast<double>(mode(idx)) / length_;
  }

  /// Wavenumber used by first derivatives: the Nyquist entry is zero.
  double derivative_wavenumber(std::size_t idx) const noexcept {
    return idx == n_ / 2 ? 0.0 : wavenumber(idx);
  }

  /// Largest resolved wavenumber, pi*n/L.
  double k_max() const noexcept {
    return std::numbers::pi * static_cast<double>(n_) / length_;
  }

  friend bool operator==(const Grid&, const Grid&) = default;

private:
  std::size_t n_;
  double length_;
};

} // namespace mtrx
