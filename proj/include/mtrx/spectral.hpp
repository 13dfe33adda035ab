// SPDX-License-Identifier: Apache-2.0
/// \file spectral.hpp
/// \brief Fourier pseudo-spectral operators on the periodic square.
///
/// The engine wraps a pair of FFTW real-to-complex / complex-to-real plans
/// and implements exact differentiation, the 2/3 dealiasing rule, the Leray
/// projector, Poisson inversion and the heat semigroup as diagonal
/// multipliers in Fourier space.
///
/// Conventions: the forward transform is the unnormalized DFT, the inverse
/// divides by n^2. First-derivative symbols use wavenumbers with the Nyquist
/// entry set to zero; even-order symbols (Laplacian, heat kernel) use the
/// full |k|^2. The Leray projector and Poisson solver are built from the
/// derivative wavenumbers so that div(project(w)) vanishes identically, and
/// leave every mode whose derivative wavenumber is zero untouched.
#pragma once

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstring>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include "mtrx/aligned.hpp"
#include "mtrx/errors.hpp"
#include "mtrx/field.hpp"
#include "mtrx/grid.hpp"

namespace mtrx {

using Complex = std::complex<double>;

/// Half-plane Fourier coefficients of a real field: n rows (y modes) of
/// n/2+1 entries (non-negative x modes).
class Spectrum {
public:
  explicit Spectrum(const Grid& grid) : grid_(grid), coeffs_(grid.spectral_size()) {}

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return coeffs_.size(); }
  Complex& operator[](std::size_t k) noexcept { return coeffs_[k]; }
  const Complex& operator[](std::size_t k) const noexcept { return coeffs_[k]; }
  /// Coefficient with x-mode index `i` in [0, n/2] and y index `j` in [0, n).
  Complex& at(std::size_t i, std::size_t j) noexcept { return coeffs_[j * grid_.nk() + i]; }
  const Complex& at(std::size_t i, std::size_t j) const noexcept { return coeffs_[j * grid_.nk() + i]; }

  Complex* data() noexcept { return coeffs_.data(); }
  const Complex* data() const noexcept { return coeffs_.data(); }

  Spectrum& operator+=(const Spectrum& o) {
    for (std::size_t k = 0; k < size(); ++k) coeffs_[k] += o.coeffs_[k];
    return *this;
  }
  Spectrum& operator-=(const Spectrum& o) {
    for (std::size_t k = 0; k < size(); ++k) coeffs_[k] -= o.coeffs_[k];
    return *this;
  }
  Spectrum& operator*=(double a) noexcept {
    for (auto& c : coeffs_) c *= a;
    return *this;
  }
  Spectrum& axpy(double a, const Spectrum& o) {
    for (std::size_t k = 0; k < size(); ++k) coeffs_[k] += a * o.coeffs_[k];
    return *this;
  }

  /// Multiplies every coefficient by symbol(kx_index, ky_index).
  template <class Symbol>
  Spectrum& apply(Symbol&& symbol) {
    const std::size_t n = grid_.n(), nk = grid_.nk();
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < nk; ++i) coeffs_[j * nk + i] *= symbol(i, j);
    return *this;
  }

  /// Multiplies coefficient k by the real factor table[k].
  Spectrum& scale_by(std::span<const double> table) noexcept {
    for (std::size_t k = 0; k < size(); ++k) coeffs_[k] *= table[k];
    return *this;
  }

private:
  Grid grid_;
  AlignedVector<Complex> coeffs_;
};

namespace detail {

// The FFTW planner is not reentrant; execution of distinct plans is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

} // namespace detail

class SpectralEngine {
public:
  explicit SpectralEngine(const Grid& grid)
      : grid_(grid), real_scratch_(grid.size()), spec_scratch_(grid.spectral_size()) {
    const std::size_t n = grid.n(), nk = grid.nk();
    kx_.resize(nk);
    ky_.resize(n);
    for (std::size_t i = 0; i < nk; ++i) kx_[i] = grid.derivative_wavenumber(i);
    for (std::size_t j = 0; j < n; ++j) ky_[j] = grid.derivative_wavenumber(j);
    k2_.resize(grid.spectral_size());
    dealias_mask_.resize(grid.spectral_size());
    const long ln = static_cast<long>(n);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < nk; ++i) {
        const double a = grid.wavenumber(i), b = grid.wavenumber(j);
        k2_[j * nk + i] = a * a + b * b;
        const bool keep = 3 * std::labs(grid.mode(i)) <= ln && 3 * std::labs(grid.mode(j)) <= ln;
        dealias_mask_[j * nk + i] = keep ? 1.0 : 0.0;
      }

    const int ni = static_cast<int>(n);
    auto* cplx = reinterpret_cast<fftw_complex*>(spec_scratch_.data());
    std::lock_guard lock(detail::fftw_planner_mutex());
    forward_ = fftw_plan_dft_r2c_2d(ni, ni, real_scratch_.data(), cplx, FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r_2d(ni, ni, cplx, real_scratch_.data(), FFTW_ESTIMATE);
    if (!forward_ || !inverse_) throw Error("FFTW plan creation failed");
  }

  SpectralEngine(const SpectralEngine&) = delete;
  SpectralEngine& operator=(const SpectralEngine&) = delete;

  ~SpectralEngine() {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
  }

  const Grid& grid() const noexcept { return grid_; }

  Spectrum forward(const Field& f) {
    check(f.grid(), "forward transform");
    if (!f.all_finite()) throw NonFinite("forward transform of a non-finite field");
    Spectrum out(grid_);
    // Out-of-place r2c leaves its input intact; every buffer comes from
    // fftw_malloc and so shares the planning alignment.
    fftw_execute_dft_r2c(forward_, const_cast<double*>(f.values().data()),
                         reinterpret_cast<fftw_complex*>(out.data()));
    return out;
  }

  Field inverse(const Spectrum& s) {
    check(s.grid(), "inverse transform");
    // c2r overwrites its input, so work on a scaled copy.
    const double scale = 1.0 / static_cast<double>(grid_.size());
    for (std::size_t k = 0; k < s.size(); ++k) spec_scratch_[k] = s[k] * scale;
    Field out = Field::uninitialized(grid_);
    fftw_execute_dft_c2r(inverse_, reinterpret_cast<fftw_complex*>(spec_scratch_.data()),
                         out.values().data());
    return out;
  }

  // ---- symbols -------------------------------------------------------------

  /// Derivative wavenumbers (Nyquist entry zero).
  double kx(std::size_t i) const noexcept { return kx_[i]; }
  double ky(std::size_t j) const noexcept { return ky_[j]; }
  /// |k|^2 with full (non-truncated) wavenumbers.
  double k2(std::size_t i, std::size_t j) const noexcept { return k2_[j * grid_.nk() + i]; }
  bool keep_dealiased(std::size_t i, std::size_t j) const noexcept {
    return dealias_mask_[j * grid_.nk() + i] != 0.0;
  }

  // ---- operators in Fourier space -----------------------------------------

  Spectrum ddx(Spectrum s) const noexcept {
    const std::size_t n = grid_.n(), nk = grid_.nk();
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < nk; ++i) s[j * nk + i] = times_i(s[j * nk + i], kx_[i]);
    return s;
  }
  Spectrum ddy(Spectrum s) const noexcept {
    const std::size_t n = grid_.n(), nk = grid_.nk();
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < nk; ++i) s[j * nk + i] = times_i(s[j * nk + i], ky_[j]);
    return s;
  }
  void dealias_in_place(Spectrum& s) const noexcept { s.scale_by(dealias_mask_); }

  /// Multiplies by exp(-nu |k|^2 dt). Factor tables are cached per nu*dt.
  void heat_in_place(Spectrum& s, double nu, double dt) {
    const double nudt = nu * dt;
    if (nudt == 0.0) return;
    s.scale_by(heat_table(nudt));
  }

  void leray_in_place(Spectrum& sx, Spectrum& sy) const noexcept {
    const std::size_t n = grid_.n(), nk = grid_.nk();
    for (std::size_t j = 0; j < n; ++j) {
      const double b = ky_[j];
      for (std::size_t i = 0; i < nk; ++i) {
        const double a = kx_[i];
        const double kk = a * a + b * b;
        if (kk == 0.0) continue;
        const std::size_t k = j * nk + i;
        const Complex proj = (a * sx[k] + b * sy[k]) / kk;
        sx[k] -= a * proj;
        sy[k] -= b * proj;
      }
    }
  }

  // ---- physical-space operators ---------------------------------------------

  VectorField grad(const Field& f) {
    const Spectrum s = forward(f);
    return VectorField(inverse(ddx(s)), inverse(ddy(s)));
  }

  Field div(const VectorField& w) {
    Spectrum s = ddx(forward(w.x));
    s += ddy(forward(w.y));
    return inverse(s);
  }

  Field laplacian(const Field& f) {
    Spectrum s = forward(f);
    for (std::size_t k = 0; k < s.size(); ++k) s[k] *= -k2_[k];
    return inverse(s);
  }

  VectorField leray_project(const VectorField& w) {
    Spectrum sx = forward(w.x), sy = forward(w.y);
    leray_in_place(sx, sy);
    return VectorField(inverse(sx), inverse(sy));
  }

  Field dealias(const Field& f) {
    Spectrum s = forward(f);
    dealias_in_place(s);
    return inverse(s);
  }

  Field heat_propagator(const Field& f, double nu, double dt) {
    if (nu < 0.0 || dt < 0.0) throw ConfigError("heat_propagator: nu and dt must be >= 0");
    Spectrum s = forward(f);
    heat_in_place(s, nu, dt);
    return inverse(s);
  }

  /// Pressure p with -lap(p) = div(div(u(x)u + v(x)v)), normalized to zero
  /// mean.
  Field pressure_diagnostic(const VectorField& u, const VectorField& v) {
    check(u.grid(), "pressure_diagnostic");
    check(v.grid(), "pressure_diagnostic");
    const Spectrum txx = forward(u.x * u.x + v.x * v.x);
    const Spectrum txy = forward(u.x * u.y + v.x * v.y);
    const Spectrum tyy = forward(u.y * u.y + v.y * v.y);
    Spectrum p(grid_);
    const std::size_t n = grid_.n(), nk = grid_.nk();
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < nk; ++i) {
        const std::size_t k = j * nk + i;
        if (k2_[k] == 0.0) continue;
        const double a = kx_[i], b = ky_[j];
        // div div T has symbol -k_i k_j; -lap has symbol |k|^2.
        p[k] = -(a * a * txx[k] + 2.0 * a * b * txy[k] + b * b * tyy[k]) / k2_[k];
      }
    return inverse(p);
  }

  /// L2 norm from the coefficients (Parseval).
  double spectral_l2(const Field& f) {
    const Spectrum s = forward(f);
    const std::size_t n = grid_.n(), nk = grid_.nk();
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < nk; ++i) {
        const double w = (i == 0 || i == n / 2) ? 1.0 : 2.0;
        sum += w * std::norm(s.at(i, j));
      }
    const double nn = static_cast<double>(grid_.size());
    return std::sqrt(sum * grid_.cell_area() / nn);
  }

private:
  static Complex times_i(const Complex& c, double k) noexcept { return {-k * c.imag(), k * c.real()}; }

  void check(const Grid& g, const char* where) const {
    if (!(g == grid_)) throw GridMismatch(where);
  }

  std::span<const double> heat_table(double nudt) {
    for (const auto& [key, table] : heat_cache_)
      if (key == nudt) return table;
    if (heat_cache_.size() >= kHeatCacheSize) heat_cache_.erase(heat_cache_.begin());
    std::vector<double> table(k2_.size());
    for (std::size_t k = 0; k < k2_.size(); ++k) table[k] = std::exp(-nudt * k2_[k]);
    heat_cache_.emplace_back(nudt, std::move(table));
    return heat_cache_.back().second;
  }

  static constexpr std::size_t kHeatCacheSize = 8;

  Grid grid_;
  std::vector<double> kx_, ky_, k2_, dealias_mask_;
  std::vector<std::pair<double, std::vector<double>>> heat_cache_;
  AlignedVector<double> real_scratch_;
  AlignedVector<Complex> spec_scratch_;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

} // namespace mtrx
