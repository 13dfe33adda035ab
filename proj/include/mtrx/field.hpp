// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mtrx/aligned.hpp"
#include "mtrx/errors.hpp"
#include "mtrx/grid.hpp"

namespace mtrx {

/// Real scalar samples on a Grid.
class Field {
public:
  explicit Field(const Grid& grid, double value = 0.0)
      : grid_(grid), values_(grid.size(), value) {}

  Field(const Grid& grid, const std::vector<double>& values)
      : grid_(grid), values_(values.begin(), values.end()) {
    if (values_.size() != grid_.size())
      throw GridMismatch("Field construction (sample count)");
  }

  /// Field with indeterminate samples, to be overwritten by the caller.
  static Field uninitialized(const Grid& grid) { return Field(grid, Uninit{}); }

  /// Samples f(x, y) at every grid point.
  template <class F>
  static Field sample(const Grid& grid, F&& f) {
    Field out = uninitialized(grid);
    const std::size_t n = grid.n();
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i)
        out(i, j) = f(grid.x(i), grid.y(j));
    return out;
  }

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  double& operator[](std::size_t k) noexcept { return values_[k]; }
  double operator[](std::size_t k) const noexcept { return values_[k]; }
  double& operator()(std::size_t i, std::size_t j) noexcept { return values_[j * grid_.n() + i]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return values_[j * grid_.n() + i]; }

  bool all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
  }

  double max() const noexcept { return *std::max_element(values_.begin(), values_.end()); }
  double min() const noexcept { return *std::min_element(values_.begin(), values_.end()); }
  double max_abs() const noexcept {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }
  double mean() const noexcept {
    double s = 0.0;
    for (double v : values_) s += v;
    return s / static_cast<double>(values_.size());
  }

  Field& operator+=(const Field& o) { return zip(o, std::plus<>{}, "operator+="); }
  Field& operator-=(const Field& o) { return zip(o, std::minus<>{}, "operator-="); }
  Field& operator*=(double a) noexcept {
    for (double& v : values_) v *= a;
    return *this;
  }
  /// this += a * o
  Field& axpy(double a, const Field& o) {
    check_same_grid(o, "axpy");
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += a * o.values_[k];
    return *this;
  }

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(double s, Field a) { return a *= s; }
  friend Field operator*(Field a, double s) { return a *= s; }

  /// Pointwise product.
  friend Field operator*(const Field& a, const Field& b) {
    a.check_same_grid(b, "operator*");
    Field out = uninitialized(a.grid_);
    for (std::size_t k = 0; k < a.size(); ++k) out.values_[k] = a.values_[k] * b.values_[k];
    return out;
  }

  template <class F>
  Field map(F&& f) const {
    Field out = uninitialized(grid_);
    for (std::size_t k = 0; k < size(); ++k) out.values_[k] = f(values_[k]);
    return out;
  }

  void check_same_grid(const Field& o, const std::string& where) const {
    if (!(grid_ == o.grid_)) throw GridMismatch(where);
  }

  friend bool operator==(const Field&, const Field&) = default;

private:
  struct Uninit {};
  Field(const Grid& grid, Uninit) : grid_(grid), values_(grid.size()) {}

  template <class Op>
  Field& zip(const Field& o, Op op, const char* where) {
    check_same_grid(o, where);
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] = op(values_[k], o.values_[k]);
    return *this;
  }

  Grid grid_;
  AlignedVector<double> values_;
};

/// Two scalar components on one grid.
struct VectorField {
  Field x;
  Field y;

  explicit VectorField(const Grid& grid) : x(grid), y(grid) {}
  VectorField(Field fx, Field fy) : x(std::move(fx)), y(std::move(fy)) {
    x.check_same_grid(y, "VectorField components");
  }

  const Grid& grid() const noexcept { return x.grid(); }
  bool all_finite() const noexcept { return x.all_finite() && y.all_finite(); }

  VectorField& operator+=(const VectorField& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  VectorField& operator-=(const VectorField& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  VectorField& operator*=(double a) noexcept {
    x *= a;
    y *= a;
    return *this;
  }
  VectorField& axpy(double a, const VectorField& o) {
    x.axpy(a, o.x);
    y.axpy(a, o.y);
    return *this;
  }
  friend VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
  friend VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
  friend VectorField operator*(double s, VectorField a) { return a *= s; }

  /// Pointwise Euclidean magnitude.
  Field magnitude() const {
    Field out(grid());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::hypot(x[k], y[k]);
    return out;
  }

  friend bool operator==(const VectorField&, const VectorField&) = default;
};

/// Discrete L2 inner product, sum(a*b)*dx^2.
inline double inner(const Field& a, const Field& b) {
  a.check_same_grid(b, "inner");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s * a.grid().cell_area();
}

inline double inner(const VectorField& a, const VectorField& b) {
  return inner(a.x, b.x) + inner(a.y, b.y);
}

} // namespace mtrx
