#pragma once

// Periodic uniform grids, dense field storage and finite-difference calculus.
//
// Node ordering is axis-0 fastest. Tensor fields are stored component-major:
// every component is one contiguous array over the nodes, so derivative
// passes run over plain scalar arrays.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "formflow/errors.hpp"

namespace formflow {

inline constexpr int kMaxDim = 4;
inline constexpr int kMinPointsPerAxis = 8;

using Point = std::array<double, kMaxDim>;
using NodeCoords = std::array<int, kMaxDim>;

struct GridSpec {
  int dim = 0;
  std::array<int, kMaxDim> points{};
  std::array<double, kMaxDim> period{};

  static GridSpec make(const std::vector<int>& points_per_axis,
                       const std::vector<double>& period_per_axis) {
    if (points_per_axis.size() != period_per_axis.size()) {
      throw ArgumentError("grid: points and period lists differ in length");
    }
    const int n = static_cast<int>(points_per_axis.size());
    if (n < 2 || n > kMaxDim) {
      throw ArgumentError("grid: dimension must be in [2, 4], got " + std::to_string(n));
    }
    GridSpec g;
    g.dim = n;
    for (int i = 0; i < n; ++i) {
      if (points_per_axis[i] < kMinPointsPerAxis) {
        throw ArgumentError("grid: axis " + std::to_string(i) + " needs at least 8 points");
      }
      if (!(period_per_axis[i] > 0.0) || !std::isfinite(period_per_axis[i])) {
        throw ArgumentError("grid: axis " + std::to_string(i) + " period must be positive");
      }
      g.points[i] = points_per_axis[i];
      g.period[i] = period_per_axis[i];
    }
    return g;
  }

  /// Same point count and unit period on every axis.
  static GridSpec cube(int dim, int points_per_axis, double period_per_axis = 1.0) {
    return make(std::vector<int>(dim, points_per_axis),
                std::vector<double>(dim, period_per_axis));
  }

  double spacing(int axis) const { return period[axis] / points[axis]; }

  std::size_t node_count() const {
    std::size_t c = 1;
    for (int i = 0; i < dim; ++i) c *= static_cast<std::size_t>(points[i]);
    return c;
  }

  std::size_t stride(int axis) const {
    std::size_t s = 1;
    for (int i = 0; i < axis; ++i) s *= static_cast<std::size_t>(points[i]);
    return s;
  }

  double cell_volume() const {
    double v = 1.0;
    for (int i = 0; i < dim; ++i) v *= spacing(i);
    return v;
  }

  double min_spacing_sq() const {
    double m = spacing(0) * spacing(0);
    for (int i = 1; i < dim; ++i) m = std::min(m, spacing(i) * spacing(i));
    return m;
  }

  NodeCoords coords(std::size_t node) const {
    NodeCoords c{};
    for (int i = 0; i < dim; ++i) {
      c[i] = static_cast<int>(node % static_cast<std::size_t>(points[i]));
      node /= static_cast<std::size_t>(points[i]);
    }
    return c;
  }

  Point position(std::size_t node) const {
    const NodeCoords c = coords(node);
    Point x{};
    for (int i = 0; i < dim; ++i) x[i] = c[i] * spacing(i);
    return x;
  }

  void check_axis(int axis) const {
    if (axis < 0 || axis >= dim) {
      throw ArgumentError("axis " + std::to_string(axis) + " out of range for dimension " +
                          std::to_string(dim));
    }
  }

  bool operator==(const GridSpec&) const = default;
};

inline void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what) {
  if (!(a == b)) throw ArgumentError(std::string(what) + ": grid mismatch");
}

struct ScalarField {
  GridSpec grid;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(const GridSpec& g, double fill = 0.0)
      : grid(g), values(g.node_count(), fill) {}

  template <class F>
  static ScalarField from_function(const GridSpec& g, F&& f) {
    ScalarField s(g);
    for (std::size_t node = 0; node < s.values.size(); ++node) s.values[node] = f(g.position(node));
    return s;
  }

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t node) { return values[node]; }
  double operator[](std::size_t node) const { return values[node]; }
  std::span<double> span() { return values; }
  std::span<const double> span() const { return values; }

  double sup_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }
  double min() const { return *std::min_element(values.begin(), values.end()); }
  double max() const { return *std::max_element(values.begin(), values.end()); }
};

inline int int_pow(int base, int exp) {
  int r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

/// Dense tensor field with `up` contravariant slots followed by `low` covariant
/// slots. Component (i1, ..., ir) has flat index sum i_s * n^(r-1-s).
struct TensorField {
  GridSpec grid;
  int up = 0;
  int low = 0;
  std::vector<double> data;

  TensorField() = default;
  TensorField(const GridSpec& g, int contravariant, int covariant)
      : grid(g),
        up(contravariant),
        low(covariant),
        data(static_cast<std::size_t>(int_pow(g.dim, contravariant + covariant)) * g.node_count(),
             0.0) {}

  int rank() const { return up + low; }
  int dim() const { return grid.dim; }
  std::size_t nodes() const { return grid.node_count(); }
  int component_count() const { return int_pow(grid.dim, rank()); }

  int flat(std::span<const int> idx) const {
    int c = 0;
    for (int v : idx) c = c * grid.dim + v;
    return c;
  }
  int flat(std::initializer_list<int> idx) const {
    return flat(std::span<const int>(idx.begin(), idx.size()));
  }

  std::span<double> component(int c) { return {data.data() + c * nodes(), nodes()}; }
  std::span<const double> component(int c) const { return {data.data() + c * nodes(), nodes()}; }

  double at(int c, std::size_t node) const { return data[c * nodes() + node]; }
  double& at(int c, std::size_t node) { return data[c * nodes() + node]; }
  double operator()(std::initializer_list<int> idx, std::size_t node) const {
    return at(flat(idx), node);
  }

  ScalarField component_field(int c) const {
    ScalarField s(grid);
    auto src = component(c);
    std::copy(src.begin(), src.end(), s.values.begin());
    return s;
  }

  double sup_abs() const {
    double m = 0.0;
    for (double v : data) m = std::max(m, std::abs(v));
    return m;
  }
};

/// Fourth-order central difference along `axis` with periodic wraparound.
/// `f` and `out` must not alias.
inline void partial_derivative(std::span<const double> f, std::span<double> out,
                               const GridSpec& grid, int axis) {
  grid.check_axis(axis);
  if (f.size() != grid.node_count() || out.size() != grid.node_count()) {
    throw ArgumentError("partial_derivative: field size does not match grid");
  }
  const std::size_t inner = grid.stride(axis);
  const int n = grid.points[axis];
  const std::size_t line = inner * static_cast<std::size_t>(n);
  const std::size_t outer = grid.node_count() / line;
  const double c = 1.0 / (12.0 * grid.spacing(axis));
  for (std::size_t o = 0; o < outer; ++o) {
    const double* base = f.data() + o * line;
    double* dst_base = out.data() + o * line;
    for (int i = 0; i < n; ++i) {
      const double* fm2 = base + static_cast<std::size_t>((i + n - 2) % n) * inner;
      const double* fm1 = base + static_cast<std::size_t>((i + n - 1) % n) * inner;
      const double* fp1 = base + static_cast<std::size_t>((i + 1) % n) * inner;
      const double* fp2 = base + static_cast<std::size_t>((i + 2) % n) * inner;
      double* dst = dst_base + static_cast<std::size_t>(i) * inner;
      for (std::size_t k = 0; k < inner; ++k) {
        dst[k] = c * ((fm2[k] - fp2[k]) + 8.0 * (fp1[k] - fm1[k]));
      }
    }
  }
}

inline ScalarField partial_derivative(const ScalarField& f, int axis) {
  ScalarField out(f.grid);
  partial_derivative(f.span(), out.span(), f.grid, axis);
  return out;
}

/// Componentwise partial derivative of every component of a tensor field.
inline TensorField partial_derivative(const TensorField& t, int axis) {
  TensorField out(t.grid, t.up, t.low);
  for (int c = 0; c < t.component_count(); ++c) {
    partial_derivative(t.component(c), out.component(c), t.grid, axis);
  }
  return out;
}

/// Composition of two first-derivative stencils, always applied lower axis
/// first, so the result is bitwise symmetric in (a, b). `scratch` must hold
/// one node array.
inline void second_partial(std::span<const double> f, std::span<double> out,
                           std::span<double> scratch, const GridSpec& grid, int a, int b) {
  grid.check_axis(a);
  grid.check_axis(b);
  const int lo = std::min(a, b);
  const int hi = std::max(a, b);
  partial_derivative(f, scratch, grid, lo);
  partial_derivative(scratch, out, grid, hi);
}

inline ScalarField second_partial(const ScalarField& f, int a, int b) {
  ScalarField out(f.grid);
  std::vector<double> scratch(f.size());
  second_partial(f.span(), out.span(), scratch, f.grid, a, b);
  return out;
}

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Rectangle-rule quadrature of f * weight over the periodic box.
inline double integrate_scalar(const ScalarField& f, const ScalarField& weight) {
  require_same_grid(f.grid, weight.grid, "integrate_scalar");
  CompensatedSum acc;
  for (std::size_t node = 0; node < f.size(); ++node) acc.add(f[node] * weight[node]);
  return acc.value() * f.grid.cell_volume();
}

}  // namespace formflow
