#pragma once

// Differential p-forms stored on canonical (strictly increasing) multi-indices.
//
// Norm convention: |xi|^2 = xi_{i1..ip} xi^{i1..ip} summed over ALL index
// tuples, i.e. p! times the sum over increasing tuples in an orthonormal
// frame. Every norm, Gram form and curvature contraction in this library uses
// this full-contraction convention.

#include <algorithm>
#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "formflow/grid.hpp"
#include "formflow/metric.hpp"

namespace formflow {

using MultiIndex = std::array<int, kMaxDim>;

/// Position of a (possibly unordered) index tuple among canonical components,
/// with the sign of the sorting permutation. position < 0 marks a repeated index.
struct SignedSlot {
  int position = -1;
  int sign = 0;
};

/// All strictly increasing multi-indices of degree p in dimension n, in
/// lexicographic order, plus lookup tables for antisymmetric expansion.
class MultiIndexSet {
 public:
  MultiIndexSet(int n, int p) : n_(n), p_(p) {
    mask_to_position_.fill(-1);
    MultiIndex cur{};
    enumerate(0, 0, cur);
    const int full = int_pow(n, p);
    full_.resize(full);
    std::array<int, kMaxDim> tuple{};
    for (int f = 0; f < full; ++f) {
      int rest = f;
      for (int s = p - 1; s >= 0; --s) {
        tuple[s] = rest % n;
        rest /= n;
      }
      full_[f] = lookup_slow(std::span<const int>(tuple.data(), p));
    }
  }

  int dim() const { return n_; }
  int degree() const { return p_; }
  int size() const { return static_cast<int>(list_.size()); }
  const MultiIndex& operator[](int position) const { return list_[position]; }

  /// Sign and canonical position of an arbitrary tuple of length p.
  SignedSlot lookup(std::span<const int> tuple) const {
    int f = 0;
    for (int v : tuple) f = f * n_ + v;
    return full_[f];
  }
  SignedSlot lookup_full(int flat) const { return full_[flat]; }

  int position_of_mask(unsigned mask) const { return mask_to_position_[mask]; }

 private:
  void enumerate(int slot, int start, MultiIndex& cur) {
    if (slot == p_) {
      unsigned mask = 0;
      for (int s = 0; s < p_; ++s) mask |= 1u << cur[s];
      mask_to_position_[mask] = static_cast<int>(list_.size());
      list_.push_back(cur);
      return;
    }
    for (int v = start; v < n_; ++v) {
      cur[slot] = v;
      enumerate(slot + 1, v + 1, cur);
    }
  }

  SignedSlot lookup_slow(std::span<const int> tuple) const {
    std::array<int, kMaxDim> t{};
    std::copy(tuple.begin(), tuple.end(), t.begin());
    int sign = 1;
    const int p = static_cast<int>(tuple.size());
    for (int i = 1; i < p; ++i)
      for (int j = i; j > 0 && t[j - 1] >= t[j]; --j) {
        if (t[j - 1] == t[j]) return {};
        std::swap(t[j - 1], t[j]);
        sign = -sign;
      }
    unsigned mask = 0;
    for (int s = 0; s < p; ++s) mask |= 1u << t[s];
    return {mask_to_position_[mask], sign};
  }

  int n_;
  int p_;
  std::vector<MultiIndex> list_;
  std::array<int, 1 << kMaxDim> mask_to_position_{};
  std::vector<SignedSlot> full_;
};

/// Shared, immutable index tables for every (n, p) with n <= 4.
inline const MultiIndexSet& multi_indices(int n, int p) {
  static const std::vector<std::vector<MultiIndexSet>> tables = [] {
    std::vector<std::vector<MultiIndexSet>> t(kMaxDim + 1);
    for (int dim = 0; dim <= kMaxDim; ++dim)
      for (int deg = 0; deg <= dim; ++deg) t[dim].emplace_back(dim, deg);
    return t;
  }();
  if (n < 0 || n > kMaxDim || p < 0 || p > n) {
    throw ArgumentError("multi_indices: invalid degree " + std::to_string(p) + " for dimension " +
                        std::to_string(n));
  }
  return tables[n][p];
}

inline int binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  int r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

struct PForm {
  GridSpec grid;
  int degree = 0;
  std::vector<double> data;

  PForm() = default;
  PForm(const GridSpec& g, int p) : grid(g), degree(p) {
    if (p < 0 || p > g.dim) {
      throw ArgumentError("PForm: degree " + std::to_string(p) + " invalid for dimension " +
                          std::to_string(g.dim));
    }
    data.assign(static_cast<std::size_t>(binomial(g.dim, p)) * g.node_count(), 0.0);
  }

  const MultiIndexSet& indices() const { return multi_indices(grid.dim, degree); }
  int component_count() const { return binomial(grid.dim, degree); }
  std::size_t nodes() const { return grid.node_count(); }

  std::span<double> component(int c) { return {data.data() + c * nodes(), nodes()}; }
  std::span<const double> component(int c) const { return {data.data() + c * nodes(), nodes()}; }
  double at(int c, std::size_t node) const { return data[c * nodes() + node]; }
  double& at(int c, std::size_t node) { return data[c * nodes() + node]; }

  /// Component for a canonical multi-index given as a list.
  std::span<double> component(std::initializer_list<int> canonical) {
    const SignedSlot s = indices().lookup(std::span<const int>(canonical.begin(), canonical.size()));
    if (s.position < 0 || s.sign != 1) throw ArgumentError("PForm: index is not canonical");
    return component(s.position);
  }

  double sup_abs() const {
    double m = 0.0;
    for (double v : data) m = std::max(m, std::abs(v));
    return m;
  }
};

/// Antisymmetric read of an arbitrary index tuple: sign(sigma) times the
/// canonical component, 0 for repeated indices.
inline double full_component(const PForm& xi, std::size_t node, std::span<const int> tuple) {
  if (static_cast<int>(tuple.size()) != xi.degree) {
    throw ArgumentError("full_component: tuple length does not match degree");
  }
  for (int v : tuple)
    if (v < 0 || v >= xi.grid.dim) throw ArgumentError("full_component: index out of range");
  const SignedSlot s = xi.indices().lookup(tuple);
  if (s.position < 0) return 0.0;
  return s.sign * xi.at(s.position, node);
}

inline double full_component(const PForm& xi, std::size_t node, std::initializer_list<int> tuple) {
  return full_component(xi, node, std::span<const int>(tuple.begin(), tuple.size()));
}

/// Dense n^p expansion of the form at one node.
inline void expand_full(const PForm& xi, std::size_t node, double* out) {
  const MultiIndexSet& mi = xi.indices();
  const int full = int_pow(xi.grid.dim, xi.degree);
  for (int f = 0; f < full; ++f) {
    const SignedSlot s = mi.lookup_full(f);
    out[f] = s.position < 0 ? 0.0 : s.sign * xi.at(s.position, node);
  }
}

/// |xi|^2_g at every node (full-contraction convention).
inline ScalarField pointwise_norm_sq(const PForm& xi, const MetricState& ms) {
  require_same_grid(xi.grid, ms.grid(), "pointwise_norm_sq");
  const int n = xi.grid.dim;
  const int p = xi.degree;
  const int full = int_pow(n, p);
  ScalarField out(xi.grid);
  std::vector<double> low(full), up(full), work(full);
  for (std::size_t node = 0; node < xi.nodes(); ++node) {
    expand_full(xi, node, low.data());
    std::copy(low.begin(), low.end(), up.begin());
    const NodeMetric nm = load_node_metric(ms, node);
    raise_all(up.data(), work.data(), n, p, nm.ginv);
    double s = 0.0;
    for (int f = 0; f < full; ++f) s += low[f] * up[f];
    out[node] = s;
  }
  return out;
}

/// (d xi)_{i0..ip} = sum_s (-1)^s d_{i_s} xi_{i0..^i_s..ip}. Metric independent.
inline PForm exterior_derivative(const PForm& xi) {
  const int n = xi.grid.dim;
  const int p = xi.degree;
  if (p >= n) throw ArgumentError("exterior_derivative: degree must be below the dimension");
  const MultiIndexSet& src = xi.indices();
  PForm out(xi.grid, p + 1);
  const MultiIndexSet& dst = out.indices();
  // partials[c * n + a] = d_a xi_c
  std::vector<std::vector<double>> partials(static_cast<std::size_t>(src.size()) * n);
  for (int c = 0; c < src.size(); ++c)
    for (int a = 0; a < n; ++a) {
      auto& buf = partials[c * n + a];
      buf.resize(xi.nodes());
      partial_derivative(xi.component(c), buf, xi.grid, a);
    }
  for (int c = 0; c < dst.size(); ++c) {
    const MultiIndex& idx = dst[c];
    auto target = out.component(c);
    for (int s = 0; s <= p; ++s) {
      std::array<int, kMaxDim> rest{};
      for (int t = 0, r = 0; t <= p; ++t)
        if (t != s) rest[r++] = idx[t];
      const int sc = src.lookup(std::span<const int>(rest.data(), p)).position;
      const auto& d = partials[sc * n + idx[s]];
      const double sign = (s % 2 == 0) ? 1.0 : -1.0;
      for (std::size_t node = 0; node < xi.nodes(); ++node) target[node] += sign * d[node];
    }
  }
  return out;
}

/// Covariant derivative of a p-form, (nabla xi)_{I;j}, stored as canonical I
/// times derivative slot j: component index c * n + j.
struct FormGradient {
  GridSpec grid;
  int degree = 0;
  std::vector<double> data;

  std::size_t nodes() const { return grid.node_count(); }
  std::span<double> component(int c, int j) {
    return {data.data() + (static_cast<std::size_t>(c) * grid.dim + j) * nodes(), nodes()};
  }
  std::span<const double> component(int c, int j) const {
    return {data.data() + (static_cast<std::size_t>(c) * grid.dim + j) * nodes(), nodes()};
  }
  double at(int c, int j, std::size_t node) const {
    return data[(static_cast<std::size_t>(c) * grid.dim + j) * nodes() + node];
  }
};

/// Table of xi_{I with slot s replaced by m} as signed canonical positions,
/// indexed [(c * p + s) * n + m].
inline std::vector<SignedSlot> slot_substitution_table(int n, int p) {
  const MultiIndexSet& mi = multi_indices(n, p);
  std::vector<SignedSlot> table(static_cast<std::size_t>(mi.size()) * p * n);
  for (int c = 0; c < mi.size(); ++c)
    for (int s = 0; s < p; ++s)
      for (int m = 0; m < n; ++m) {
        MultiIndex t = mi[c];
        t[s] = m;
        table[(c * p + s) * n + m] = mi.lookup(std::span<const int>(t.data(), p));
      }
  return table;
}

/// (nabla xi)_{I;j} = d_j xi_I - sum_s Gamma^m_{j i_s} xi_{I[s -> m]}.
inline FormGradient form_gradient(const PForm& xi, const MetricState& ms) {
  require_same_grid(xi.grid, ms.grid(), "form_gradient");
  const int n = xi.grid.dim;
  const int p = xi.degree;
  const MultiIndexSet& mi = xi.indices();
  const auto subst = slot_substitution_table(n, p);
  const std::size_t nodes = xi.nodes();
  FormGradient out{xi.grid, p, std::vector<double>(static_cast<std::size_t>(mi.size()) * n * nodes)};
  const TensorField& gam = ms.christoffel;
  for (int c = 0; c < mi.size(); ++c)
    for (int j = 0; j < n; ++j) {
      auto dst = out.component(c, j);
      partial_derivative(xi.component(c), dst, xi.grid, j);
      for (int s = 0; s < p; ++s) {
        const int is = mi[c][s];
        for (int m = 0; m < n; ++m) {
          const SignedSlot sub = subst[(c * p + s) * n + m];
          if (sub.position < 0) continue;
          auto g = gam.component((m * n + j) * n + is);
          auto src = xi.component(sub.position);
          const double sign = sub.sign;
          for (std::size_t node = 0; node < nodes; ++node) dst[node] -= sign * g[node] * src[node];
        }
      }
    }
  return out;
}

/// |nabla xi|^2 = xi^{I;j} xi_{I;j} over all tuples, at every node.
inline ScalarField gradient_norm_sq(const FormGradient& grad, const MetricState& ms) {
  const int n = grad.grid.dim;
  const int p = grad.degree;
  const MultiIndexSet& mi = multi_indices(n, p);
  const int full_form = int_pow(n, p);
  const int full = full_form * n;
  ScalarField out(grad.grid);
  std::vector<double> low(full), up(full), work(full);
  for (std::size_t node = 0; node < grad.nodes(); ++node) {
    for (int f = 0; f < full_form; ++f) {
      const SignedSlot s = mi.lookup_full(f);
      for (int j = 0; j < n; ++j) {
        low[f * n + j] = s.position < 0 ? 0.0 : s.sign * grad.at(s.position, j, node);
      }
    }
    std::copy(low.begin(), low.end(), up.begin());
    const NodeMetric nm = load_node_metric(ms, node);
    raise_all(up.data(), work.data(), n, p + 1, nm.ginv);
    double s = 0.0;
    for (int f = 0; f < full; ++f) s += low[f] * up[f];
    out[node] = s;
  }
  return out;
}

/// Sign of the codifferential relative to the covariant divergence on the
/// first slot. With +1, delta d + d delta equals the Weitzenbock expression
/// (rough Laplacian minus Ricci and Riemann terms) used as the heat generator,
/// i.e. delta = -d^* and delta d + d delta is negative semi-definite. This is
/// pinned by the Weitzenbock/Hodge cross-check in the test suite.
inline constexpr int kCodifferentialSign = +1;

/// (delta xi)_{i2..ip} = kCodifferentialSign * g^{jk} xi_{j i2..ip; k}.
inline PForm codifferential(const PForm& xi, const MetricState& ms) {
  const int n = xi.grid.dim;
  const int p = xi.degree;
  if (p == 0) throw ArgumentError("codifferential: degree must be at least 1");
  const FormGradient grad = form_gradient(xi, ms);
  const MultiIndexSet& src = xi.indices();
  PForm out(xi.grid, p - 1);
  const MultiIndexSet& dst = out.indices();
  const std::size_t nodes = xi.nodes();
  for (int c = 0; c < dst.size(); ++c) {
    auto target = out.component(c);
    for (int j = 0; j < n; ++j) {
      std::array<int, kMaxDim> t{};
      t[0] = j;
      for (int s = 0; s < p - 1; ++s) t[s + 1] = dst[c][s];
      const SignedSlot slot = src.lookup(std::span<const int>(t.data(), p));
      if (slot.position < 0) continue;
      for (int k = 0; k < n; ++k) {
        auto ginv = ms.g_inv.component(j * n + k);
        auto d = grad.component(slot.position, k);
        const double sign = slot.sign * kCodifferentialSign;
        for (std::size_t node = 0; node < nodes; ++node) target[node] += sign * ginv[node] * d[node];
      }
    }
  }
  return out;
}

inline PForm& axpy(PForm& y, double a, const PForm& x) {
  for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] += a * x.data[i];
  return y;
}

}  // namespace formflow
