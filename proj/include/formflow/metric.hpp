#pragma once

// Grid-sampled Riemannian metric together with its inverse, volume density
// and Levi-Civita connection coefficients.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "formflow/grid.hpp"
#include "formflow/linalg.hpp"

namespace formflow {

struct MetricState {
  TensorField g;                // g_{ij}, (0,2)
  TensorField g_inv;            // g^{ij}, (2,0)
  ScalarField det_g;
  ScalarField sqrt_det_g;
  TensorField christoffel_low;  // Gamma_{l,jk} = g_{lh} Gamma^h_{jk}, (0,3)
  TensorField christoffel;      // Gamma^i_{jk}, (1,2), symmetric in jk
  double min_eig_g = 0.0;
  std::size_t min_eig_node = 0;

  const GridSpec& grid() const { return g.grid; }
  int dim() const { return g.grid.dim; }
};

/// Metric and inverse metric sampled at a single node.
struct NodeMetric {
  SmallMatrix g;
  SmallMatrix ginv;
};

inline NodeMetric load_node_metric(const MetricState& ms, std::size_t node) {
  const int n = ms.dim();
  NodeMetric nm{SmallMatrix(n), SmallMatrix(n)};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      nm.g(i, j) = ms.g.at(i * n + j, node);
      nm.ginv(i, j) = ms.g_inv.at(i * n + j, node);
    }
  return nm;
}

/// out[.. i ..] = sum_k m(i, k) in[.. k ..] acting on slot `slot` of a dense
/// rank-`rank` array of extent n per slot. Used to raise or lower one index.
inline void apply_to_slot(const double* in, double* out, int n, int rank, int slot,
                          const SmallMatrix& m) {
  int after = 1;
  for (int s = slot + 1; s < rank; ++s) after *= n;
  int before = 1;
  for (int s = 0; s < slot; ++s) before *= n;
  for (int b = 0; b < before; ++b)
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < after; ++a) {
        double s = 0.0;
        for (int k = 0; k < n; ++k) s += m(i, k) * in[(b * n + k) * after + a];
        out[(b * n + i) * after + a] = s;
      }
}

/// Raises every slot of a dense covariant array in place (`work` must hold
/// n^rank values).
inline void raise_all(double* values, double* work, int n, int rank, const SmallMatrix& ginv) {
  const int count = int_pow(n, rank);
  for (int slot = 0; slot < rank; ++slot) {
    apply_to_slot(values, work, n, rank, slot, ginv);
    for (int c = 0; c < count; ++c) values[c] = work[c];
  }
}

/// Full contraction T_{i...} T^{i...} of a dense covariant array.
inline double full_norm_sq(const double* values, int n, int rank, const SmallMatrix& ginv) {
  const int count = int_pow(n, rank);
  std::vector<double> up(values, values + count);
  std::vector<double> work(count);
  raise_all(up.data(), work.data(), n, rank, ginv);
  double s = 0.0;
  for (int c = 0; c < count; ++c) s += values[c] * up[c];
  return s;
}

struct ChristoffelSymbols {
  TensorField first_kind;   // Gamma_{l,jk}
  TensorField second_kind;  // Gamma^i_{jk}
};

/// Gamma^i_{jk} = 1/2 g^{il} (d_j g_{lk} + d_k g_{lj} - d_l g_{jk}); evaluated
/// for j <= k and mirrored so the jk symmetry is exact.
inline ChristoffelSymbols christoffel(const TensorField& g, const TensorField& g_inv) {
  const GridSpec& grid = g.grid;
  const int n = grid.dim;
  const std::size_t nodes = grid.node_count();
  // dg[m][a*n+b] = d_m g_{ab}
  std::vector<TensorField> dg;
  dg.reserve(n);
  for (int m = 0; m < n; ++m) dg.push_back(partial_derivative(g, m));

  ChristoffelSymbols out{TensorField(grid, 0, 3), TensorField(grid, 1, 2)};
  for (int l = 0; l < n; ++l)
    for (int j = 0; j < n; ++j)
      for (int k = j; k < n; ++k) {
        auto dst = out.first_kind.component(out.first_kind.flat({l, j, k}));
        auto a = dg[j].component(l * n + k);
        auto b = dg[k].component(l * n + j);
        auto c = dg[l].component(j * n + k);
        for (std::size_t node = 0; node < nodes; ++node) dst[node] = 0.5 * (a[node] + b[node] - c[node]);
        if (k != j) {
          auto mirror = out.first_kind.component(out.first_kind.flat({l, k, j}));
          std::copy(dst.begin(), dst.end(), mirror.begin());
        }
      }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = j; k < n; ++k) {
        auto dst = out.second_kind.component(out.second_kind.flat({i, j, k}));
        for (std::size_t node = 0; node < nodes; ++node) {
          double s = 0.0;
          for (int l = 0; l < n; ++l) {
            s += g_inv.at(i * n + l, node) * out.first_kind.at((l * n + j) * n + k, node);
          }
          dst[node] = s;
        }
        if (k != j) {
          auto mirror = out.second_kind.component(out.second_kind.flat({i, k, j}));
          std::copy(dst.begin(), dst.end(), mirror.begin());
        }
      }
  return out;
}

/// Builds the full metric state. The upper triangle of `g` is authoritative;
/// an asymmetric input beyond 1e-12 relative is rejected. Any node whose
/// smallest eigenvalue is <= spd_floor raises DegenerateMetricError naming
/// the worst node.
inline MetricState make_metric_state(TensorField g, double spd_floor = 0.0) {
  if (g.up != 0 || g.low != 2) throw ArgumentError("make_metric_state: metric must be a (0,2) tensor");
  const GridSpec grid = g.grid;
  const int n = grid.dim;
  const std::size_t nodes = grid.node_count();
  const double scale = std::max(1.0, g.sup_abs());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      auto upper = g.component(i * n + j);
      auto lower = g.component(j * n + i);
      for (std::size_t node = 0; node < nodes; ++node) {
        if (std::abs(upper[node] - lower[node]) > 1e-12 * scale) {
          throw ArgumentError("make_metric_state: metric is not symmetric at node " +
                              std::to_string(node));
        }
        lower[node] = upper[node];
      }
    }

  MetricState ms;
  ms.g_inv = TensorField(grid, 2, 0);
  ms.det_g = ScalarField(grid);
  ms.sqrt_det_g = ScalarField(grid);
  ms.min_eig_g = std::numeric_limits<double>::infinity();
  for (std::size_t node = 0; node < nodes; ++node) {
    SmallMatrix m(n);
    bool finite = true;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        m(i, j) = g.at(i * n + j, node);
        finite = finite && std::isfinite(m(i, j));
      }
    if (!finite) {
      throw DegenerateMetricError("metric has non-finite entries at node " + std::to_string(node),
                                  node, std::numeric_limits<double>::quiet_NaN());
    }
    const double lam = jacobi_eigen(m).values[0];
    if (lam < ms.min_eig_g) {
      ms.min_eig_g = lam;
      ms.min_eig_node = node;
    }
    SmallMatrix inv;
    double det = 0.0;
    if (lam > spd_floor && spd_inverse(m, inv, det)) {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) ms.g_inv.at(i * n + j, node) = inv(i, j);
      ms.det_g[node] = det;
      ms.sqrt_det_g[node] = std::sqrt(det);
    }
  }
  if (!(ms.min_eig_g > spd_floor)) {
    throw DegenerateMetricError("metric is not positive definite: smallest eigenvalue " +
                                    std::to_string(ms.min_eig_g) + " at node " +
                                    std::to_string(ms.min_eig_node),
                                ms.min_eig_node, ms.min_eig_g);
  }
  ms.g = std::move(g);
  ChristoffelSymbols gamma = christoffel(ms.g, ms.g_inv);
  ms.christoffel_low = std::move(gamma.first_kind);
  ms.christoffel = std::move(gamma.second_kind);
  return ms;
}

/// Constant-coefficient metric field.
inline TensorField constant_metric(const GridSpec& grid, const SmallMatrix& value) {
  TensorField g(grid, 0, 2);
  const int n = grid.dim;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      auto c = g.component(i * n + j);
      std::fill(c.begin(), c.end(), value(i, j));
    }
  return g;
}

inline TensorField identity_metric(const GridSpec& grid) {
  return constant_metric(grid, SmallMatrix::identity(grid.dim));
}

/// g = e^{2u} delta for a sampled conformal factor u.
inline TensorField conformal_metric(const ScalarField& u) {
  TensorField g(u.grid, 0, 2);
  const int n = u.grid.dim;
  for (int i = 0; i < n; ++i) {
    auto c = g.component(i * n + i);
    for (std::size_t node = 0; node < u.size(); ++node) c[node] = std::exp(2.0 * u[node]);
  }
  return g;
}

}  // namespace formflow
