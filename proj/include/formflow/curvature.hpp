#pragma once

// Riemann, Ricci and scalar curvature, the orthogonal decomposition
// Rm = W + V + U, covariant derivatives of tensor fields, and residuals of the
// classical curvature identities.
//
// Sign conventions
//   R^l_{ijk} = d_i Gamma^l_{jk} - d_j Gamma^l_{ik}
//               + Gamma^l_{im} Gamma^m_{jk} - Gamma^l_{jm} Gamma^m_{ik}
//   R_{ijkl}  = g_{hl} R^h_{ijk}            (riemann_low)
//   R_{jk}    = R^i_{ijk} = g^{il} R_{ijkl}
//   R         = g^{jk} R_{jk}
// riemann_low is evaluated from the equivalent fully covariant expression
//   1/2 (d_i d_k g_{jl} + d_j d_l g_{ik} - d_i d_l g_{jk} - d_j d_k g_{il})
//   + g^{hm} (Gamma_{h,jl} Gamma_{m,ik} - Gamma_{h,il} Gamma_{m,jk})
// on canonical index quadruples only, so its antisymmetries and pair symmetry
// hold exactly on the grid. The mixed tensor is obtained by raising the last
// slot.
//
// The decomposition W + V + U is applied to Rm_{ijkl} = R_{ijlk}, the tensor
// whose trace g^{ik} Rm_{ijkl} is the Ricci tensor; with it the U part is
// R (g_{ik} g_{jl} - g_{il} g_{jk}) / (n (n - 1)) and |U|^2 = 2 R^2 / (n (n - 1)).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "formflow/grid.hpp"
#include "formflow/metric.hpp"

namespace formflow {

struct CurvatureBundle {
  TensorField riemann_mixed;    // R^l_{ijk}, (1,3), slot order (l; i, j, k)
  TensorField riemann_low;      // R_{ijkl}, (0,4)
  TensorField ricci;            // R_{jk}, (0,2)
  ScalarField scalar;           // R
  TensorField traceless_ricci;  // R_{ij} - R g_{ij} / n
  double ricci_symmetry_residual = 0.0;

  const GridSpec& grid() const { return ricci.grid; }
  int dim() const { return ricci.grid.dim; }
};

struct RiemannTensors {
  TensorField mixed;
  TensorField low;
};

inline RiemannTensors riemann(const MetricState& ms) {
  const GridSpec& grid = ms.grid();
  const int n = grid.dim;
  const std::size_t nodes = grid.node_count();
  RiemannTensors out{TensorField(grid, 1, 3), TensorField(grid, 0, 4)};
  TensorField& low = out.low;
  std::vector<double> d_ik_jl(nodes), d_jl_ik(nodes), d_il_jk(nodes), d_jk_il(nodes), scratch(nodes);
  const TensorField& gl = ms.christoffel_low;

  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = k + 1; l < n; ++l) {
          if (i * n + j > k * n + l) continue;
          second_partial(ms.g.component(j * n + l), d_ik_jl, scratch, grid, i, k);
          second_partial(ms.g.component(i * n + k), d_jl_ik, scratch, grid, j, l);
          second_partial(ms.g.component(j * n + k), d_il_jk, scratch, grid, i, l);
          second_partial(ms.g.component(i * n + l), d_jk_il, scratch, grid, j, k);
          const int c = low.flat({i, j, k, l});
          auto dst = low.component(c);
          for (std::size_t node = 0; node < nodes; ++node) {
            double quad = 0.0;
            for (int h = 0; h < n; ++h)
              for (int m = 0; m < n; ++m) {
                const double ginv = ms.g_inv.at(h * n + m, node);
                quad += ginv * (gl.at((h * n + j) * n + l, node) * gl.at((m * n + i) * n + k, node) -
                                gl.at((h * n + i) * n + l, node) * gl.at((m * n + j) * n + k, node));
              }
            dst[node] = 0.5 * ((d_ik_jl[node] + d_jl_ik[node]) - (d_il_jk[node] + d_jk_il[node])) + quad;
          }
          // Fill the remaining components by the algebraic symmetries.
          const std::array<std::array<int, 4>, 8> images = {{{i, j, k, l},
                                                             {j, i, k, l},
                                                             {i, j, l, k},
                                                             {j, i, l, k},
                                                             {k, l, i, j},
                                                             {l, k, i, j},
                                                             {k, l, j, i},
                                                             {l, k, j, i}}};
          const std::array<double, 8> signs = {1, -1, -1, 1, 1, -1, -1, 1};
          for (int v = 1; v < 8; ++v) {
            const auto& im = images[v];
            auto target = low.component(low.flat({im[0], im[1], im[2], im[3]}));
            if (signs[v] > 0) {
              std::copy(dst.begin(), dst.end(), target.begin());
            } else {
              for (std::size_t node = 0; node < nodes; ++node) target[node] = -dst[node];
            }
          }
        }

  // R^l_{ijk} = g^{lh} R_{ijkh}
  const int n3 = n * n * n;
  for (int l = 0; l < n; ++l)
    for (int ijk = 0; ijk < n3; ++ijk) {
      auto dst = out.mixed.component(l * n3 + ijk);
      for (std::size_t node = 0; node < nodes; ++node) {
        double s = 0.0;
        for (int h = 0; h < n; ++h) s += ms.g_inv.at(l * n + h, node) * low.at(ijk * n + h, node);
        dst[node] = s;
      }
    }
  return out;
}

struct RicciContraction {
  TensorField ricci;
  ScalarField scalar;
  double symmetry_residual = 0.0;
};

/// R_{jk} = R^i_{ijk} (evaluated for j <= k and mirrored), R = g^{jk} R_{jk}.
/// The asymmetry R^i_{ijk} - R^i_{ikj} of the raw contraction is reported.
inline RicciContraction contract_curvature(const TensorField& riemann_mixed, const TensorField& g_inv) {
  const GridSpec& grid = riemann_mixed.grid;
  const int n = grid.dim;
  const std::size_t nodes = grid.node_count();
  RicciContraction out{TensorField(grid, 0, 2), ScalarField(grid), 0.0};
  for (int j = 0; j < n; ++j)
    for (int k = j; k < n; ++k) {
      auto dst = out.ricci.component(j * n + k);
      for (std::size_t node = 0; node < nodes; ++node) {
        double s = 0.0;
        double t = 0.0;
        for (int i = 0; i < n; ++i) {
          s += riemann_mixed.at(riemann_mixed.flat({i, i, j, k}), node);
          t += riemann_mixed.at(riemann_mixed.flat({i, i, k, j}), node);
        }
        dst[node] = s;
        out.symmetry_residual = std::max(out.symmetry_residual, std::abs(s - t));
      }
      if (k != j) {
        auto mirror = out.ricci.component(k * n + j);
        std::copy(dst.begin(), dst.end(), mirror.begin());
      }
    }
  for (std::size_t node = 0; node < nodes; ++node) {
    double s = 0.0;
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) s += g_inv.at(j * n + k, node) * out.ricci.at(j * n + k, node);
    out.scalar[node] = s;
  }
  return out;
}

inline CurvatureBundle compute_curvature(const MetricState& ms) {
  RiemannTensors rt = riemann(ms);
  RicciContraction rc = contract_curvature(rt.mixed, ms.g_inv);
  const GridSpec& grid = ms.grid();
  const int n = grid.dim;
  CurvatureBundle cb;
  cb.riemann_mixed = std::move(rt.mixed);
  cb.riemann_low = std::move(rt.low);
  cb.traceless_ricci = TensorField(grid, 0, 2);
  for (int c = 0; c < n * n; ++c) {
    auto dst = cb.traceless_ricci.component(c);
    auto ric = rc.ricci.component(c);
    auto g = ms.g.component(c);
    for (std::size_t node = 0; node < grid.node_count(); ++node) {
      dst[node] = ric[node] - rc.scalar[node] * g[node] / n;
    }
  }
  cb.ricci = std::move(rc.ricci);
  cb.scalar = std::move(rc.scalar);
  cb.ricci_symmetry_residual = rc.symmetry_residual;
  return cb;
}

/// Curvature data at one node, in the decomposition convention
/// Rm_{ijkl} = R_{ijlk} (see header comment).
struct NodeCurvature {
  int n = 0;
  NodeMetric metric;
  std::array<double, 256> rm_low{};  // R_{ijkl} as stored in riemann_low
  std::array<double, 256> rm{};      // Rm_{ijkl} = R_{ijlk}
  std::array<double, 16> ricci{};
  double scalar = 0.0;
};

inline NodeCurvature load_node_curvature(const CurvatureBundle& cb, const MetricState& ms,
                                         std::size_t node) {
  NodeCurvature nc;
  const int n = cb.dim();
  nc.n = n;
  nc.metric = load_node_metric(ms, node);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          const double v = cb.riemann_low.at(((i * n + j) * n + k) * n + l, node);
          nc.rm_low[((i * n + j) * n + k) * n + l] = v;
          nc.rm[((i * n + j) * n + l) * n + k] = v;
        }
  for (int c = 0; c < n * n; ++c) nc.ricci[c] = cb.ricci.at(c, node);
  nc.scalar = cb.scalar[node];
  return nc;
}

/// Weyl, traceless-Ricci and scalar parts at one node (decomposition
/// convention), each a dense n^4 array.
struct NodeWeylParts {
  std::array<double, 256> w{};
  std::array<double, 256> v{};
  std::array<double, 256> u{};
};

inline NodeWeylParts node_weyl_parts(const NodeCurvature& nc) {
  const int n = nc.n;
  if (n < 3) throw UnsupportedDimensionError("Weyl decomposition requires dimension >= 3");
  const SmallMatrix& g = nc.metric.g;
  const double r = nc.scalar;
  const double inv_n2 = 1.0 / (n - 2);
  const double c_w = r / ((n - 1.0) * (n - 2.0));
  const double c_u = r / (n * (n - 1.0));
  auto ric = [&](int a, int b) { return nc.ricci[a * n + b]; };
  auto tl = [&](int a, int b) { return nc.ricci[a * n + b] - r * g(a, b) / n; };
  NodeWeylParts parts;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          const int c = ((i * n + j) * n + k) * n + l;
          const double gg = g(i, k) * g(j, l) - g(i, l) * g(j, k);
          parts.w[c] = nc.rm[c] -
                       inv_n2 * (ric(i, k) * g(j, l) - ric(i, l) * g(j, k) + ric(j, l) * g(i, k) -
                                 ric(j, k) * g(i, l)) +
                       c_w * gg;
          parts.v[c] = inv_n2 * (tl(i, k) * g(j, l) - tl(i, l) * g(j, k) - tl(j, k) * g(i, l) +
                                 tl(j, l) * g(i, k));
          parts.u[c] = c_u * gg;
        }
  return parts;
}

struct WeylDecomposition {
  TensorField weyl;             // W_{ijkl}
  TensorField v_part;           // V_{ijkl}
  TensorField u_part;           // U_{ijkl}
  TensorField traceless_ricci;  // R_{ij} - R g_{ij} / n
  ScalarField rm_norm_sq;            // |Rm|^2
  ScalarField traceless_rm_norm_sq;  // |Rm - U|^2
  ScalarField weyl_norm_sq;
  ScalarField v_norm_sq;
  ScalarField u_norm_sq;
};

inline WeylDecomposition weyl_decompose(const CurvatureBundle& cb, const MetricState& ms) {
  const GridSpec& grid = cb.grid();
  const int n = grid.dim;
  if (n < 3) throw UnsupportedDimensionError("weyl_decompose: undefined for dimension 2");
  const std::size_t nodes = grid.node_count();
  WeylDecomposition out{TensorField(grid, 0, 4), TensorField(grid, 0, 4), TensorField(grid, 0, 4),
                        cb.traceless_ricci,      ScalarField(grid),        ScalarField(grid),
                        ScalarField(grid),       ScalarField(grid),        ScalarField(grid)};
  const int count = int_pow(n, 4);
  std::array<double, 256> tl{};
  for (std::size_t node = 0; node < nodes; ++node) {
    const NodeCurvature nc = load_node_curvature(cb, ms, node);
    const NodeWeylParts parts = node_weyl_parts(nc);
    for (int c = 0; c < count; ++c) {
      out.weyl.at(c, node) = parts.w[c];
      out.v_part.at(c, node) = parts.v[c];
      out.u_part.at(c, node) = parts.u[c];
      tl[c] = nc.rm[c] - parts.u[c];
    }
    const SmallMatrix& ginv = nc.metric.ginv;
    out.rm_norm_sq[node] = full_norm_sq(nc.rm.data(), n, 4, ginv);
    out.traceless_rm_norm_sq[node] = full_norm_sq(tl.data(), n, 4, ginv);
    out.weyl_norm_sq[node] = full_norm_sq(parts.w.data(), n, 4, ginv);
    out.v_norm_sq[node] = full_norm_sq(parts.v.data(), n, 4, ginv);
    out.u_norm_sq[node] = full_norm_sq(parts.u.data(), n, 4, ginv);
  }
  return out;
}

/// |Rm|^2 = R_{ijkl} R^{ijkl} at every node (sign convention irrelevant).
inline ScalarField riemann_norm_sq(const CurvatureBundle& cb, const MetricState& ms) {
  const int n = cb.dim();
  ScalarField out(cb.grid());
  std::array<double, 256> rm{};
  const int count = int_pow(n, 4);
  for (std::size_t node = 0; node < out.size(); ++node) {
    for (int c = 0; c < count; ++c) rm[c] = cb.riemann_low.at(c, node);
    out[node] = full_norm_sq(rm.data(), n, 4, load_node_metric(ms, node).ginv);
  }
  return out;
}

/// One component of the covariant derivative nabla_m T, written to `out`.
/// `idx` lists the contravariant slots first, then the covariant ones.
inline void covariant_derivative_component(const TensorField& t, const MetricState& ms,
                                           std::span<const int> idx, int m, std::span<double> out) {
  const GridSpec& grid = t.grid;
  const int n = grid.dim;
  const std::size_t nodes = grid.node_count();
  partial_derivative(t.component(t.flat(idx)), out, grid, m);
  std::array<int, 8> tmp{};
  std::copy(idx.begin(), idx.end(), tmp.begin());
  const int r = t.rank();
  const TensorField& gam = ms.christoffel;
  for (int s = 0; s < r; ++s) {
    const bool upper = s < t.up;
    const int orig = idx[s];
    for (int e = 0; e < n; ++e) {
      tmp[s] = e;
      auto src = t.component(t.flat(std::span<const int>(tmp.data(), r)));
      // upper: + Gamma^{a}_{m e} T^{..e..};  lower: - Gamma^{e}_{m b} T_{..e..}
      auto gc = upper ? gam.component((orig * n + m) * n + e) : gam.component((e * n + m) * n + orig);
      const double sign = upper ? 1.0 : -1.0;
      for (std::size_t node = 0; node < nodes; ++node) out[node] += sign * gc[node] * src[node];
    }
    tmp[s] = orig;
  }
}

/// nabla T with the derivative index appended as the last covariant slot.
inline TensorField covariant_derivative(const TensorField& t, const MetricState& ms) {
  require_same_grid(t.grid, ms.grid(), "covariant_derivative");
  const int n = t.dim();
  const int r = t.rank();
  TensorField out(t.grid, t.up, t.low + 1);
  std::array<int, 8> idx{};
  for (int c = 0; c < t.component_count(); ++c) {
    int rest = c;
    for (int s = r - 1; s >= 0; --s) {
      idx[s] = rest % n;
      rest /= n;
    }
    for (int m = 0; m < n; ++m) {
      covariant_derivative_component(t, ms, std::span<const int>(idx.data(), r), m,
                                     out.component(c * n + m));
    }
  }
  return out;
}

inline ScalarField covariant_derivative_component(const TensorField& t, const MetricState& ms,
                                                  std::initializer_list<int> idx, int m) {
  ScalarField out(t.grid);
  covariant_derivative_component(t, ms, std::span<const int>(idx.begin(), idx.size()), m, out.span());
  return out;
}

/// Sup-norm residuals of the algebraic and differential curvature identities.
struct IdentityResiduals {
  double antisym_first_pair = 0.0;  // R_{ijkl} + R_{jikl}
  double antisym_last_pair = 0.0;   // R_{ijkl} + R_{ijlk}
  double pair_symmetry = 0.0;       // R_{ijkl} - R_{klij}
  double mixed_antisym = 0.0;       // R^l_{ijk} + R^l_{jik}
  double first_bianchi_mixed = 0.0; // R^i_{jkl} + R^i_{klj} + R^i_{ljk}
  double first_bianchi_low = 0.0;   // R_{ijkl} + R_{jkil} + R_{kijl}
  double ricci_symmetry = 0.0;      // raw R^i_{ijk} - R^i_{ikj}
  double second_bianchi = 0.0;      // R_{ijkl;m} + R_{jmkl;i} + R_{mikl;j}
  double contracted_bianchi = 0.0;  // 2 g^{is} R_{il;s} - R_{;l}
};

inline IdentityResiduals identity_residuals(const CurvatureBundle& cb, const MetricState& ms) {
  const GridSpec& grid = cb.grid();
  const int n = grid.dim;
  const std::size_t nodes = grid.node_count();
  const TensorField& low = cb.riemann_low;
  const TensorField& mix = cb.riemann_mixed;
  IdentityResiduals res;
  res.ricci_symmetry = cb.ricci_symmetry_residual;
  auto upd = [](double& acc, double v) { acc = std::max(acc, std::abs(v)); };

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          auto a = low.component(low.flat({i, j, k, l}));
          auto b = low.component(low.flat({j, i, k, l}));
          auto c = low.component(low.flat({i, j, l, k}));
          auto d = low.component(low.flat({k, l, i, j}));
          auto e = low.component(low.flat({j, k, i, l}));
          auto f = low.component(low.flat({k, i, j, l}));
          auto ma = mix.component(mix.flat({i, j, k, l}));
          auto mb = mix.component(mix.flat({i, k, j, l}));
          auto mc = mix.component(mix.flat({i, k, l, j}));
          auto md = mix.component(mix.flat({i, l, j, k}));
          for (std::size_t node = 0; node < nodes; ++node) {
            upd(res.antisym_first_pair, a[node] + b[node]);
            upd(res.antisym_last_pair, a[node] + c[node]);
            upd(res.pair_symmetry, a[node] - d[node]);
            upd(res.first_bianchi_low, a[node] + e[node] + f[node]);
            // mixed: R^i_{jkl} with slot order (i; j, k, l)
            upd(res.mixed_antisym, ma[node] + mb[node]);
            upd(res.first_bianchi_mixed, ma[node] + mc[node] + md[node]);
          }
        }

  // Second Bianchi identity; repeated indices among (i, j, m) or k = l vanish
  // identically by the exact antisymmetries.
  std::vector<double> d1(nodes), d2(nodes), d3(nodes);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int m = j + 1; m < n; ++m)
        for (int k = 0; k < n; ++k)
          for (int l = k + 1; l < n; ++l) {
            const std::array<int, 4> t1{i, j, k, l}, t2{j, m, k, l}, t3{m, i, k, l};
            covariant_derivative_component(low, ms, t1, m, d1);
            covariant_derivative_component(low, ms, t2, i, d2);
            covariant_derivative_component(low, ms, t3, j, d3);
            for (std::size_t node = 0; node < nodes; ++node) upd(res.second_bianchi, d1[node] + d2[node] + d3[node]);
          }

  // Contracted Bianchi: 2 g^{is} R_{il;s} = d_l R
  const TensorField dric = covariant_derivative(cb.ricci, ms);
  for (int l = 0; l < n; ++l) {
    const ScalarField dr = partial_derivative(cb.scalar, l);
    for (std::size_t node = 0; node < nodes; ++node) {
      double s = 0.0;
      for (int i = 0; i < n; ++i)
        for (int q = 0; q < n; ++q) s += ms.g_inv.at(i * n + q, node) * dric.at((i * n + l) * n + q, node);
      upd(res.contracted_bianchi, 2.0 * s - dr[node]);
    }
  }
  return res;
}

/// Residuals of the Ricci commutation formulas for a vector field v^i, a
/// covector field w_k and a (1,2) tensor T^i_{jk}.
struct RicciFormulaResiduals {
  double vector = 0.0;    // v^i_{;k;l} - v^i_{;l;k} + v^j R^i_{klj}
  double covector = 0.0;  // w_{k;i;j} - w_{k;j;i} - w_l R^l_{ijk}
  double tensor = 0.0;    // T^i_{jk;l;m} - T^i_{jk;m;l} + T^s_{jk} R^i_{lms} - T^i_{sk} R^s_{lmj} - T^i_{js} R^s_{lmk}
};

inline RicciFormulaResiduals ricci_formula_residuals(const MetricState& ms, const CurvatureBundle& cb,
                                                     const TensorField& v, const TensorField& w,
                                                     const TensorField& t) {
  const GridSpec& grid = ms.grid();
  const int n = grid.dim;
  const std::size_t nodes = grid.node_count();
  const TensorField& rm = cb.riemann_mixed;
  auto R = [&](int a, int b, int c, int d, std::size_t node) {
    return rm.at(((a * n + b) * n + c) * n + d, node);
  };
  RicciFormulaResiduals res;
  auto upd = [](double& acc, double x) { acc = std::max(acc, std::abs(x)); };
  std::vector<double> d1(nodes), d2(nodes);

  if (v.up != 1 || v.low != 0 || w.up != 0 || w.low != 1 || t.up != 1 || t.low != 2) {
    throw ArgumentError("ricci_formula_residuals: expected ranks (1,0), (0,1), (1,2)");
  }

  const TensorField dv = covariant_derivative(v, ms);  // v^i_{;k}
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      for (int l = k + 1; l < n; ++l) {
        const std::array<int, 2> a{i, k}, b{i, l};
        covariant_derivative_component(dv, ms, a, l, d1);
        covariant_derivative_component(dv, ms, b, k, d2);
        for (std::size_t node = 0; node < nodes; ++node) {
          double curv = 0.0;
          for (int j = 0; j < n; ++j) curv += v.at(j, node) * R(i, k, l, j, node);
          upd(res.vector, d1[node] - d2[node] + curv);
        }
      }

  const TensorField dw = covariant_derivative(w, ms);  // w_{k;i}
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const std::array<int, 2> a{k, i}, b{k, j};
        covariant_derivative_component(dw, ms, a, j, d1);
        covariant_derivative_component(dw, ms, b, i, d2);
        for (std::size_t node = 0; node < nodes; ++node) {
          double curv = 0.0;
          for (int l = 0; l < n; ++l) curv += w.at(l, node) * R(l, i, j, k, node);
          upd(res.covector, d1[node] - d2[node] - curv);
        }
      }

  const TensorField dt = covariant_derivative(t, ms);  // T^i_{jk;l}
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          for (int m = l + 1; m < n; ++m) {
            const std::array<int, 4> a{i, j, k, l}, b{i, j, k, m};
            covariant_derivative_component(dt, ms, a, m, d1);
            covariant_derivative_component(dt, ms, b, l, d2);
            for (std::size_t node = 0; node < nodes; ++node) {
              double curv = 0.0;
              for (int s = 0; s < n; ++s) {
                curv += t.at((s * n + j) * n + k, node) * R(i, l, m, s, node);
                curv -= t.at((i * n + s) * n + k, node) * R(s, l, m, j, node);
                curv -= t.at((i * n + j) * n + s, node) * R(s, l, m, k, node);
              }
              upd(res.tensor, d1[node] - d2[node] + curv);
            }
          }
  return res;
}

}  // namespace formflow
