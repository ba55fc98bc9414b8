#pragma once

// Eigenvalue-based curvature quantities: the smallest Ricci eigenvalue L, the
// Weyl operator norm W, the curvature-operator lower bound 2k on 2-forms, the
// global pinching margin and the pointwise Huisken pinching ratio.
//
// Quadratic forms on antisymmetric 2-tensors are posed against the Gram form
// G(xi, eta) = xi_{ij} eta^{ij}. In the basis e_(ab) (a < b) with
// (e_(ab))_{ab} = 1 = -(e_(ab))_{ba}:
//   G_{(ab),(cd)} = 2 (g^{ac} g^{bd} - g^{ad} g^{bc})
//   Q_{(ab),(cd)} = 4 T^{abcd}          (T fully raised)
// for Q(xi, eta) = xi_{ij} T^{ij}_{kl} eta^{kl}.
//
// The curvature operator uses riemann_low, R_{ijkl} = g_{hl} R^h_{ijk}, the same
// tensor that appears in the Weitzenbock formula and the evolution identity
// for |xi|^2. In this convention a round sphere has Q = -2 G per unit
// sectional curvature, so k is negative on positively curved regions.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "formflow/curvature.hpp"
#include "formflow/linalg.hpp"

namespace formflow {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

inline int two_form_dim(int n) { return n * (n - 1) / 2; }

/// Gram matrix of the 2-form basis.
inline SmallMatrix two_form_gram(const SmallMatrix& ginv) {
  const int n = ginv.n;
  SmallMatrix G(two_form_dim(n));
  int r = 0;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b, ++r) {
      int c_idx = 0;
      for (int c = 0; c < n; ++c)
        for (int d = c + 1; d < n; ++d, ++c_idx) {
          G(r, c_idx) = 2.0 * (ginv(a, c) * ginv(b, d) - ginv(a, d) * ginv(b, c));
        }
    }
  return G;
}

/// Quadratic form matrix of a covariant 4-tensor on the 2-form basis.
inline SmallMatrix two_form_operator(const double* t_low, const SmallMatrix& ginv) {
  const int n = ginv.n;
  const int count = int_pow(n, 4);
  std::array<double, 256> up{};
  std::array<double, 256> work{};
  std::copy(t_low, t_low + count, up.begin());
  raise_all(up.data(), work.data(), n, 4, ginv);
  SmallMatrix Q(two_form_dim(n));
  int r = 0;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b, ++r) {
      int c_idx = 0;
      for (int c = 0; c < n; ++c)
        for (int d = c + 1; d < n; ++d, ++c_idx) {
          const double v = 4.0 * up[((a * n + b) * n + c) * n + d];
          Q(r, c_idx) = v;
        }
    }
  for (int i = 0; i < Q.n; ++i)
    for (int j = i + 1; j < Q.n; ++j) Q(i, j) = Q(j, i) = 0.5 * (Q(i, j) + Q(j, i));
  return Q;
}

enum class TwoFormOperator { riemann, weyl };

struct TwoFormOperatorSpectrum {
  int m = 0;                  // n (n - 1) / 2
  std::vector<double> eigen;  // node-major, m per node, ascending
  double global_min = 0.0;
  double global_max = 0.0;
  double max_abs = 0.0;

  double at(std::size_t node, int j) const { return eigen[node * m + j]; }
};

inline TwoFormOperatorSpectrum two_form_spectrum(const CurvatureBundle& cb, const MetricState& ms,
                                                 TwoFormOperator which) {
  const int n = cb.dim();
  if (which == TwoFormOperator::weyl && n < 3) {
    throw UnsupportedDimensionError("Weyl operator undefined for dimension 2");
  }
  const std::size_t nodes = cb.grid().node_count();
  TwoFormOperatorSpectrum s;
  s.m = two_form_dim(n);
  s.eigen.resize(nodes * s.m);
  s.global_min = std::numeric_limits<double>::infinity();
  s.global_max = -std::numeric_limits<double>::infinity();
  for (std::size_t node = 0; node < nodes; ++node) {
    const NodeCurvature nc = load_node_curvature(cb, ms, node);
    SmallMatrix Q;
    if (which == TwoFormOperator::riemann) {
      Q = two_form_operator(nc.rm_low.data(), nc.metric.ginv);
    } else {
      const NodeWeylParts parts = node_weyl_parts(nc);
      Q = two_form_operator(parts.w.data(), nc.metric.ginv);
    }
    const auto ev = sym_eigenvalues(Q, two_form_gram(nc.metric.ginv));
    for (int j = 0; j < s.m; ++j) s.eigen[node * s.m + j] = ev[j];
    s.global_min = std::min(s.global_min, ev[0]);
    s.global_max = std::max(s.global_max, ev[s.m - 1]);
  }
  s.max_abs = std::max(std::abs(s.global_min), std::abs(s.global_max));
  return s;
}

/// Smallest eigenvalue of R_{ij} relative to g_{ij} at every node.
inline ScalarField ricci_min_eigenvalue_field(const CurvatureBundle& cb, const MetricState& ms) {
  const int n = cb.dim();
  ScalarField out(cb.grid());
  for (std::size_t node = 0; node < out.size(); ++node) {
    SmallMatrix ric(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) ric(i, j) = cb.ricci.at(i * n + j, node);
    out[node] = sym_eigenvalues(ric, load_node_metric(ms, node).g)[0];
  }
  return out;
}

/// L(t): global minimum over nodes of the smallest Ricci eigenvalue.
inline double ricci_min_eigenvalue(const CurvatureBundle& cb, const MetricState& ms) {
  return ricci_min_eigenvalue_field(cb, ms).min();
}

/// W(t): sup over nodes of |W_{ijkl} xi^{ij} xi^{kl}| / xi^{ij} xi_{ij}.
inline double weyl_operator_norm(const CurvatureBundle& cb, const MetricState& ms) {
  return two_form_spectrum(cb, ms, TwoFormOperator::weyl).max_abs;
}

/// k such that xi_{ij} R^{ij}_{kl} xi^{kl} >= 2k xi_{ij} xi^{ij} everywhere,
/// with equality attained at the extremal node.
inline double curvature_operator_bound(const CurvatureBundle& cb, const MetricState& ms) {
  return 0.5 * two_form_spectrum(cb, ms, TwoFormOperator::riemann).global_min;
}

struct Theorem1Margin {
  double margin = 0.0;    // (4/(n-2)) L - W - 2 R_max / ((n-1)(n-2))
  double L = 0.0;
  double W = 0.0;
  double R_max = 0.0;
  ScalarField pointwise;  // same expression with node values of L, W, R
};

inline Theorem1Margin theorem1_margin(const CurvatureBundle& cb, const MetricState& ms) {
  const int n = cb.dim();
  if (n < 3) throw UnsupportedDimensionError("theorem1_margin: requires dimension >= 3");
  const ScalarField lmin = ricci_min_eigenvalue_field(cb, ms);
  const TwoFormOperatorSpectrum ws = two_form_spectrum(cb, ms, TwoFormOperator::weyl);
  const double c_l = 4.0 / (n - 2);
  const double c_r = 2.0 / ((n - 1.0) * (n - 2.0));
  Theorem1Margin out;
  out.L = lmin.min();
  out.W = ws.max_abs;
  out.R_max = cb.scalar.max();
  out.margin = c_l * out.L - out.W - c_r * out.R_max;
  out.pointwise = ScalarField(cb.grid());
  for (std::size_t node = 0; node < lmin.size(); ++node) {
    const double w_node = std::max(std::abs(ws.at(node, 0)), std::abs(ws.at(node, ws.m - 1)));
    out.pointwise[node] = c_l * lmin[node] - w_node - c_r * cb.scalar[node];
  }
  return out;
}

/// Huisken's pinching constant: 1/5 (n = 4), 1/10 (n = 5), 2/((n-2)(n+1)) (n >= 6).
inline double delta_n(int n) {
  if (n < 4) throw UnsupportedDimensionError("delta_n: defined for n >= 4");
  if (n == 4) return 1.0 / 5.0;
  if (n == 5) return 1.0 / 10.0;
  return 2.0 / ((n - 2.0) * (n + 1.0));
}

struct HuiskenPinch {
  bool applicable = false;  // scalar curvature positive at every node
  double ratio_max = kNaN;  // sup (|W|^2 + |V|^2) / |U|^2
  double delta_n = kNaN;
  bool holds = false;       // applicable && ratio_max < delta_n
};

inline HuiskenPinch huisken_pinch(const CurvatureBundle& cb, const MetricState& ms) {
  const int n = cb.dim();
  if (n < 4) throw UnsupportedDimensionError("huisken_pinch: requires dimension >= 4");
  HuiskenPinch out;
  out.delta_n = delta_n(n);
  if (!(cb.scalar.min() > 0.0)) return out;
  out.applicable = true;
  double ratio = 0.0;
  for (std::size_t node = 0; node < cb.scalar.size(); ++node) {
    const NodeCurvature nc = load_node_curvature(cb, ms, node);
    const NodeWeylParts parts = node_weyl_parts(nc);
    const SmallMatrix& ginv = nc.metric.ginv;
    const double w2 = full_norm_sq(parts.w.data(), n, 4, ginv);
    const double v2 = full_norm_sq(parts.v.data(), n, 4, ginv);
    const double u2 = 2.0 * nc.scalar * nc.scalar / (n * (n - 1.0));
    ratio = std::max(ratio, (w2 + v2) / u2);
  }
  out.ratio_max = ratio;
  out.holds = ratio < out.delta_n;
  return out;
}

/// Hypothesis margins at one time. Entries that are undefined in the grid
/// dimension (W and the margin for n = 2; Huisken quantities for n < 4) are NaN.
struct PinchReport {
  double t = 0.0;
  double L_val = 0.0;
  double W_val = kNaN;
  double theorem1_margin = kNaN;
  double huisken_ratio_max = kNaN;
  double delta_n = kNaN;
  bool huisken_applicable = false;
  double k_bound = 0.0;
};

inline PinchReport evaluate_pinch(const CurvatureBundle& cb, const MetricState& ms, double t) {
  const int n = cb.dim();
  PinchReport r;
  r.t = t;
  r.k_bound = curvature_operator_bound(cb, ms);
  if (n >= 3) {
    const Theorem1Margin m = theorem1_margin(cb, ms);
    r.L_val = m.L;
    r.W_val = m.W;
    r.theorem1_margin = m.margin;
  } else {
    r.L_val = ricci_min_eigenvalue(cb, ms);
  }
  if (n >= 4) {
    const HuiskenPinch h = huisken_pinch(cb, ms);
    r.huisken_ratio_max = h.ratio_max;
    r.delta_n = h.delta_n;
    r.huisken_applicable = h.applicable;
  }
  return r;
}

}  // namespace formflow
