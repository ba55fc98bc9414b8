#pragma once

// Brute-force curvature of a metric given as a function of position.
// Christoffel symbols come from nested fine-step central differences of the
// metric function; R^l_{ijk} is then evaluated term by term from its
// definition with another layer of differences on the Christoffel symbols.
// Nothing here touches the grid stencils, so it can referee them.

#include <array>
#include <cmath>
#include <functional>

namespace oracle {

constexpr int kMax = 4;
using Vec = std::array<double, kMax>;
using Mat = std::array<std::array<double, kMax>, kMax>;
using MetricFn = std::function<Mat(const Vec&)>;
using Gamma = std::array<std::array<std::array<double, kMax>, kMax>, kMax>;  // [i][j][k] = Gamma^i_{jk}
using Riemann4 = std::array<std::array<std::array<std::array<double, kMax>, kMax>, kMax>, kMax>;

inline Mat invert(const Mat& m, int n) {
  Mat a = m;
  Mat inv{};
  for (int i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    std::swap(inv[c], inv[piv]);
    const double d = a[c][c];
    for (int j = 0; j < n; ++j) {
      a[c][j] /= d;
      inv[c][j] /= d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c];
      for (int j = 0; j < n; ++j) {
        a[r][j] -= f * a[c][j];
        inv[r][j] -= f * inv[c][j];
      }
    }
  }
  return inv;
}

// Five-point derivative of a vector-valued quantity along one axis.
template <class T, class F>
T central(const F& f, Vec x, int axis, double eta) {
  auto at = [&](double s) {
    Vec y = x;
    y[axis] += s;
    return f(y);
  };
  const T a = at(-2 * eta), b = at(-eta), c = at(eta), d = at(2 * eta);
  T out{};
  auto combine = [&](auto& o, const auto& pa, const auto& pb, const auto& pc, const auto& pd, auto&& self) -> void {
    if constexpr (std::is_arithmetic_v<std::decay_t<decltype(o)>>) {
      o = (pa - pd + 8.0 * (pc - pb)) / (12.0 * eta);
    } else {
      for (std::size_t i = 0; i < o.size(); ++i) self(o[i], pa[i], pb[i], pc[i], pd[i], self);
    }
  };
  combine(out, a, b, c, d, combine);
  return out;
}

struct PointCurvature {
  Gamma gamma{};
  Riemann4 mixed{};  // [l][i][j][k] = R^l_{ijk}
  Riemann4 low{};    // [i][j][k][l] = g_{hl} R^h_{ijk}
  Mat ricci{};       // R^i_{ijk}
  double scalar = 0.0;
};

inline Gamma christoffel_at(const MetricFn& g, int n, const Vec& x, double eta) {
  std::array<Mat, kMax> dg{};
  for (int a = 0; a < n; ++a) dg[a] = central<Mat>(g, x, a, eta);
  const Mat gi = invert(g(x), n);
  Gamma out{};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) s += gi[i][l] * (dg[j][l][k] + dg[k][l][j] - dg[l][j][k]);
        out[i][j][k] = 0.5 * s;
      }
  return out;
}

inline PointCurvature curvature_at(const MetricFn& g, int n, const Vec& x, double eta = 2e-3) {
  PointCurvature pc;
  pc.gamma = christoffel_at(g, n, x, eta);
  auto gamma_fn = [&](const Vec& y) { return christoffel_at(g, n, y, eta); };
  std::array<Gamma, kMax> dgam{};
  for (int a = 0; a < n; ++a) dgam[a] = central<Gamma>(gamma_fn, x, a, eta);
  const Gamma& G = pc.gamma;
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double s = dgam[i][l][j][k] - dgam[j][l][i][k];
          for (int m = 0; m < n; ++m) s += G[l][i][m] * G[m][j][k] - G[l][j][m] * G[m][i][k];
          pc.mixed[l][i][j][k] = s;
        }
  const Mat gx = g(x);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double s = 0.0;
          for (int h = 0; h < n; ++h) s += gx[h][l] * pc.mixed[h][i][j][k];
          pc.low[i][j][k][l] = s;
        }
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += pc.mixed[i][i][j][k];
      pc.ricci[j][k] = s;
    }
  const Mat gi = invert(gx, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) pc.scalar += gi[j][k] * pc.ricci[j][k];
  return pc;
}

}  // namespace oracle
