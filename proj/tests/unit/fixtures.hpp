#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "formflow/metric.hpp"
#include "oracles/pointwise_curvature.hpp"

namespace fixtures {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Metric given as a function of position, sampled onto any grid and usable
/// by the pointwise oracle.
struct AnalyticMetric {
  int n = 0;
  oracle::MetricFn fn;

  formflow::TensorField sample(const formflow::GridSpec& grid) const {
    formflow::TensorField g(grid, 0, 2);
    for (std::size_t node = 0; node < grid.node_count(); ++node) {
      const formflow::Point p = grid.position(node);
      const oracle::Mat m = fn(oracle::Vec{p[0], p[1], p[2], p[3]});
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g.at(i * n + j, node) = m[i][j];
    }
    return g;
  }
};

/// g = e^{2u} delta, u = eps * prod sin(2 pi x_i) * (1 + 0.3 cos(2 pi x_0)) restricted to the
/// first `active` axes.
inline AnalyticMetric conformal(int n, double eps, int active = -1) {
  if (active < 0) active = n;
  return {n, [=](const oracle::Vec& x) {
            double u = eps;
            for (int i = 0; i < active; ++i) u *= std::sin(kTwoPi * x[i]);
            u *= 1.0 + 0.3 * std::cos(kTwoPi * x[0]);
            oracle::Mat m{};
            for (int i = 0; i < n; ++i) m[i][i] = std::exp(2.0 * u);
            return m;
          }};
}

/// A non-conformal metric with off-diagonal entries; depends on the first
/// `active` axes only.
inline AnalyticMetric generic(int n, double eps, int active = -1) {
  if (active < 0) active = n;
  return {n, [=](const oracle::Vec& x) {
            oracle::Mat m{};
            for (int i = 0; i < n; ++i) {
              double s = 0.0;
              for (int a = 0; a < active; ++a) s += std::sin(kTwoPi * (x[a] + 0.1 * (i + 1) * (a + 1)));
              m[i][i] = 1.0 + eps * s / active;
            }
            for (int i = 0; i < n; ++i)
              for (int j = i + 1; j < n; ++j) {
                double s = 0.0;
                for (int a = 0; a < active; ++a) s += std::cos(kTwoPi * x[a] + 0.7 * (i + 2 * j + a));
                m[i][j] = m[j][i] = 0.5 * eps * s / active;
              }
            return m;
          }};
}

/// g = diag(e^{2a(x_0)}, e^{2b(x_1)}, 1, ...): flat.
inline AnalyticMetric separable(int n) {
  return {n, [=](const oracle::Vec& x) {
            oracle::Mat m{};
            for (int i = 0; i < n; ++i) m[i][i] = 1.0;
            m[0][0] = std::exp(0.2 * std::sin(kTwoPi * x[0]));
            m[1][1] = std::exp(0.3 * std::cos(kTwoPi * x[1]) + 0.1 * std::sin(2 * kTwoPi * x[1]));
            return m;
          }};
}

inline formflow::MetricState state(const AnalyticMetric& m, const formflow::GridSpec& grid) {
  return formflow::make_metric_state(m.sample(grid));
}

inline double error_ratio(double coarse, double fine) { return coarse / fine; }

}  // namespace fixtures
