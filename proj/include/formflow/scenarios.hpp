#pragma once

// Closed catalog of initial metrics and initial p-forms.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "formflow/config.hpp"
#include "formflow/exterior.hpp"
#include "formflow/metric.hpp"

namespace formflow {

struct ScenarioInfo {
  std::string name;
  std::string summary;
  std::string parameter_range;
};

inline const std::vector<ScenarioInfo>& scenario_catalog() {
  static const std::vector<ScenarioInfo> catalog = {
      {"flat_torus", "g = identity on the periodic box", "no parameters"},
      {"conformal_perturbation",
       "g = exp(2u) identity, u = epsilon * prod_i sin(2 pi m_i x_i / L_i) over axes with m_i != 0",
       "|epsilon| <= 0.3; scenario.modes = m_1..m_n (default all 1)"},
      {"anisotropic_constant", "g = diag(a_1, ..., a_n), constant", "scenario.diagonal = a_1..a_n, all a_i > 0"},
      {"random_smooth_perturbation",
       "g = identity + epsilon h, h symmetric with seeded Fourier coefficients up to a band limit, |h_ij| <= 1",
       "0 <= epsilon <= 0.2; scenario.modes = band limit K in [1, 3] (default 2); run.seed"},
  };
  return catalog;
}

/// Uniform double in [-1, 1) from the top 53 bits of a 64-bit draw; unlike
/// std::uniform_real_distribution the mapping is fixed across standard
/// libraries.
inline double signed_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-52 - 1.0;
}

/// All integer wave vectors in [-K, K]^n modulo k ~ -k (first nonzero entry
/// positive), excluding 0.
inline std::vector<std::array<int, kMaxDim>> half_space_modes(int n, int K) {
  std::vector<std::array<int, kMaxDim>> out;
  std::array<int, kMaxDim> k{};
  const int side = 2 * K + 1;
  const int total = int_pow(side, n);
  for (int idx = 0; idx < total; ++idx) {
    int rest = idx;
    for (int i = 0; i < n; ++i) {
      k[i] = rest % side - K;
      rest /= side;
    }
    int first = 0;
    for (int i = 0; i < n; ++i)
      if (k[i] != 0) {
        first = k[i];
        break;
      }
    if (first > 0) out.push_back(k);
  }
  return out;
}

/// sum over modes of a_k cos(phase_k) + b_k sin(phase_k) with coefficients
/// drawn from `rng`, scaled so that the sup over the box is at most 1.
inline ScalarField random_band_limited(const GridSpec& grid, int K, std::mt19937_64& rng) {
  const int n = grid.dim;
  const auto modes = half_space_modes(n, K);
  std::vector<double> a(modes.size()), b(modes.size());
  for (std::size_t m = 0; m < modes.size(); ++m) {
    a[m] = signed_unit(rng);
    b[m] = signed_unit(rng);
  }
  const double scale = 1.0 / (2.0 * static_cast<double>(modes.size()));
  ScalarField f(grid);
  for (std::size_t node = 0; node < f.size(); ++node) {
    const Point x = grid.position(node);
    double s = 0.0;
    for (std::size_t m = 0; m < modes.size(); ++m) {
      double phase = 0.0;
      for (int i = 0; i < n; ++i) phase += 2.0 * std::numbers::pi * modes[m][i] * x[i] / grid.period[i];
      s += a[m] * std::cos(phase) + b[m] * std::sin(phase);
    }
    f[node] = scale * s;
  }
  return f;
}

inline TensorField scenario_metric(const ExperimentConfig& cfg) {
  const GridSpec grid = cfg.grid();
  const int n = grid.dim;
  if (cfg.scenario == "flat_torus") return identity_metric(grid);
  if (cfg.scenario == "conformal_perturbation") {
    const ScalarField u = ScalarField::from_function(grid, [&](const Point& x) {
      double prod = 1.0;
      bool any = false;
      for (int i = 0; i < n; ++i) {
        if (cfg.modes[i] == 0) continue;
        any = true;
        prod *= std::sin(2.0 * std::numbers::pi * cfg.modes[i] * x[i] / grid.period[i]);
      }
      return any ? cfg.epsilon * prod : 0.0;
    });
    return conformal_metric(u);
  }
  if (cfg.scenario == "anisotropic_constant") {
    SmallMatrix d(n);
    for (int i = 0; i < n; ++i) d(i, i) = cfg.diagonal[i];
    return constant_metric(grid, d);
  }
  if (cfg.scenario == "random_smooth_perturbation") {
    std::mt19937_64 rng(cfg.seed);
    TensorField g = identity_metric(grid);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        const ScalarField h = random_band_limited(grid, cfg.modes[0], rng);
        auto gij = g.component(i * n + j);
        auto gji = g.component(j * n + i);
        for (std::size_t node = 0; node < h.size(); ++node) {
          gij[node] += cfg.epsilon * h[node];
          gji[node] = gij[node];
        }
      }
    return g;
  }
  throw ConfigError("scenario.name: unknown scenario '" + cfg.scenario + "'", 0, 0, "scenario.name");
}

inline double plane_wave_phase(const GridSpec& grid, const std::vector<int>& modes, const Point& x) {
  double phase = 0.0;
  for (int i = 0; i < grid.dim; ++i) phase += 2.0 * std::numbers::pi * modes[i] * x[i] / grid.period[i];
  return phase;
}

/// Initial p-form:
///   fourier_mode  amplitude * sin(2 pi m.x) in one canonical component
///   closed        d of a (p-1)-form whose c-th component is
///                 amplitude * sin(2 pi m.x + c) ; constant for p = 0
///   random        every component seeded band-limited (K = 2), times amplitude
inline PForm initial_form(const ExperimentConfig& cfg) {
  const GridSpec grid = cfg.grid();
  const int p = cfg.form_degree;
  PForm xi(grid, p);
  if (cfg.form_kind == "fourier_mode") {
    auto comp = xi.component(cfg.form_component);
    for (std::size_t node = 0; node < xi.nodes(); ++node) {
      comp[node] = cfg.form_amplitude * std::sin(plane_wave_phase(grid, cfg.form_modes, grid.position(node)));
    }
    return xi;
  }
  if (cfg.form_kind == "closed") {
    if (p == 0) {
      std::fill(xi.data.begin(), xi.data.end(), cfg.form_amplitude);
      return xi;
    }
    PForm phi(grid, p - 1);
    for (int c = 0; c < phi.component_count(); ++c) {
      auto comp = phi.component(c);
      for (std::size_t node = 0; node < phi.nodes(); ++node) {
        comp[node] = cfg.form_amplitude *
                     std::sin(plane_wave_phase(grid, cfg.form_modes, grid.position(node)) + c);
      }
    }
    return exterior_derivative(phi);
  }
  if (cfg.form_kind == "random") {
    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    for (int c = 0; c < xi.component_count(); ++c) {
      const ScalarField f = random_band_limited(grid, 2, rng);
      auto comp = xi.component(c);
      for (std::size_t node = 0; node < xi.nodes(); ++node) comp[node] = cfg.form_amplitude * f[node];
    }
    return xi;
  }
  throw ConfigError("form.kind: unknown form kind '" + cfg.form_kind + "'", 0, 0, "form.kind");
}

}  // namespace formflow
