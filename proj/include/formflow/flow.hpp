#pragma once

// Coupled evolution of a metric under Ricci flow, d/dt g_{ij} = -2 R_{ij}, and
// a p-form under the form heat flow d/dt xi = Delta_d xi, with Delta_d given by
// the Weitzenbock expression
//   g^{jk} xi_{I;j;k} - sum_s xi_{..a..} R^a_{i_s} - sum_{s<t} xi_{..a..b..} R^{ab}_{i_s i_t},
// R^{ab}_{ij} = g^{ap} g^{bq} R_{pqij} built from riemann_low. This operator
// equals delta d + d delta with the codifferential of exterior.hpp and is
// dissipative. Both fields advance with the same classical RK4 stages.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "formflow/curvature.hpp"
#include "formflow/exterior.hpp"

namespace formflow {

/// -2 R_{ij}; symmetric exactly because the Ricci tensor is mirrored.
inline TensorField ricci_rhs(const CurvatureBundle& cb) {
  TensorField out = cb.ricci;
  for (double& v : out.data) v *= -2.0;
  return out;
}

/// Delta f = g^{ij} (d_i d_j f - Gamma^k_{ij} d_k f) for a scalar field.
inline ScalarField scalar_laplacian(const ScalarField& f, const MetricState& ms) {
  const GridSpec& grid = f.grid;
  const int n = grid.dim;
  const std::size_t nodes = grid.node_count();
  ScalarField out(grid);
  std::vector<double> d2(nodes), scratch(nodes);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      second_partial(f.span(), d2, scratch, grid, i, j);
      auto ginv = ms.g_inv.component(i * n + j);
      for (std::size_t node = 0; node < nodes; ++node) out[node] += ginv[node] * d2[node];
    }
  for (int k = 0; k < n; ++k) {
    partial_derivative(f.span(), d2, grid, k);
    for (std::size_t node = 0; node < nodes; ++node) {
      double contracted = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          contracted += ms.g_inv.at(i * n + j, node) * ms.christoffel.at((k * n + i) * n + j, node);
        }
      out[node] -= contracted * d2[node];
    }
  }
  return out;
}

/// Rough Laplacian g^{jk} xi_{I;j;k} of a p-form.
inline PForm rough_laplacian(const PForm& xi, const MetricState& ms) {
  require_same_grid(xi.grid, ms.grid(), "rough_laplacian");
  const GridSpec& grid = xi.grid;
  const int n = grid.dim;
  const int p = xi.degree;
  const std::size_t nodes = grid.node_count();
  const MultiIndexSet& mi = xi.indices();
  const auto subst = slot_substitution_table(n, p);
  const FormGradient grad = form_gradient(xi, ms);
  const TensorField& gam = ms.christoffel;

  // contracted[m] = g^{jk} Gamma^m_{jk}
  std::vector<std::vector<double>> contracted(n, std::vector<double>(nodes, 0.0));
  for (int m = 0; m < n; ++m)
    for (std::size_t node = 0; node < nodes; ++node) {
      double s = 0.0;
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) s += ms.g_inv.at(j * n + k, node) * gam.at((m * n + j) * n + k, node);
      contracted[m][node] = s;
    }

  PForm out(grid, p);
  std::vector<double> scratch(nodes);
  for (int c = 0; c < mi.size(); ++c) {
    auto dst = out.component(c);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        partial_derivative(grad.component(c, j), scratch, grid, k);
        auto ginv = ms.g_inv.component(j * n + k);
        for (std::size_t node = 0; node < nodes; ++node) dst[node] += ginv[node] * scratch[node];
      }
    for (std::size_t node = 0; node < nodes; ++node) {
      double corr = 0.0;
      for (int m = 0; m < n; ++m) corr += contracted[m][node] * grad.at(c, m, node);
      for (int s = 0; s < p; ++s) {
        const int is = mi[c][s];
        for (int m = 0; m < n; ++m) {
          const SignedSlot sub = subst[(c * p + s) * n + m];
          if (sub.position < 0) continue;
          double acc = 0.0;
          for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
              acc += ms.g_inv.at(j * n + k, node) * gam.at((m * n + k) * n + is, node) *
                     grad.at(sub.position, j, node);
            }
          corr += sub.sign * acc;
        }
      }
      dst[node] -= corr;
    }
  }
  return out;
}

/// Signed canonical position of xi_I with slots s and t replaced by a and b,
/// indexed [((c * p + s) * p + t) * n * n + a * n + b]; only s < t is filled.
inline std::vector<SignedSlot> pair_substitution_table(int n, int p) {
  const MultiIndexSet& mi = multi_indices(n, p);
  std::vector<SignedSlot> table(static_cast<std::size_t>(mi.size()) * p * p * n * n);
  for (int c = 0; c < mi.size(); ++c)
    for (int s = 0; s < p; ++s)
      for (int t = s + 1; t < p; ++t)
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) {
            MultiIndex idx = mi[c];
            idx[s] = a;
            idx[t] = b;
            table[((c * p + s) * p + t) * n * n + a * n + b] = mi.lookup(std::span<const int>(idx.data(), p));
          }
  return table;
}

/// Weitzenbock form of the Hodge-de Rham Laplacian (see header comment).
inline PForm weitzenboeck_laplacian(const PForm& xi, const MetricState& ms, const CurvatureBundle& cb) {
  PForm out = rough_laplacian(xi, ms);
  const int n = xi.grid.dim;
  const int p = xi.degree;
  if (p == 0) return out;
  const std::size_t nodes = xi.nodes();
  const MultiIndexSet& mi = xi.indices();
  const auto single = slot_substitution_table(n, p);
  const auto pair = pair_substitution_table(n, p);
  std::array<double, 16> ric_mixed{};   // R^a_i
  std::array<double, 256> rm_up2{};     // R^{ab}_{ij}
  std::array<double, 256> work{};
  for (std::size_t node = 0; node < nodes; ++node) {
    const NodeMetric nm = load_node_metric(ms, node);
    for (int a = 0; a < n; ++a)
      for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int b = 0; b < n; ++b) s += nm.ginv(a, b) * cb.ricci.at(b * n + i, node);
        ric_mixed[a * n + i] = s;
      }
    if (p >= 2) {
      const int count = int_pow(n, 4);
      for (int c = 0; c < count; ++c) rm_up2[c] = cb.riemann_low.at(c, node);
      apply_to_slot(rm_up2.data(), work.data(), n, 4, 0, nm.ginv);
      apply_to_slot(work.data(), rm_up2.data(), n, 4, 1, nm.ginv);
    }
    for (int c = 0; c < mi.size(); ++c) {
      double curv = 0.0;
      for (int s = 0; s < p; ++s) {
        const int is = mi[c][s];
        for (int a = 0; a < n; ++a) {
          const SignedSlot sub = single[(c * p + s) * n + a];
          if (sub.position < 0) continue;
          curv += sub.sign * xi.at(sub.position, node) * ric_mixed[a * n + is];
        }
      }
      for (int s = 0; s < p; ++s)
        for (int t = s + 1; t < p; ++t) {
          const int is = mi[c][s];
          const int it = mi[c][t];
          for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
              const SignedSlot sub = pair[((c * p + s) * p + t) * n * n + a * n + b];
              if (sub.position < 0) continue;
              curv += sub.sign * xi.at(sub.position, node) * rm_up2[((a * n + b) * n + is) * n + it];
            }
        }
      out.at(c, node) -= curv;
    }
  }
  return out;
}

/// (d delta + delta d) xi assembled from exterior_derivative and codifferential.
inline PForm hodge_composition(const PForm& xi, const MetricState& ms) {
  const int n = xi.grid.dim;
  const int p = xi.degree;
  PForm out(xi.grid, p);
  if (p < n) {
    const PForm dd = codifferential(exterior_derivative(xi), ms);
    axpy(out, 1.0, dd);
  }
  if (p > 0) {
    const PForm dd = exterior_derivative(codifferential(xi, ms));
    axpy(out, 1.0, dd);
  }
  return out;
}

struct FlowState {
  double t = 0.0;
  MetricState ms;
  PForm xi;
  CurvatureBundle cb;
  long step_count = 0;
};

inline FlowState make_flow_state(TensorField g, PForm xi, double t = 0.0, double spd_floor = 0.0) {
  FlowState s;
  s.t = t;
  s.ms = make_metric_state(std::move(g), spd_floor);
  require_same_grid(xi.grid, s.ms.grid(), "make_flow_state");
  s.xi = std::move(xi);
  s.cb = compute_curvature(s.ms);
  return s;
}

/// d/dt xi = Delta_d xi.
inline PForm heat_rhs(const FlowState& state) { return weitzenboeck_laplacian(state.xi, state.ms, state.cb); }

struct StepControl {
  double cfl = 0.2;
  double t_end = 0.0;
  long max_steps = 100000;
  double spd_floor = 1e-8;
};

/// cfl * min(h^2) * min(1, min eig g) / (2 n max(1, sup |Rm|)).
inline double stable_dt(const FlowState& state, const StepControl& ctrl) {
  const GridSpec& grid = state.ms.grid();
  const double rm = std::sqrt(std::max(0.0, riemann_norm_sq(state.cb, state.ms).max()));
  return ctrl.cfl * grid.min_spacing_sq() * std::min(1.0, state.ms.min_eig_g) /
         (2.0 * grid.dim * std::max(1.0, rm));
}

namespace detail {

inline MetricState stage_metric(TensorField g, double spd_floor, double t) {
  try {
    return make_metric_state(std::move(g), spd_floor);
  } catch (const DegenerateMetricError& e) {
    throw SingularityError("flow singularity at t = " + std::to_string(t) + ": " + e.what(), t,
                           e.node());
  }
}

inline TensorField add_scaled(const TensorField& base, double a, const TensorField& dir) {
  TensorField out = base;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += a * dir.data[i];
  return out;
}

inline PForm add_scaled(const PForm& base, double a, const PForm& dir) {
  PForm out = base;
  axpy(out, a, dir);
  return out;
}

}  // namespace detail

/// One classical RK4 step of size dt for (g, xi), with curvature recomputed at
/// every stage. Throws SingularityError if any stage metric drops below the
/// SPD floor or becomes non-finite.
inline FlowState rk4_step(const FlowState& state, double dt, double spd_floor = 1e-8) {
  const TensorField& g0 = state.ms.g;
  const PForm& x0 = state.xi;

  const TensorField kg1 = ricci_rhs(state.cb);
  const PForm kx1 = heat_rhs(state);

  FlowState s2;
  s2.ms = detail::stage_metric(detail::add_scaled(g0, 0.5 * dt, kg1), spd_floor, state.t + 0.5 * dt);
  s2.cb = compute_curvature(s2.ms);
  s2.xi = detail::add_scaled(x0, 0.5 * dt, kx1);
  const TensorField kg2 = ricci_rhs(s2.cb);
  const PForm kx2 = heat_rhs(s2);

  FlowState s3;
  s3.ms = detail::stage_metric(detail::add_scaled(g0, 0.5 * dt, kg2), spd_floor, state.t + 0.5 * dt);
  s3.cb = compute_curvature(s3.ms);
  s3.xi = detail::add_scaled(x0, 0.5 * dt, kx2);
  const TensorField kg3 = ricci_rhs(s3.cb);
  const PForm kx3 = heat_rhs(s3);

  FlowState s4;
  s4.ms = detail::stage_metric(detail::add_scaled(g0, dt, kg3), spd_floor, state.t + dt);
  s4.cb = compute_curvature(s4.ms);
  s4.xi = detail::add_scaled(x0, dt, kx3);
  const TensorField kg4 = ricci_rhs(s4.cb);
  const PForm kx4 = heat_rhs(s4);

  TensorField g = g0;
  for (std::size_t i = 0; i < g.data.size(); ++i) {
    g.data[i] += dt / 6.0 * (kg1.data[i] + 2.0 * kg2.data[i] + 2.0 * kg3.data[i] + kg4.data[i]);
  }
  PForm x = x0;
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    x.data[i] += dt / 6.0 * (kx1.data[i] + 2.0 * kx2.data[i] + 2.0 * kx3.data[i] + kx4.data[i]);
  }

  FlowState next;
  next.t = state.t + dt;
  next.step_count = state.step_count + 1;
  next.ms = detail::stage_metric(std::move(g), spd_floor, next.t);
  next.cb = compute_curvature(next.ms);
  next.xi = std::move(x);
  return next;
}

struct FlowOutcome {
  FlowState final_state;
  long steps = 0;
  bool singular = false;
  std::string message;
  double singular_time = 0.0;
  std::size_t singular_node = 0;
};

using FlowObserver = std::function<void(const FlowState&, double dt_last)>;

/// Advances until t_end, max_steps or a singularity. The step size is
/// min(previous dt, stable_dt(current state)), so it never grows and stays
/// exactly constant while the curvature bound does not tighten; the last
/// step is shortened to land on t_end. The observer sees the initial state
/// (dt_last = 0) and every accepted step.
inline FlowOutcome run_flow(FlowState initial, const StepControl& ctrl, const FlowObserver& observer) {
  FlowOutcome out;
  FlowState state = std::move(initial);
  if (observer) observer(state, 0.0);
  double dt_prev = std::numeric_limits<double>::infinity();
  while (out.steps < ctrl.max_steps) {
    const double remaining = ctrl.t_end - state.t;
    if (!(remaining > 1e-12 * std::max(1.0, std::abs(ctrl.t_end)))) break;
    const double dt = std::min(dt_prev, stable_dt(state, ctrl));
    dt_prev = dt;
    const double step = (dt >= remaining * (1.0 - 1e-9)) ? remaining : dt;
    try {
      state = rk4_step(state, step, ctrl.spd_floor);
    } catch (const SingularityError& e) {
      out.singular = true;
      out.message = e.what();
      out.singular_time = e.time();
      out.singular_node = e.node();
      break;
    }
    ++out.steps;
    if (observer) observer(state, step);
  }
  out.final_state = std::move(state);
  return out;
}

}  // namespace formflow
