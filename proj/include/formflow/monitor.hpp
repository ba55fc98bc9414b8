#pragma once

// Norms, the pointwise evolution identity for |xi|^2 along the coupled flow,
// time-series records and monotonicity verdicts.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "formflow/flow.hpp"
#include "formflow/spectral.hpp"

namespace formflow {

/// (integral |xi|^2_g dv_g)^{1/2}
inline double l2_norm(const PForm& xi, const MetricState& ms) {
  return std::sqrt(std::max(0.0, integrate_scalar(pointwise_norm_sq(xi, ms), ms.sqrt_det_g)));
}

/// max over nodes of |xi|_g
inline double linf_norm(const PForm& xi, const MetricState& ms) {
  return std::sqrt(std::max(0.0, pointwise_norm_sq(xi, ms).max()));
}

/// xi_{ij I} R^{ij}_{kl} xi^{kl I} summed over all tuples, R^{ij}_{kl} from riemann_low.
inline ScalarField form_curvature_term(const PForm& xi, const MetricState& ms, const CurvatureBundle& cb) {
  const int n = xi.grid.dim;
  const int p = xi.degree;
  ScalarField out(xi.grid);
  if (p < 2) return out;
  const int full = int_pow(n, p);
  const int tail = int_pow(n, p - 2);
  std::vector<double> low(full), up(full), work(full), contracted(full);
  std::array<double, 256> rm{};
  std::array<double, 256> rwork{};
  for (std::size_t node = 0; node < xi.nodes(); ++node) {
    const NodeMetric nm = load_node_metric(ms, node);
    expand_full(xi, node, low.data());
    std::copy(low.begin(), low.end(), up.begin());
    raise_all(up.data(), work.data(), n, p, nm.ginv);
    const int count = int_pow(n, 4);
    for (int c = 0; c < count; ++c) rm[c] = cb.riemann_low.at(c, node);
    apply_to_slot(rm.data(), rwork.data(), n, 4, 0, nm.ginv);
    apply_to_slot(rwork.data(), rm.data(), n, 4, 1, nm.ginv);  // R^{ij}_{kl}
    // contracted_{kl I} = xi_{ij I} R^{ij}_{kl}
    std::fill(contracted.begin(), contracted.end(), 0.0);
    for (int ij = 0; ij < n * n; ++ij)
      for (int kl = 0; kl < n * n; ++kl) {
        const double r = rm[ij * n * n + kl];
        if (r == 0.0) continue;
        for (int t = 0; t < tail; ++t) contracted[kl * tail + t] += low[ij * tail + t] * r;
      }
    double s = 0.0;
    for (int f = 0; f < full; ++f) s += contracted[f] * up[f];
    out[node] = s;
  }
  return out;
}

/// Right-hand side of the evolution identity
///   d/dt |xi|^2 = Delta |xi|^2 - 2 |nabla xi|^2 - p (p - 1) xi_{ij..} R^{ij}_{kl} xi^{kl..}
/// evaluated on one state.
inline ScalarField eq7_rhs(const PForm& xi, const MetricState& ms, const CurvatureBundle& cb,
                           bool include_curvature_term = true) {
  const int p = xi.degree;
  ScalarField out = scalar_laplacian(pointwise_norm_sq(xi, ms), ms);
  const ScalarField grad = gradient_norm_sq(form_gradient(xi, ms), ms);
  for (std::size_t node = 0; node < out.size(); ++node) out[node] -= 2.0 * grad[node];
  if (include_curvature_term && p >= 2) {
    const ScalarField curv = form_curvature_term(xi, ms, cb);
    for (std::size_t node = 0; node < out.size(); ++node) out[node] -= p * (p - 1.0) * curv[node];
  }
  return out;
}

/// Three consecutive |xi|^2 samples around a middle state, plus the identity's
/// right-hand side at the middle state.
struct Eq7Window {
  const ScalarField* norm_sq_prev = nullptr;
  const ScalarField* norm_sq_next = nullptr;
  const ScalarField* rhs_mid = nullptr;
  double dt_prev = 0.0;
  double dt_next = 0.0;
};

/// sup over nodes of |(|xi|^2(t+dt) - |xi|^2(t-dt)) / (2 dt) - rhs(t)|.
inline double eq7_residual(const Eq7Window& w) {
  if (w.dt_prev != w.dt_next || !(w.dt_prev > 0.0)) {
    throw ArgumentError("eq7_residual: window steps must be equal and positive");
  }
  const ScalarField& a = *w.norm_sq_prev;
  const ScalarField& b = *w.norm_sq_next;
  const ScalarField& r = *w.rhs_mid;
  double sup = 0.0;
  for (std::size_t node = 0; node < a.size(); ++node) {
    sup = std::max(sup, std::abs((b[node] - a[node]) / (2.0 * w.dt_prev) - r[node]));
  }
  return sup;
}

struct TimeSeriesRecord {
  double t = 0.0;
  long step = 0;
  double l2_norm = 0.0;
  double linf_norm = 0.0;
  double weighted_l2 = 0.0;
  double weighted_linf = 0.0;
  double k_used = 0.0;  // trajectory-wide bound, set by finalize_records
  double k_step = 0.0;  // curvature_operator_bound at this time
  double L_val = 0.0;
  double W_val = kNaN;
  double theorem1_margin = kNaN;
  double huisken_ratio_max = kNaN;
  double eq7_residual_sup = kNaN;  // NaN where no equal-step window exists
  double scalar_curv_min = 0.0;
  double scalar_curv_max = 0.0;
  double min_eig_g = 0.0;
};

inline TimeSeriesRecord make_record(const FlowState& state) {
  TimeSeriesRecord r;
  r.t = state.t;
  r.step = state.step_count;
  r.l2_norm = l2_norm(state.xi, state.ms);
  r.linf_norm = linf_norm(state.xi, state.ms);
  const PinchReport pr = evaluate_pinch(state.cb, state.ms, state.t);
  r.k_step = pr.k_bound;
  r.L_val = pr.L_val;
  r.W_val = pr.W_val;
  r.theorem1_margin = pr.theorem1_margin;
  r.huisken_ratio_max = pr.huisken_ratio_max;
  r.scalar_curv_min = state.cb.scalar.min();
  r.scalar_curv_max = state.cb.scalar.max();
  r.min_eig_g = state.ms.min_eig_g;
  return r;
}

/// Fixes k to the minimum curvature-operator bound over all records and fills
/// the weighted norms e^{k p (p-1) t} ||xi||.
inline void finalize_records(std::vector<TimeSeriesRecord>& records, int degree) {
  if (records.empty()) return;
  double k = std::numeric_limits<double>::infinity();
  for (const auto& r : records) k = std::min(k, r.k_step);
  for (auto& r : records) {
    const double w = std::exp(k * degree * (degree - 1.0) * r.t);
    r.k_used = k;
    r.weighted_l2 = w * r.l2_norm;
    r.weighted_linf = w * r.linf_norm;
  }
}

/// Flow observer building time-series records every `record_every` steps,
/// including the evolution-identity residual at each recorded step that has
/// equal-sized neighbouring steps.
class Recorder {
 public:
  explicit Recorder(int record_every = 1) : record_every_(std::max(1, record_every)) {}

  void operator()(const FlowState& state, double dt_last) {
    ScalarField current = pointwise_norm_sq(state.xi, state.ms);
    if (pending_ && prev_prev_) {
      if (dt_last == pending_dt_ && dt_last > 0.0) {
        const Eq7Window w{&*prev_prev_, &current, &pending_rhs_, pending_dt_, dt_last};
        records_[pending_index_].eq7_residual_sup = eq7_residual(w);
      }
    }
    pending_ = false;
    if (state.step_count % record_every_ == 0) {
      records_.push_back(make_record(state));
      if (state.step_count > 0) {
        pending_ = true;
        pending_index_ = records_.size() - 1;
        pending_dt_ = dt_last;
        pending_rhs_ = eq7_rhs(state.xi, state.ms, state.cb);
      }
    }
    prev_prev_ = std::move(prev_);
    prev_ = std::move(current);
  }

  const std::vector<TimeSeriesRecord>& records() const { return records_; }
  std::vector<TimeSeriesRecord> take_records() { return std::move(records_); }

 private:
  int record_every_;
  std::vector<TimeSeriesRecord> records_;
  std::optional<ScalarField> prev_;       // |xi|^2 one step back
  std::optional<ScalarField> prev_prev_;  // |xi|^2 two steps back
  bool pending_ = false;
  std::size_t pending_index_ = 0;
  double pending_dt_ = 0.0;
  ScalarField pending_rhs_;
};

struct Trajectory {
  std::vector<TimeSeriesRecord> records;
  FlowOutcome outcome;
};

/// run_flow with a Recorder attached; records are finalized for `xi` degree.
inline Trajectory record_flow(FlowState initial, const StepControl& ctrl, int record_every = 1) {
  const int degree = initial.xi.degree;
  Recorder rec(record_every);
  Trajectory tr;
  tr.outcome = run_flow(std::move(initial), ctrl, [&](const FlowState& s, double dt) { rec(s, dt); });
  tr.records = rec.take_records();
  finalize_records(tr.records, degree);
  return tr;
}

enum class Claim { thm1_l2, thm1_linf, thm3_l2, thm3_linf };

inline std::string_view claim_name(Claim c) {
  switch (c) {
    case Claim::thm1_l2: return "thm1_l2";
    case Claim::thm1_linf: return "thm1_linf";
    case Claim::thm3_l2: return "thm3_l2";
    case Claim::thm3_linf: return "thm3_linf";
  }
  return "";
}

inline double claim_value(const TimeSeriesRecord& r, Claim c) {
  switch (c) {
    case Claim::thm1_l2: return r.l2_norm;
    case Claim::thm1_linf: return r.linf_norm;
    case Claim::thm3_l2: return r.weighted_l2;
    case Claim::thm3_linf: return r.weighted_linf;
  }
  return kNaN;
}

struct MonotonicityVerdict {
  Claim claim = Claim::thm1_l2;
  bool holds = true;
  bool vacuous = false;         // fewer than two records
  double worst_violation = 0.0; // max(0, max_{s<t} q(t) - q(s))
  double tolerance = 0.0;
  double worst_s = kNaN;        // time pair realizing the worst increase
  double worst_t = kNaN;
};

inline constexpr double kMonotoneAbsTol = 1e-8;
inline constexpr double kMonotoneRelTol = 1e-6;

/// Worst forward increase of the claimed quantity; holds iff it does not
/// exceed abs_tol + rel_tol * (initial value).
inline MonotonicityVerdict check_monotone(const std::vector<TimeSeriesRecord>& series, Claim claim,
                                          double abs_tol = kMonotoneAbsTol, double rel_tol = kMonotoneRelTol) {
  if (series.empty()) throw ArgumentError("check_monotone: empty series");
  MonotonicityVerdict v;
  v.claim = claim;
  v.tolerance = abs_tol + rel_tol * std::abs(claim_value(series.front(), claim));
  if (series.size() < 2) {
    v.vacuous = true;
    return v;
  }
  double running_min = claim_value(series.front(), claim);
  std::size_t argmin = 0;
  for (std::size_t i = 1; i < series.size(); ++i) {
    const double q = claim_value(series[i], claim);
    const double inc = q - running_min;
    if (inc > v.worst_violation) {
      v.worst_violation = inc;
      v.worst_s = series[argmin].t;
      v.worst_t = series[i].t;
    }
    if (q < running_min) {
      running_min = q;
      argmin = i;
    }
  }
  v.holds = v.worst_violation <= v.tolerance;
  return v;
}

/// Closed time intervals over which the hypotheses of the unweighted
/// monotonicity statement (nonnegative Ricci and nonnegative global margin)
/// hold at every record.
inline std::vector<std::pair<double, double>> thm1_hypothesis_intervals(
    const std::vector<TimeSeriesRecord>& series) {
  std::vector<std::pair<double, double>> out;
  bool open = false;
  for (const auto& r : series) {
    const bool ok = r.L_val >= 0.0 && r.theorem1_margin >= 0.0;
    if (ok && !open) {
      out.emplace_back(r.t, r.t);
      open = true;
    } else if (ok) {
      out.back().second = r.t;
    } else {
      open = false;
    }
  }
  return out;
}

inline constexpr std::string_view kCsvHeader =
    "t,l2,linf,weighted_l2,weighted_linf,k,L,W,margin,huisken_ratio,eq7_residual,R_min,R_max,min_eig_g";

inline std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_row(const TimeSeriesRecord& r) {
  const double cols[] = {r.t,       r.l2_norm,         r.linf_norm,         r.weighted_l2,
                         r.weighted_linf, r.k_used,  r.L_val,             r.W_val,
                         r.theorem1_margin, r.huisken_ratio_max, r.eq7_residual_sup,
                         r.scalar_curv_min, r.scalar_curv_max, r.min_eig_g};
  std::string line;
  for (std::size_t i = 0; i < std::size(cols); ++i) {
    if (i) line += ',';
    line += format_real(cols[i]);
  }
  return line;
}

}  // namespace formflow
