#pragma once

// Experiment driver: config -> initial data -> recorded flow -> CSV + JSON.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "formflow/config.hpp"
#include "formflow/monitor.hpp"
#include "formflow/scenarios.hpp"

#ifndef FORMFLOW_VERSION
#define FORMFLOW_VERSION "0.0.0"
#endif

namespace formflow {

inline constexpr const char* kVersion = FORMFLOW_VERSION;

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitSingular = 3, kExitIo = 4 };

struct ExperimentResult {
  std::vector<TimeSeriesRecord> records;
  std::vector<MonotonicityVerdict> verdicts;
  std::vector<std::pair<double, double>> hypothesis_intervals;
  long steps = 0;
  double t_final = 0.0;
  bool singular = false;
  std::string singular_message;
  double singular_time = kNaN;
  long long singular_node = -1;
  double final_metric_drift = 0.0;  // sup |g(T) - g(0)|
};

inline FlowState initial_state(const ExperimentConfig& cfg) {
  TensorField g = scenario_metric(cfg);
  PForm xi = initial_form(cfg);
  return make_flow_state(std::move(g), std::move(xi), 0.0, cfg.spd_floor);
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  FlowState init = initial_state(cfg);
  const TensorField g0 = init.ms.g;
  StepControl ctrl;
  ctrl.cfl = cfg.cfl;
  ctrl.t_end = cfg.t_end;
  ctrl.max_steps = cfg.max_steps;
  ctrl.spd_floor = cfg.spd_floor;

  Trajectory tr = record_flow(std::move(init), ctrl, cfg.record_every);
  ExperimentResult res;
  res.records = std::move(tr.records);
  res.steps = tr.outcome.steps;
  res.t_final = tr.outcome.final_state.t;
  res.singular = tr.outcome.singular;
  if (res.singular) {
    res.singular_message = tr.outcome.message;
    res.singular_time = tr.outcome.singular_time;
    res.singular_node = static_cast<long long>(tr.outcome.singular_node);
  }
  const TensorField& gT = tr.outcome.final_state.ms.g;
  for (std::size_t i = 0; i < gT.data.size(); ++i) {
    res.final_metric_drift = std::max(res.final_metric_drift, std::abs(gT.data[i] - g0.data[i]));
  }
  for (Claim c : {Claim::thm1_l2, Claim::thm1_linf, Claim::thm3_l2, Claim::thm3_linf}) {
    res.verdicts.push_back(check_monotone(res.records, c, cfg.monotone_abs, cfg.monotone_rel));
  }
  res.hypothesis_intervals = thm1_hypothesis_intervals(res.records);
  return res;
}

inline nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["grid"] = {{"dim", cfg.dim}, {"points", cfg.points}, {"period", cfg.period}};
  nlohmann::ordered_json sc = {{"name", cfg.scenario}};
  if (cfg.scenario == "conformal_perturbation" || cfg.scenario == "random_smooth_perturbation") {
    sc["epsilon"] = cfg.epsilon;
    sc["modes"] = cfg.modes;
  }
  if (cfg.scenario == "anisotropic_constant") sc["diagonal"] = cfg.diagonal;
  j["scenario"] = sc;
  j["form"] = {{"degree", cfg.form_degree},
               {"kind", cfg.form_kind},
               {"amplitude", cfg.form_amplitude},
               {"modes", cfg.form_modes},
               {"component", cfg.form_component}};
  j["run"] = {{"t_end", cfg.t_end},
              {"cfl", cfg.cfl},
              {"max_steps", cfg.max_steps},
              {"record_every", cfg.record_every},
              {"seed", cfg.seed},
              {"spd_floor", cfg.spd_floor}};
  j["output"] = {{"dir", cfg.out_dir}, {"prefix", cfg.prefix}};
  j["tolerance"] = {{"monotone_abs", cfg.monotone_abs}, {"monotone_rel", cfg.monotone_rel}};
  return j;
}

namespace detail {

inline nlohmann::ordered_json real_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

struct Extremes {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (std::isnan(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  nlohmann::ordered_json json() const {
    if (lo > hi) return {{"min", nullptr}, {"max", nullptr}};
    return {{"min", lo}, {"max", hi}};
  }
};

inline void write_atomically(const std::filesystem::path& path, const std::string& contents) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError("write failed for '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move output into place at '" + path.string() + "'");
  }
}

}  // namespace detail

inline std::string series_csv(const std::vector<TimeSeriesRecord>& records) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : records) {
    out += csv_row(r);
    out += '\n';
  }
  return out;
}

inline nlohmann::ordered_json summary_json(const ExperimentResult& res, const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["tool"] = "formflow";
  j["version"] = kVersion;
  j["status"] = res.singular ? "singular" : "ok";
  j["config"] = config_to_json(cfg);
  j["conventions"] = {
      {"codifferential_sign", kCodifferentialSign},
      {"hodge_laplacian", "d delta + delta d with delta = div (interior contraction with nabla)"},
      {"riemann", "R^l_ijk = d_i Gamma^l_jk - d_j Gamma^l_ik + Gamma^l_ih Gamma^h_jk - Gamma^l_jh Gamma^h_ik; "
                  "R_ijkl = g_hl R^h_ijk"},
      {"ricci", "R_jk = R^i_ijk"},
      {"curvature_operator", "Q(xi) = xi_ij R^ij_kl xi^kl against xi_ij xi^ij; k = min eigenvalue / 2"},
  };
  nlohmann::ordered_json traj = {
      {"steps", res.steps},
      {"records", res.records.size()},
      {"t_final", res.t_final},
      {"metric_drift_sup", res.final_metric_drift},
  };
  if (res.singular) {
    traj["singular_time"] = detail::real_or_null(res.singular_time);
    traj["singular_node"] = res.singular_node;
    traj["message"] = res.singular_message;
  }
  j["trajectory"] = traj;

  nlohmann::ordered_json verdicts = nlohmann::ordered_json::array();
  for (const auto& v : res.verdicts) {
    verdicts.push_back({{"claim", std::string(claim_name(v.claim))},
                        {"holds", v.holds},
                        {"vacuous", v.vacuous},
                        {"worst_violation", v.worst_violation},
                        {"tolerance", v.tolerance},
                        {"worst_s", detail::real_or_null(v.worst_s)},
                        {"worst_t", detail::real_or_null(v.worst_t)}});
  }
  j["verdicts"] = verdicts;

  detail::Extremes L, W, margin, huisken, R, mineig, eq7;
  double k_used = kNaN;
  for (const auto& r : res.records) {
    L.add(r.L_val);
    W.add(r.W_val);
    margin.add(r.theorem1_margin);
    huisken.add(r.huisken_ratio_max);
    R.add(r.scalar_curv_min);
    R.add(r.scalar_curv_max);
    mineig.add(r.min_eig_g);
    eq7.add(r.eq7_residual_sup);
    k_used = r.k_used;
  }
  j["pinch_extremes"] = {{"k_used", detail::real_or_null(k_used)},
                         {"L", L.json()},
                         {"W", W.json()},
                         {"theorem1_margin", margin.json()},
                         {"huisken_ratio", huisken.json()},
                         {"delta_n", cfg.dim >= 4 ? nlohmann::ordered_json(delta_n(cfg.dim)) : nullptr},
                         {"scalar_curvature", R.json()},
                         {"min_eig_g", mineig.json()},
                         {"eq7_residual_sup", eq7.json()}};
  nlohmann::ordered_json intervals = nlohmann::ordered_json::array();
  for (const auto& [a, b] : res.hypothesis_intervals) intervals.push_back({a, b});
  j["thm1_hypothesis_intervals"] = intervals;
  return j;
}

struct OutputPaths {
  std::filesystem::path csv;
  std::filesystem::path summary;
};

inline OutputPaths output_paths(const ExperimentConfig& cfg) {
  const std::filesystem::path dir(cfg.out_dir);
  return {dir / (cfg.prefix + ".csv"), dir / (cfg.prefix + "_summary.json")};
}

/// Writes the CSV series and the JSON summary. Each file is written to a
/// temporary name and renamed, so a failure never leaves a partial artifact.
inline OutputPaths emit_outputs(const ExperimentResult& res, const ExperimentConfig& cfg) {
  if (res.records.empty()) throw ArgumentError("emit_outputs: empty trajectory");
  const OutputPaths paths = output_paths(cfg);
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + cfg.out_dir + "': " + ec.message());
  const std::string csv = series_csv(res.records);
  const std::string json = summary_json(res, cfg).dump(2) + "\n";
  detail::write_atomically(paths.csv, csv);
  detail::write_atomically(paths.summary, json);
  return paths;
}

}  // namespace formflow
