#pragma once

// Experiment configuration: a flat `key = value` text format.
//
//   # comment to end of line
//   grid.dim = 3
//   grid.points = 24          # one value for every axis, or one per axis
//   scenario.name = conformal_perturbation
//   form.degree = 2
//
// Keys are dotted identifiers, values run to the end of the line (or to a
// `#`), lists are comma separated. Every key may appear at most once and
// unknown keys are rejected.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "formflow/errors.hpp"
#include "formflow/grid.hpp"

namespace formflow {

struct ExperimentConfig {
  // grid
  int dim = 0;
  std::vector<int> points;     // one entry per axis after resolution
  std::vector<double> period;  // one entry per axis after resolution

  // scenario
  std::string scenario;
  double epsilon = 0.05;
  std::vector<int> modes;        // conformal: per-axis wave numbers; random: band limit
  std::vector<double> diagonal;  // anisotropic_constant

  // initial form
  int form_degree = -1;
  std::string form_kind = "fourier_mode";
  double form_amplitude = 1.0;
  std::vector<int> form_modes;
  int form_component = 0;

  // run
  double t_end = 0.0;
  double cfl = 0.2;
  long max_steps = 100000;
  int record_every = 1;
  std::uint64_t seed = 0;
  double spd_floor = 1e-8;

  // output
  std::string out_dir = ".";
  std::string prefix = "formflow";

  // tolerance
  double monotone_abs = 1e-8;
  double monotone_rel = 1e-6;

  GridSpec grid() const { return GridSpec::make(points, period); }

  bool operator==(const ExperimentConfig&) const = default;
};

inline const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {"flat_torus", "conformal_perturbation",
                                                 "anisotropic_constant", "random_smooth_perturbation"};
  return names;
}

inline const std::vector<std::string>& form_kinds() {
  static const std::vector<std::string> kinds = {"fourier_mode", "closed", "random"};
  return kinds;
}

namespace detail {

struct RawValue {
  std::string text;
  int line = 0;
  int column = 0;  // 1-based column of the first value character
};

inline bool is_key_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '.';
}

inline std::map<std::string, RawValue> tokenize_config(std::string_view text) {
  std::map<std::string, RawValue> out;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, eol - pos);
    ++line_no;
    pos = eol + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

    std::size_t i = 0;
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (i == line.size()) {
      if (eol == text.size()) break;
      continue;
    }
    const std::size_t key_begin = i;
    while (i < line.size() && is_key_char(line[i])) ++i;
    if (i == key_begin) {
      throw ConfigError("line " + std::to_string(line_no) + ", column " + std::to_string(i + 1) +
                            ": expected a key",
                        line_no, static_cast<int>(i + 1));
    }
    const std::string key(line.substr(key_begin, i - key_begin));
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (i == line.size() || line[i] != '=') {
      throw ConfigError("line " + std::to_string(line_no) + ", column " + std::to_string(i + 1) +
                            ": expected '=' after key '" + key + "'",
                        line_no, static_cast<int>(i + 1), key);
    }
    ++i;
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t end = line.size();
    while (end > i && (line[end - 1] == ' ' || line[end - 1] == '\t')) --end;
    if (end == i) {
      throw ConfigError("line " + std::to_string(line_no) + ", column " + std::to_string(i + 1) +
                            ": missing value for '" + key + "'",
                        line_no, static_cast<int>(i + 1), key);
    }
    RawValue v{std::string(line.substr(i, end - i)), line_no, static_cast<int>(i + 1)};
    if (out.count(key)) {
      throw ConfigError("line " + std::to_string(line_no) + ", column " + std::to_string(key_begin + 1) +
                            ": duplicate key '" + key + "'",
                        line_no, static_cast<int>(key_begin + 1), key);
    }
    out.emplace(key, std::move(v));
    if (eol == text.size()) break;
  }
  return out;
}

[[noreturn]] inline void value_error(const std::string& key, const RawValue& v, const std::string& msg) {
  throw ConfigError("line " + std::to_string(v.line) + ", column " + std::to_string(v.column) + ": " + key +
                        ": " + msg,
                    v.line, v.column, key);
}

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    parts.push_back(b == std::string::npos ? std::string() : item.substr(b, e - b + 1));
  }
  return parts;
}

template <class T>
T parse_number(const std::string& key, const RawValue& v, const std::string& text) {
  T out{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && text.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) value_error(key, v, "cannot parse '" + text + "' as a number");
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(out)) value_error(key, v, "value must be finite");
  }
  return out;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const RawValue& v) {
  std::vector<T> out;
  for (const auto& part : split_list(v.text)) {
    if (part.empty()) value_error(key, v, "empty list element");
    out.push_back(parse_number<T>(key, v, part));
  }
  return out;
}

}  // namespace detail

/// Parses and validates configuration text. Defaults are filled in for every
/// optional key.
inline ExperimentConfig parse_config(std::string_view text) {
  using detail::RawValue;
  auto raw = detail::tokenize_config(text);
  ExperimentConfig cfg;

  auto take = [&](const std::string& key) -> const RawValue* {
    auto it = raw.find(key);
    return it == raw.end() ? nullptr : &it->second;
  };
  auto require = [&](const std::string& key) -> const RawValue& {
    const RawValue* v = take(key);
    if (!v) throw ConfigError("missing required key '" + key + "'", 0, 0, key);
    return *v;
  };
  auto as_int = [&](const std::string& key, const RawValue& v) {
    return detail::parse_number<long>(key, v, v.text);
  };
  auto as_real = [&](const std::string& key, const RawValue& v) {
    return detail::parse_number<double>(key, v, v.text);
  };

  static const std::vector<std::string> known = {
      "grid.dim",       "grid.points",       "grid.period",      "scenario.name",  "scenario.epsilon",
      "scenario.modes", "scenario.diagonal", "form.degree",      "form.kind",      "form.amplitude",
      "form.modes",     "form.component",    "run.t_end",        "run.cfl",        "run.max_steps",
      "run.record_every", "run.seed",        "run.spd_floor",    "output.dir",     "output.prefix",
      "tolerance.monotone_abs", "tolerance.monotone_rel"};
  for (const auto& [key, v] : raw) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("line " + std::to_string(v.line) + ", column 1: unknown key '" + key + "'", v.line, 1,
                        key);
    }
  }

  {
    const RawValue& v = require("grid.dim");
    const long d = as_int("grid.dim", v);
    if (d < 2 || d > kMaxDim) detail::value_error("grid.dim", v, "dimension must be 2, 3 or 4");
    cfg.dim = static_cast<int>(d);
  }
  {
    const RawValue& v = require("grid.points");
    auto pts = detail::parse_list<int>("grid.points", v);
    if (pts.size() == 1) pts.assign(cfg.dim, pts[0]);
    if (static_cast<int>(pts.size()) != cfg.dim) detail::value_error("grid.points", v, "expected 1 or dim entries");
    for (int p : pts)
      if (p < kMinPointsPerAxis) detail::value_error("grid.points", v, "each axis needs at least 8 points");
    cfg.points = pts;
  }
  cfg.period.assign(cfg.dim, 1.0);
  if (const RawValue* v = take("grid.period")) {
    auto per = detail::parse_list<double>("grid.period", *v);
    if (per.size() == 1) per.assign(cfg.dim, per[0]);
    if (static_cast<int>(per.size()) != cfg.dim) detail::value_error("grid.period", *v, "expected 1 or dim entries");
    for (double L : per)
      if (!(L > 0.0)) detail::value_error("grid.period", *v, "periods must be positive");
    cfg.period = per;
  }

  {
    const RawValue& v = require("scenario.name");
    const auto& names = scenario_names();
    if (std::find(names.begin(), names.end(), v.text) == names.end()) {
      detail::value_error("scenario.name", v, "unknown scenario '" + v.text + "'");
    }
    cfg.scenario = v.text;
  }
  if (const RawValue* v = take("scenario.epsilon")) cfg.epsilon = as_real("scenario.epsilon", *v);
  if (const RawValue* v = take("scenario.modes")) cfg.modes = detail::parse_list<int>("scenario.modes", *v);
  if (const RawValue* v = take("scenario.diagonal")) {
    cfg.diagonal = detail::parse_list<double>("scenario.diagonal", *v);
  }

  {
    const RawValue& v = require("form.degree");
    const long p = as_int("form.degree", v);
    if (p < 0 || p > cfg.dim) {
      throw ConfigError("line " + std::to_string(v.line) + ", column " + std::to_string(v.column) +
                            ": form_degree " + std::to_string(p) + " must lie in [0, grid.dim = " +
                            std::to_string(cfg.dim) + "]",
                        v.line, v.column, "form_degree");
    }
    cfg.form_degree = static_cast<int>(p);
  }
  if (const RawValue* v = take("form.kind")) {
    const auto& kinds = form_kinds();
    if (std::find(kinds.begin(), kinds.end(), v->text) == kinds.end()) {
      detail::value_error("form.kind", *v, "unknown form kind '" + v->text + "'");
    }
    cfg.form_kind = v->text;
  }
  if (const RawValue* v = take("form.amplitude")) cfg.form_amplitude = as_real("form.amplitude", *v);
  if (const RawValue* v = take("form.modes")) cfg.form_modes = detail::parse_list<int>("form.modes", *v);
  if (const RawValue* v = take("form.component")) {
    cfg.form_component = static_cast<int>(as_int("form.component", *v));
  }

  if (const RawValue* v = take("run.t_end")) {
    cfg.t_end = as_real("run.t_end", *v);
    if (cfg.t_end < 0.0) detail::value_error("run.t_end", *v, "must be nonnegative");
  }
  if (const RawValue* v = take("run.cfl")) {
    cfg.cfl = as_real("run.cfl", *v);
    if (!(cfg.cfl > 0.0) || cfg.cfl > 1.0) detail::value_error("run.cfl", *v, "must lie in (0, 1]");
  }
  if (const RawValue* v = take("run.max_steps")) {
    cfg.max_steps = as_int("run.max_steps", *v);
    if (cfg.max_steps < 0) detail::value_error("run.max_steps", *v, "must be nonnegative");
  }
  if (const RawValue* v = take("run.record_every")) {
    const long r = as_int("run.record_every", *v);
    if (r < 1) detail::value_error("run.record_every", *v, "must be at least 1");
    cfg.record_every = static_cast<int>(r);
  }
  if (const RawValue* v = take("run.seed")) cfg.seed = detail::parse_number<std::uint64_t>("run.seed", *v, v->text);
  if (const RawValue* v = take("run.spd_floor")) {
    cfg.spd_floor = as_real("run.spd_floor", *v);
    if (cfg.spd_floor < 0.0) detail::value_error("run.spd_floor", *v, "must be nonnegative");
  }
  if (const RawValue* v = take("output.dir")) cfg.out_dir = v->text;
  if (const RawValue* v = take("output.prefix")) {
    if (v->text.find_first_of("/\\") != std::string::npos) {
      detail::value_error("output.prefix", *v, "must not contain path separators");
    }
    cfg.prefix = v->text;
  }
  if (const RawValue* v = take("tolerance.monotone_abs")) {
    cfg.monotone_abs = as_real("tolerance.monotone_abs", *v);
    if (cfg.monotone_abs < 0.0) detail::value_error("tolerance.monotone_abs", *v, "must be nonnegative");
  }
  if (const RawValue* v = take("tolerance.monotone_rel")) {
    cfg.monotone_rel = as_real("tolerance.monotone_rel", *v);
    if (cfg.monotone_rel < 0.0) detail::value_error("tolerance.monotone_rel", *v, "must be nonnegative");
  }

  // Scenario- and form-specific checks that need the whole config.
  const auto field_error = [&](const std::string& field, const std::string& msg) -> ConfigError {
    if (const RawValue* v = take(field)) {
      return ConfigError("line " + std::to_string(v->line) + ", column " + std::to_string(v->column) + ": " +
                             field + ": " + msg,
                         v->line, v->column, field);
    }
    return ConfigError(field + ": " + msg, 0, 0, field);
  };
  if (cfg.scenario == "conformal_perturbation") {
    if (std::abs(cfg.epsilon) > 0.3) throw field_error("scenario.epsilon", "conformal amplitude must satisfy |eps| <= 0.3");
    if (cfg.modes.empty()) cfg.modes.assign(cfg.dim, 1);
    if (static_cast<int>(cfg.modes.size()) != cfg.dim) throw field_error("scenario.modes", "expected dim entries");
  } else if (cfg.scenario == "random_smooth_perturbation") {
    if (cfg.epsilon < 0.0 || cfg.epsilon > 0.2) throw field_error("scenario.epsilon", "amplitude must lie in [0, 0.2]");
    if (cfg.modes.empty()) cfg.modes = {2};
    if (cfg.modes.size() != 1 || cfg.modes[0] < 1 || cfg.modes[0] > 3) {
      throw field_error("scenario.modes", "expected a single band limit in [1, 3]");
    }
  } else if (cfg.scenario == "anisotropic_constant") {
    if (static_cast<int>(cfg.diagonal.size()) != cfg.dim) throw field_error("scenario.diagonal", "expected dim entries");
    for (double a : cfg.diagonal)
      if (!(a > 0.0)) throw field_error("scenario.diagonal", "entries must be positive");
  }
  if (cfg.form_modes.empty()) {
    cfg.form_modes.assign(cfg.dim, 0);
    cfg.form_modes[0] = 1;
  }
  if (static_cast<int>(cfg.form_modes.size()) != cfg.dim) throw field_error("form.modes", "expected dim entries");
  if (cfg.form_kind == "fourier_mode") {
    const long count = [&] {
      long c = 1;
      for (int i = 0; i < cfg.form_degree; ++i) c = c * (cfg.dim - i) / (i + 1);
      return c;
    }();
    if (cfg.form_component < 0 || cfg.form_component >= count) {
      throw field_error("form.component", "index out of range for the chosen degree");
    }
  }
  return cfg;
}

inline ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace formflow
