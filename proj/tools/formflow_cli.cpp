#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "formflow/experiment.hpp"

namespace {

int report_config_error(const formflow::ConfigError& e) {
  std::fprintf(stderr, "config error: %s\n", e.what());
  return formflow::kExitConfig;
}

formflow::ExperimentConfig load(const std::string& path, const std::optional<std::uint64_t>& seed,
                                const std::optional<std::string>& out_dir) {
  formflow::ExperimentConfig cfg = formflow::load_config_file(path);
  if (seed) cfg.seed = *seed;
  if (out_dir) cfg.out_dir = *out_dir;
  return cfg;
}

int cmd_run(const std::string& path, const std::optional<std::uint64_t>& seed,
            const std::optional<std::string>& out_dir, bool quiet) {
  formflow::ExperimentConfig cfg;
  try {
    cfg = load(path, seed, out_dir);
  } catch (const formflow::ConfigError& e) {
    return report_config_error(e);
  } catch (const formflow::IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return formflow::kExitIo;
  }

  formflow::ExperimentResult res;
  try {
    res = formflow::run_experiment(cfg);
  } catch (const formflow::DegenerateMetricError& e) {
    std::fprintf(stderr, "config error: initial metric is not positive definite: %s\n", e.what());
    return formflow::kExitConfig;
  }

  formflow::OutputPaths paths;
  try {
    paths = formflow::emit_outputs(res, cfg);
  } catch (const formflow::IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return formflow::kExitIo;
  }

  if (!quiet) {
    std::printf("steps %ld, t_final %.6g, records %zu\n", res.steps, res.t_final, res.records.size());
    for (const auto& v : res.verdicts) {
      std::printf("  %-10s %s  worst %.3e  tol %.3e\n", std::string(formflow::claim_name(v.claim)).c_str(),
                  v.vacuous ? "vacuous" : (v.holds ? "holds" : "VIOLATED"), v.worst_violation, v.tolerance);
    }
    std::printf("wrote %s\nwrote %s\n", paths.csv.string().c_str(), paths.summary.string().c_str());
  }
  if (res.singular) {
    std::fprintf(stderr, "singularity: %s\n", res.singular_message.c_str());
    return formflow::kExitSingular;
  }
  return formflow::kExitOk;
}

int cmd_validate(const std::string& path, const std::optional<std::uint64_t>& seed,
                 const std::optional<std::string>& out_dir, bool quiet) {
  try {
    const formflow::ExperimentConfig cfg = load(path, seed, out_dir);
    formflow::initial_state(cfg);
    if (!quiet) std::cout << formflow::config_to_json(cfg).dump(2) << "\n";
    return formflow::kExitOk;
  } catch (const formflow::ConfigError& e) {
    return report_config_error(e);
  } catch (const formflow::DegenerateMetricError& e) {
    std::fprintf(stderr, "config error: initial metric is not positive definite: %s\n", e.what());
    return formflow::kExitConfig;
  } catch (const formflow::IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return formflow::kExitIo;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coupled Ricci flow / Hodge heat flow experiments on periodic grids"};
  app.set_version_flag("--version", std::string(formflow::kVersion));
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  bool quiet = false;
  app.add_option("--seed", seed, "Override run.seed");
  app.add_option("--out-dir", out_dir, "Override output.dir");
  app.add_flag("--quiet,-q", quiet, "Suppress progress output");

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run an experiment and write CSV + JSON artifacts");
  run->add_option("config", config_path, "Config file")->required();
  auto* validate = app.add_subcommand("validate", "Parse and check a config, print it with defaults resolved");
  validate->add_option("config", config_path, "Config file")->required();
  auto* scenarios = app.add_subcommand("scenarios", "List the scenario catalog");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : formflow::kExitConfig;
  }

  if (*scenarios) {
    for (const auto& s : formflow::scenario_catalog()) {
      std::printf("%-28s %s\n%-28s range: %s\n", s.name.c_str(), s.summary.c_str(), "", s.parameter_range.c_str());
    }
    return formflow::kExitOk;
  }
  if (*validate) return cmd_validate(config_path, seed, out_dir, quiet);
  return cmd_run(config_path, seed, out_dir, quiet);
}
