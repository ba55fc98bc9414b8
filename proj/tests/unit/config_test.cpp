#include <gtest/gtest.h>

#include "formflow/config.hpp"
#include "formflow/scenarios.hpp"

using namespace formflow;

namespace {

constexpr const char* kMinimal =
    "grid.dim = 3\n"
    "grid.points = 8\n"
    "scenario.name = flat_torus\n"
    "form.degree = 1\n";

ConfigError parse_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e;
  }
  ADD_FAILURE() << "no ConfigError for:\n" << text;
  return ConfigError("none");
}

}  // namespace

TEST(Config, MinimalGetsDefaults) {
  const ExperimentConfig cfg = parse_config(kMinimal);
  EXPECT_EQ(cfg.dim, 3);
  EXPECT_EQ(cfg.points, (std::vector<int>{8, 8, 8}));
  EXPECT_EQ(cfg.period, (std::vector<double>{1, 1, 1}));
  EXPECT_EQ(cfg.form_kind, "fourier_mode");
  EXPECT_EQ(cfg.form_modes, (std::vector<int>{1, 0, 0}));
  EXPECT_EQ(cfg.t_end, 0.0);
  EXPECT_EQ(cfg.cfl, 0.2);
  EXPECT_EQ(cfg.record_every, 1);
  EXPECT_EQ(cfg.seed, 0u);
  EXPECT_EQ(cfg.prefix, "formflow");
}

TEST(Config, CommentsWhitespaceAndDeterminism) {
  const std::string text =
      "# comment line\n\n"
      "  grid.dim=2   # trailing\n"
      "grid.points = 16, 12\n"
      "grid.period = 2.0\n"
      "scenario.name = conformal_perturbation\n"
      "scenario.epsilon = -0.1\n"
      "form.degree = 2\n"
      "form.kind = closed\n"
      "run.seed = 18446744073709551615\n"
      "output.dir = out dir\n";
  const ExperimentConfig a = parse_config(text), b = parse_config(text);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.points, (std::vector<int>{16, 12}));
  EXPECT_EQ(a.period, (std::vector<double>{2.0, 2.0}));
  EXPECT_EQ(a.modes, (std::vector<int>{1, 1}));
  EXPECT_EQ(a.epsilon, -0.1);
  EXPECT_EQ(a.seed, 18446744073709551615ull);
  EXPECT_EQ(a.out_dir, "out dir");
}

TEST(Config, ErrorsCarryFieldAndPosition) {
  const ConfigError degree = parse_error(
      "grid.dim = 2\ngrid.points = 8\nscenario.name = flat_torus\nform.degree = 3\n");
  EXPECT_EQ(degree.field(), "form_degree");
  EXPECT_EQ(degree.line(), 4);

  const ConfigError unknown = parse_error(std::string(kMinimal) + "run.speed = 3\n");
  EXPECT_EQ(unknown.field(), "run.speed");
  EXPECT_EQ(unknown.line(), 5);

  const ConfigError dup = parse_error(std::string(kMinimal) + "grid.dim = 2\n");
  EXPECT_EQ(dup.line(), 5);
  EXPECT_NE(std::string(dup.what()).find("duplicate"), std::string::npos);

  const ConfigError missing = parse_error("grid.dim = 2\ngrid.points = 8\nform.degree = 1\n");
  EXPECT_EQ(missing.field(), "scenario.name");

  const ConfigError syntax = parse_error("grid.dim 2\n");
  EXPECT_EQ(syntax.line(), 1);
  EXPECT_GT(syntax.column(), 0);

  const ConfigError number = parse_error(
      "grid.dim = 2\ngrid.points = 8\nscenario.name = flat_torus\nform.degree = 1\nrun.cfl = fast\n");
  EXPECT_EQ(number.field(), "run.cfl");
  EXPECT_EQ(number.line(), 5);

  const ConfigError eps = parse_error(
      "grid.dim = 2\ngrid.points = 8\nscenario.name = conformal_perturbation\nscenario.epsilon = 0.5\n"
      "form.degree = 1\n");
  EXPECT_EQ(eps.field(), "scenario.epsilon");
  EXPECT_EQ(eps.line(), 4);

  EXPECT_EQ(parse_error("grid.dim = 5\ngrid.points = 8\nscenario.name = flat_torus\nform.degree = 1\n").field(),
            "grid.dim");
  EXPECT_EQ(parse_error("grid.dim = 2\ngrid.points = 4\nscenario.name = flat_torus\nform.degree = 1\n").field(),
            "grid.points");
  EXPECT_EQ(parse_error("grid.dim = 2\ngrid.points = 8\nscenario.name = sphere\nform.degree = 1\n").field(),
            "scenario.name");
  EXPECT_EQ(parse_error("grid.dim = 2\ngrid.points = 8\nscenario.name = anisotropic_constant\n"
                        "scenario.diagonal = 1, -2\nform.degree = 1\n")
                .field(),
            "scenario.diagonal");
  EXPECT_EQ(parse_error(std::string(kMinimal) + "form.component = 3\n").field(), "form.component");
  EXPECT_EQ(parse_error(std::string(kMinimal) + "output.prefix = a/b\n").field(), "output.prefix");
}

TEST(Config, MissingFileIsIoError) {
  EXPECT_THROW(load_config_file("/nonexistent/formflow.cfg"), IoError);
}

TEST(Scenarios, CatalogMetricsArePositiveDefinite) {
  for (const char* name : {"flat_torus", "conformal_perturbation", "random_smooth_perturbation"}) {
    for (int dim : {2, 3}) {
      ExperimentConfig cfg = parse_config("grid.dim = " + std::to_string(dim) +
                                          "\ngrid.points = 8\nform.degree = 1\nscenario.name = " + name +
                                          (std::string(name) == "flat_torus" ? "" : "\nscenario.epsilon = 0.2") +
                                          "\nrun.seed = 7\n");
      const MetricState ms = make_metric_state(scenario_metric(cfg));
      EXPECT_GT(ms.min_eig_g, 0.5) << name << " dim " << dim;
    }
  }
  ExperimentConfig aniso = parse_config(
      "grid.dim = 2\ngrid.points = 8\nscenario.name = anisotropic_constant\nscenario.diagonal = 2, 0.5\n"
      "form.degree = 1\n");
  const MetricState ms = make_metric_state(scenario_metric(aniso));
  EXPECT_DOUBLE_EQ(ms.min_eig_g, 0.5);
  EXPECT_EQ(scenario_catalog().size(), scenario_names().size());
}

TEST(Scenarios, RandomPerturbationIsSeededAndBounded) {
  const std::string base =
      "grid.dim = 2\ngrid.points = 10\nscenario.name = random_smooth_perturbation\nscenario.epsilon = 0.2\n"
      "form.degree = 1\nform.kind = random\nrun.seed = ";
  const ExperimentConfig a = parse_config(base + "1\n"), b = parse_config(base + "2\n");
  EXPECT_EQ(scenario_metric(a).data, scenario_metric(a).data);
  EXPECT_NE(scenario_metric(a).data, scenario_metric(b).data);
  EXPECT_EQ(initial_form(a).data, initial_form(a).data);
  const TensorField g = scenario_metric(a);
  for (std::size_t node = 0; node < g.nodes(); ++node) {
    EXPECT_LE(std::abs(g.at(0, node) - 1.0), 0.2 + 1e-15);
    EXPECT_LE(std::abs(g.at(1, node)), 0.2 + 1e-15);
    EXPECT_EQ(g.at(1, node), g.at(2, node));
  }
}

TEST(Scenarios, InitialForms) {
  ExperimentConfig cfg = parse_config(
      "grid.dim = 3\ngrid.points = 12\nscenario.name = flat_torus\nform.degree = 2\nform.kind = closed\n"
      "form.modes = 1, 2, 0\nform.amplitude = 0.5\n");
  const PForm closed = initial_form(cfg);
  EXPECT_GT(closed.sup_abs(), 0.1);
  EXPECT_LT(exterior_derivative(closed).sup_abs(), 1e-10);

  cfg.form_kind = "fourier_mode";
  cfg.form_component = 2;
  const PForm mode = initial_form(cfg);
  for (int c = 0; c < mode.component_count(); ++c) {
    double sup = 0.0;
    for (double v : mode.component(c)) sup = std::max(sup, std::abs(v));
    if (c == 2) EXPECT_NEAR(sup, 0.5, 1e-12);
    else EXPECT_EQ(sup, 0.0);
  }

  cfg.form_degree = 0;
  cfg.form_kind = "closed";
  const PForm constant = initial_form(cfg);
  EXPECT_EQ(constant.degree, 0);
  for (double v : constant.data) EXPECT_EQ(v, 0.5);
}
