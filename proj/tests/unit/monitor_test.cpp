#include <gtest/gtest.h>

#include "formflow/monitor.hpp"
#include "fixtures.hpp"

using namespace formflow;
using fixtures::kTwoPi;

namespace {

TimeSeriesRecord rec(double t, double l2) {
  TimeSeriesRecord r;
  r.t = t;
  r.l2_norm = r.linf_norm = r.weighted_l2 = r.weighted_linf = l2;
  return r;
}

PForm coordinate_one_form(const GridSpec& grid, int axis) {
  PForm xi(grid, 1);
  auto c = xi.component(axis);
  std::fill(c.begin(), c.end(), 1.0);
  return xi;
}

}  // namespace

TEST(Norms, CoordinateFormOnUnitTorus) {
  const GridSpec grid = GridSpec::cube(3, 8);
  const MetricState flat = make_metric_state(identity_metric(grid));
  const PForm dx = coordinate_one_form(grid, 0);
  EXPECT_NEAR(l2_norm(dx, flat), 1.0, 1e-14);
  EXPECT_NEAR(linf_norm(dx, flat), 1.0, 1e-14);
  EXPECT_EQ(l2_norm(PForm(grid, 2), flat), 0.0);
  EXPECT_EQ(linf_norm(PForm(grid, 2), flat), 0.0);
}

TEST(Norms, HomogeneousOfDegreeOne) {
  const GridSpec grid = GridSpec::cube(2, 12);
  const MetricState ms = fixtures::state(fixtures::generic(2, 0.3), grid);
  PForm xi(grid, 1);
  for (std::size_t node = 0; node < xi.nodes(); ++node) {
    const Point x = grid.position(node);
    xi.at(0, node) = std::sin(kTwoPi * x[1]);
    xi.at(1, node) = 0.5 + std::cos(kTwoPi * x[0]);
  }
  PForm scaled = xi;
  for (double& v : scaled.data) v *= -3.0;
  EXPECT_NEAR(l2_norm(scaled, ms), 3.0 * l2_norm(xi, ms), 1e-12);
  EXPECT_NEAR(linf_norm(scaled, ms), 3.0 * linf_norm(xi, ms), 1e-12);
  EXPECT_LE(l2_norm(xi, ms), linf_norm(xi, ms) * std::sqrt(integrate_scalar(ScalarField(grid, 1.0), ms.sqrt_det_g)) + 1e-12);
}

TEST(Norms, ConformalInvarianceOfOneFormsInTwoDimensions) {
  const GridSpec grid = GridSpec::cube(2, 16);
  const MetricState flat = make_metric_state(identity_metric(grid));
  const MetricState conf = fixtures::state(fixtures::conformal(2, 0.2), grid);
  PForm xi(grid, 1);
  for (std::size_t node = 0; node < xi.nodes(); ++node) xi.at(0, node) = std::cos(kTwoPi * grid.position(node)[1]);
  EXPECT_NEAR(l2_norm(xi, conf), l2_norm(xi, flat), 1e-12);
}

TEST(Eq7, CurvatureTermVanishesBelowDegreeTwoAndOnFlatMetric) {
  const GridSpec grid = GridSpec::cube(3, 8);
  const MetricState ms = fixtures::state(fixtures::conformal(3, 0.1), grid);
  const CurvatureBundle cb = compute_curvature(ms);
  PForm xi(grid, 1);
  for (std::size_t node = 0; node < xi.nodes(); ++node) xi.at(2, node) = std::sin(kTwoPi * grid.position(node)[0]);
  EXPECT_EQ(eq7_rhs(xi, ms, cb, true).values, eq7_rhs(xi, ms, cb, false).values);
  EXPECT_EQ(form_curvature_term(xi, ms, cb).sup_abs(), 0.0);

  const MetricState flat = make_metric_state(identity_metric(grid));
  PForm two(grid, 2);
  for (std::size_t node = 0; node < two.nodes(); ++node) two.at(0, node) = std::sin(kTwoPi * grid.position(node)[2]);
  EXPECT_EQ(form_curvature_term(two, flat, compute_curvature(flat)).sup_abs(), 0.0);
}

TEST(Eq7, FlatIdentityAtSpectralRate) {
  // |xi|^2 = sin^2(2 pi x): d/dt |xi|^2 = -2(2pi)^2 sin^2 = Delta|xi|^2 - 2|nabla xi|^2.
  const GridSpec grid = GridSpec::cube(2, 32);
  const MetricState flat = make_metric_state(identity_metric(grid));
  PForm xi(grid, 1);
  for (std::size_t node = 0; node < xi.nodes(); ++node) xi.at(1, node) = std::sin(kTwoPi * grid.position(node)[0]);
  const ScalarField rhs = eq7_rhs(xi, flat, compute_curvature(flat));
  double e = 0.0;
  for (std::size_t node = 0; node < xi.nodes(); ++node) {
    const double s = xi.at(1, node);
    e = std::max(e, std::abs(rhs[node] + 2.0 * kTwoPi * kTwoPi * s * s));
  }
  EXPECT_LT(e, 0.5);
}

TEST(Eq7, ResidualRequiresEqualPositiveSteps) {
  const GridSpec grid = GridSpec::cube(2, 8);
  const ScalarField a(grid, 1.0), b(grid, 3.0), r(grid, 1.0);
  EXPECT_DOUBLE_EQ(eq7_residual({&a, &b, &r, 0.5, 0.5}), 1.0);
  EXPECT_THROW(eq7_residual({&a, &b, &r, 0.5, 0.25}), ArgumentError);
  EXPECT_THROW(eq7_residual({&a, &b, &r, 0.0, 0.0}), ArgumentError);
}

TEST(CheckMonotone, Basics) {
  EXPECT_THROW(check_monotone({}, Claim::thm1_l2), ArgumentError);

  const auto single = check_monotone({rec(0, 1)}, Claim::thm1_l2);
  EXPECT_TRUE(single.vacuous);
  EXPECT_TRUE(single.holds);

  const auto constant = check_monotone({rec(0, 2), rec(1, 2), rec(2, 2)}, Claim::thm1_l2);
  EXPECT_TRUE(constant.holds);
  EXPECT_FALSE(constant.vacuous);
  EXPECT_EQ(constant.worst_violation, 0.0);

  const auto dec = check_monotone({rec(0, 3), rec(1, 2), rec(2, 1)}, Claim::thm3_linf);
  EXPECT_TRUE(dec.holds);

  // increase measured against the running minimum, not the previous sample
  const auto bumpy = check_monotone({rec(0, 3), rec(1, 1), rec(2, 2.5), rec(3, 2)}, Claim::thm1_linf);
  EXPECT_FALSE(bumpy.holds);
  EXPECT_DOUBLE_EQ(bumpy.worst_violation, 1.5);
  EXPECT_EQ(bumpy.worst_s, 1.0);
  EXPECT_EQ(bumpy.worst_t, 2.0);

  const auto tiny = check_monotone({rec(0, 1), rec(1, 1 + 5e-7)}, Claim::thm1_l2);
  EXPECT_TRUE(tiny.holds);
  EXPECT_NEAR(tiny.tolerance, 1e-8 + 1e-6, 1e-15);
}

TEST(Recorder, RecordCountsAndFlatHeatDecrease) {
  const GridSpec grid = GridSpec::cube(2, 12);
  PForm xi(grid, 1);
  for (std::size_t node = 0; node < xi.nodes(); ++node) {
    const Point x = grid.position(node);
    xi.at(0, node) = std::sin(kTwoPi * x[1]) + 0.3 * std::cos(2 * kTwoPi * x[0]);
  }
  StepControl ctrl;
  ctrl.t_end = 0.02;
  const Trajectory full = record_flow(make_flow_state(identity_metric(grid), xi), ctrl, 1);
  const long steps = full.outcome.steps;
  ASSERT_GT(steps, 6);
  EXPECT_EQ(full.records.size(), static_cast<std::size_t>(steps + 1));
  const Trajectory sparse = record_flow(make_flow_state(identity_metric(grid), xi), ctrl, 5);
  EXPECT_EQ(sparse.records.size(), static_cast<std::size_t>(steps / 5 + 1));

  for (Claim c : {Claim::thm1_l2, Claim::thm1_linf, Claim::thm3_l2, Claim::thm3_linf}) {
    EXPECT_TRUE(check_monotone(full.records, c).holds) << claim_name(c);
  }
  EXPECT_TRUE(std::isnan(full.records.front().eq7_residual_sup));
  EXPECT_TRUE(std::isnan(full.records.back().eq7_residual_sup));
  int with_residual = 0;
  for (const auto& r : full.records) with_residual += std::isfinite(r.eq7_residual_sup);
  EXPECT_GT(with_residual, 0);
}

TEST(Recorder, WeightedNormsForOneFormsAndAtTimeZero) {
  const GridSpec grid = GridSpec::cube(3, 8);
  PForm xi(grid, 1);
  for (std::size_t node = 0; node < xi.nodes(); ++node) xi.at(1, node) = std::sin(kTwoPi * grid.position(node)[2]);
  StepControl ctrl;
  ctrl.t_end = 1e-3;
  const Trajectory tr = record_flow(make_flow_state(fixtures::conformal(3, 0.1).sample(grid), xi), ctrl);
  ASSERT_FALSE(tr.outcome.singular);
  EXPECT_EQ(tr.records.front().weighted_l2, tr.records.front().l2_norm);
  double k = tr.records.front().k_step;
  for (const auto& r : tr.records) {
    EXPECT_EQ(r.weighted_l2, r.l2_norm);
    EXPECT_EQ(r.weighted_linf, r.linf_norm);
    k = std::min(k, r.k_step);
  }
  for (const auto& r : tr.records) EXPECT_EQ(r.k_used, k);
  const auto a = check_monotone(tr.records, Claim::thm1_l2);
  const auto b = check_monotone(tr.records, Claim::thm3_l2);
  EXPECT_EQ(a.holds, b.holds);
  EXPECT_EQ(a.worst_violation, b.worst_violation);
}

TEST(HypothesisIntervals, SplitsOnFailure) {
  std::vector<TimeSeriesRecord> s(5);
  const double L[] = {1, 1, -1, 1, 1};
  for (int i = 0; i < 5; ++i) {
    s[i].t = i;
    s[i].L_val = L[i];
    s[i].theorem1_margin = 0.5;
  }
  s[4].theorem1_margin = kNaN;
  const auto iv = thm1_hypothesis_intervals(s);
  ASSERT_EQ(iv.size(), 2u);
  EXPECT_EQ(iv[0], std::make_pair(0.0, 1.0));
  EXPECT_EQ(iv[1], std::make_pair(3.0, 3.0));
}

TEST(Csv, HeaderAndRowFormatting) {
  EXPECT_EQ(format_real(kNaN), "nan");
  EXPECT_EQ(format_real(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_real(0.1), "0.10000000000000001");
  EXPECT_EQ(std::stod(format_real(1.0 / 3.0)), 1.0 / 3.0);
  TimeSeriesRecord r = rec(0.5, 2.0);
  const std::string row = csv_row(r);
  const auto commas = [](std::string_view s) { return std::count(s.begin(), s.end(), ','); };
  EXPECT_EQ(commas(row), commas(kCsvHeader));
  EXPECT_EQ(row.rfind("0.5,2,2,2,2,", 0), 0u);
  EXPECT_NE(row.find(",nan,"), std::string::npos);
}
