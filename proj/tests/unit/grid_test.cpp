#include <gtest/gtest.h>

#include <random>

#include "formflow/grid.hpp"
#include "fixtures.hpp"

using namespace formflow;
using fixtures::kTwoPi;

TEST(GridSpec, RejectsBadShapes) {
  EXPECT_THROW(GridSpec::make({16}, {1.0}), ArgumentError);
  EXPECT_THROW(GridSpec::make({16, 16, 16, 16, 16}, {1, 1, 1, 1, 1}), ArgumentError);
  EXPECT_THROW(GridSpec::make({16, 7}, {1.0, 1.0}), ArgumentError);
  EXPECT_THROW(GridSpec::make({16, 16}, {1.0, 0.0}), ArgumentError);
  EXPECT_THROW(GridSpec::make({16, 16}, {1.0}), ArgumentError);
  const GridSpec g = GridSpec::make({8, 12, 10}, {1.0, 2.0, 0.5});
  EXPECT_EQ(g.node_count(), 960u);
  EXPECT_DOUBLE_EQ(g.spacing(1), 2.0 / 12);
}

TEST(GridSpec, NodeOrderIsAxisZeroFastest) {
  const GridSpec g = GridSpec::make({8, 9}, {1.0, 1.0});
  const auto c = g.coords(8 + 3);
  EXPECT_EQ(c[0], 3);
  EXPECT_EQ(c[1], 1);
  EXPECT_EQ(g.stride(1), 8u);
}

TEST(PartialDerivative, ConstantGivesZero) {
  const GridSpec g = GridSpec::cube(3, 8);
  const ScalarField f(g, 2.5);
  for (int a = 0; a < 3; ++a) EXPECT_EQ(partial_derivative(f, a).sup_abs(), 0.0);
}

TEST(PartialDerivative, AxisOutOfRangeThrows) {
  const GridSpec g = GridSpec::cube(2, 8);
  const ScalarField f(g, 1.0);
  EXPECT_THROW(partial_derivative(f, 2), ArgumentError);
  EXPECT_THROW(second_partial(f, 0, 3), ArgumentError);
}

TEST(PartialDerivative, IndependentAxisGivesZero) {
  const GridSpec g = GridSpec::cube(3, 12);
  const auto f = ScalarField::from_function(g, [](const Point& x) { return std::sin(kTwoPi * x[0]); });
  EXPECT_EQ(partial_derivative(f, 2).sup_abs(), 0.0);
}

double sine_derivative_error(int N, double L) {
  const GridSpec g = GridSpec::make({N, 8}, {L, 1.0});
  const double k = kTwoPi / L;
  const auto f = ScalarField::from_function(g, [&](const Point& x) { return std::sin(k * x[0]); });
  const auto df = partial_derivative(f, 0);
  double err = 0.0;
  for (std::size_t node = 0; node < g.node_count(); ++node) {
    err = std::max(err, std::abs(df[node] - k * std::cos(k * g.position(node)[0])));
  }
  return err;
}

TEST(PartialDerivative, FourthOrderOnSine) {
  const double e32 = sine_derivative_error(32, 2.0);
  const double e64 = sine_derivative_error(64, 2.0);
  EXPECT_LT(e64, 1e-4);
  EXPECT_GE(e32 / e64, 12.0);
}

TEST(SecondPartial, LinearProfileVanishesAwayFromSeam) {
  const GridSpec g = GridSpec::cube(2, 24);
  const auto f = ScalarField::from_function(g, [](const Point& x) { return 3.0 * x[0] - 2.0 * x[1] + 0.5; });
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const auto d2 = second_partial(f, a, b);
      for (std::size_t node = 0; node < f.size(); ++node) {
        const auto c = g.coords(node);
        if (c[0] < 4 || c[0] > 19 || c[1] < 4 || c[1] > 19) continue;
        EXPECT_NEAR(d2[node], 0.0, 1e-11);
      }
    }
}

TEST(SecondPartial, BitwiseSymmetric) {
  const GridSpec g = GridSpec::make({9, 10, 11}, {1, 1, 1});
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  ScalarField f(g);
  for (auto& v : f.values) v = u(rng);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      const auto ab = second_partial(f, a, b);
      const auto ba = second_partial(f, b, a);
      EXPECT_EQ(ab.values, ba.values);
    }
}

TEST(SecondPartial, SineCurvatureFourthOrder) {
  auto err = [](int N) {
    const GridSpec g = GridSpec::make({N, 8}, {1.0, 1.0});
    const auto f = ScalarField::from_function(g, [](const Point& x) { return std::sin(kTwoPi * x[0]); });
    const auto d2 = second_partial(f, 0, 0);
    double e = 0.0;
    for (std::size_t node = 0; node < f.size(); ++node) e = std::max(e, std::abs(d2[node] + kTwoPi * kTwoPi * f[node]));
    return e;
  };
  EXPECT_GE(err(32) / err(64), 12.0);
}

TEST(IntegrateScalar, ExactIntegrals) {
  const GridSpec g = GridSpec::cube(2, 16);
  const ScalarField one(g, 1.0);
  EXPECT_NEAR(integrate_scalar(one, one), 1.0, 1e-14);
  const auto s = ScalarField::from_function(g, [](const Point& x) { return std::sin(kTwoPi * x[0]); });
  EXPECT_NEAR(integrate_scalar(s, one), 0.0, 1e-15);
  const auto s2 = ScalarField::from_function(g, [](const Point& x) { return std::pow(std::sin(kTwoPi * x[0]), 2); });
  EXPECT_NEAR(integrate_scalar(s2, one), 0.5, 1e-12);
  const GridSpec other = GridSpec::cube(2, 8);
  EXPECT_THROW(integrate_scalar(one, ScalarField(other, 1.0)), ArgumentError);
}

TEST(IntegrateScalar, PeriodicBoxVolume) {
  const GridSpec g = GridSpec::make({8, 10, 12}, {2.0, 0.5, 3.0});
  EXPECT_NEAR(integrate_scalar(ScalarField(g, 1.0), ScalarField(g, 1.0)), 3.0, 1e-13);
}

TEST(IntegrateScalar, DerivativesIntegrateToZero) {
  const GridSpec g = GridSpec::cube(3, 10);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  ScalarField f(g);
  for (auto& v : f.values) v = u(rng);
  for (int a = 0; a < 3; ++a) EXPECT_LE(std::abs(integrate_scalar(partial_derivative(f, a), ScalarField(g, 1.0))), 1e-12);
}

TEST(PartialDerivative, TranslationEquivariant) {
  const GridSpec g = GridSpec::make({10, 12}, {1, 1});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  ScalarField f(g), shifted(g);
  for (auto& v : f.values) v = u(rng);
  for (std::size_t node = 0; node < f.size(); ++node) {
    const auto c = g.coords(node);
    const std::size_t src = static_cast<std::size_t>((c[0] + 1) % 10) + 10 * static_cast<std::size_t>(c[1]);
    shifted[node] = f[src];
  }
  const auto df = partial_derivative(f, 0);
  const auto ds = partial_derivative(shifted, 0);
  for (std::size_t node = 0; node < f.size(); ++node) {
    const auto c = g.coords(node);
    const std::size_t src = static_cast<std::size_t>((c[0] + 1) % 10) + 10 * static_cast<std::size_t>(c[1]);
    EXPECT_EQ(ds[node], df[src]);
  }
}
