#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ctgibbs/grid.hpp"
#include "ctgibbs/quadrature.hpp"

using namespace ctgibbs;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

TEST(Grid, UniformNodesAndWeights) {
  Grid g = Grid::uniform(4);
  EXPECT_EQ(g.n, 4);
  EXPECT_DOUBLE_EQ(g.nodes[0], 0.0);
  EXPECT_DOUBLE_EQ(g.nodes[1], 0.25);
  EXPECT_DOUBLE_EQ(g.nodes[2], 0.5);
  EXPECT_DOUBLE_EQ(g.nodes[3], 0.75);
  EXPECT_DOUBLE_EQ(g.weights[0], 0.25);

  Grid g2 = Grid::uniform(2);
  EXPECT_DOUBLE_EQ(g2.nodes[0], 0.0);
  EXPECT_DOUBLE_EQ(g2.nodes[1], 0.5);
}

TEST(Grid, DegenerateCountRejected) {
  EXPECT_THROW(Grid::uniform(1), std::invalid_argument);
  EXPECT_THROW(Grid::uniform(0), std::invalid_argument);
}

TEST(Grid, WeightsSumToOne) {
  for (int n : {2, 7, 32, 64, 128, 1000}) {
    Grid g = Grid::uniform(n);
    EXPECT_NEAR(g.weights.sum(), 1.0, 1e-14) << "n=" << n;
  }
}

TEST(Grid, PeriodicInterpolation) {
  Grid g = Grid::uniform(8);
  GridFunction f = g.nodes;
  EXPECT_DOUBLE_EQ(interp_periodic(g, f, 0.25), 0.25);
  EXPECT_NEAR(interp_periodic(g, f, 0.25 + 0.0625), 0.25 + 0.0625, 1e-15);
  // last cell interpolates back towards f[0]
  EXPECT_NEAR(interp_periodic(g, f, 1.0 - 0.0625), 0.5 * (g.nodes[7] + 0.0), 1e-15);
  EXPECT_NEAR(interp_periodic(g, f, 1.25), 0.25, 1e-15);
}

TEST(FdWeights, ClassicFivePointForwardDerivative) {
  double h = 0.1;
  auto w = fd_weights({0.0, h, 2 * h, 3 * h, 4 * h}, 1);
  double s = 12.0 * h;
  EXPECT_NEAR(w[0], -25.0 / s, 1e-12);
  EXPECT_NEAR(w[1], 48.0 / s, 1e-12);
  EXPECT_NEAR(w[2], -36.0 / s, 1e-12);
  EXPECT_NEAR(w[3], 16.0 / s, 1e-12);
  EXPECT_NEAR(w[4], -3.0 / s, 1e-12);
}

TEST(Quadrature, SmoothPeriodicIsSpectrallyExact) {
  Grid g = Grid::uniform(32);
  GridFunction f = (kTwoPi * g.nodes.array()).sin().square() + 1.0;  // int = 1.5
  EXPECT_NEAR(integrate_plain(g, f), 1.5, 1e-14);
  EXPECT_NEAR(integrate(g, f), 1.5, 1e-13);
}

TEST(Quadrature, WrapKinkDerivativeJump) {
  // x(1-x) has one-sided slopes +1 and -1 at the wrap.
  Grid g = Grid::uniform(64);
  GridFunction f = (g.nodes.array() * (1.0 - g.nodes.array())).matrix();
  EXPECT_NEAR(derivative_jump(g, f, 0), 2.0, 1e-10);
  EXPECT_NEAR(derivative_jump(g, f, 0, 3), 0.0, 1e-8);
}

TEST(Quadrature, WrapKinkCorrectionExactForQuadratic) {
  // Plain trapezoid misses int x(1-x) = 1/6 by exactly h^2/6; the corrected
  // rule is exact.
  for (int n : {16, 64, 128}) {
    Grid g = Grid::uniform(n);
    GridFunction f = (g.nodes.array() * (1.0 - g.nodes.array())).matrix();
    double h = g.spacing();
    EXPECT_NEAR(integrate_plain(g, f), 1.0 / 6.0 - h * h / 6.0, 1e-14) << n;
    EXPECT_NEAR(integrate(g, f), 1.0 / 6.0, 1e-14) << n;
  }
}

TEST(Quadrature, WrapKinkCorrectionExactForQuartic) {
  // (x(1-x))^2 integrates to 1/30; piecewise-quartic with a wrap kink.
  for (int n : {32, 64}) {
    Grid g = Grid::uniform(n);
    GridFunction f = (g.nodes.array() * (1.0 - g.nodes.array())).square().matrix();
    EXPECT_NEAR(integrate(g, f), 1.0 / 30.0, 1e-14) << n;
  }
}

TEST(Quadrature, InteriorKinkDeclared) {
  // Shifted bump: kink moved to an interior node by rotating x(1-x).
  int n = 64;
  Grid g = Grid::uniform(n);
  int shift = 17;
  GridFunction f(n);
  for (int i = 0; i < n; ++i) {
    double u = g.nodes[(i + shift) % n];
    f[i] = u * (1.0 - u);
  }
  // kink sits where (x + shift/n) wraps, i.e. at node n - shift
  EXPECT_NEAR(integrate(g, f, {n - shift}), 1.0 / 6.0, 1e-13);
  // without the declaration the defect is the classic h^2/6
  double h = g.spacing();
  EXPECT_NEAR(integrate_plain(g, f), 1.0 / 6.0 - h * h / 6.0, 1e-13);
}

TEST(Quadrature, ProductOfKinkedFunctions) {
  // Product of two quadratics with wrap kinks only: still exact.
  Grid g = Grid::uniform(64);
  GridFunction a = (2.0 + g.nodes.array() * (1.0 - g.nodes.array())).matrix();
  GridFunction b = (1.0 + 0.5 * g.nodes.array() * (1.0 - g.nodes.array())).matrix();
  // int (2 + q)(1 + q/2) = 2 + q + q/2*2... expand: 2 + 2q + 0.5 q^2 with
  // int q = 1/6, int q^2 = 1/30.
  double expect = 2.0 + 2.0 / 6.0 + 0.5 / 30.0;
  EXPECT_NEAR(integrate(g, a.cwiseProduct(b)), expect, 1e-13);
}

TEST(Quadrature, HarmlessForNearConstant) {
  Grid g = Grid::uniform(32);
  GridFunction f = constant(g, 3.7);
  EXPECT_NEAR(integrate(g, f), integrate_plain(g, f), 1e-14);
}
