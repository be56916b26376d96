#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ellcbf/distance_oracle.hpp"
#include "ellcbf/sampling.hpp"
#include "ellcbf/reference/oracles.hpp"

namespace ellcbf {
namespace {

constexpr double kPi = std::numbers::pi;
const EllipseShape kUnit = EllipseShape::circle(1.0);
const EllipseShape kTwoByOne = EllipseShape::make(2.0, 1.0);

TEST(ProjectOntoEllipse, Examples) {
  const AgentState origin(0, 0, 0);
  EXPECT_LE((projectOntoEllipse(origin, kUnit, Vec2(3, 0)) - Vec2(1, 0)).norm(), 1e-15);
  EXPECT_EQ(projectOntoEllipse(origin, kTwoByOne, Vec2(0.5, 0.2)), Vec2(0.5, 0.2));
  EXPECT_LE((projectOntoEllipse(origin, kTwoByOne, Vec2(0, 5)) - Vec2(0, 1)).norm(), 1e-15);
}

// Projection distance against a dense sample of the boundary; for an outside
// point the closest point of the filled ellipse lies on the boundary.
TEST(ProjectOntoEllipse, MatchesMillionPointBoundaryGrid) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> coord(-4.0, 4.0);
  constexpr int kSamples = 1000000;
  int checked = 0;
  while (checked < 10) {
    const EllipsePair p = randomPair(rng);
    const Vec2 x(coord(rng), coord(rng));
    if (containsPoint(p.state_i, p.shape_i, x)) continue;
    ++checked;
    const Vec2 y = projectOntoEllipse(p.state_i, p.shape_i, x);
    EXPECT_NEAR(ellipseLevel(p.state_i, p.shape_i, y), 0.0, 1e-9);
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < kSamples; ++k) {
      const Vec2 b = reference::parametricBoundary(p.state_i, p.shape_i, 2.0 * kPi * k / kSamples);
      best = std::min(best, (b - x).squaredNorm());
    }
    EXPECT_NEAR((y - x).norm(), std::sqrt(best), 1e-6);
  }
}

TEST(ProjectOntoEllipse, HandlesExtremeAspectAndFarPoints) {
  const AgentState s(0.3, -0.2, 0.9);
  const EllipseShape thin = EllipseShape::make(1.0, 0.01);
  for (const Vec2& x : {Vec2(1e4, 0), Vec2(0.3, 5.0), Vec2(0.30001, -0.2 + 0.02), Vec2(-1, 1)}) {
    const Vec2 y = projectOntoEllipse(s, thin, x);
    EXPECT_NEAR(ellipseLevel(s, thin, y), 0.0, 1e-9);
    // Optimality: x - y is along the outward normal at y.
    const Mat2 qinv = effectiveShape(s, thin).inverse();
    const Vec2 normal = qinv * qinv * (y - s.position());
    const Vec2 r = x - y;
    EXPECT_NEAR(normal.x() * r.y() - normal.y() * r.x(), 0.0, 1e-9 * normal.norm() * std::max(1.0, r.norm()));
    EXPECT_GE(normal.dot(r), 0.0);
  }
}

TEST(MinDistance, Examples) {
  const DistanceResult circles = minDistance(AgentState(0, 0, 0), kUnit, AgentState(4, 0, 0), kUnit);
  EXPECT_TRUE(circles.converged);
  EXPECT_NEAR(circles.w_star, 2.0, 1e-12);
  EXPECT_LE((circles.xi - Vec2(1, 0)).norm(), 1e-12);
  EXPECT_LE((circles.eta - Vec2(3, 0)).norm(), 1e-12);

  EXPECT_NEAR(minDistance(AgentState(0, 0, 0), kTwoByOne, AgentState(5, 0, 0), kUnit).w_star, 2.0, 1e-12);

  const DistanceResult overlap = minDistance(AgentState(0, 0, 0), kUnit, AgentState(1.5, 0, 0), kUnit);
  EXPECT_TRUE(overlap.converged);
  EXPECT_TRUE(overlap.intersecting);
  EXPECT_EQ(overlap.w_star, 0.0);
}

TEST(MinDistance, ResultInvariantsAndSymmetry) {
  std::mt19937_64 rng(37);
  for (int k = 0; k < 100; ++k) {
    const EllipsePair p = randomDisjointPair(rng);
    const DistanceResult ij = certifiedDistance(p.state_i, p.shape_i, p.state_j, p.shape_j);
    const DistanceResult ji = certifiedDistance(p.state_j, p.shape_j, p.state_i, p.shape_i);
    EXPECT_TRUE(ij.converged);
    EXPECT_NEAR((ij.eta - ij.xi).norm(), ij.w_star, 1e-9);
    EXPECT_LE(ellipseLevel(p.state_i, p.shape_i, ij.xi), 1e-9);
    EXPECT_LE(ellipseLevel(p.state_j, p.shape_j, ij.eta), 1e-9);
    EXPECT_NEAR(ij.w_star, ji.w_star, 1e-9);
  }
}

TEST(MinDistance, AgreesWithBoundaryAngleGrid) {
  std::mt19937_64 rng(41);
  for (int k = 0; k < 50; ++k) {
    const EllipsePair p = randomDisjointPair(rng);
    const double w = certifiedDistance(p.state_i, p.shape_i, p.state_j, p.shape_j).w_star;
    const double grid = reference::gridMinDistance(p.state_i, p.shape_i, p.state_j, p.shape_j, 3600);
    EXPECT_NEAR(w, grid, 1e-4) << "pair " << k;
  }
}

TEST(MinDistance, IterationCapReportsNonConvergence) {
  DistanceOptions options;
  options.max_iterations = 1;
  const DistanceResult r =
      minDistance(AgentState(0, 0, 0.3), EllipseShape::make(1.0, 0.2), AgentState(1.6, 0.9, -0.7),
                  EllipseShape::make(0.8, 0.1), options);
  EXPECT_FALSE(r.converged);
}

TEST(RefineDistance, RecoversStalledNearContactPair) {
  // Nearly touching thin ellipses: alternating projections crawl here.
  const AgentState a(0, 0, 0.2);
  const EllipseShape sa = EllipseShape::make(1.0, 0.15);
  const EllipseShape sb = EllipseShape::make(0.9, 0.12);
  const double s = 1.3;
  const Vec2 touch = reference::parametricBoundary(a, sa, s);
  const Vec2 normal = rotation(a.theta()) * Vec2(std::cos(s) / 1.0, std::sin(s) / 0.15).normalized();
  // Minor axis of b along the normal, 1e-4 beyond the touch point.
  const AgentState b(touch + (0.12 + 1e-4) * normal, std::atan2(normal.y(), normal.x()) - kPi / 2);
  ASSERT_TRUE(areDisjoint(a, sa, b, sb));

  DistanceOptions tight;
  tight.max_iterations = 20;
  const DistanceResult seed = minDistance(a, sa, b, sb, tight);
  const DistanceResult refined = refineDistance(a, sa, b, sb, seed);
  // Both boundaries share the normal at the constructed points, so by
  // convexity the gap is exactly the offset.
  EXPECT_TRUE(refined.converged);
  EXPECT_LE(refined.w_star, seed.w_star);
  EXPECT_NEAR(refined.w_star, 1e-4, 1e-10);
  EXPECT_NEAR(certifiedDistance(a, sa, b, sb, tight).w_star, refined.w_star, 1e-12);
}

TEST(MaximizeClearance, Examples) {
  const DualResult circles = maximizeClearance(AgentState(0, 0, 0), kUnit, AgentState(4, 0, 0), kUnit);
  EXPECT_NEAR(circles.phi_star, 0.0, 1e-9);
  EXPECT_NEAR(circles.h_star, 2.0, 1e-12);
  const DualResult ellipse = maximizeClearance(AgentState(0, 0, 0), kTwoByOne, AgentState(5, 0, 0), kUnit);
  EXPECT_NEAR(ellipse.phi_star, 0.0, 1e-9);
  EXPECT_NEAR(ellipse.h_star, 2.0, 1e-12);
}

TEST(MaximizeClearance, SelfConsistentAndGlobal) {
  std::mt19937_64 rng(43);
  for (int k = 0; k < 50; ++k) {
    const EllipsePair p = randomDisjointPair(rng);
    const DualResult d = maximizeClearance(p.state_i, p.shape_i, p.state_j, p.shape_j, 1.0);
    EXPECT_NEAR(signedClearance(p.state_i, p.shape_i, p.state_j, p.shape_j, SupportLineParam(d.phi_star)), d.h_star,
                1e-12);
    for (int s = 0; s < 7200; ++s) {
      const double phi = -kPi + 2.0 * kPi * s / 7200;
      ASSERT_LE(signedClearance(p.state_i, p.shape_i, p.state_j, p.shape_j, SupportLineParam(phi)), d.h_star + 1e-8);
    }
  }
}

TEST(MaximizeClearance, StrongDualityOnRandomDisjointPairs) {
  std::mt19937_64 rng(2024);
  for (int k = 0; k < 100; ++k) {
    const EllipsePair p = randomDisjointPair(rng);
    const double w = certifiedDistance(p.state_i, p.shape_i, p.state_j, p.shape_j).w_star;
    const double h = maximizeClearance(p.state_i, p.shape_i, p.state_j, p.shape_j).h_star;
    EXPECT_NEAR(h, w, 1e-6) << "pair " << k;
  }
}

TEST(MaximizeClearance, OverlapGivesNonPositiveValue) {
  EXPECT_LE(maximizeClearance(AgentState(0, 0, 0), kUnit, AgentState(1.5, 0, 0), kUnit).h_star, 0.0);
  EXPECT_LE(maximizeClearance(AgentState(0, 0, 0.4), kTwoByOne, AgentState(0.1, 0.2, 1.1), kUnit).h_star, 0.0);
}

TEST(AreDisjoint, Examples) {
  EXPECT_TRUE(areDisjoint(AgentState(0, 0, 0), kUnit, AgentState(4, 0, 0), kUnit));
  EXPECT_FALSE(areDisjoint(AgentState(0, 0, 0), kUnit, AgentState(1.5, 0, 0), kUnit));
  EXPECT_FALSE(areDisjoint(AgentState(0, 0, 0), kUnit, AgentState(2, 0, 0), kUnit));
}

TEST(AreDisjoint, AgreesWithPrimalOracle) {
  std::mt19937_64 rng(47);
  PairSampling dense;
  dense.center_extent = 1.2;
  int disjoint = 0;
  for (int k = 0; k < 1000; ++k) {
    const EllipsePair p = randomPair(rng, dense);
    const DistanceResult primal = certifiedDistance(p.state_i, p.shape_i, p.state_j, p.shape_j);
    const double h = maximizeClearance(p.state_i, p.shape_i, p.state_j, p.shape_j).h_star;
    if (std::abs(h) < 1e-9) continue;  // numerically tangent
    EXPECT_EQ(primal.intersecting, h < 0.0) << "pair " << k << " w=" << primal.w_star << " h=" << h;
    EXPECT_EQ(areDisjoint(p.state_i, p.shape_i, p.state_j, p.shape_j), !primal.intersecting) << "pair " << k;
    disjoint += !primal.intersecting;
  }
  EXPECT_GT(disjoint, 100);
  EXPECT_LT(disjoint, 900);
}

}  // namespace
}  // namespace ellcbf
