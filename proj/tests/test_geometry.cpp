#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ellcbf/distance_oracle.hpp"
#include "ellcbf/geometry.hpp"
#include "ellcbf/sampling.hpp"
#include "ellcbf/reference/oracles.hpp"

namespace ellcbf {
namespace {

constexpr double kPi = std::numbers::pi;

const EllipseShape kUnitCircle = EllipseShape::circle(1.0);
const EllipseShape kTwoByOne = EllipseShape::make(2.0, 1.0);

void expectMatrixNear(const Mat2& actual, const Mat2& expected, double tol) {
  EXPECT_LE((actual - expected).cwiseAbs().maxCoeff(), tol) << "actual\n" << actual << "\nexpected\n" << expected;
}

TEST(WrapAngle, MapsIntoHalfOpenInterval) {
  EXPECT_DOUBLE_EQ(wrapAngle(kPi), kPi);
  EXPECT_DOUBLE_EQ(wrapAngle(-kPi), kPi);
  EXPECT_NEAR(wrapAngle(3.0 * kPi), kPi, 1e-12);
  EXPECT_NEAR(wrapAngle(5.0 * kPi / 4.0), -3.0 * kPi / 4.0, 1e-12);
  EXPECT_DOUBLE_EQ(wrapAngle(0.25), 0.25);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> any(-50.0, 50.0);
  for (int k = 0; k < 1000; ++k) {
    const double a = any(rng);
    const double w = wrapAngle(a);
    EXPECT_GT(w, -kPi);
    EXPECT_LE(w, kPi);
    EXPECT_NEAR(std::sin(w), std::sin(a), 1e-12);
    EXPECT_NEAR(std::cos(w), std::cos(a), 1e-12);
  }
}

TEST(AgentState, KeepsHeadingWrapped) {
  AgentState s(0.0, 0.0, 5.0 * kPi / 4.0);
  EXPECT_NEAR(s.theta(), -3.0 * kPi / 4.0, 1e-12);
  s.integrate({1.0, 2.0, 10.0}, 0.5);
  EXPECT_NEAR(s.position().x(), 0.5, 1e-15);
  EXPECT_NEAR(s.position().y(), 1.0, 1e-15);
  EXPECT_GT(s.theta(), -kPi);
  EXPECT_LE(s.theta(), kPi);
  SupportLineParam line(7.0);
  EXPECT_NEAR(line.phi(), 7.0 - 2.0 * kPi, 1e-12);
}

TEST(EllipseShape, RejectsInvalidAxes) {
  EXPECT_THROW(EllipseShape::make(1.0, 2.0), std::invalid_argument);
  EXPECT_THROW(EllipseShape::make(1.0, 0.0), std::invalid_argument);
  EXPECT_THROW(EllipseShape::make(1.0, -0.5), std::invalid_argument);
  EXPECT_NO_THROW(EllipseShape::make(1.0, 1.0));
}

TEST(Rotation, QuarterAndHalfTurns) {
  expectMatrixNear(rotation(0.0), Mat2::Identity(), 0.0);
  expectMatrixNear(rotation(kPi / 2.0), (Mat2() << 0, -1, 1, 0).finished(), 1e-15);
  expectMatrixNear(rotation(kPi), (Mat2() << -1, 0, 0, -1).finished(), 1e-15);
  for (double theta : {-2.0, -0.3, 0.7, 3.0}) {
    const Mat2 r = rotation(theta);
    expectMatrixNear(r * r.transpose(), Mat2::Identity(), 1e-15);
    EXPECT_NEAR(r.determinant(), 1.0, 1e-15);
  }
}

TEST(EffectiveShape, Examples) {
  expectMatrixNear(effectiveShape(AgentState(0, 0, 0), kTwoByOne).q_bar, Vec2(2, 1).asDiagonal().toDenseMatrix(), 0.0);
  expectMatrixNear(effectiveShape(AgentState(0, 0, kPi / 2), kTwoByOne).q_bar, Vec2(1, 2).asDiagonal().toDenseMatrix(),
                   1e-15);
  expectMatrixNear(effectiveShape(AgentState(3, -1, kPi / 4), kUnitCircle).q_bar, Mat2::Identity(), 1e-15);
}

TEST(EffectiveShape, SymmetricPositiveDefiniteAndHalfTurnInvariant) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 200; ++k) {
    const EllipsePair pair = randomPair(rng);
    const Mat2 q = effectiveShape(pair.state_i, pair.shape_i).q_bar;
    EXPECT_EQ(q(0, 1), q(1, 0));
    const Eigen::SelfAdjointEigenSolver<Mat2> eig(q);
    EXPECT_NEAR(eig.eigenvalues()[0], pair.shape_i.q_minor, 1e-12);
    EXPECT_NEAR(eig.eigenvalues()[1], pair.shape_i.q_major, 1e-12);
    const AgentState flipped(pair.state_i.position(), pair.state_i.theta() + kPi);
    expectMatrixNear(effectiveShape(flipped, pair.shape_i).q_bar, q, 1e-12);
    expectMatrixNear(inverse2x2(q) * q, Mat2::Identity(), 1e-12);
  }
}

TEST(ContainsPoint, InteriorBoundaryExterior) {
  const AgentState s(1.0, 2.0, 0.0);
  EXPECT_TRUE(containsPoint(s, kTwoByOne, Vec2(1.0, 2.0)));
  EXPECT_TRUE(containsPoint(s, kTwoByOne, Vec2(3.0, 2.0)));
  EXPECT_FALSE(containsPoint(s, kTwoByOne, Vec2(3.1, 2.0)));
}

TEST(BoundaryPoint, Examples) {
  const AgentState origin(0, 0, 0);
  EXPECT_TRUE(boundaryPoint(origin, kUnitCircle, SupportLineParam(0.0)).isApprox(Vec2(1, 0)));
  EXPECT_TRUE(boundaryPoint(origin, kTwoByOne, SupportLineParam(0.0)).isApprox(Vec2(2, 0)));
  EXPECT_LE((boundaryPoint(origin, kTwoByOne, SupportLineParam(kPi / 2)) - Vec2(0, 1)).norm(), 1e-15);
}

TEST(BoundaryPoint, LiesOnEllipse) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  for (int k = 0; k < 500; ++k) {
    const EllipsePair pair = randomPair(rng);
    const Vec2 m = boundaryPoint(pair.state_i, pair.shape_i, SupportLineParam(angle(rng)));
    EXPECT_NEAR(ellipseLevel(pair.state_i, pair.shape_i, m), 0.0, 1e-10);
  }
}

TEST(DeepestPoint, CircleExamples) {
  const AgentState a(0, 0, 0);
  const AgentState b(4, 0, 0);
  EXPECT_LE((deepestPoint(a, kUnitCircle, b, kUnitCircle, SupportLineParam(0.0)) - Vec2(3, 0)).norm(), 1e-15);
  EXPECT_LE((deepestPoint(a, kUnitCircle, b, kUnitCircle, SupportLineParam(kPi / 2)) - Vec2(4, -1)).norm(), 1e-15);
}

TEST(DeepestPoint, MatchesDenseBoundaryGrid) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  constexpr int kSamples = 100000;
  for (int k = 0; k < 20; ++k) {
    const EllipsePair p = randomDisjointPair(rng);
    const double phi = angle(rng);
    double grid_distance = 0.0;
    const Vec2 grid_point = reference::gridDeepestPoint(p.state_i, p.shape_i, p.state_j, p.shape_j, phi, kSamples,
                                                      &grid_distance);
    const Vec2 n = deepestPoint(p.state_i, p.shape_i, p.state_j, p.shape_j, SupportLineParam(phi));
    EXPECT_NEAR(ellipseLevel(p.state_j, p.shape_j, n), 0.0, 1e-10);
    // Grid spacing 2 pi / 1e5 bounds the point error by roughly q_major * 6e-5.
    EXPECT_LE((n - grid_point).norm(), 1e-4);
    EXPECT_NEAR(signedClearance(p.state_i, p.shape_i, p.state_j, p.shape_j, SupportLineParam(phi)), grid_distance,
                1e-8);
  }
}

TEST(SignedClearance, Examples) {
  const AgentState a(0, 0, 0);
  const AgentState b(4, 0, 0);
  EXPECT_NEAR(signedClearance(a, kUnitCircle, b, kUnitCircle, SupportLineParam(0.0)), 2.0, 1e-15);
  EXPECT_NEAR(signedClearance(a, kUnitCircle, b, kUnitCircle, SupportLineParam(kPi / 2)), -2.0, 1e-15);
  EXPECT_NEAR(signedClearance(a, kTwoByOne, AgentState(5, 0, 0), kUnitCircle, SupportLineParam(0.0)), 2.0, 1e-15);
}

TEST(SignedClearance, RigidMotionInvariance) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  std::uniform_real_distribution<double> shift(-5.0, 5.0);
  for (int k = 0; k < 300; ++k) {
    const EllipsePair p = randomPair(rng);
    const double phi = angle(rng);
    const double h = signedClearance(p.state_i, p.shape_i, p.state_j, p.shape_j, SupportLineParam(phi));

    const Vec2 t(shift(rng), shift(rng));
    const double translated =
        signedClearance(AgentState(p.state_i.position() + t, p.state_i.theta()), p.shape_i,
                        AgentState(p.state_j.position() + t, p.state_j.theta()), p.shape_j, SupportLineParam(phi));
    EXPECT_NEAR(translated, h, 1e-11);

    const double rot = angle(rng);
    const Mat2 r = rotation(rot);
    const double rotated = signedClearance(AgentState(r * p.state_i.position(), p.state_i.theta() + rot), p.shape_i,
                                           AgentState(r * p.state_j.position(), p.state_j.theta() + rot), p.shape_j,
                                           SupportLineParam(phi + rot));
    EXPECT_NEAR(rotated, h, 1e-11);
  }
}

TEST(SignedClearance, WeakDualityAndSeparationSoundness) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  for (int k = 0; k < 60; ++k) {
    const EllipsePair p = randomDisjointPair(rng);
    const double w = minDistance(p.state_i, p.shape_i, p.state_j, p.shape_j).w_star;
    for (int s = 0; s < 100; ++s) {
      const double phi = angle(rng);
      const double h = signedClearance(p.state_i, p.shape_i, p.state_j, p.shape_j, SupportLineParam(phi));
      EXPECT_LE(h, w + 1e-7);
      if (h > 0.0) {
        double grid_min = 0.0;
        reference::gridDeepestPoint(p.state_i, p.shape_i, p.state_j, p.shape_j, phi, 2000, &grid_min);
        EXPECT_GT(grid_min, 0.0) << "positive clearance but ellipse j reaches the near side of the line";
      }
    }
  }
}

TEST(SignedClearance, CircleReduction) {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> radius(0.1, 1.0);
  std::uniform_real_distribution<double> coord(-3.0, 3.0);
  int checked = 0;
  while (checked < 100) {
    const double ri = radius(rng);
    const double rj = radius(rng);
    const AgentState a(coord(rng), coord(rng), 0.0);
    const AgentState b(coord(rng), coord(rng), 0.0);
    const double expected = (b.position() - a.position()).norm() - ri - rj;
    if (expected <= 0.0) continue;
    ++checked;
    const DualResult dual = maximizeClearance(a, EllipseShape::circle(ri), b, EllipseShape::circle(rj));
    EXPECT_NEAR(dual.h_star, expected, 1e-9);
  }
}

TEST(ClearanceGradient, CircleExamples) {
  const AgentState a(0, 0, 0);
  const AgentState b(4, 0, 0);
  const ClearanceGradient g = clearanceGradient(a, kUnitCircle, b, kUnitCircle, SupportLineParam(0.0));
  EXPECT_LE((g.d_p_i - Vec2(-1, 0)).norm(), 1e-15);
  EXPECT_LE((g.d_p_j - Vec2(1, 0)).norm(), 1e-15);
  EXPECT_NEAR(g.d_theta_i, 0.0, 1e-15);
  EXPECT_NEAR(g.d_theta_j, 0.0, 1e-15);
  EXPECT_NEAR(g.d_phi, 0.0, 1e-15);

  const ClearanceGradient e = clearanceGradient(a, kTwoByOne, AgentState(5, 0, 0), kUnitCircle, SupportLineParam(0.0));
  EXPECT_LE((e.d_p_i - Vec2(-1, 0)).norm(), 1e-15);
  EXPECT_NEAR(e.d_phi, 0.0, 1e-15);
}

TEST(ClearanceGradient, MatchesCentralDifferencesAndHasUnitPositionBlocks) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  const auto h = [](const EllipseShape& si, const EllipseShape& sj) {
    return [=](const AgentState& a, const AgentState& b, double phi) {
      return signedClearance(a, si, b, sj, SupportLineParam(phi));
    };
  };
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const EllipsePair p = randomPair(rng);
    const double phi = angle(rng);
    const ClearanceGradient g = clearanceGradient(p.state_i, p.shape_i, p.state_j, p.shape_j, SupportLineParam(phi));
    const ClearanceGradient fd = reference::finiteDifferenceGradient(h(p.shape_i, p.shape_j), p.state_i, p.state_j, phi, 1e-6);
    worst = std::max(worst, reference::worstRelativeError(g, fd));
    EXPECT_NEAR(g.d_p_i.norm(), 1.0, 1e-9);
    EXPECT_NEAR(g.d_p_j.norm(), 1.0, 1e-9);
    EXPECT_EQ(g.d_p_j, Vec2(-g.d_p_i));
  }
  EXPECT_LE(worst, 1e-5);
}

TEST(ClearanceEvaluation, AgreesWithSeparateCalls) {
  std::mt19937_64 rng(29);
  const EllipsePair p = randomPair(rng);
  const SupportLineParam line(0.4);
  const auto eval = evaluateClearance(p.state_i, p.shape_i, p.state_j, p.shape_j, line);
  EXPECT_EQ(eval.h, signedClearance(p.state_i, p.shape_i, p.state_j, p.shape_j, line));
  EXPECT_EQ(eval.grad.d_phi, clearanceGradient(p.state_i, p.shape_i, p.state_j, p.shape_j, line).d_phi);
}

}  // namespace
}  // namespace ellcbf
