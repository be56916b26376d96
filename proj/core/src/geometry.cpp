#include "ellcbf/geometry.hpp"

#include <cassert>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ellcbf {

namespace {

// Generator of planar rotations: dR/dtheta = J R = R J.
const Mat2 kQuarterTurn = (Mat2() << 0.0, -1.0, 1.0, 0.0).finished();

// Commutator J M - M J, the derivative of R M R^T with respect to the angle.
Mat2 rotationDerivative(const Mat2& m) { return kQuarterTurn * m - m * kQuarterTurn; }

struct PairTerms {
  Mat2 q_bar_i_inv;
  Mat2 q_bar_j;
  Vec2 v;
  Vec2 a;  // Q_bar_i^-1 v, normal of the supporting line
  Vec2 b;  // Q_bar_j a
  double norm_a = 0.0;
  double norm_b = 0.0;
  Vec2 offset;  // p_j - p_i
};

PairTerms pairTerms(const AgentState& state_i, const EllipseShape& shape_i, const AgentState& state_j,
                    const EllipseShape& shape_j, const SupportLineParam& line) {
  PairTerms t;
  t.q_bar_i_inv = effectiveShape(state_i, shape_i).inverse();
  t.q_bar_j = effectiveShape(state_j, shape_j).q_bar;
  t.v = line.direction();
  t.a = t.q_bar_i_inv * t.v;
  t.b = t.q_bar_j * t.a;
  t.norm_a = t.a.norm();
  t.norm_b = t.b.norm();
  t.offset = state_j.position() - state_i.position();
  // Q_bar_i is positive definite and |v| = 1, so the normal never vanishes.
  assert(t.norm_a > 0.0);
  return t;
}

double clearanceFrom(const PairTerms& t) { return (-t.norm_b + t.offset.dot(t.a) - 1.0) / t.norm_a; }

}  // namespace

double wrapAngle(double angle) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double wrapped = std::remainder(angle, kTwoPi);
  if (wrapped <= -std::numbers::pi) wrapped += kTwoPi;
  return wrapped;
}

EllipseShape EllipseShape::make(double q_major, double q_minor) {
  if (!(q_minor > 0.0) || !(q_major >= q_minor) || !std::isfinite(q_major)) {
    throw std::invalid_argument("ellipse semi-axes must satisfy q_major >= q_minor > 0");
  }
  return EllipseShape{q_major, q_minor};
}

void AgentState::integrate(const Eigen::Vector3d& u, double dt) {
  p_ += dt * u.head<2>();
  setTheta(theta_ + dt * u.z());
}

Vec2 SupportLineParam::direction() const { return {std::cos(phi_), std::sin(phi_)}; }

Mat2 inverse2x2(const Mat2& m) {
  const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  Mat2 adj;
  adj << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
  return adj / det;
}

Mat2 EffectiveShape::inverse() const { return inverse2x2(q_bar); }

Mat2 rotation(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Mat2 r;
  r << c, -s, s, c;
  return r;
}

EffectiveShape effectiveShape(const AgentState& state, const EllipseShape& shape) {
  const Mat2 r = rotation(state.theta());
  const Mat2 q = Eigen::Vector2d(shape.q_major, shape.q_minor).asDiagonal();
  Mat2 q_bar = r * q * r.transpose();
  // Symmetrize so that downstream formulas see an exactly symmetric matrix.
  const double off = 0.5 * (q_bar(0, 1) + q_bar(1, 0));
  q_bar(0, 1) = off;
  q_bar(1, 0) = off;
  return {q_bar};
}

double ellipseLevel(const AgentState& state, const EllipseShape& shape, const Vec2& x) {
  // In the body frame the level set is (x/a)^2 + (y/b)^2 - 1.
  const Vec2 local = rotation(state.theta()).transpose() * (x - state.position());
  const double u = local.x() / shape.q_major;
  const double w = local.y() / shape.q_minor;
  return u * u + w * w - 1.0;
}

bool containsPoint(const AgentState& state, const EllipseShape& shape, const Vec2& x) {
  return ellipseLevel(state, shape, x) <= 0.0;
}

Vec2 boundaryPoint(const AgentState& state, const EllipseShape& shape, const SupportLineParam& line) {
  return effectiveShape(state, shape).q_bar * line.direction() + state.position();
}

Vec2 deepestPoint(const AgentState& state_i, const EllipseShape& shape_i, const AgentState& state_j,
                  const EllipseShape& shape_j, const SupportLineParam& line) {
  const PairTerms t = pairTerms(state_i, shape_i, state_j, shape_j, line);
  return -(t.q_bar_j * t.b) / t.norm_b + state_j.position();
}

double signedClearance(const AgentState& state_i, const EllipseShape& shape_i, const AgentState& state_j,
                       const EllipseShape& shape_j, const SupportLineParam& line) {
  return clearanceFrom(pairTerms(state_i, shape_i, state_j, shape_j, line));
}

ClearanceEvaluation evaluateClearance(const AgentState& state_i, const EllipseShape& shape_i,
                                      const AgentState& state_j, const EllipseShape& shape_j,
                                      const SupportLineParam& line) {
  const PairTerms t = pairTerms(state_i, shape_i, state_j, shape_j, line);
  ClearanceEvaluation out;
  out.h = clearanceFrom(t);

  const Vec2 unit_normal = t.a / t.norm_a;
  out.grad.d_p_i = -unit_normal;
  out.grad.d_p_j = unit_normal;

  // With h = (-|b| + d.a - 1) / |a|, a perturbation (da, db) of the normal and
  // of b = Q_bar_j a changes h by (-b.db/|b| + d.da - h a.da/|a|) / |a|.
  const auto variation = [&](const Vec2& da, const Vec2& db) {
    return (-t.b.dot(db) / t.norm_b + t.offset.dot(da) - out.h * t.a.dot(da) / t.norm_a) / t.norm_a;
  };

  const Vec2 da_theta_i = rotationDerivative(t.q_bar_i_inv) * t.v;
  out.grad.d_theta_i = variation(da_theta_i, t.q_bar_j * da_theta_i);

  out.grad.d_theta_j = variation(Vec2::Zero(), rotationDerivative(t.q_bar_j) * t.a);

  const Vec2 da_phi = t.q_bar_i_inv * (kQuarterTurn * t.v);
  out.grad.d_phi = variation(da_phi, t.q_bar_j * da_phi);
  return out;
}

ClearanceGradient clearanceGradient(const AgentState& state_i, const EllipseShape& shape_i,
                                    const AgentState& state_j, const EllipseShape& shape_j,
                                    const SupportLineParam& line) {
  return evaluateClearance(state_i, shape_i, state_j, shape_j, line).grad;
}

}  // namespace ellcbf
