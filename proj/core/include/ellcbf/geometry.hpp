#pragma once

#include <Eigen/Dense>

namespace ellcbf {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Wraps an angle into (-pi, pi].
double wrapAngle(double angle);

/// Semi-axis lengths of an elliptical agent, expressed in the agent frame
/// (x axis along the major axis).
struct EllipseShape {
  double q_major = 1.0;
  double q_minor = 1.0;

  /// Throws std::invalid_argument unless q_major >= q_minor > 0.
  static EllipseShape make(double q_major, double q_minor);
  static EllipseShape circle(double radius) { return make(radius, radius); }

  bool isCircle() const { return q_major == q_minor; }
};

/// Planar pose of an agent. The heading is kept wrapped into (-pi, pi].
class AgentState {
 public:
  AgentState() = default;
  AgentState(const Vec2& p, double theta) : p_(p), theta_(wrapAngle(theta)) {}
  AgentState(double x, double y, double theta) : AgentState(Vec2(x, y), theta) {}

  const Vec2& position() const { return p_; }
  double theta() const { return theta_; }

  void setPosition(const Vec2& p) { p_ = p; }
  void setTheta(double theta) { theta_ = wrapAngle(theta); }

  /// Explicit Euler update with a body-agnostic velocity (vx, vy, omega).
  void integrate(const Eigen::Vector3d& u, double dt);

  bool operator==(const AgentState&) const = default;

 private:
  Vec2 p_ = Vec2::Zero();
  double theta_ = 0.0;
};

/// Angle of a supporting line on the boundary of the owning ellipse, wrapped
/// into (-pi, pi].
class SupportLineParam {
 public:
  SupportLineParam() = default;
  explicit SupportLineParam(double phi) : phi_(wrapAngle(phi)) {}

  double phi() const { return phi_; }
  void set(double phi) { phi_ = wrapAngle(phi); }
  void advance(double rate, double dt) { set(phi_ + dt * rate); }

  /// Unit vector (cos phi, sin phi).
  Vec2 direction() const;

 private:
  double phi_ = 0.0;
};

/// R(theta) Q R(theta)^T: the world-frame shape matrix of a posed ellipse.
/// The ellipse is { p + Q_bar u : |u| <= 1 }.
struct EffectiveShape {
  Mat2 q_bar;

  Mat2 inverse() const;
};

/// Partial derivatives of the signed clearance h_ij with respect to every
/// component of the augmented pair state (p_i, theta_i, p_j, theta_j, phi).
struct ClearanceGradient {
  Vec2 d_p_i = Vec2::Zero();
  double d_theta_i = 0.0;
  Vec2 d_p_j = Vec2::Zero();
  double d_theta_j = 0.0;
  double d_phi = 0.0;

  Eigen::Vector3d agentI() const { return {d_p_i.x(), d_p_i.y(), d_theta_i}; }
  Eigen::Vector3d agentJ() const { return {d_p_j.x(), d_p_j.y(), d_theta_j}; }
};

Mat2 rotation(double theta);

/// Inverse of a 2x2 matrix through its adjugate. The caller guarantees a
/// non-zero determinant.
Mat2 inverse2x2(const Mat2& m);

EffectiveShape effectiveShape(const AgentState& state, const EllipseShape& shape);

/// (x - p)^T Q_bar^-2 (x - p) - 1; non-positive exactly on the closed ellipse.
double ellipseLevel(const AgentState& state, const EllipseShape& shape, const Vec2& x);

bool containsPoint(const AgentState& state, const EllipseShape& shape, const Vec2& x);

/// Tangent point m_ij = Q_bar_i v(phi) + p_i of the supporting line.
Vec2 boundaryPoint(const AgentState& state, const EllipseShape& shape, const SupportLineParam& line);

/// Point of ellipse j with the smallest signed distance to the supporting
/// line of ellipse i.
Vec2 deepestPoint(const AgentState& state_i, const EllipseShape& shape_i,
                  const AgentState& state_j, const EllipseShape& shape_j,
                  const SupportLineParam& line);

/// Minimum signed distance from the supporting line of i (positive on the
/// side away from ellipse i) over all points of ellipse j. Positive iff the
/// line separates the two ellipses.
double signedClearance(const AgentState& state_i, const EllipseShape& shape_i,
                       const AgentState& state_j, const EllipseShape& shape_j,
                       const SupportLineParam& line);

ClearanceGradient clearanceGradient(const AgentState& state_i, const EllipseShape& shape_i,
                                    const AgentState& state_j, const EllipseShape& shape_j,
                                    const SupportLineParam& line);

/// Clearance and gradient from one shared evaluation.
struct ClearanceEvaluation {
  double h = 0.0;
  ClearanceGradient grad;
};

ClearanceEvaluation evaluateClearance(const AgentState& state_i, const EllipseShape& shape_i,
                                      const AgentState& state_j, const EllipseShape& shape_j,
                                      const SupportLineParam& line);

}  // namespace ellcbf
