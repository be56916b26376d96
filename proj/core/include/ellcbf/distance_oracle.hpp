#pragma once

#include <optional>

#include "ellcbf/geometry.hpp"

namespace ellcbf {

/// Closest pair between two ellipses found by the primal solver.
struct DistanceResult {
  double w_star = 0.0;
  Vec2 xi = Vec2::Zero();   // closest point on ellipse i
  Vec2 eta = Vec2::Zero();  // closest point on ellipse j
  bool converged = false;
  bool intersecting = false;
  int iterations = 0;
  bool refined = false;  // produced by the boundary-angle fallback
};

/// Maximizer of the signed clearance over the supporting-line angle.
struct DualResult {
  double phi_star = 0.0;
  double h_star = 0.0;
};

struct DistanceOptions {
  int max_iterations = 10000;
  double step_tolerance = 1e-12;
  /// Starting point on ellipse j, e.g. the previous solution in a time loop.
  std::optional<Vec2> warm_start;
};

/// Euclidean projection of x onto the closed ellipse. Points already inside
/// are returned unchanged.
///
/// Outside points are resolved in the body frame: the projection is
/// (a^2 y1 / (a^2 + t), b^2 y2 / (b^2 + t)) where t > 0 is the root of
///   F(t) = (a y1 / (a^2 + t))^2 + (b y2 / (b^2 + t))^2 - 1.
/// F is convex and decreasing on t >= 0, so Newton from t = 0 increases
/// monotonically to the root.
Vec2 projectOntoEllipse(const AgentState& state, const EllipseShape& shape, const Vec2& x);

/// Minimum Euclidean distance between two ellipses by alternating projections.
/// Intersecting ellipses report w_star = 0 with xi == eta; so do pairs whose
/// gap falls below 1e-10 (treated as contact).
DistanceResult minDistance(const AgentState& state_i, const EllipseShape& shape_i,
                           const AgentState& state_j, const EllipseShape& shape_j,
                           const DistanceOptions& options = {});

/// Fallback for pairs where alternating projections stall (near contact, where
/// their rate tends to one): golden-section search over the boundary angle s
/// of ellipse i for the distance from Q_bar_i (cos s, sin s) + p_i to ellipse
/// j, seeded from `seed`. Near the optimum that distance grows quadratically
/// in s regardless of the gap, so the search stays well conditioned.
DistanceResult refineDistance(const AgentState& state_i, const EllipseShape& shape_i,
                              const AgentState& state_j, const EllipseShape& shape_j, const DistanceResult& seed);

/// Alternating projections with a bounded budget, falling back to
/// refineDistance when they do not converge within it.
DistanceResult certifiedDistance(const AgentState& state_i, const EllipseShape& shape_i,
                                 const AgentState& state_j, const EllipseShape& shape_j,
                                 const DistanceOptions& options = {});

/// Number of equispaced angles in the coarse clearance scan.
inline constexpr int kClearanceScanSamples = 720;

/// Global maximum of signedClearance over phi: a 720-point scan (plus
/// phi_init as an extra candidate) refined by golden-section search.
DualResult maximizeClearance(const AgentState& state_i, const EllipseShape& shape_i,
                             const AgentState& state_j, const EllipseShape& shape_j,
                             double phi_init = 0.0);

/// Strict: tangent ellipses are not disjoint.
bool areDisjoint(const AgentState& state_i, const EllipseShape& shape_i, const AgentState& state_j,
                 const EllipseShape& shape_j);

}  // namespace ellcbf
