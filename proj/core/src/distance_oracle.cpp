#include "ellcbf/distance_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ellcbf {

namespace {

constexpr int kNewtonMaxIterations = 200;
constexpr double kNewtonResidualTolerance = 1e-13;
// Overlapping sets make alternating projections converge onto the boundary
// of the intersection, often from just outside it; a residual gap this small
// is contact, not separation.
constexpr double kContactTolerance = 1e-10;

// Root of F(t) for a body-frame point (y1, y2) outside the ellipse (a, b).
double projectionMultiplier(double a, double b, double y1, double y2) {
  const double a2 = a * a;
  const double b2 = b * b;
  const auto residual = [&](double t) {
    const double u = a * y1 / (a2 + t);
    const double w = b * y2 / (b2 + t);
    return u * u + w * w - 1.0;
  };

  double t = 0.0;
  for (int it = 0; it < kNewtonMaxIterations; ++it) {
    const double da = a2 + t;
    const double db = b2 + t;
    const double u = a * y1 / da;
    const double w = b * y2 / db;
    const double f = u * u + w * w - 1.0;
    if (std::abs(f) <= kNewtonResidualTolerance) return t;
    const double df = -2.0 * (u * u / da + w * w / db);
    const double next = t - f / df;
    if (!(next > t)) return t;  // stalled at machine precision
    t = next;
  }

  // Bracketed bisection fallback; F(a |y|) <= 0 for any outside point.
  double lo = t;
  double hi = std::max(t, a * std::hypot(y1, y2));
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (residual(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

template <typename F>
double goldenSectionMaximize(F&& f, double lo, double hi, double tolerance) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  while (hi - lo > tolerance) {
    if (fc >= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = f(d);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

Vec2 projectOntoEllipse(const AgentState& state, const EllipseShape& shape, const Vec2& x) {
  if (containsPoint(state, shape, x)) return x;

  const Mat2 r = rotation(state.theta());
  const Vec2 local = r.transpose() * (x - state.position());
  const double a = shape.q_major;
  const double b = shape.q_minor;
  const double t = projectionMultiplier(a, b, local.x(), local.y());
  const Vec2 projected(a * a * local.x() / (a * a + t), b * b * local.y() / (b * b + t));
  return r * projected + state.position();
}

DistanceResult minDistance(const AgentState& state_i, const EllipseShape& shape_i,
                           const AgentState& state_j, const EllipseShape& shape_j,
                           const DistanceOptions& options) {
  DistanceResult result;
  Vec2 eta = options.warm_start.value_or(state_j.position());
  Vec2 xi = projectOntoEllipse(state_i, shape_i, eta);
  eta = projectOntoEllipse(state_j, shape_j, xi);

  for (int it = 1; it <= options.max_iterations; ++it) {
    result.iterations = it;
    if (containsPoint(state_j, shape_j, xi)) {
      result.intersecting = true;
      result.converged = true;
      result.xi = xi;
      result.eta = xi;
      result.w_star = 0.0;
      return result;
    }
    const Vec2 xi_next = projectOntoEllipse(state_i, shape_i, eta);
    const Vec2 eta_next = projectOntoEllipse(state_j, shape_j, xi_next);
    const double step = std::max((xi_next - xi).norm(), (eta_next - eta).norm());
    xi = xi_next;
    eta = eta_next;
    if (step < options.step_tolerance) {
      result.converged = true;
      break;
    }
  }

  result.xi = xi;
  result.eta = eta;
  result.w_star = (eta - xi).norm();
  if (result.w_star <= kContactTolerance || containsPoint(state_j, shape_j, xi) ||
      containsPoint(state_i, shape_i, eta)) {
    result.intersecting = true;
    result.w_star = 0.0;
    result.eta = xi;
  }
  return result;
}

DistanceResult refineDistance(const AgentState& state_i, const EllipseShape& shape_i,
                              const AgentState& state_j, const EllipseShape& shape_j, const DistanceResult& seed) {
  if (seed.intersecting) return seed;

  const EffectiveShape shape = effectiveShape(state_i, shape_i);
  const Vec2 unit = shape.inverse() * (seed.xi - state_i.position());
  const auto boundary = [&](double s) {
    return Vec2(shape.q_bar * Vec2(std::cos(s), std::sin(s)) + state_i.position());
  };
  const auto gap = [&](double s) {
    const Vec2 xi = boundary(s);
    return (projectOntoEllipse(state_j, shape_j, xi) - xi).norm();
  };

  // Re-center the bracket until the minimizer is interior.
  constexpr double kHalfWidth = 0.25;
  double center = std::atan2(unit.y(), unit.x());
  double s_best = center;
  for (int attempt = 0; attempt < 16; ++attempt) {
    s_best = goldenSectionMaximize([&](double s) { return -gap(s); }, center - kHalfWidth, center + kHalfWidth, 1e-12);
    if (std::abs(s_best - center) < 0.9 * kHalfWidth) break;
    center = s_best;
  }

  DistanceResult out;
  out.xi = boundary(s_best);
  out.eta = projectOntoEllipse(state_j, shape_j, out.xi);
  out.iterations = seed.iterations;
  out.refined = true;
  out.converged = true;
  out.w_star = (out.eta - out.xi).norm();
  if (out.w_star <= kContactTolerance || containsPoint(state_j, shape_j, out.xi)) {
    out.intersecting = true;
    out.eta = out.xi;
    out.w_star = 0.0;
    return out;
  }
  // Keep whichever candidate is closer; both are feasible pairs.
  if (seed.w_star < out.w_star) {
    out.xi = seed.xi;
    out.eta = seed.eta;
    out.w_star = seed.w_star;
  }
  return out;
}

DistanceResult certifiedDistance(const AgentState& state_i, const EllipseShape& shape_i,
                                 const AgentState& state_j, const EllipseShape& shape_j,
                                 const DistanceOptions& options) {
  const DistanceResult ap = minDistance(state_i, shape_i, state_j, shape_j, options);
  if (ap.converged) return ap;
  return refineDistance(state_i, shape_i, state_j, shape_j, ap);
}

DualResult maximizeClearance(const AgentState& state_i, const EllipseShape& shape_i,
                             const AgentState& state_j, const EllipseShape& shape_j, double phi_init) {
  const auto clearance = [&](double phi) {
    return signedClearance(state_i, shape_i, state_j, shape_j, SupportLineParam(phi));
  };

  constexpr double kSpacing = 2.0 * std::numbers::pi / kClearanceScanSamples;
  double best_phi = wrapAngle(phi_init);
  double best_h = clearance(best_phi);
  for (int k = 0; k < kClearanceScanSamples; ++k) {
    const double phi = -std::numbers::pi + (k + 1) * kSpacing;
    const double h = clearance(phi);
    if (h > best_h) {
      best_h = h;
      best_phi = phi;
    }
  }

  // The bracket may cross +-pi; clearance() wraps internally.
  const double refined = goldenSectionMaximize(clearance, best_phi - kSpacing, best_phi + kSpacing, 1e-10);
  const double refined_h = clearance(refined);
  if (refined_h > best_h) {
    best_h = refined_h;
    best_phi = refined;
  }
  const double phi_star = wrapAngle(best_phi);
  return {phi_star, clearance(phi_star)};
}

bool areDisjoint(const AgentState& state_i, const EllipseShape& shape_i, const AgentState& state_j,
                 const EllipseShape& shape_j) {
  return maximizeClearance(state_i, shape_i, state_j, shape_j).h_star > 0.0;
}

}  // namespace ellcbf
