#pragma once

// Reference computations shared by the tests and `ellcbf verify`. Nothing
// here calls into the code paths it is used to check: boundary points come
// from the parametric form
// p + R diag(a, b) (cos s, sin s), signed distances from tangent geometry, and
// QP references from exhaustive active-set enumeration.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "ellcbf/geometry.hpp"
#include "ellcbf/qp.hpp"

namespace ellcbf::reference {

inline Vec2 parametricBoundary(const AgentState& state, const EllipseShape& shape, double s) {
  const double c = std::cos(state.theta());
  const double sn = std::sin(state.theta());
  const double lx = shape.q_major * std::cos(s);
  const double ly = shape.q_minor * std::sin(s);
  return {state.position().x() + c * lx - sn * ly, state.position().y() + sn * lx + c * ly};
}

/// Outward unit normal of the supporting line of ellipse i touching at the
/// boundary point reached by phi. Built from the tangent dm/dphi, oriented
/// away from the center.
inline Vec2 supportNormal(const AgentState& state, const EllipseShape& shape, double phi, Vec2* touch = nullptr) {
  const double c = std::cos(state.theta());
  const double sn = std::sin(state.theta());
  Eigen::Matrix2d r;
  r << c, -sn, sn, c;
  const Eigen::Matrix2d q_bar = r * Eigen::Vector2d(shape.q_major, shape.q_minor).asDiagonal() * r.transpose();
  const Vec2 v(std::cos(phi), std::sin(phi));
  const Vec2 m = q_bar * v + state.position();
  const Vec2 tangent = q_bar * Vec2(-v.y(), v.x());
  Vec2 normal(tangent.y(), -tangent.x());
  normal.normalize();
  if (normal.dot(m - state.position()) < 0.0) normal = -normal;
  if (touch) *touch = m;
  return normal;
}

/// Boundary sample of ellipse j with the smallest signed distance to the
/// supporting line of ellipse i; returns the point, writes the distance.
inline Vec2 gridDeepestPoint(const AgentState& si, const EllipseShape& shi, const AgentState& sj,
                             const EllipseShape& shj, double phi, int samples, double* distance = nullptr) {
  Vec2 m;
  const Vec2 normal = supportNormal(si, shi, phi, &m);
  double best = std::numeric_limits<double>::infinity();
  Vec2 best_point;
  for (int k = 0; k < samples; ++k) {
    const Vec2 x = parametricBoundary(sj, shj, 2.0 * std::numbers::pi * k / samples);
    const double d = normal.dot(x - m);
    if (d < best) {
      best = d;
      best_point = x;
    }
  }
  if (distance) *distance = best;
  return best_point;
}

/// Brute-force minimum over a samples x samples grid of boundary angle pairs,
/// followed by a local quadratic (parabolic) refinement in each angle.
inline double gridMinDistance(const AgentState& si, const EllipseShape& shi, const AgentState& sj,
                              const EllipseShape& shj, int samples) {
  const double step = 2.0 * std::numbers::pi / samples;
  std::vector<Vec2> bi(samples), bj(samples);
  for (int k = 0; k < samples; ++k) {
    bi[k] = parametricBoundary(si, shi, k * step);
    bj[k] = parametricBoundary(sj, shj, k * step);
  }
  double best = std::numeric_limits<double>::infinity();
  int best_a = 0;
  int best_b = 0;
  for (int a = 0; a < samples; ++a) {
    for (int b = 0; b < samples; ++b) {
      const double d = (bi[a] - bj[b]).squaredNorm();
      if (d < best) {
        best = d;
        best_a = a;
        best_b = b;
      }
    }
  }

  const auto dist = [&](double s, double t) {
    return (parametricBoundary(si, shi, s) - parametricBoundary(sj, shj, t)).norm();
  };
  const auto parabolicMin = [](double f_minus, double f_0, double f_plus, double h) {
    const double denom = f_minus - 2.0 * f_0 + f_plus;
    if (denom <= 0.0) return 0.0;
    return std::clamp(0.5 * h * (f_minus - f_plus) / denom, -h, h);
  };
  double s = best_a * step;
  double t = best_b * step;
  double h = step;
  for (int round = 0; round < 60; ++round) {
    s += parabolicMin(dist(s - h, t), dist(s, t), dist(s + h, t), h);
    t += parabolicMin(dist(s, t - h), dist(s, t), dist(s, t + h), h);
    h = std::max(h * 0.5, 1e-9);
  }
  return std::min(std::sqrt(best), dist(s, t));
}

/// Central finite-difference partials of the signed clearance with respect
/// to (p_i, theta_i, p_j, theta_j, phi), evaluated through signedClearance.
template <typename ClearanceFn>
ClearanceGradient finiteDifferenceGradient(ClearanceFn&& h, const AgentState& si, const AgentState& sj, double phi,
                                           double step) {
  const auto shifted = [&](const AgentState& s, double dx, double dy, double dth) {
    return AgentState(s.position() + Vec2(dx, dy), s.theta() + dth);
  };
  const auto diff = [&](auto&& eval) { return (eval(step) - eval(-step)) / (2.0 * step); };
  ClearanceGradient g;
  g.d_p_i.x() = diff([&](double e) { return h(shifted(si, e, 0, 0), sj, phi); });
  g.d_p_i.y() = diff([&](double e) { return h(shifted(si, 0, e, 0), sj, phi); });
  g.d_theta_i = diff([&](double e) { return h(shifted(si, 0, 0, e), sj, phi); });
  g.d_p_j.x() = diff([&](double e) { return h(si, shifted(sj, e, 0, 0), phi); });
  g.d_p_j.y() = diff([&](double e) { return h(si, shifted(sj, 0, e, 0), phi); });
  g.d_theta_j = diff([&](double e) { return h(si, shifted(sj, 0, 0, e), phi); });
  g.d_phi = diff([&](double e) { return h(si, sj, phi + e); });
  return g;
}

/// |a - b| / max(1, |b|): relative error with the metre/radian unit as the
/// floor for partials that vanish.
inline double relativeError(double analytic, double reference) {
  return std::abs(analytic - reference) / std::max(1.0, std::abs(reference));
}

inline double worstRelativeError(const ClearanceGradient& a, const ClearanceGradient& b) {
  return std::max({relativeError(a.d_p_i.x(), b.d_p_i.x()), relativeError(a.d_p_i.y(), b.d_p_i.y()),
                   relativeError(a.d_theta_i, b.d_theta_i), relativeError(a.d_p_j.x(), b.d_p_j.x()),
                   relativeError(a.d_p_j.y(), b.d_p_j.y()), relativeError(a.d_theta_j, b.d_theta_j),
                   relativeError(a.d_phi, b.d_phi)});
}

/// Exhaustive active-set reference for min |u - u_nom|^2 s.t. A u + b >= 0.
/// Every subset S is tried as the active set: u = u_nom + A_S^T lambda with
/// (A_S A_S^T) lambda = -(A_S u_nom + b_S) solved by normal equations. The
/// subset whose point is primal feasible with lambda >= 0 is the optimum.
inline std::optional<Eigen::VectorXd> enumerateActiveSets(const Eigen::VectorXd& u_nom, const Eigen::MatrixXd& a,
                                                          const Eigen::VectorXd& b, double tol = 1e-9) {
  const int m = static_cast<int>(a.rows());
  std::optional<Eigen::VectorXd> best;
  double best_obj = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    std::vector<int> idx;
    for (int k = 0; k < m; ++k)
      if (mask & (1u << k)) idx.push_back(k);
    Eigen::VectorXd u = u_nom;
    if (!idx.empty()) {
      Eigen::MatrixXd as(idx.size(), a.cols());
      Eigen::VectorXd bs(idx.size());
      for (std::size_t r = 0; r < idx.size(); ++r) {
        as.row(static_cast<Eigen::Index>(r)) = a.row(idx[r]);
        bs[static_cast<Eigen::Index>(r)] = b[idx[r]];
      }
      const Eigen::MatrixXd gram = as * as.transpose();
      const Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
      if (!lu.isInvertible()) continue;
      const Eigen::VectorXd lambda = lu.solve(-(as * u_nom + bs));
      if ((lambda.array() < -tol).any()) continue;
      u = u_nom + as.transpose() * lambda;
    }
    if (((a * u + b).array() < -tol).any()) continue;
    const double obj = (u - u_nom).squaredNorm();
    if (obj < best_obj) {
      best_obj = obj;
      best = u;
    }
  }
  return best;
}

inline Eigen::MatrixXd denseRows(const std::vector<ConstraintRow>& rows, int dimension, Eigen::VectorXd* offsets) {
  Eigen::MatrixXd a(rows.size(), dimension);
  offsets->resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    a.row(static_cast<Eigen::Index>(k)) = rows[k].dense(dimension).transpose();
    (*offsets)[static_cast<Eigen::Index>(k)] = rows[k].rhs_alpha;
  }
  return a;
}

struct QpInstance {
  Eigen::VectorXd u_nom;
  std::vector<ConstraintRow> rows;
};

/// Random feasible instance: dimension in [2, 13], 1..6 rows with a few
/// nonzeros each, offsets chosen so a hidden point strictly satisfies every
/// row. Roughly half the instances start with a violated nominal.
inline QpInstance randomQpInstance(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dim_dist(2, 13);
  std::uniform_int_distribution<int> row_dist(1, 6);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> slack(0.01, 1.0);
  const int dim = dim_dist(rng);
  const int m = row_dist(rng);

  QpInstance q;
  q.u_nom.resize(dim);
  for (int k = 0; k < dim; ++k) q.u_nom[k] = 2.0 * normal(rng);
  Eigen::VectorXd hidden(dim);
  for (int k = 0; k < dim; ++k) hidden[k] = normal(rng);

  std::uniform_int_distribution<int> slot(0, dim - 1);
  std::uniform_int_distribution<int> nnz_dist(1, std::min(dim, 7));
  for (int r = 0; r < m; ++r) {
    ConstraintRow row;
    const int nnz = nnz_dist(rng);
    std::vector<int> used;
    while (static_cast<int>(used.size()) < nnz) {
      const int s = slot(rng);
      if (std::find(used.begin(), used.end(), s) == used.end()) used.push_back(s);
    }
    std::sort(used.begin(), used.end());
    for (int s : used) row.coeffs.emplace_back(s, normal(rng));
    double at_hidden = 0.0;
    for (const auto& [s, c] : row.coeffs) at_hidden += c * hidden[s];
    row.rhs_alpha = -at_hidden + slack(rng);
    q.rows.push_back(std::move(row));
  }
  return q;
}

}  // namespace ellcbf::reference
