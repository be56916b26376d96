#include "ellcbf/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ellcbf/errors.hpp"

namespace ellcbf {

double ConstraintRow::evaluate(const Eigen::VectorXd& u) const {
  double s = rhs_alpha;
  for (const auto& [index, value] : coeffs) s += value * u[index];
  return s;
}

Eigen::VectorXd ConstraintRow::dense(int dimension) const {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(dimension);
  for (const auto& [index, value] : coeffs) a[index] += value;
  return a;
}

double ConstraintRow::coefficientNorm() const {
  double sq = 0.0;
  for (const auto& entry : coeffs) sq += entry.second * entry.second;
  return std::sqrt(sq);
}

double KktResiduals::worst() const {
  return std::max({stationarity, primal_violation, dual_violation, complementarity});
}

Eigen::VectorXd projectOntoHalfSpace(const Eigen::VectorXd& u_nom, const ConstraintRow& row) {
  const double slack = row.evaluate(u_nom);
  if (slack >= 0.0) return u_nom;
  const Eigen::VectorXd a = row.dense(static_cast<int>(u_nom.size()));
  return u_nom - a * (slack / a.squaredNorm());
}

namespace {

struct StepDirection {
  Eigen::VectorXd primal;  // z: component of the new normal outside span(N)
  Eigen::VectorXd dual;    // r: least-squares coordinates of the new normal in N
};

StepDirection stepDirection(const Eigen::MatrixXd& active_normals, const Eigen::VectorXd& normal) {
  StepDirection dir;
  if (active_normals.cols() == 0) {
    dir.primal = normal;
    dir.dual.resize(0);
    return dir;
  }
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(active_normals);
  const int k = static_cast<int>(active_normals.cols());
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(normal.size(), k);
  const Eigen::VectorXd coords = q.transpose() * normal;
  const auto r = qr.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  dir.dual = r.solve(coords);
  dir.primal = normal - q * coords;
  return dir;
}

}  // namespace

QpSolution solveQp(const Eigen::VectorXd& u_nom, const std::vector<ConstraintRow>& rows,
                   const QpOptions& options) {
  const int n = static_cast<int>(u_nom.size());
  const int m = static_cast<int>(rows.size());

  std::vector<Eigen::VectorXd> normals;
  normals.reserve(m);
  for (const auto& row : rows) {
    for (const auto& [index, value] : row.coeffs) {
      if (index < 0 || index >= n) throw std::out_of_range("constraint coefficient index outside decision vector");
      if (!std::isfinite(value)) throw NumericalError("non-finite constraint coefficient");
    }
    if (!std::isfinite(row.rhs_alpha)) throw NumericalError("non-finite constraint offset");
    normals.push_back(row.dense(n));
  }

  QpSolution sol;
  sol.u = u_nom;
  sol.multipliers = Eigen::VectorXd::Zero(m);

  std::vector<int>& active = sol.active;
  std::vector<double> lambda;  // multipliers aligned with `active`

  const auto activeMatrix = [&]() {
    Eigen::MatrixXd mat(n, static_cast<Eigen::Index>(active.size()));
    for (std::size_t k = 0; k < active.size(); ++k) mat.col(static_cast<Eigen::Index>(k)) = normals[active[k]];
    return mat;
  };

  const double inf = std::numeric_limits<double>::infinity();
  for (;;) {
    if (++sol.iterations > options.max_iterations) throw NumericalError("QP active-set iteration limit reached");

    // Most violated row relative to its normal length.
    int p = -1;
    double worst = 0.0;
    for (int k = 0; k < m; ++k) {
      if (std::find(active.begin(), active.end(), k) != active.end()) continue;
      const double scale = std::max(1.0, normals[k].norm());
      const double slack = rows[k].evaluate(sol.u) / scale;
      if (slack < -options.activity_tolerance && slack < worst) {
        worst = slack;
        p = k;
      }
    }
    if (p < 0) break;

    double lambda_p = 0.0;
    for (;;) {
      if (++sol.iterations > options.max_iterations) throw NumericalError("QP active-set iteration limit reached");
      const StepDirection dir = stepDirection(activeMatrix(), normals[p]);
      const double slack = rows[p].evaluate(sol.u);

      // Partial step: the first active multiplier to reach zero.
      double t_partial = inf;
      int drop = -1;
      for (std::size_t k = 0; k < active.size(); ++k) {
        if (dir.dual[static_cast<Eigen::Index>(k)] > 0.0) {
          const double ratio = lambda[k] / dir.dual[static_cast<Eigen::Index>(k)];
          if (ratio < t_partial) {
            t_partial = ratio;
            drop = static_cast<int>(k);
          }
        }
      }

      const double z_sq = dir.primal.squaredNorm();
      const bool dependent = z_sq <= 1e-24 * std::max(1.0, normals[p].squaredNorm());
      const double t_full = dependent ? inf : -slack / z_sq;

      const double t = std::min(t_partial, t_full);
      if (t == inf) throw InfeasibleError("barrier constraints are inconsistent");

      if (!dependent) sol.u += t * dir.primal;
      for (std::size_t k = 0; k < active.size(); ++k) lambda[k] -= t * dir.dual[static_cast<Eigen::Index>(k)];
      lambda_p += t;

      if (t == t_full) {
        active.push_back(p);
        lambda.push_back(lambda_p);
        break;
      }
      active.erase(active.begin() + drop);
      lambda.erase(lambda.begin() + drop);
    }
  }

  for (std::size_t k = 0; k < active.size(); ++k) sol.multipliers[active[k]] = std::max(0.0, lambda[k]);
  if (!sol.u.allFinite()) throw NumericalError("QP produced a non-finite solution");
  return sol;
}

KktResiduals kktResiduals(const Eigen::VectorXd& u_nom, const std::vector<ConstraintRow>& rows,
                          const QpSolution& solution) {
  const int n = static_cast<int>(u_nom.size());
  KktResiduals res;
  Eigen::VectorXd grad = solution.u - u_nom;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const double lambda = solution.multipliers[static_cast<Eigen::Index>(k)];
    const double slack = rows[k].evaluate(solution.u);
    grad -= lambda * rows[k].dense(n);
    res.primal_violation = std::max(res.primal_violation, -slack);
    res.dual_violation = std::max(res.dual_violation, -lambda);
    res.complementarity = std::max(res.complementarity, std::abs(lambda * slack));
  }
  res.stationarity = grad.lpNorm<Eigen::Infinity>();
  return res;
}

}  // namespace ellcbf
