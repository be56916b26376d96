#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace ellcbf {

/// One linear inequality coeffs . u + rhs_alpha >= 0 over the stacked
/// decision vector. Coefficients are stored sparsely as (index, value).
struct ConstraintRow {
  std::vector<std::pair<int, double>> coeffs;
  double rhs_alpha = 0.0;

  double evaluate(const Eigen::VectorXd& u) const;
  Eigen::VectorXd dense(int dimension) const;
  double coefficientNorm() const;
};

struct QpSolution {
  Eigen::VectorXd u;
  /// Lagrange multiplier for every row (zero for inactive rows).
  Eigen::VectorXd multipliers;
  std::vector<int> active;
  int iterations = 0;
};

struct QpOptions {
  double activity_tolerance = 1e-10;
  int max_iterations = 500;
};

/// Minimizes |u - u_nom|^2 subject to every row, i.e. the Euclidean
/// projection of u_nom onto a polyhedron.
///
/// Dual active-set method (Goldfarb-Idnani with identity Hessian): starts at
/// the unconstrained minimizer u_nom and adds the most violated row at each
/// outer iteration, dropping rows whose multipliers would turn negative.
/// Step directions come from a QR factorization of the active normals.
/// Throws InfeasibleError when the rows are inconsistent.
QpSolution solveQp(const Eigen::VectorXd& u_nom, const std::vector<ConstraintRow>& rows,
                   const QpOptions& options = {});

/// Closed-form solution for a single row: the projection onto a half-space.
Eigen::VectorXd projectOntoHalfSpace(const Eigen::VectorXd& u_nom, const ConstraintRow& row);

struct KktResiduals {
  double stationarity = 0.0;
  double primal_violation = 0.0;     // max(0, -(a.u + b))
  double dual_violation = 0.0;       // max(0, -lambda)
  double complementarity = 0.0;      // max |lambda (a.u + b)|

  double worst() const;
};

/// Residuals of  u - u_nom - sum lambda_k a_k = 0,  a.u + b >= 0,
/// lambda >= 0,  lambda (a.u + b) = 0.
KktResiduals kktResiduals(const Eigen::VectorXd& u_nom, const std::vector<ConstraintRow>& rows,
                          const QpSolution& solution);

}  // namespace ellcbf
