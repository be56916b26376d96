#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ellcbf/geometry.hpp"
#include "ellcbf/qp.hpp"

namespace ellcbf {

/// Supporting-line certificate of one agent pair (i < j); the line lives on
/// agent i. h and grad always describe (phi, states) at the last refresh.
struct PairCertificate {
  int i = 0;
  int j = 1;
  SupportLineParam phi;
  double h = 0.0;
  ClearanceGradient grad;

  void refresh(std::span<const AgentState> states, std::span<const EllipseShape> shapes);
};

/// Index map of the stacked decision vector
///   [u_1, ..., u_n, u_phi(1,2), u_phi(1,3), ..., u_phi(n-1,n)]
/// with three slots per agent followed by one slot per unordered pair.
class EnsembleLayout {
 public:
  explicit EnsembleLayout(int agents);

  int agents() const { return n_; }
  int pairs() const { return n_ * (n_ - 1) / 2; }
  int dimension() const { return 3 * n_ + pairs(); }

  int agentSlot(int agent) const { return 3 * agent; }
  /// Lexicographic position of pair (i, j), i < j.
  int pairIndex(int i, int j) const;
  int phiSlot(int i, int j) const { return 3 * n_ + pairIndex(i, j); }

 private:
  int n_;
};

struct FilterGains {
  double alpha_gain = 10.0;  // alpha(h) = alpha_gain * h
  double gamma = 20.0;       // gradient-ascent gain on phi
};

/// Scan-maximizer supporting line with positive clearance. Throws
/// InitializationError (carrying i and j) when the pair overlaps.
SupportLineParam initializePhi(const AgentState& state_i, const EllipseShape& shape_i,
                               const AgentState& state_j, const EllipseShape& shape_j, int i = 0, int j = 1);

/// Uniform draw among the scan angles with positive clearance.
SupportLineParam randomSeparatingPhi(const AgentState& state_i, const EllipseShape& shape_i,
                                     const AgentState& state_j, const EllipseShape& shape_j,
                                     std::mt19937_64& rng, int i = 0, int j = 1);

/// gamma * dh/dphi.
double phiNominalInput(const PairCertificate& cert, double gamma);

/// Linearized barrier condition of one pair:
///   dh/dx_i . u_i + dh/dx_j . u_j + dh/dphi u_phi + alpha_gain h >= 0.
ConstraintRow buildConstraint(const PairCertificate& cert, double alpha_gain, const EnsembleLayout& layout);

struct FilterOutput {
  std::vector<Eigen::Vector3d> agent_inputs;
  std::vector<double> phi_rates;  // aligned with the certificate list
  Eigen::VectorXd u_nominal;
  Eigen::VectorXd u_filtered;
  std::size_t active_constraints = 0;
};

/// Refreshes every certificate from the current states, stacks the nominal
/// inputs (agent inputs followed by gradient-ascent phi rates), and solves one
/// ensemble QP. certs must hold every pair exactly once, ordered as in
/// EnsembleLayout.
FilterOutput filter(std::span<const AgentState> states, std::span<const EllipseShape> shapes,
                    std::vector<PairCertificate>& certs, std::span<const Eigen::Vector3d> u_nom_agents,
                    const FilterGains& gains);

/// Certificates for all pairs, ordered as in EnsembleLayout, each initialized
/// with initializePhi.
std::vector<PairCertificate> makeCertificates(std::span<const AgentState> states,
                                              std::span<const EllipseShape> shapes);

}  // namespace ellcbf
