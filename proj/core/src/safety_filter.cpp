#include "ellcbf/safety_filter.hpp"

#include <numbers>
#include <stdexcept>
#include <string>

#include "ellcbf/distance_oracle.hpp"
#include "ellcbf/errors.hpp"

namespace ellcbf {

namespace {

double scanAngle(int k) {
  constexpr double kSpacing = 2.0 * std::numbers::pi / kClearanceScanSamples;
  return -std::numbers::pi + (k + 1) * kSpacing;
}

[[noreturn]] void throwOverlap(int i, int j) {
  throw InitializationError(i, j,
                            "agents " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
                                " overlap: no separating supporting line exists");
}

}  // namespace

void PairCertificate::refresh(std::span<const AgentState> states, std::span<const EllipseShape> shapes) {
  const auto eval = evaluateClearance(states[i], shapes[i], states[j], shapes[j], phi);
  h = eval.h;
  grad = eval.grad;
}

EnsembleLayout::EnsembleLayout(int agents) : n_(agents) {
  if (agents < 1) throw std::invalid_argument("ensemble needs at least one agent");
}

int EnsembleLayout::pairIndex(int i, int j) const {
  if (!(0 <= i && i < j && j < n_)) throw std::out_of_range("pair index requires 0 <= i < j < n");
  // Pairs owned by agents 0..i-1 come first.
  return i * (2 * n_ - i - 1) / 2 + (j - i - 1);
}

SupportLineParam initializePhi(const AgentState& state_i, const EllipseShape& shape_i,
                               const AgentState& state_j, const EllipseShape& shape_j, int i, int j) {
  if (!areDisjoint(state_i, shape_i, state_j, shape_j)) throwOverlap(i, j);

  double best_phi = scanAngle(0);
  double best_h = signedClearance(state_i, shape_i, state_j, shape_j, SupportLineParam(best_phi));
  for (int k = 1; k < kClearanceScanSamples; ++k) {
    const double phi = scanAngle(k);
    const double h = signedClearance(state_i, shape_i, state_j, shape_j, SupportLineParam(phi));
    if (h > best_h) {
      best_h = h;
      best_phi = phi;
    }
  }
  // Disjoint pairs whose separating cone is narrower than the scan spacing.
  if (!(best_h > 0.0)) {
    const DualResult dual = maximizeClearance(state_i, shape_i, state_j, shape_j, best_phi);
    if (!(dual.h_star > 0.0)) throwOverlap(i, j);
    best_phi = dual.phi_star;
  }
  return SupportLineParam(best_phi);
}

SupportLineParam randomSeparatingPhi(const AgentState& state_i, const EllipseShape& shape_i,
                                     const AgentState& state_j, const EllipseShape& shape_j,
                                     std::mt19937_64& rng, int i, int j) {
  std::vector<double> candidates;
  for (int k = 0; k < kClearanceScanSamples; ++k) {
    const double phi = scanAngle(k);
    if (signedClearance(state_i, shape_i, state_j, shape_j, SupportLineParam(phi)) > 0.0) {
      candidates.push_back(phi);
    }
  }
  if (candidates.empty()) return initializePhi(state_i, shape_i, state_j, shape_j, i, j);
  std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
  return SupportLineParam(candidates[pick(rng)]);
}

double phiNominalInput(const PairCertificate& cert, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("gradient-ascent gain must be positive");
  return gamma * cert.grad.d_phi;
}

ConstraintRow buildConstraint(const PairCertificate& cert, double alpha_gain, const EnsembleLayout& layout) {
  ConstraintRow row;
  row.coeffs.reserve(7);
  const Eigen::Vector3d gi = cert.grad.agentI();
  const Eigen::Vector3d gj = cert.grad.agentJ();
  const int si = layout.agentSlot(cert.i);
  const int sj = layout.agentSlot(cert.j);
  for (int k = 0; k < 3; ++k) row.coeffs.emplace_back(si + k, gi[k]);
  for (int k = 0; k < 3; ++k) row.coeffs.emplace_back(sj + k, gj[k]);
  row.coeffs.emplace_back(layout.phiSlot(cert.i, cert.j), cert.grad.d_phi);
  row.rhs_alpha = alpha_gain * cert.h;
  return row;
}

std::vector<PairCertificate> makeCertificates(std::span<const AgentState> states,
                                              std::span<const EllipseShape> shapes) {
  const int n = static_cast<int>(states.size());
  std::vector<PairCertificate> certs;
  certs.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      PairCertificate cert;
      cert.i = i;
      cert.j = j;
      cert.phi = initializePhi(states[i], shapes[i], states[j], shapes[j], i, j);
      cert.refresh(states, shapes);
      certs.push_back(cert);
    }
  }
  return certs;
}

FilterOutput filter(std::span<const AgentState> states, std::span<const EllipseShape> shapes,
                    std::vector<PairCertificate>& certs, std::span<const Eigen::Vector3d> u_nom_agents,
                    const FilterGains& gains) {
  const int n = static_cast<int>(states.size());
  if (shapes.size() != states.size() || u_nom_agents.size() != states.size()) {
    throw std::invalid_argument("states, shapes and nominal inputs must have equal length");
  }
  const EnsembleLayout layout(n);
  if (static_cast<int>(certs.size()) != layout.pairs()) {
    throw std::invalid_argument("one certificate per agent pair is required");
  }

  FilterOutput out;
  out.u_nominal = Eigen::VectorXd::Zero(layout.dimension());
  for (int a = 0; a < n; ++a) out.u_nominal.segment<3>(layout.agentSlot(a)) = u_nom_agents[a];

  std::vector<ConstraintRow> rows;
  rows.reserve(certs.size());
  for (std::size_t k = 0; k < certs.size(); ++k) {
    PairCertificate& cert = certs[k];
    if (layout.pairIndex(cert.i, cert.j) != static_cast<int>(k)) {
      throw std::invalid_argument("certificates must follow the ensemble pair ordering");
    }
    cert.refresh(states, shapes);
    out.u_nominal[layout.phiSlot(cert.i, cert.j)] = phiNominalInput(cert, gains.gamma);
    rows.push_back(buildConstraint(cert, gains.alpha_gain, layout));
  }

  const QpSolution sol = solveQp(out.u_nominal, rows);
  out.u_filtered = sol.u;
  out.active_constraints = sol.active.size();
  out.agent_inputs.resize(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) out.agent_inputs[a] = sol.u.segment<3>(layout.agentSlot(a));
  out.phi_rates.resize(certs.size());
  for (std::size_t k = 0; k < certs.size(); ++k) {
    out.phi_rates[k] = sol.u[layout.phiSlot(certs[k].i, certs[k].j)];
  }
  return out;
}

}  // namespace ellcbf
