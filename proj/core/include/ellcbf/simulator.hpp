#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ellcbf/geometry.hpp"
#include "ellcbf/safety_filter.hpp"

namespace ellcbf {

struct AgentSpec {
  EllipseShape shape;
  AgentState initial;
  std::optional<Vec2> goal;
  std::optional<double> goal_theta;
};

enum class PhiInitMode { Scan, Random };

struct ScenarioConfig {
  std::vector<AgentSpec> agents;
  double alpha_gain = 10.0;
  double gamma = 20.0;
  double dt = 1e-3;
  double duration = 4.0;
  double nominal_gain = 1.0;
  std::uint64_t seed = 1;
  PhiInitMode phi_init = PhiInitMode::Scan;
  /// Explicit initial line angles keyed by zero-based pair (i, j), i < j.
  std::map<std::pair<int, int>, double> phi_overrides;
  /// Start of the post-transient window used for summary statistics.
  double transient = 0.5;

  int stepCount() const;
};

/// Thrown by validateScenario; `field` names the offending key.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::string field, const std::string& what)
      : std::runtime_error(what), field(std::move(field)) {}

  std::string field;
};

/// Checks gains, timing, shapes and that all agents start pairwise disjoint.
void validateScenario(const ScenarioConfig& config);

/// Materializes every default: goals reflected through the centroid of the
/// initial positions, goal headings equal to the initial headings, and an
/// explicit initial phi for every pair.
ScenarioConfig resolveScenario(const ScenarioConfig& config);

/// Proportional go-to-goal input; the heading term is zero without a goal
/// heading.
Eigen::Vector3d nominalAgentInput(const AgentState& state, const Vec2& goal, std::optional<double> goal_heading,
                                  double gain);

struct PairRecord {
  double phi = 0.0;
  double h = 0.0;
  double w_star = 0.0;
  double gap = 0.0;  // w_star - h
  bool oracle_converged = true;
};

struct StepRecord {
  double t = 0.0;
  std::vector<AgentState> states;
  std::vector<PairRecord> pairs;
  std::vector<Eigen::Vector3d> inputs;
  std::size_t active_constraints = 0;
};

struct SafetyEvent {
  double t = 0.0;
  int i = 0;
  int j = 0;
  double h = 0.0;
  double w_star = 0.0;
};

enum class AbortReason { None, Infeasible, Numerical };

struct SimLog {
  int agents = 0;
  double dt = 0.0;
  std::vector<std::pair<int, int>> pairs;  // zero-based (i, j), layout order
  std::vector<StepRecord> records;
  std::vector<SafetyEvent> violations;
  AbortReason abort_reason = AbortReason::None;
  std::string abort_message;

  bool aborted() const { return abort_reason != AbortReason::None; }
};

/// Closed-loop ensemble: agent poses, supporting-line certificates and the
/// safety filter, advanced by explicit Euler.
class Simulation {
 public:
  /// config must already be resolved (see resolveScenario).
  explicit Simulation(ScenarioConfig config);

  const std::vector<AgentState>& states() const { return states_; }
  const std::vector<PairCertificate>& certificates() const { return certs_; }
  double time() const { return static_cast<double>(steps_) * config_.dt; }

  /// Evaluates the oracle and filter at the current state, then integrates
  /// x' = x + dt u and phi' = wrap(phi + dt u_phi). Returns the record of the
  /// pre-step state together with the applied inputs.
  StepRecord step();

 private:
  ScenarioConfig config_;
  std::vector<EllipseShape> shapes_;
  std::vector<Vec2> goals_;
  std::vector<std::optional<double>> goal_headings_;
  std::vector<AgentState> states_;
  std::vector<PairCertificate> certs_;
  std::vector<std::optional<Vec2>> warm_starts_;
  long steps_ = 0;
};

/// Runs duration/dt steps. Filter failures end the run early with a flagged
/// partial log; unsafe steps are recorded, not raised.
SimLog run(const ScenarioConfig& config);

/// Threshold below which a logged clearance counts as a violation.
inline constexpr double kClearanceViolationTolerance = 1e-9;

}  // namespace ellcbf
