#include "ellcbf/simulator.hpp"

#include <cmath>
#include <random>

#include "ellcbf/distance_oracle.hpp"
#include "ellcbf/errors.hpp"

namespace ellcbf {

namespace {

// Warm-started projections converge within a few dozen iterations unless the
// pair is in near contact, where the boundary-angle fallback takes over.
constexpr int kOracleIterationBudget = 200;

}  // namespace

int ScenarioConfig::stepCount() const { return static_cast<int>(std::llround(duration / dt)); }

void validateScenario(const ScenarioConfig& config) {
  const auto require = [](bool ok, const char* field, const char* message) {
    if (!ok) throw ScenarioError(field, std::string(field) + ": " + message);
  };
  require(std::isfinite(config.dt) && config.dt > 0.0, "dt", "must be > 0");
  require(std::isfinite(config.duration) && config.duration >= config.dt, "duration", "must be >= dt");
  require(std::isfinite(config.alpha_gain) && config.alpha_gain > 0.0, "alpha_gain", "must be > 0");
  require(std::isfinite(config.gamma) && config.gamma > 0.0, "gamma", "must be > 0");
  require(std::isfinite(config.nominal_gain) && config.nominal_gain > 0.0, "nominal_gain", "must be > 0");
  require(std::isfinite(config.transient) && config.transient >= 0.0, "transient", "must be >= 0");
  require(config.agents.size() >= 2, "agents", "at least two agents are required");

  const int n = static_cast<int>(config.agents.size());
  for (int a = 0; a < n; ++a) {
    const EllipseShape& s = config.agents[a].shape;
    if (!(s.q_minor > 0.0 && s.q_major >= s.q_minor && std::isfinite(s.q_major))) {
      throw ScenarioError("q_major", "agent " + std::to_string(a + 1) + ": semi-axes must satisfy q_major >= q_minor > 0");
    }
  }
  for (const auto& [pair, phi] : config.phi_overrides) {
    if (!(0 <= pair.first && pair.first < pair.second && pair.second < n) || !std::isfinite(phi)) {
      const std::string field = "phi_" + std::to_string(pair.first + 1) + "_" + std::to_string(pair.second + 1);
      throw ScenarioError(field, field + ": phi override names an invalid pair or value");
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const auto& ai = config.agents[i];
      const auto& aj = config.agents[j];
      if (!areDisjoint(ai.initial, ai.shape, aj.initial, aj.shape)) {
        throw ScenarioError("agents", "agents " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
                                          " overlap at t = 0");
      }
    }
  }
}

ScenarioConfig resolveScenario(const ScenarioConfig& config) {
  validateScenario(config);
  ScenarioConfig out = config;
  const int n = static_cast<int>(out.agents.size());

  Vec2 centroid = Vec2::Zero();
  for (const auto& agent : out.agents) centroid += agent.initial.position();
  centroid /= static_cast<double>(n);
  for (auto& agent : out.agents) {
    if (!agent.goal) agent.goal = 2.0 * centroid - agent.initial.position();
    if (!agent.goal_theta) agent.goal_theta = agent.initial.theta();
  }

  std::mt19937_64 rng(out.seed);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const auto key = std::make_pair(i, j);
      const auto& ai = out.agents[i];
      const auto& aj = out.agents[j];
      if (auto it = out.phi_overrides.find(key); it != out.phi_overrides.end()) {
        it->second = wrapAngle(it->second);
        continue;
      }
      const SupportLineParam phi = out.phi_init == PhiInitMode::Random
                                       ? randomSeparatingPhi(ai.initial, ai.shape, aj.initial, aj.shape, rng, i, j)
                                       : initializePhi(ai.initial, ai.shape, aj.initial, aj.shape, i, j);
      out.phi_overrides[key] = phi.phi();
    }
  }
  return out;
}

Eigen::Vector3d nominalAgentInput(const AgentState& state, const Vec2& goal, std::optional<double> goal_heading,
                                  double gain) {
  if (!(gain > 0.0)) throw std::invalid_argument("nominal gain must be positive");
  const Vec2 v = gain * (goal - state.position());
  const double omega = goal_heading ? gain * wrapAngle(*goal_heading - state.theta()) : 0.0;
  return {v.x(), v.y(), omega};
}

Simulation::Simulation(ScenarioConfig config) : config_(std::move(config)) {
  const int n = static_cast<int>(config_.agents.size());
  for (const auto& agent : config_.agents) {
    shapes_.push_back(agent.shape);
    states_.push_back(agent.initial);
    goals_.push_back(agent.goal.value_or(agent.initial.position()));
    goal_headings_.push_back(agent.goal_theta);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      PairCertificate cert;
      cert.i = i;
      cert.j = j;
      const auto it = config_.phi_overrides.find({i, j});
      cert.phi = it != config_.phi_overrides.end()
                     ? SupportLineParam(it->second)
                     : initializePhi(states_[i], shapes_[i], states_[j], shapes_[j], i, j);
      cert.refresh(states_, shapes_);
      if (!(cert.h > 0.0)) {
        throw InitializationError(i, j, "initial supporting line of agents " + std::to_string(i + 1) + " and " +
                                            std::to_string(j + 1) + " does not separate them");
      }
      certs_.push_back(cert);
    }
  }
  warm_starts_.assign(certs_.size(), std::nullopt);
}

StepRecord Simulation::step() {
  const std::size_t n = states_.size();
  StepRecord record;
  record.t = time();
  record.states = states_;

  std::vector<Eigen::Vector3d> u_nom(n);
  for (std::size_t a = 0; a < n; ++a) {
    u_nom[a] = nominalAgentInput(states_[a], goals_[a], goal_headings_[a], config_.nominal_gain);
  }
  const FilterOutput out = filter(states_, shapes_, certs_, u_nom, {config_.alpha_gain, config_.gamma});

  record.pairs.reserve(certs_.size());
  for (std::size_t k = 0; k < certs_.size(); ++k) {
    const PairCertificate& cert = certs_[k];
    DistanceOptions options;
    options.warm_start = warm_starts_[k];
    options.max_iterations = kOracleIterationBudget;
    const DistanceResult dist = certifiedDistance(states_[cert.i], shapes_[cert.i], states_[cert.j], shapes_[cert.j], options);
    warm_starts_[k] = dist.eta;
    PairRecord pr;
    pr.phi = cert.phi.phi();
    pr.h = cert.h;
    pr.w_star = dist.intersecting ? 0.0 : dist.w_star;
    pr.gap = pr.w_star - pr.h;
    pr.oracle_converged = dist.converged;
    record.pairs.push_back(pr);
  }
  record.inputs = out.agent_inputs;
  record.active_constraints = out.active_constraints;

  for (std::size_t a = 0; a < n; ++a) states_[a].integrate(out.agent_inputs[a], config_.dt);
  for (std::size_t k = 0; k < certs_.size(); ++k) certs_[k].phi.advance(out.phi_rates[k], config_.dt);
  // Keep certificates synchronized with the post-step poses.
  for (auto& cert : certs_) cert.refresh(states_, shapes_);
  ++steps_;
  return record;
}

SimLog run(const ScenarioConfig& config) {
  const ScenarioConfig resolved = resolveScenario(config);
  Simulation sim(resolved);

  SimLog log;
  log.agents = static_cast<int>(resolved.agents.size());
  log.dt = resolved.dt;
  for (const auto& cert : sim.certificates()) log.pairs.emplace_back(cert.i, cert.j);

  const int steps = resolved.stepCount();
  log.records.reserve(static_cast<std::size_t>(steps));
  for (int k = 0; k < steps; ++k) {
    StepRecord record;
    try {
      record = sim.step();
    } catch (const InfeasibleError& e) {
      log.abort_reason = AbortReason::Infeasible;
      log.abort_message = e.what();
      break;
    } catch (const NumericalError& e) {
      log.abort_reason = AbortReason::Numerical;
      log.abort_message = e.what();
      break;
    }
    for (std::size_t p = 0; p < record.pairs.size(); ++p) {
      const PairRecord& pr = record.pairs[p];
      const bool collided = pr.w_star <= 0.0;
      if (collided || pr.h < -kClearanceViolationTolerance) {
        log.violations.push_back({record.t, log.pairs[p].first, log.pairs[p].second, pr.h, pr.w_star});
      }
    }
    log.records.push_back(std::move(record));
  }
  return log;
}

}  // namespace ellcbf
