#include <benchmark/benchmark.h>

#include <numbers>
#include <random>
#include <vector>

#include "ellcbf/distance_oracle.hpp"
#include "ellcbf/qp.hpp"
#include "ellcbf/reference/oracles.hpp"
#include "ellcbf/sampling.hpp"
#include "ellcbf/simulator.hpp"

using namespace ellcbf;

namespace {

std::vector<EllipsePair> pairs(int count) {
  std::mt19937_64 rng(5);
  std::vector<EllipsePair> out;
  for (int k = 0; k < count; ++k) out.push_back(randomDisjointPair(rng));
  return out;
}

void BM_ClearanceAndGradient(benchmark::State& state) {
  const auto ps = pairs(64);
  std::size_t k = 0;
  for (auto _ : state) {
    const EllipsePair& p = ps[k++ % ps.size()];
    const SupportLineParam phi(0.1 * static_cast<double>(k % 63));
    benchmark::DoNotOptimize(signedClearance(p.state_i, p.shape_i, p.state_j, p.shape_j, phi));
    benchmark::DoNotOptimize(clearanceGradient(p.state_i, p.shape_i, p.state_j, p.shape_j, phi));
  }
}
BENCHMARK(BM_ClearanceAndGradient);

void BM_CertifiedDistance(benchmark::State& state) {
  const auto ps = pairs(64);
  std::size_t k = 0;
  for (auto _ : state) {
    const EllipsePair& p = ps[k++ % ps.size()];
    benchmark::DoNotOptimize(certifiedDistance(p.state_i, p.shape_i, p.state_j, p.shape_j));
  }
}
BENCHMARK(BM_CertifiedDistance);

void BM_MaximizeClearance(benchmark::State& state) {
  const auto ps = pairs(64);
  std::size_t k = 0;
  for (auto _ : state) {
    const EllipsePair& p = ps[k++ % ps.size()];
    benchmark::DoNotOptimize(maximizeClearance(p.state_i, p.shape_i, p.state_j, p.shape_j));
  }
}
BENCHMARK(BM_MaximizeClearance);

void BM_SolveQp(benchmark::State& state) {
  std::mt19937_64 rng(9);
  std::vector<reference::QpInstance> qs;
  for (int k = 0; k < 64; ++k) qs.push_back(reference::randomQpInstance(rng));
  std::size_t k = 0;
  for (auto _ : state) {
    const auto& q = qs[k++ % qs.size()];
    benchmark::DoNotOptimize(solveQp(q.u_nom, q.rows));
  }
}
BENCHMARK(BM_SolveQp);

// One closed-loop step of the four-agent crossing.
void BM_FourAgentStep(benchmark::State& state) {
  ScenarioConfig c;
  c.nominal_gain = 0.5;
  const double q = std::numbers::pi / 4;
  c.agents = {{EllipseShape::make(0.3, 0.15), AgentState(-0.1, 1.1, -q), {}, {}},
              {EllipseShape::make(0.4, 0.2), AgentState(1.9, -1.1, -q), {}, {}},
              {EllipseShape::make(0.4, 0.2), AgentState(-0.1, -1.1, 5 * q), {}, {}},
              {EllipseShape::make(0.6, 0.3), AgentState(1.9, 1.1, 5 * q), {}, {}}};
  const ScenarioConfig resolved = resolveScenario(c);
  Simulation sim(resolved);
  for (auto _ : state) {
    if (sim.time() >= resolved.duration) {
      state.PauseTiming();
      sim = Simulation(resolved);
      state.ResumeTiming();
    }
    benchmark::DoNotOptimize(sim.step());
  }
}
BENCHMARK(BM_FourAgentStep);

}  // namespace

BENCHMARK_MAIN();
