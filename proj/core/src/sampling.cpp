#include "ellcbf/sampling.hpp"

#include <numbers>
#include <utility>

#include "ellcbf/distance_oracle.hpp"

namespace ellcbf {

namespace {

EllipseShape randomShape(std::mt19937_64& rng, const PairSampling& sampling) {
  std::uniform_real_distribution<double> axis(sampling.min_axis, sampling.max_axis);
  double a = axis(rng);
  double b = axis(rng);
  if (a < b) std::swap(a, b);
  return EllipseShape::make(a, b);
}

AgentState randomPose(std::mt19937_64& rng, const PairSampling& sampling) {
  std::uniform_real_distribution<double> coord(-sampling.center_extent, sampling.center_extent);
  std::uniform_real_distribution<double> heading(-std::numbers::pi, std::numbers::pi);
  const double x = coord(rng);
  const double y = coord(rng);
  return AgentState(x, y, heading(rng));
}

}  // namespace

EllipsePair randomPair(std::mt19937_64& rng, const PairSampling& sampling) {
  EllipsePair pair;
  pair.shape_i = randomShape(rng, sampling);
  pair.state_i = randomPose(rng, sampling);
  pair.shape_j = randomShape(rng, sampling);
  pair.state_j = randomPose(rng, sampling);
  return pair;
}

EllipsePair randomDisjointPair(std::mt19937_64& rng, const PairSampling& sampling) {
  for (;;) {
    EllipsePair pair = randomPair(rng, sampling);
    // Selected by the primal solver so that dual-side checks stay independent.
    const DistanceResult d = minDistance(pair.state_i, pair.shape_i, pair.state_j, pair.shape_j);
    if (!d.intersecting && d.w_star > 0.0) return pair;
  }
}

}  // namespace ellcbf
