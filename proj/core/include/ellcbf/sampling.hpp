#pragma once

#include <random>

#include "ellcbf/geometry.hpp"

namespace ellcbf {

/// A posed pair of ellipses.
struct EllipsePair {
  AgentState state_i;
  EllipseShape shape_i;
  AgentState state_j;
  EllipseShape shape_j;
};

struct PairSampling {
  double min_axis = 0.1;
  double max_axis = 1.0;
  double center_extent = 3.0;  // centers uniform in [-extent, extent]^2
};

/// Semi-axes uniform in [min_axis, max_axis] (sorted), any heading.
EllipsePair randomPair(std::mt19937_64& rng, const PairSampling& sampling = {});

/// Rejection-samples randomPair until the primal solver reports a positive
/// distance.
EllipsePair randomDisjointPair(std::mt19937_64& rng, const PairSampling& sampling = {});

}  // namespace ellcbf
