// Copyright 2026 The FlowToll Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FLOWTOLL_GRAPH_ALGORITHMS_H_
#define FLOWTOLL_GRAPH_ALGORITHMS_H_

#include <cstddef>
#include <optional>
#include <vector>

#include "flowtoll/game.h"

namespace flowtoll {

struct WeightedPath {
  Path path;
  double cost = 0.0;
};

// Dijkstra with non-negative edge weights. Among equal-cost labels the
// smaller edge index wins, so the result is deterministic.
std::optional<WeightedPath> ShortestPath(const Network& network,
                                         const Vector& weights, int source,
                                         int destination);

// Per-edge flow of the uniform distribution over all fewest-hop paths.
Vector UniformShortestHopFlow(const Network& network, const Demand& demand);

// All simple source-destination paths in DFS order (ascending edge index).
// Throws ResourceCapError when more than `cap` paths exist.
std::vector<Path> EnumerateSimplePaths(const Network& network,
                                       const Demand& demand, std::size_t cap);

// Minimum of cost . x over the fractional flow polytope of one demand
// (unit flow, 0 <= x <= 1). Costs may be negative; the optimum is integral.
struct LinearFlowSolution {
  Vector x;
  double value = 0.0;
};
LinearFlowSolution MinCostUnitFlow(const Network& network,
                                   const Demand& demand, const Vector& cost);

}  // namespace flowtoll

#endif  // FLOWTOLL_GRAPH_ALGORITHMS_H_
