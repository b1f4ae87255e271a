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


#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "flowtoll/errors.h"
#include "flowtoll/private_opt.h"

namespace flowtoll {
namespace {

constexpr double kPositive = 1e-9;
constexpr double kMassTolerance = 1e-6;

// Finds a directed cycle among edges with residual above kPositive.
// Returns its edges in order, or an empty vector.
std::vector<int> FindCycle(const Network& network, const Vector& residual) {
  const int v_count = network.num_vertices();
  std::vector<int> state(v_count, 0);  // 0 new, 1 on stack, 2 finished
  std::vector<int> via(v_count, -1);
  for (int root = 0; root < v_count; ++root) {
    if (state[root] != 0) continue;
    // Iterative DFS keeping the next out-edge position per vertex.
    std::vector<std::pair<int, std::size_t>> stack{{root, 0}};
    state[root] = 1;
    while (!stack.empty()) {
      auto& [u, pos] = stack.back();
      const auto& outs = network.out_edges(u);
      if (pos == outs.size()) {
        state[u] = 2;
        stack.pop_back();
        continue;
      }
      const int e = outs[pos++];
      if (residual[e] <= kPositive) continue;
      const int w = network.edge(e).head;
      if (state[w] == 1) {
        std::vector<int> cycle{e};
        for (int v = u; v != w; v = network.edge(via[v]).tail) {
          cycle.push_back(via[v]);
        }
        std::reverse(cycle.begin(), cycle.end());
        return cycle;
      }
      if (state[w] == 0) {
        state[w] = 1;
        via[w] = e;
        stack.push_back({w, 0});
      }
    }
  }
  return {};
}

// Depth-first search from the source along the smallest positive edge
// index, backtracking out of dead ends.
std::vector<int> FindPositivePath(const Network& network, const Demand& demand,
                                  const Vector& residual) {
  const int v_count = network.num_vertices();
  std::vector<char> blocked(v_count, 0);
  std::vector<int> path;
  std::vector<std::pair<int, std::size_t>> stack{{demand.source, 0}};
  blocked[demand.source] = 1;
  while (!stack.empty()) {
    auto& [u, pos] = stack.back();
    if (u == demand.destination) return path;
    const auto& outs = network.out_edges(u);
    if (pos == outs.size()) {
      stack.pop_back();
      if (!path.empty()) path.pop_back();
      continue;
    }
    const int e = outs[pos++];
    const int w = network.edge(e).head;
    if (residual[e] <= kPositive || blocked[w]) continue;
    blocked[w] = 1;
    path.push_back(e);
    stack.push_back({w, 0});
  }
  return {};
}

}  // namespace

PathDecomposition DecomposePaths(const Network& network, const Demand& demand,
                                 const Vector& x_i) {
  PathDecomposition out;
  if (demand.source == demand.destination) {
    out.paths.emplace_back();
    out.weights.push_back(1.0);
    out.cancelled_cycle_mass = x_i.cwiseMax(0.0).sum();
    return out;
  }
  Vector residual = x_i.cwiseMax(0.0).cwiseMin(1.0);
  for (std::vector<int> cycle = FindCycle(network, residual); !cycle.empty();
       cycle = FindCycle(network, residual)) {
    double w = kInfinity;
    for (int e : cycle) w = std::min(w, residual[e]);
    for (int e : cycle) residual[e] -= w;
    out.cancelled_cycle_mass += w;
  }
  double total = 0.0;
  for (std::vector<int> path = FindPositivePath(network, demand, residual);
       !path.empty(); path = FindPositivePath(network, demand, residual)) {
    double w = kInfinity;
    for (int e : path) w = std::min(w, residual[e]);
    for (int e : path) residual[e] -= w;
    out.paths.push_back(path);
    out.weights.push_back(w);
    total += w;
  }
  double source_mass = 0.0;
  for (int e : network.out_edges(demand.source)) source_mass += residual[e];
  for (int e : network.in_edges(demand.source)) source_mass -= residual[e];
  if (source_mass > kMassTolerance || out.paths.empty()) {
    throw DecompositionError("path stripping stalled with mass " +
                             std::to_string(std::max(source_mass, 1.0 - total)) +
                             " left at the source");
  }
  out.discarded_mass = std::max(0.0, 1.0 - total);
  for (double& w : out.weights) w /= total;
  return out;
}

Path PsrrForDemand(const Network& network, const Demand& demand,
                   const Vector& x_i, Rng& rng) {
  if (ConservationResidual(network, demand, x_i) > kMassTolerance) {
    throw FeasibilityError("fractional flow violates conservation by more "
                           "than 1e-6");
  }
  const PathDecomposition d = DecomposePaths(network, demand, x_i);
  const double u = rng.Uniform01();
  double acc = 0.0;
  for (std::size_t j = 0; j < d.paths.size(); ++j) {
    acc += d.weights[j];
    if (u < acc) return d.paths[j];
  }
  return d.paths.back();
}

Path Psrr(const RoutingInstance& inst, int i, const Vector& x_i, Rng& rng) {
  if (i < 0 || i >= inst.num_players()) {
    throw std::out_of_range("player index out of range");
  }
  return PsrrForDemand(inst.network(), inst.demand(i), x_i, rng);
}

double RoundingGapBound(int m, double gamma, int n, double beta) {
  return m * (gamma + 1.0) *
         std::sqrt(2.0 * n * std::max(0.0, std::log(m / beta)));
}

}  // namespace flowtoll
