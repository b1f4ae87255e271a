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

#include "flowtoll/graph_algorithms.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <string>
#include <utility>

#include "flowtoll/errors.h"

namespace flowtoll {

std::optional<WeightedPath> ShortestPath(const Network& network,
                                         const Vector& weights, int source,
                                         int destination) {
  if (source == destination) return WeightedPath{};
  const int n = network.num_vertices();
  std::vector<double> dist(n, kInfinity);
  std::vector<int> pred(n, -1);
  std::vector<char> done(n, 0);
  using Label = std::pair<double, int>;
  std::priority_queue<Label, std::vector<Label>, std::greater<Label>> heap;
  dist[source] = 0.0;
  heap.push({0.0, source});
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (done[u]) continue;
    done[u] = 1;
    if (u == destination) break;
    for (int e : network.out_edges(u)) {
      const int w = network.edge(e).head;
      const double cand = d + weights[e];
      if (!done[w] && cand < dist[w]) {
        dist[w] = cand;
        pred[w] = e;
        heap.push({cand, w});
      }
    }
  }
  if (!done[destination]) return std::nullopt;
  WeightedPath out;
  for (int v = destination; v != source; v = network.edge(pred[v]).tail) {
    out.path.push_back(pred[v]);
  }
  std::reverse(out.path.begin(), out.path.end());
  for (int e : out.path) out.cost += weights[e];
  return out;
}

namespace {

std::vector<int> HopDistances(const Network& network, int root, bool forward) {
  std::vector<int> dist(network.num_vertices(), -1);
  std::queue<int> frontier;
  dist[root] = 0;
  frontier.push(root);
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    const auto& edges = forward ? network.out_edges(u) : network.in_edges(u);
    for (int e : edges) {
      const int w = forward ? network.edge(e).head : network.edge(e).tail;
      if (dist[w] < 0) {
        dist[w] = dist[u] + 1;
        frontier.push(w);
      }
    }
  }
  return dist;
}

}  // namespace

Vector UniformShortestHopFlow(const Network& network, const Demand& demand) {
  const int m = network.num_edges();
  Vector flow = Vector::Zero(m);
  if (demand.source == demand.destination) return flow;
  const std::vector<int> ds = HopDistances(network, demand.source, true);
  const std::vector<int> dt = HopDistances(network, demand.destination, false);
  const int total = ds[demand.destination];
  if (total < 0) throw FeasibilityError("destination unreachable");

  auto on_dag = [&](int e) {
    const Edge& edge = network.edge(e);
    return ds[edge.tail] >= 0 && dt[edge.head] >= 0 &&
           ds[edge.tail] + 1 + dt[edge.head] == total;
  };
  // Path counts from the source and to the destination inside the DAG of
  // fewest-hop paths, processed layer by layer.
  const int v_count = network.num_vertices();
  std::vector<std::vector<int>> layers(total + 1);
  for (int v = 0; v < v_count; ++v) {
    if (ds[v] >= 0 && dt[v] >= 0 && ds[v] + dt[v] == total) {
      layers[ds[v]].push_back(v);
    }
  }
  std::vector<double> from_source(v_count, 0.0);
  std::vector<double> to_dest(v_count, 0.0);
  from_source[demand.source] = 1.0;
  for (int layer = 0; layer < total; ++layer) {
    for (int u : layers[layer]) {
      for (int e : network.out_edges(u)) {
        if (on_dag(e)) from_source[network.edge(e).head] += from_source[u];
      }
    }
  }
  to_dest[demand.destination] = 1.0;
  for (int layer = total; layer > 0; --layer) {
    for (int w : layers[layer]) {
      for (int e : network.in_edges(w)) {
        if (on_dag(e)) to_dest[network.edge(e).tail] += to_dest[w];
      }
    }
  }
  const double count = from_source[demand.destination];
  for (int e = 0; e < m; ++e) {
    if (on_dag(e)) {
      const Edge& edge = network.edge(e);
      flow[e] = from_source[edge.tail] * to_dest[edge.head] / count;
    }
  }
  return flow;
}

std::vector<Path> EnumerateSimplePaths(const Network& network,
                                       const Demand& demand, std::size_t cap) {
  std::vector<Path> out;
  if (demand.source == demand.destination) {
    out.emplace_back();
    return out;
  }
  std::vector<char> visited(network.num_vertices(), 0);
  Path current;
  std::function<void(int)> dfs = [&](int u) {
    for (int e : network.out_edges(u)) {
      const int w = network.edge(e).head;
      if (visited[w]) continue;
      current.push_back(e);
      if (w == demand.destination) {
        out.push_back(current);
        if (out.size() > cap) {
          throw ResourceCapError("more than " + std::to_string(cap) +
                                 " simple paths for one demand");
        }
      } else {
        visited[w] = 1;
        dfs(w);
        visited[w] = 0;
      }
      current.pop_back();
    }
  };
  visited[demand.source] = 1;
  dfs(demand.source);
  return out;
}

LinearFlowSolution MinCostUnitFlow(const Network& network,
                                   const Demand& demand, const Vector& cost) {
  const int m = network.num_edges();
  const int v_count = network.num_vertices();
  Vector x = Vector::Zero(m);
  std::vector<int> excess(v_count, 0);
  if (demand.source != demand.destination) {
    excess[demand.source] = 1;
    excess[demand.destination] = -1;
  }
  // Saturating every negative edge leaves a residual graph with non-negative
  // arc costs, so successive shortest paths stay optimal.
  for (int e = 0; e < m; ++e) {
    if (cost[e] < 0.0) {
      x[e] = 1.0;
      excess[network.edge(e).tail] -= 1;
      excess[network.edge(e).head] += 1;
    }
  }
  while (true) {
    bool any = false;
    for (int v = 0; v < v_count; ++v) any = any || excess[v] > 0;
    if (!any) break;
    // Bellman-Ford from all excess vertices over residual arcs.
    std::vector<double> dist(v_count, kInfinity);
    std::vector<int> pred(v_count, -1);
    for (int v = 0; v < v_count; ++v) {
      if (excess[v] > 0) dist[v] = 0.0;
    }
    for (int round = 0; round < v_count; ++round) {
      bool changed = false;
      for (int e = 0; e < m; ++e) {
        const Edge& edge = network.edge(e);
        int from = edge.tail, to = edge.head;
        double c = cost[e];
        if (x[e] > 0.5) {
          std::swap(from, to);
          c = -c;
        }
        if (excess[to] > 0 || dist[from] == kInfinity) continue;
        const double candidate = dist[from] + c;
        if (candidate < dist[to] - 1e-12 * (1.0 + std::abs(candidate))) {
          dist[to] = candidate;
          pred[to] = e;
          changed = true;
        }
      }
      if (!changed) break;
    }
    int target = -1;
    for (int v = 0; v < v_count; ++v) {
      if (excess[v] < 0 && dist[v] < kInfinity &&
          (target < 0 || dist[v] < dist[target])) {
        target = v;
      }
    }
    if (target < 0) throw FeasibilityError("unit flow is infeasible");
    int v = target;
    for (int steps = 0; pred[v] >= 0; ++steps) {
      if (steps > v_count) {
        throw InvariantViolation("residual graph has a negative cycle");
      }
      const int e = pred[v];
      const Edge& edge = network.edge(e);
      if (x[e] > 0.5) {
        x[e] = 0.0;
        v = edge.head;
      } else {
        x[e] = 1.0;
        v = edge.tail;
      }
    }
    excess[v] -= 1;
    excess[target] += 1;
  }
  return {x, cost.dot(x)};
}

}  // namespace flowtoll
