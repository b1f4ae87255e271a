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

#include "flowtoll/game.h"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>
#include <utility>

#include "flowtoll/errors.h"
#include "flowtoll/graph_algorithms.h"

namespace flowtoll {

Latency Latency::Affine(double a, double b) {
  if (!(a >= 0.0) || !(b >= 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw SemanticError("latency coefficients must be finite and >= 0");
  }
  return Latency(LatencyFamily::kAffine, a, 1, b);
}

Latency Latency::Monomial(double a, int k, double b) {
  if (!(a >= 0.0) || !(b >= 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw SemanticError("latency coefficients must be finite and >= 0");
  }
  if (k < 1) throw SemanticError("monomial degree must be >= 1");
  return Latency(LatencyFamily::kMonomial, a, k, b);
}

double Latency::operator()(double y) const {
  const double t = std::max(y, 0.0);
  if (family_ == LatencyFamily::kAffine) return a_ * t + b_;
  return a_ * std::pow(t, k_) + b_;
}

double Latency::Derivative(double y) const {
  const double t = std::max(y, 0.0);
  if (family_ == LatencyFamily::kAffine || k_ == 1) return a_;
  return a_ * k_ * std::pow(t, k_ - 1);
}

double Latency::SecondDerivative(double y) const {
  const double t = std::max(y, 0.0);
  if (family_ == LatencyFamily::kAffine || k_ == 1) return 0.0;
  if (k_ == 2) return 2.0 * a_;
  return a_ * k_ * (k_ - 1) * std::pow(t, k_ - 2);
}

Network::Network(std::vector<std::string> vertex_names,
                 std::vector<Edge> edges, std::vector<Latency> latencies)
    : vertex_names_(std::move(vertex_names)),
      edges_(std::move(edges)),
      latencies_(std::move(latencies)) {
  if (edges_.size() != latencies_.size()) {
    throw SemanticError("edge and latency counts differ");
  }
  const int v_count = num_vertices();
  std::vector<std::string> sorted = vertex_names_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw SemanticError("duplicate vertex id");
  }
  out_.assign(v_count, {});
  in_.assign(v_count, {});
  for (int e = 0; e < num_edges(); ++e) {
    const Edge& edge = edges_[e];
    if (edge.tail < 0 || edge.tail >= v_count || edge.head < 0 ||
        edge.head >= v_count) {
      throw SemanticError("edge " + std::to_string(e) +
                          " has an endpoint outside the vertex set");
    }
    out_[edge.tail].push_back(e);
    in_[edge.head].push_back(e);
  }
}

std::optional<int> Network::FindVertex(const std::string& name) const {
  for (int v = 0; v < num_vertices(); ++v) {
    if (vertex_names_[v] == name) return v;
  }
  return std::nullopt;
}

bool Network::Reachable(int from, int to) const {
  if (from == to) return true;
  std::vector<char> seen(num_vertices(), 0);
  std::queue<int> frontier;
  frontier.push(from);
  seen[from] = 1;
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    for (int e : out_[u]) {
      const int w = edges_[e].head;
      if (w == to) return true;
      if (!seen[w]) {
        seen[w] = 1;
        frontier.push(w);
      }
    }
  }
  return false;
}

RoutingInstance::RoutingInstance(Network network, std::vector<Demand> demands,
                                 std::optional<double> known_opt)
    : network_(std::move(network)),
      demands_(std::move(demands)),
      known_opt_(known_opt) {
  if (network_.num_edges() < 1) throw SemanticError("instance has no edges");
  if (demands_.empty()) throw SemanticError("instance has no demands");
  for (std::size_t i = 0; i < demands_.size(); ++i) {
    const Demand& d = demands_[i];
    if (d.source < 0 || d.source >= network_.num_vertices() ||
        d.destination < 0 || d.destination >= network_.num_vertices()) {
      throw SemanticError("demand " + std::to_string(i) +
                          " names a vertex outside the graph");
    }
    if (!network_.Reachable(d.source, d.destination)) {
      throw SemanticError("demand " + std::to_string(i) +
                          " has no path from source to destination");
    }
  }
}

double RoutingInstance::gamma() const {
  double g = 0.0;
  for (const Latency& l : network_.latencies()) {
    g = std::max(g, l.Lipschitz(num_players()));
  }
  return g;
}

std::vector<int> RoutingInstance::BoundednessViolations() const {
  std::vector<int> out;
  const double n = num_players();
  for (int e = 0; e < num_edges(); ++e) {
    if (network_.latency(e)(n) > n + kTolerance) out.push_back(e);
  }
  return out;
}

RoutingInstance RoutingInstance::WithDemands(std::vector<Demand> demands) const {
  return RoutingInstance(network_, std::move(demands));
}

Matrix IntegralFlow::ToMatrix(int num_edges) const {
  Matrix x = Matrix::Zero(static_cast<Eigen::Index>(paths.size()), num_edges);
  for (std::size_t i = 0; i < paths.size(); ++i) {
    for (int e : paths[i]) x(static_cast<Eigen::Index>(i), e) = 1.0;
  }
  return x;
}

void ValidatePath(const Network& network, const Demand& demand,
                  const Path& path) {
  int at = demand.source;
  std::vector<char> visited(network.num_vertices(), 0);
  visited[at] = 1;
  for (std::size_t k = 0; k < path.size(); ++k) {
    const int e = path[k];
    if (e < 0 || e >= network.num_edges()) {
      throw FeasibilityError("path uses unknown edge " + std::to_string(e));
    }
    const Edge& edge = network.edge(e);
    if (edge.tail != at) {
      throw FeasibilityError("conservation violated at vertex " +
                             network.vertex_names()[at] + ": edge " +
                             std::to_string(e) + " does not leave it");
    }
    at = edge.head;
    if (visited[at]) {
      throw FeasibilityError("path revisits vertex " +
                             network.vertex_names()[at]);
    }
    visited[at] = 1;
  }
  if (at != demand.destination) {
    throw FeasibilityError("conservation violated at vertex " +
                           network.vertex_names()[at] +
                           ": path ends away from the destination");
  }
}

void ValidateFlow(const RoutingInstance& inst, const IntegralFlow& x) {
  if (static_cast<int>(x.paths.size()) != inst.num_players()) {
    throw FeasibilityError("flow has " + std::to_string(x.paths.size()) +
                           " players, instance has " +
                           std::to_string(inst.num_players()));
  }
  for (int i = 0; i < inst.num_players(); ++i) {
    try {
      ValidatePath(inst.network(), inst.demand(i), x.paths[i]);
    } catch (const FeasibilityError& err) {
      throw FeasibilityError("player " + std::to_string(i) + ": " +
                             err.what());
    }
  }
}

double ConservationResidual(const Network& network, const Demand& demand,
                            const Vector& x_i) {
  double worst = 0.0;
  for (int v = 0; v < network.num_vertices(); ++v) {
    double net = 0.0;
    for (int e : network.out_edges(v)) net += x_i[e];
    for (int e : network.in_edges(v)) net -= x_i[e];
    double b = 0.0;
    if (demand.source != demand.destination) {
      if (v == demand.source) b = 1.0;
      if (v == demand.destination) b = -1.0;
    }
    worst = std::max(worst, std::abs(net - b));
  }
  return worst;
}

void ValidateFlow(const RoutingInstance& inst, const FractionalFlow& x,
                  double tolerance) {
  if (x.rows() != inst.num_players() || x.cols() != inst.num_edges()) {
    throw FeasibilityError("flow matrix has the wrong shape");
  }
  const Network& net = inst.network();
  for (int i = 0; i < inst.num_players(); ++i) {
    for (int e = 0; e < inst.num_edges(); ++e) {
      if (x(i, e) < -tolerance || x(i, e) > 1.0 + tolerance) {
        throw FeasibilityError("player " + std::to_string(i) + ", edge " +
                               std::to_string(e) + ": entry outside [0, 1]");
      }
    }
    const Demand& d = inst.demand(i);
    for (int v = 0; v < net.num_vertices(); ++v) {
      double flow = 0.0;
      for (int e : net.out_edges(v)) flow += x(i, e);
      for (int e : net.in_edges(v)) flow -= x(i, e);
      double b = 0.0;
      if (d.source != d.destination) {
        if (v == d.source) b = 1.0;
        if (v == d.destination) b = -1.0;
      }
      if (std::abs(flow - b) > tolerance) {
        throw FeasibilityError(
            "conservation violated for player " + std::to_string(i) +
            " at vertex " + net.vertex_names()[v] + " (residual " +
            std::to_string(flow - b) + ")");
      }
    }
  }
}

Vector Indicator(const Path& path, int num_edges) {
  Vector v = Vector::Zero(num_edges);
  for (int e : path) v[e] = 1.0;
  return v;
}

Congestion CongestionOf(const RoutingInstance& inst, const IntegralFlow& x) {
  Congestion y = Congestion::Zero(inst.num_edges());
  for (const Path& p : x.paths) {
    for (int e : p) y[e] += 1.0;
  }
  return y;
}

Congestion CongestionOf(const FractionalFlow& x) {
  return x.colwise().sum().transpose();
}

double RelaxedCost(const RoutingInstance& inst, const Congestion& y) {
  double total = 0.0;
  for (int e = 0; e < inst.num_edges(); ++e) {
    total += y[e] * inst.network().latency(e)(y[e]);
  }
  return total / inst.num_players();
}

double AverageCost(const RoutingInstance& inst, const IntegralFlow& x) {
  ValidateFlow(inst, x);
  return RelaxedCost(inst, CongestionOf(inst, x));
}

double AverageCost(const RoutingInstance& inst, const FractionalFlow& x) {
  ValidateFlow(inst, x);
  return RelaxedCost(inst, CongestionOf(x));
}

double PlayerCost(const RoutingInstance& inst, const IntegralFlow& x, int i,
                  const TollVector& tolls) {
  if (i < 0 || i >= inst.num_players()) {
    throw std::out_of_range("player index " + std::to_string(i) +
                            " out of range");
  }
  ValidateFlow(inst, x);
  return PathCostAt(inst, x.paths[i], CongestionOf(inst, x), tolls);
}

double PathCostAt(const RoutingInstance& inst, const Path& path,
                  const Congestion& y, const TollVector& tolls) {
  double cost = 0.0;
  for (int e : path) cost += inst.network().latency(e)(y[e]) + tolls[e];
  return cost;
}

double MarginalToll(const Latency& latency, double y, double cap) {
  const double raw = (y - 1.0) * (latency(y) - latency(y - 1.0));
  return std::clamp(raw, 0.0, std::max(cap, 0.0));
}

TollVector MarginalTolls(const RoutingInstance& inst, const Congestion& y) {
  const double cap = inst.toll_cap();
  TollVector tau(inst.num_edges());
  for (int e = 0; e < inst.num_edges(); ++e) {
    tau[e] = MarginalToll(inst.network().latency(e), y[e], cap);
  }
  return tau;
}

double Potential(const RoutingInstance& inst, const IntegralFlow& x) {
  ValidateFlow(inst, x);
  const Congestion y = CongestionOf(inst, x);
  const double cap = inst.toll_cap();
  double total = 0.0;
  for (int e = 0; e < inst.num_edges(); ++e) {
    const Latency& l = inst.network().latency(e);
    const int load = static_cast<int>(std::lround(y[e]));
    for (int k = 1; k <= load; ++k) total += l(k) + MarginalToll(l, k, cap);
  }
  return total;
}

namespace {

double TollAt(const RoutingInstance& inst, const TollRule& tolls, int e,
              double load) {
  if (const auto* fixed = std::get_if<TollVector>(&tolls)) return (*fixed)[e];
  return MarginalToll(inst.network().latency(e), load, inst.toll_cap());
}

}  // namespace

BestResponse BestResponseForPath(const RoutingInstance& inst,
                                 const Demand& demand, const Path& current,
                                 const Congestion& y, const TollRule& tolls,
                                 double rho) {
  const Network& net = inst.network();
  const int m = net.num_edges();
  Vector on_path = Indicator(current, m);
  BestResponse out;
  for (int e : current) {
    out.current_cost += net.latency(e)(y[e]) + TollAt(inst, tolls, e, y[e]);
  }
  Vector weights(m);
  for (int e = 0; e < m; ++e) {
    const double load = y[e] + 1.0 - on_path[e];
    weights[e] = net.latency(e)(load) + TollAt(inst, tolls, e, load);
  }
  auto best = ShortestPath(net, weights, demand.source, demand.destination);
  if (!best) {
    throw FeasibilityError("destination " +
                           net.vertex_names()[demand.destination] +
                           " unreachable from " +
                           net.vertex_names()[demand.source]);
  }
  out.best_cost = best->cost;
  out.gain = out.current_cost - out.best_cost;
  if (out.gain > kTolerance) {
    out.path = std::move(best->path);
  } else {
    out.path = current;
  }
  out.unsatisfied = std::isfinite(rho) && out.gain > kTolerance &&
                    out.gain >= rho - kTolerance;
  return out;
}

BestResponse IsUnsatisfied(const RoutingInstance& inst, const IntegralFlow& x,
                           int i, const Congestion& y, const TollRule& tolls,
                           double rho) {
  if (i < 0 || i >= inst.num_players()) {
    throw std::out_of_range("player index " + std::to_string(i) +
                            " out of range");
  }
  if (rho < 0.0) throw std::invalid_argument("rho must be non-negative");
  return BestResponseForPath(inst, inst.demand(i), x.paths[i], y, tolls, rho);
}

}  // namespace flowtoll
