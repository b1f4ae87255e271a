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

// Atomic unsplittable routing games: instances, flows, costs, the potential
// function and marginal-cost tolls.

#ifndef FLOWTOLL_GAME_H_
#define FLOWTOLL_GAME_H_

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace flowtoll {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();
inline constexpr double kTolerance = 1e-9;

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Ordered list of edge indices from source to destination.
using Path = std::vector<int>;

enum class LatencyFamily { kAffine, kMonomial };

// Convex non-decreasing edge latency, either a*y + b or a*y^k + b with
// a, b >= 0 and integer k >= 1. Arguments below zero are evaluated at zero.
class Latency {
 public:
  static Latency Affine(double a, double b);
  static Latency Monomial(double a, int k, double b);

  LatencyFamily family() const { return family_; }
  double a() const { return a_; }
  double b() const { return b_; }
  int k() const { return k_; }

  double operator()(double y) const;
  double Derivative(double y) const;
  double SecondDerivative(double y) const;

  // gamma_e: the derivative at y = n, the tight Lipschitz constant on [0, n].
  double Lipschitz(int n) const { return Derivative(n); }

  bool operator==(const Latency& other) const = default;

 private:
  Latency(LatencyFamily family, double a, int k, double b)
      : family_(family), a_(a), b_(b), k_(k) {}

  LatencyFamily family_;
  double a_;
  double b_;
  int k_;
};

struct Edge {
  int tail;
  int head;
  bool operator==(const Edge& other) const = default;
};

struct Demand {
  int source;
  int destination;
  bool operator==(const Demand& other) const = default;
  bool operator<(const Demand& other) const {
    return source != other.source ? source < other.source
                                  : destination < other.destination;
  }
};

// Directed multigraph with one latency per edge. Vertices are 0..V-1 with
// display names; parallel edges are distinguished by index.
class Network {
 public:
  Network() = default;
  Network(std::vector<std::string> vertex_names, std::vector<Edge> edges,
          std::vector<Latency> latencies);

  int num_vertices() const { return static_cast<int>(vertex_names_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const std::vector<std::string>& vertex_names() const {
    return vertex_names_;
  }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int e) const { return edges_[e]; }
  const std::vector<Latency>& latencies() const { return latencies_; }
  const Latency& latency(int e) const { return latencies_[e]; }

  // Outgoing and incoming edge indices of each vertex, ascending.
  const std::vector<int>& out_edges(int v) const { return out_[v]; }
  const std::vector<int>& in_edges(int v) const { return in_[v]; }

  std::optional<int> FindVertex(const std::string& name) const;
  bool Reachable(int from, int to) const;

  bool operator==(const Network& other) const {
    return vertex_names_ == other.vertex_names_ && edges_ == other.edges_ &&
           latencies_ == other.latencies_;
  }

 private:
  std::vector<std::string> vertex_names_;
  std::vector<Edge> edges_;
  std::vector<Latency> latencies_;
  std::vector<std::vector<int>> out_;
  std::vector<std::vector<int>> in_;
};

// A routing game: network plus one unit demand per player. Construction
// validates that every demand is routable and throws SemanticError if not.
class RoutingInstance {
 public:
  RoutingInstance() = default;
  RoutingInstance(Network network, std::vector<Demand> demands,
                  std::optional<double> known_opt = std::nullopt);

  const Network& network() const { return network_; }
  const std::vector<Demand>& demands() const { return demands_; }
  const Demand& demand(int i) const { return demands_[i]; }
  int num_players() const { return static_cast<int>(demands_.size()); }
  int num_edges() const { return network_.num_edges(); }
  const std::optional<double>& known_opt() const { return known_opt_; }

  // gamma = max_e l_e'(n).
  double gamma() const;
  // U = n * gamma, the toll cap.
  double toll_cap() const { return num_players() * gamma(); }

  // Edges with l_e(n) > n. Reported, never rejected.
  std::vector<int> BoundednessViolations() const;

  RoutingInstance WithDemands(std::vector<Demand> demands) const;

  bool operator==(const RoutingInstance& other) const {
    return network_ == other.network_ && demands_ == other.demands_ &&
           known_opt_ == other.known_opt_;
  }

 private:
  Network network_;
  std::vector<Demand> demands_;
  std::optional<double> known_opt_;
};

// One path per player.
struct IntegralFlow {
  std::vector<Path> paths;

  // n x m 0/1 matrix view.
  Matrix ToMatrix(int num_edges) const;
  bool operator==(const IntegralFlow& other) const = default;
};

// n x m matrix with entries in [0, 1].
using FractionalFlow = Matrix;
// Per-edge loads in [0, n].
using Congestion = Vector;
// Per-edge constant tolls in [0, n * gamma].
using TollVector = Vector;

// Tolls that track the congestion they are evaluated at, tau*_e(y_e).
struct MarginalCostTolls {};
using TollRule = std::variant<TollVector, MarginalCostTolls>;

// Throws FeasibilityError unless `path` is a simple directed path from the
// demand's source to its destination.
void ValidatePath(const Network& network, const Demand& demand,
                  const Path& path);
void ValidateFlow(const RoutingInstance& inst, const IntegralFlow& x);
// Throws FeasibilityError naming the worst conservation row if any residual
// exceeds `tolerance` or an entry leaves [0, 1].
void ValidateFlow(const RoutingInstance& inst, const FractionalFlow& x,
                  double tolerance = kTolerance);

// Largest |conservation residual| for one player's fractional flow.
double ConservationResidual(const Network& network, const Demand& demand,
                            const Vector& x_i);

Congestion CongestionOf(const RoutingInstance& inst, const IntegralFlow& x);
Congestion CongestionOf(const FractionalFlow& x);
Vector Indicator(const Path& path, int num_edges);

// (1/n) sum_e y_e l_e(y_e) for a given load vector.
double RelaxedCost(const RoutingInstance& inst, const Congestion& y);

double AverageCost(const RoutingInstance& inst, const IntegralFlow& x);
double AverageCost(const RoutingInstance& inst, const FractionalFlow& x);

double PlayerCost(const RoutingInstance& inst, const IntegralFlow& x, int i,
                  const TollVector& tolls);

// Sum over the path of l_e(y_e) + tau_e at the given loads.
double PathCostAt(const RoutingInstance& inst, const Path& path,
                  const Congestion& y, const TollVector& tolls);

// (y-1)(l(y) - l(y-1)) clipped to [0, cap].
double MarginalToll(const Latency& latency, double y, double cap);
TollVector MarginalTolls(const RoutingInstance& inst, const Congestion& y);

// Sum_e sum_{k=1..y_e} [l_e(k) + tau*_e(k)].
double Potential(const RoutingInstance& inst, const IntegralFlow& x);

struct BestResponse {
  bool unsatisfied = false;
  Path path;          // argmin path; the current path when nothing improves
  double gain = 0.0;  // current cost minus best alternative cost
  double current_cost = 0.0;
  double best_cost = 0.0;
};

// Player i's best alternative against loads y with the player's own unit
// removed and re-added on the new path. Unsatisfied iff the gain is at least
// rho and strictly positive; rho = +inf never flags anyone.
BestResponse IsUnsatisfied(const RoutingInstance& inst, const IntegralFlow& x,
                           int i, const Congestion& y, const TollRule& tolls,
                           double rho);

// Same search for a lone path, used where only one player's data may be read.
BestResponse BestResponseForPath(const RoutingInstance& inst,
                                 const Demand& demand, const Path& current,
                                 const Congestion& y, const TollRule& tolls,
                                 double rho);

}  // namespace flowtoll

#endif  // FLOWTOLL_GAME_H_
