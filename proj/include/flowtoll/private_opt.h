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

// Convex relaxation of the routing game, its Lagrangian game, the private
// gradient-descent solver and path-stripping randomized rounding.

#ifndef FLOWTOLL_PRIVATE_OPT_H_
#define FLOWTOLL_PRIVATE_OPT_H_

#include <memory>
#include <vector>

#include "flowtoll/dp.h"
#include "flowtoll/game.h"
#include "flowtoll/rng.h"

namespace flowtoll {

// L(x, y, lambda) = c(y) - sum_e lambda_e (sum_i x_ie - y_e).
double LagrangianValue(const RoutingInstance& inst, const FractionalFlow& x,
                       const Congestion& y, const Vector& lambda);

// Every player's row is -lambda.
Matrix GradX(const Vector& lambda, int num_players);
// (1/n)(l_e(y_e) + y_e l_e'(y_e)) + lambda_e.
Vector GradY(const RoutingInstance& inst, const Congestion& y,
             const Vector& lambda);

// f_e = sum_i x_ie - y_e.
Vector ViolationScores(const FractionalFlow& x, const Congestion& y);

// Gradient step on the box [0, upper]^m followed by a coordinate clamp.
Vector BoxGdStep(const Vector& point, const Vector& grad, double eta,
                 double upper);

// Euclidean projection onto one player's fractional flow polytope
// {x in [0,1]^m : conservation for the demand}. Dykstra alternating
// projections between the affine conservation set and the box, with an
// active-set polish that makes converged answers exact.
class FlowPolytopeProjector {
 public:
  struct Result {
    Vector x;
    int sweeps = 0;
    double kkt_residual = 0.0;
    bool polished = false;
  };

  static constexpr double kKktTolerance = 1e-6;
  static constexpr int kMaxSweeps = 10000;

  FlowPolytopeProjector(const Network& network, const Demand& demand);

  // Throws ConvergenceError when the residual stays above tolerance.
  Result Project(const Vector& v) const;

  // Max of primal infeasibility and the smaller of two dual certificates:
  // the stationarity/sign violation of multipliers fitted on the free
  // coordinates, and sqrt(2 * linear-optimization gap).
  double KktResidual(const Vector& x, const Vector& v) const;

  const Demand& demand() const { return demand_; }

 private:
  struct Geometry;
  std::shared_ptr<const Geometry> geometry_;
  Demand demand_;
  Vector b_;
  Vector affine_offset_;

  bool Polish(const Vector& box_point, const Vector& v, Vector* out) const;
};

Vector ProjectFlowPolytope(const RoutingInstance& inst, int i,
                           const Vector& v);

// Gradient step on one player's polytope.
Vector FlowGdStep(const FlowPolytopeProjector& projector, const Vector& x_i,
                  const Vector& grad_i, double eta);

// One dual play: the exponential mechanism's signed edge.
struct DualPlay {
  int sign = 1;  // +1 selects "+" (sum x > y), -1 selects "-"
  int edge = 0;
  bool operator==(const DualPlay& other) const = default;
};

// One-hot lambda with |lambda_e| = 2m. The "+" outcome sets -2m, which is
// the maximizing choice for L as written; flip_sign reverses it.
Vector DualVector(const DualPlay& play, int num_edges, bool flip_sign);

// Outcomes ordered (+, e0), (+, e1), ..., (-, e0), ... with scores f_e and
// -f_e, sensitivity 1.
QualityScore DualQualityScore(const Vector& violation);
DualPlay DualPlayFromOutcome(std::size_t outcome, int num_edges);

Vector DualBestResponse(const FractionalFlow& x, const Congestion& y,
                        double epsilon_prime, bool flip_sign, Rng& rng);

struct PgdConfig {
  double c_t = 1.0;
  bool flip_dual_sign = false;
  // Rounds used in noise-free mode, where the private schedule diverges.
  long noise_free_rounds = 1000;
};

// Constants of the private solver, computed once from (m, n, gamma, budget).
struct PgdParameters {
  long rounds = 1;
  bool rounds_clamped = false;
  double epsilon_prime = 0.0;
  double eta_x = 0.0;
  double eta_y = 0.0;
  double g_x = 0.0;
  double g_y = 0.0;
  double d_x = 0.0;
  double d_y = 0.0;
};

PgdParameters ComputePgdParameters(int num_edges, int num_players,
                                   double gamma, double epsilon, double delta,
                                   double beta, const PgdConfig& config);

// Snapshot of the Lagrangian game between rounds.
struct LagrangianState {
  FractionalFlow x;
  Congestion y;
  Vector lambda;
  long round = 0;
};

struct PgdRoundRecord {
  double best_score = 0.0;
  double chosen_score = 0.0;
  DualPlay play;
  double loss_x = 0.0;  // -lambda . sum_i x_i at this round's iterate
  double loss_y = 0.0;  // c(y) + lambda . y at this round's iterate
};

struct PgdDiagnostics {
  double regret_x = 0.0;       // cumulative, x block
  double regret_y = 0.0;       // cumulative, y block
  double regret_z = 0.0;       // R_z, averaged
  double regret_lambda = 0.0;  // R_lambda, averaged
  double regret_bound_z = 0.0;       // (G_x D_x + G_y D_y) / sqrt(T)
  double duality_gap = 0.0;
  double lagrangian_at_average = 0.0;
  double per_round_bound = 0.0;  // 2 ln(2mT/beta) / eps'
  long per_round_violations = 0;
  double max_projection_residual = 0.0;
  std::vector<PgdRoundRecord> rounds;
};

struct PgdResult {
  FractionalFlow x_bar;
  Congestion y_bar;
  Vector lambda_bar;
  std::vector<DualPlay> plays;
  PgdParameters params;
  PgdDiagnostics diagnostics;
};

// Runs the private Lagrangian dynamics. Charges one (eps', 0) entry per round
// to `ledger` when given.
PgdResult PGd(const RoutingInstance& inst, double epsilon, double delta,
              double beta, const PgdConfig& config, Rng& rng,
              PrivacyLedger* ledger = nullptr);

// Recomputes one player's average play from public data only: the player's
// demand, the dual plays and the solver constants.
Vector ReplayPlayerAverage(const Network& network, const Demand& demand,
                           const std::vector<DualPlay>& plays,
                           const PgdParameters& params, bool flip_sign);

// Separable minimum of weight * c(y) + linear . y over [0, n]^m.
struct SeparableMinimum {
  Congestion y;
  double value = 0.0;
};
SeparableMinimum MinimizeWeightedCost(const RoutingInstance& inst,
                                      double weight, const Vector& linear);

struct PathDecomposition {
  std::vector<Path> paths;
  std::vector<double> weights;  // normalized to sum to 1
  double cancelled_cycle_mass = 0.0;  // sum of cancelled circulation amounts
  double discarded_mass = 0.0;
};

// Cancels cycles, then strips bottleneck paths found by depth-first search
// along the smallest positive edge index. Throws DecompositionError when
// mass remains at the source with no path to the destination.
PathDecomposition DecomposePaths(const Network& network, const Demand& demand,
                                 const Vector& x_i);

Path PsrrForDemand(const Network& network, const Demand& demand,
                   const Vector& x_i, Rng& rng);
Path Psrr(const RoutingInstance& inst, int i, const Vector& x_i, Rng& rng);

// m (gamma + 1) sqrt(2 n ln(m / beta)).
double RoundingGapBound(int m, double gamma, int n, double beta);

}  // namespace flowtoll

#endif  // FLOWTOLL_PRIVATE_OPT_H_
