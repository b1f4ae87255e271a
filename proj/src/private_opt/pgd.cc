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
#include <stdexcept>
#include <string>
#include <utility>

#include "flowtoll/errors.h"
#include "flowtoll/graph_algorithms.h"
#include "flowtoll/private_opt.h"

namespace flowtoll {
namespace {

// One player's primal iterate. Both the solver and the public replay drive
// players through this class so their arithmetic is identical.
class PlayerIterate {
 public:
  PlayerIterate(const Network& network, const Demand& demand)
      : projector_(network, demand),
        x_(UniformShortestHopFlow(network, demand)),
        sum_(Vector::Zero(network.num_edges())) {}

  const Vector& x() const { return x_; }
  void Accumulate() { sum_ += x_; }

  double Step(const Vector& lambda, double eta) {
    FlowPolytopeProjector::Result r = projector_.Project(x_ + eta * lambda);
    x_ = std::move(r.x);
    return r.kkt_residual;
  }

  Vector Average(long rounds) const {
    return sum_ / static_cast<double>(rounds);
  }

 private:
  FlowPolytopeProjector projector_;
  Vector x_;
  Vector sum_;
};

constexpr long kMaxRounds = 2000000;

}  // namespace

Vector DualVector(const DualPlay& play, int num_edges, bool flip_sign) {
  Vector lambda = Vector::Zero(num_edges);
  const double magnitude = 2.0 * num_edges;
  const int sign = flip_sign ? -play.sign : play.sign;
  lambda[play.edge] = sign > 0 ? -magnitude : magnitude;
  return lambda;
}

QualityScore DualQualityScore(const Vector& violation) {
  const auto m = violation.size();
  QualityScore qs;
  qs.sensitivity = 1.0;
  qs.scores.resize(static_cast<std::size_t>(2 * m));
  for (Eigen::Index e = 0; e < m; ++e) {
    qs.scores[static_cast<std::size_t>(e)] = violation[e];
    qs.scores[static_cast<std::size_t>(m + e)] = -violation[e];
  }
  return qs;
}

DualPlay DualPlayFromOutcome(std::size_t outcome, int num_edges) {
  const auto m = static_cast<std::size_t>(num_edges);
  if (outcome < m) return {1, static_cast<int>(outcome)};
  return {-1, static_cast<int>(outcome - m)};
}

Vector DualBestResponse(const FractionalFlow& x, const Congestion& y,
                        double epsilon_prime, bool flip_sign, Rng& rng) {
  const Vector f = ViolationScores(x, y);
  const std::size_t outcome =
      ExponentialMechanism(DualQualityScore(f), epsilon_prime, rng);
  const int m = static_cast<int>(f.size());
  return DualVector(DualPlayFromOutcome(outcome, m), m, flip_sign);
}

PgdParameters ComputePgdParameters(int num_edges, int num_players,
                                   double gamma, double epsilon, double delta,
                                   double beta, const PgdConfig& config) {
  const double m = num_edges;
  const double n = num_players;
  PgdParameters p;
  if (IsNoiseFree(epsilon)) {
    if (config.noise_free_rounds < 1) {
      throw std::invalid_argument("noise-free round count must be >= 1");
    }
    p.rounds = config.noise_free_rounds;
    p.epsilon_prime = kInfinity;
  } else {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
    if (!(delta > 0.0 && delta < 1.0)) {
      throw std::invalid_argument("delta must lie in (0, 1)");
    }
    if (!(beta > 0.0 && beta < 1.0)) {
      throw std::invalid_argument("beta must lie in (0, 1)");
    }
    const double raw = config.c_t * epsilon * n * std::sqrt(m) /
                       (std::log(m * n / beta) *
                        std::sqrt(std::log(1.0 / delta)));
    if (raw >= static_cast<double>(kMaxRounds) + 1.0) {
      throw ResourceCapError("round budget " + std::to_string(raw) +
                             " exceeds the cap");
    }
    p.rounds = static_cast<long>(std::floor(raw));
    if (p.rounds < 1) {
      p.rounds = 1;
      p.rounds_clamped = true;
    }
    p.epsilon_prime = AdvancedCompositionEpsilon(epsilon, delta, p.rounds);
  }
  p.g_y = std::sqrt((m - 1.0) * (gamma + 1.0) * (gamma + 1.0) +
                    (gamma + 1.0 + 2.0 * m) * (gamma + 1.0 + 2.0 * m));
  p.d_y = n * std::sqrt(m);
  p.g_x = 2.0 * m * std::sqrt(n);
  p.d_x = std::sqrt(m * n);
  const double root_t = std::sqrt(static_cast<double>(p.rounds));
  p.eta_x = p.d_x / (p.g_x * root_t);
  p.eta_y = p.d_y / (p.g_y * root_t);
  return p;
}

PgdResult PGd(const RoutingInstance& inst, double epsilon, double delta,
              double beta, const PgdConfig& config, Rng& rng,
              PrivacyLedger* ledger) {
  const int n = inst.num_players();
  const int m = inst.num_edges();
  const Network& net = inst.network();
  PgdResult out;
  out.params =
      ComputePgdParameters(m, n, inst.gamma(), epsilon, delta, beta, config);
  const PgdParameters& p = out.params;
  const long rounds = p.rounds;

  std::vector<PlayerIterate> players;
  players.reserve(n);
  for (int i = 0; i < n; ++i) players.emplace_back(net, inst.demand(i));

  LagrangianState state;
  state.x = FractionalFlow(n, m);
  for (int i = 0; i < n; ++i) state.x.row(i) = players[i].x().transpose();
  state.y = CongestionOf(state.x);

  Vector sum_y = Vector::Zero(m);
  Vector sum_lambda = Vector::Zero(m);
  Vector sum_violation = Vector::Zero(m);
  double loss_x = 0.0;
  double loss_y = 0.0;
  double lambda_dot_violation = 0.0;
  PgdDiagnostics& diag = out.diagnostics;
  diag.per_round_bound =
      IsNoiseFree(p.epsilon_prime)
          ? 0.0
          : 2.0 * std::log(2.0 * m * static_cast<double>(rounds) / beta) /
                p.epsilon_prime;
  diag.rounds.reserve(static_cast<std::size_t>(rounds));
  out.plays.reserve(static_cast<std::size_t>(rounds));

  for (long t = 1; t <= rounds; ++t) {
    state.round = t;
    const Vector load = CongestionOf(state.x);
    const Vector violation = load - state.y;
    const QualityScore qs = DualQualityScore(violation);
    Rng round_rng = rng.Substream(StreamTag::kDualPlay,
                                  static_cast<std::uint64_t>(t));
    const std::size_t outcome =
        ExponentialMechanism(qs, p.epsilon_prime, round_rng);
    if (ledger != nullptr) ledger->Charge("p-gd round", p.epsilon_prime, 0.0);
    const DualPlay play = DualPlayFromOutcome(outcome, m);
    state.lambda = DualVector(play, m, config.flip_dual_sign);
    out.plays.push_back(play);
    diag.rounds.push_back(
        {*std::max_element(qs.scores.begin(), qs.scores.end()),
         qs.scores[outcome], play});
    if (qs.scores[outcome] <
        diag.rounds.back().best_score - diag.per_round_bound - 1e-12) {
      ++diag.per_round_violations;
    }

    for (auto& player : players) player.Accumulate();
    sum_y += state.y;
    sum_lambda += state.lambda;
    sum_violation += violation;
    PgdRoundRecord& record = diag.rounds.back();
    record.loss_x = -state.lambda.dot(load);
    record.loss_y = RelaxedCost(inst, state.y) + state.lambda.dot(state.y);
    loss_x += record.loss_x;
    loss_y += record.loss_y;
    lambda_dot_violation += state.lambda.dot(violation);

    if (t == rounds) break;
    const Vector grad_y = GradY(inst, state.y, state.lambda);
    for (int i = 0; i < n; ++i) {
      diag.max_projection_residual =
          std::max(diag.max_projection_residual,
                   players[i].Step(state.lambda, p.eta_x));
      state.x.row(i) = players[i].x().transpose();
    }
    state.y = BoxGdStep(state.y, grad_y, p.eta_y, n);
  }

  const double t_count = static_cast<double>(rounds);
  out.x_bar = FractionalFlow(n, m);
  for (int i = 0; i < n; ++i) {
    out.x_bar.row(i) = players[i].Average(rounds).transpose();
  }
  out.y_bar = sum_y / t_count;
  out.lambda_bar = sum_lambda / t_count;

  double best_x = 0.0;
  double best_x_avg = 0.0;
  for (int i = 0; i < n; ++i) {
    best_x += MinCostUnitFlow(net, inst.demand(i), -sum_lambda).value;
    best_x_avg += MinCostUnitFlow(net, inst.demand(i), -out.lambda_bar).value;
  }
  diag.regret_x = loss_x - best_x;
  diag.regret_y =
      loss_y - MinimizeWeightedCost(inst, t_count, sum_lambda).value;
  diag.regret_z = (diag.regret_x + diag.regret_y) / t_count;
  diag.regret_lambda =
      (2.0 * m * sum_violation.lpNorm<Eigen::Infinity>() +
       lambda_dot_violation) /
      t_count;
  diag.regret_bound_z = (p.g_x * p.d_x + p.g_y * p.d_y) / std::sqrt(t_count);

  const Vector avg_violation = ViolationScores(out.x_bar, out.y_bar);
  const double max_over_lambda =
      RelaxedCost(inst, out.y_bar) +
      2.0 * m * avg_violation.lpNorm<Eigen::Infinity>();
  const double min_over_z =
      MinimizeWeightedCost(inst, 1.0, out.lambda_bar).value + best_x_avg;
  diag.duality_gap = max_over_lambda - min_over_z;
  diag.lagrangian_at_average =
      LagrangianValue(inst, out.x_bar, out.y_bar, out.lambda_bar);
  return out;
}

Vector ReplayPlayerAverage(const Network& network, const Demand& demand,
                           const std::vector<DualPlay>& plays,
                           const PgdParameters& params, bool flip_sign) {
  const long rounds = static_cast<long>(plays.size());
  if (rounds != params.rounds) {
    throw InvariantViolation("dual play count differs from the round budget");
  }
  PlayerIterate player(network, demand);
  for (long t = 0; t < rounds; ++t) {
    player.Accumulate();
    if (t + 1 == rounds) break;
    player.Step(DualVector(plays[t], network.num_edges(), flip_sign),
                params.eta_x);
  }
  return player.Average(rounds);
}

}  // namespace flowtoll
