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


// The toll mediator: private solve, private congestion release,
// marginal-cost tolls and repair of unsatisfied players.

#ifndef FLOWTOLL_MEDIATOR_H_
#define FLOWTOLL_MEDIATOR_H_

#include <cstdint>
#include <optional>
#include <vector>

#include "flowtoll/dp.h"
#include "flowtoll/game.h"
#include "flowtoll/private_opt.h"
#include "flowtoll/rng.h"

namespace flowtoll {

// One entry per player; nullopt is the opt-out report.
using MediatorReport = std::vector<std::optional<Demand>>;

MediatorReport TruthfulReports(const RoutingInstance& inst);

struct MediatorConfig {
  PgdConfig pgd;
  double c_alpha = 1.0;
};

// Everything a player's suggestion may depend on besides the player's own
// report and randomness. Shared by all players.
struct Billboard {
  std::vector<DualPlay> plays;
  PgdParameters pgd_params;
  bool flip_dual_sign = false;
  Congestion noisy_congestion;
  TollVector tolls;
  double zeta_hat = 0.0;
};

struct MediatorDiagnostics {
  PrivacyLedger ledger;         // stage-level charges, composed as run
  PrivacyLedger pgd_ledger;     // per-round dual-play charges
  PrivacyGuarantee total;       // basic composition of `ledger`
  PrivacyGuarantee released;    // guarantee of (noisy congestion, tolls)
  double alpha = 0.0;           // closed-form alpha(eps)
  int effective_players = 0;
  int unsatisfied_before_repair = 0;
  std::vector<int> repaired_players;  // report indices
  PgdDiagnostics pgd;
};

struct MediatorOutput {
  // Indexed like the reports; empty for opted-out or unroutable reports.
  std::vector<std::optional<Path>> suggestions;
  // Report index of each participant, in participant order.
  std::vector<int> participants;
  // Rounded flow before repair, indexed like the reports.
  std::vector<std::optional<Path>> rounded;
  TollVector tolls;
  Congestion noisy_congestion;
  FractionalFlow x_bar;  // participants x m
  Billboard billboard;
  MediatorDiagnostics diagnostics;
};

// y + Lap(m / eps) per edge, clamped to [0, n].
Congestion PCon(const RoutingInstance& inst, const IntegralFlow& x,
                double epsilon, Rng& rng);

struct PbrResult {
  IntegralFlow flow;
  std::vector<int> rerouted;
};

// One pass in player order against the frozen congestion y_hat with
// constant tolls; unsatisfied players move to their argmin path.
PbrResult PBr(const RoutingInstance& inst, const TollVector& tolls,
              const Congestion& y_hat, const IntegralFlow& x, double zeta);

// Bound calculators.
double AlphaClosedForm(int m, int n, double epsilon, double c_alpha);
double ZetaHat(int m, int n, double gamma, double alpha, double epsilon,
               double beta);
double EtaEqBound(int m, int n, double gamma, double alpha, double epsilon,
                  double beta);
double EtaOptBound(int m, int n, double gamma, double alpha);
double EtaGameBound(int m, int n, double gamma, double alpha, double epsilon,
                    double beta, double delta);
// sqrt(n alpha / (4 m gamma)); +inf when gamma = 0.
double UnsatisfiedCountBound(int m, int n, double gamma, double alpha);

// Player-side computations that read only the player's own report, the
// billboard and the player's random substream.
Path PlayerRoundedPath(const Network& network, const Demand& report,
                       const Billboard& billboard, std::uint64_t master_seed,
                       int report_index);
Path PlayerRepairedPath(const RoutingInstance& participants,
                        const Demand& report, const Path& rounded,
                        const Billboard& billboard);

// The full mediator. `network_game` supplies the network and latencies; its
// demands are ignored in favour of the reports.
MediatorOutput FlowToll(const RoutingInstance& network_game,
                        const MediatorReport& reports, double epsilon,
                        double delta, double beta,
                        const MediatorConfig& config, std::uint64_t seed);

// Cache for the noise-free solver stage, keyed by the participant demands.
class PgdStageCache {
 public:
  const PgdResult* Find(const std::vector<Demand>& demands) const;
  void Store(const std::vector<Demand>& demands, PgdResult result);

 private:
  std::vector<std::pair<std::vector<Demand>, PgdResult>> entries_;
};

MediatorOutput FlowToll(const RoutingInstance& network_game,
                        const MediatorReport& reports, double epsilon,
                        double delta, double beta,
                        const MediatorConfig& config, std::uint64_t seed,
                        PgdStageCache* cache);

}  // namespace flowtoll

#endif  // FLOWTOLL_MEDIATOR_H_
