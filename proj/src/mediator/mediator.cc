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


#include "flowtoll/mediator.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "flowtoll/errors.h"

namespace flowtoll {

MediatorReport TruthfulReports(const RoutingInstance& inst) {
  MediatorReport reports;
  for (const Demand& d : inst.demands()) reports.emplace_back(d);
  return reports;
}

Congestion PCon(const RoutingInstance& inst, const IntegralFlow& x,
                double epsilon, Rng& rng) {
  const double n = inst.num_players();
  const double scale =
      IsNoiseFree(epsilon) ? 0.0 : inst.num_edges() / epsilon;
  Congestion y = CongestionOf(inst, x);
  for (int e = 0; e < inst.num_edges(); ++e) {
    y[e] = std::clamp(y[e] + LaplaceSample(scale, rng), 0.0, n);
  }
  return y;
}

PbrResult PBr(const RoutingInstance& inst, const TollVector& tolls,
              const Congestion& y_hat, const IntegralFlow& x, double zeta) {
  if (zeta < 0.0) throw std::invalid_argument("zeta must be non-negative");
  ValidateFlow(inst, x);
  PbrResult out;
  out.flow = x;
  for (int i = 0; i < inst.num_players(); ++i) {
    const BestResponse br = IsUnsatisfied(inst, x, i, y_hat, tolls, zeta);
    if (br.unsatisfied) {
      out.flow.paths[i] = br.path;
      out.rerouted.push_back(i);
    }
  }
  return out;
}

double AlphaClosedForm(int m, int n, double epsilon, double c_alpha) {
  if (IsNoiseFree(epsilon)) return 0.0;
  return c_alpha * std::sqrt(static_cast<double>(n)) * std::pow(m, 1.25) /
         std::sqrt(epsilon);
}

double ZetaHat(int m, int n, double gamma, double alpha, double epsilon,
               double beta) {
  const double md = m;
  return 4.0 * std::sqrt(md * n * gamma * alpha) +
         8.0 * gamma * md * md * std::log(md / beta) / epsilon;
}

double EtaEqBound(int m, int n, double gamma, double alpha, double epsilon,
                  double beta) {
  const double md = m;
  return 6.0 * std::sqrt(md * n * alpha * gamma) +
         12.0 * gamma * md * md * std::log(md / beta) / epsilon;
}

double EtaOptBound(int m, int n, double gamma, double alpha) {
  const double mn = static_cast<double>(m) * n;
  if (gamma == 0.0) return alpha > 0.0 ? kInfinity : 0.0;
  return alpha + std::sqrt(mn * gamma * alpha) / 2.0 +
         std::sqrt(mn * alpha) / (2.0 * std::sqrt(gamma));
}

double EtaGameBound(int m, int n, double gamma, double alpha, double epsilon,
                    double beta, double delta) {
  const double toll_cap = n * gamma;
  return EtaEqBound(m, n, gamma, alpha, epsilon, beta) +
         m * (toll_cap + n) * (2.0 * epsilon + beta + delta);
}

double UnsatisfiedCountBound(int m, int n, double gamma, double alpha) {
  if (gamma == 0.0) return kInfinity;
  return std::sqrt(n * alpha / (4.0 * m * gamma));
}

namespace {

Path RoundWithStream(const Network& network, const Demand& report,
                     const Vector& x_bar, std::uint64_t master_seed,
                     int report_index) {
  Rng rng = Rng(master_seed)
                .Substream(StreamTag::kRounding,
                           static_cast<std::uint64_t>(report_index));
  return PsrrForDemand(network, report, x_bar, rng);
}

bool Routable(const Network& network, const Demand& d) {
  return d.source >= 0 && d.source < network.num_vertices() &&
         d.destination >= 0 && d.destination < network.num_vertices() &&
         network.Reachable(d.source, d.destination);
}

}  // namespace

Path PlayerRoundedPath(const Network& network, const Demand& report,
                       const Billboard& billboard, std::uint64_t master_seed,
                       int report_index) {
  const Vector x_bar =
      ReplayPlayerAverage(network, report, billboard.plays,
                          billboard.pgd_params, billboard.flip_dual_sign);
  return RoundWithStream(network, report, x_bar, master_seed, report_index);
}

Path PlayerRepairedPath(const RoutingInstance& participants,
                        const Demand& report, const Path& rounded,
                        const Billboard& billboard) {
  const BestResponse br =
      BestResponseForPath(participants, report, rounded,
                          billboard.noisy_congestion, billboard.tolls,
                          billboard.zeta_hat);
  return br.unsatisfied ? br.path : rounded;
}

const PgdResult* PgdStageCache::Find(const std::vector<Demand>& demands) const {
  for (const auto& [key, value] : entries_) {
    if (key == demands) return &value;
  }
  return nullptr;
}

void PgdStageCache::Store(const std::vector<Demand>& demands,
                          PgdResult result) {
  entries_.emplace_back(demands, std::move(result));
}

MediatorOutput FlowToll(const RoutingInstance& network_game,
                        const MediatorReport& reports, double epsilon,
                        double delta, double beta,
                        const MediatorConfig& config, std::uint64_t seed) {
  return FlowToll(network_game, reports, epsilon, delta, beta, config, seed,
                  nullptr);
}

MediatorOutput FlowToll(const RoutingInstance& network_game,
                        const MediatorReport& reports, double epsilon,
                        double delta, double beta,
                        const MediatorConfig& config, std::uint64_t seed,
                        PgdStageCache* cache) {
  const Network& net = network_game.network();
  const int m = net.num_edges();
  MediatorOutput out;
  out.suggestions.assign(reports.size(), std::nullopt);
  out.rounded.assign(reports.size(), std::nullopt);
  out.tolls = TollVector::Zero(m);
  out.noisy_congestion = Congestion::Zero(m);
  out.billboard.flip_dual_sign = config.pgd.flip_dual_sign;

  std::vector<Demand> demands;
  for (std::size_t r = 0; r < reports.size(); ++r) {
    if (reports[r] && Routable(net, *reports[r])) {
      out.participants.push_back(static_cast<int>(r));
      demands.push_back(*reports[r]);
    }
  }
  MediatorDiagnostics& diag = out.diagnostics;
  diag.effective_players = static_cast<int>(demands.size());
  if (demands.empty()) {
    out.x_bar = FractionalFlow(0, m);
    out.billboard.noisy_congestion = out.noisy_congestion;
    out.billboard.tolls = out.tolls;
    return out;
  }
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  if (!(beta > 0.0 && beta < 1.0)) {
    throw std::invalid_argument("beta must lie in (0, 1)");
  }
  if (!IsNoiseFree(epsilon) && !(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("delta must lie in (0, 1)");
  }

  const RoutingInstance inst(net, demands);
  const int n = inst.num_players();
  const double gamma = inst.gamma();
  const double eps_quarter = epsilon / 4.0;

  // Stage 1: private Lagrangian solve.
  PgdResult local;
  const PgdResult* pgd = nullptr;
  try {
    if (cache != nullptr && IsNoiseFree(epsilon)) pgd = cache->Find(demands);
    if (pgd == nullptr) {
      Rng pgd_rng = Rng(seed).Substream(StreamTag::kDualPlay, 0);
      local = PGd(inst, eps_quarter, delta / 2.0, beta / 2.0, config.pgd,
                  pgd_rng, &diag.pgd_ledger);
      if (cache != nullptr && IsNoiseFree(epsilon)) {
        cache->Store(demands, local);
        pgd = cache->Find(demands);
      } else {
        pgd = &local;
      }
    } else {
      for (long t = 0; t < pgd->params.rounds; ++t) {
        diag.pgd_ledger.Charge("p-gd round", pgd->params.epsilon_prime, 0.0);
      }
    }
  } catch (const Error& err) {
    throw StageError("p-gd", err.what(), ExitCodeFor(err));
  }
  diag.ledger.Charge("p-gd dual plays", eps_quarter, delta / 2.0);
  out.x_bar = pgd->x_bar;
  diag.pgd = pgd->diagnostics;
  out.billboard.plays = pgd->plays;
  out.billboard.pgd_params = pgd->params;

  IntegralFlow rounded;
  try {
    for (int k = 0; k < n; ++k) {
      rounded.paths.push_back(RoundWithStream(
          net, demands[k], pgd->x_bar.row(k).transpose(), seed,
          out.participants[k]));
      out.rounded[out.participants[k]] = rounded.paths.back();
    }
  } catch (const Error& err) {
    throw StageError("psrr", err.what(), ExitCodeFor(err));
  }

  // Stage 2: private congestion and tolls.
  try {
    Rng con_rng = Rng(seed).Substream(StreamTag::kCongestion, 0);
    out.noisy_congestion = PCon(inst, rounded, eps_quarter, con_rng);
  } catch (const Error& err) {
    throw StageError("p-con", err.what(), ExitCodeFor(err));
  }
  out.tolls = MarginalTolls(inst, out.noisy_congestion);
  diag.released = DpJdpCompositionBound(eps_quarter, delta / 2.0, eps_quarter);
  diag.ledger.Charge("noisy congestion and tolls", diag.released.epsilon,
                     diag.released.delta);
  diag.total = diag.ledger.BasicTotal();

  // Stage 3: repair against the frozen noisy congestion.
  diag.alpha = AlphaClosedForm(m, n, epsilon, config.c_alpha);
  out.billboard.noisy_congestion = out.noisy_congestion;
  out.billboard.tolls = out.tolls;
  out.billboard.zeta_hat =
      ZetaHat(m, n, gamma, diag.alpha, eps_quarter, beta);
  try {
    const PbrResult repaired = PBr(inst, out.tolls, out.noisy_congestion,
                                   rounded, out.billboard.zeta_hat);
    diag.unsatisfied_before_repair =
        static_cast<int>(repaired.rerouted.size());
    for (int k : repaired.rerouted) {
      diag.repaired_players.push_back(out.participants[k]);
    }
    for (int k = 0; k < n; ++k) {
      out.suggestions[out.participants[k]] = repaired.flow.paths[k];
    }
  } catch (const Error& err) {
    throw StageError("p-br", err.what(), ExitCodeFor(err));
  }
  return out;
}

}  // namespace flowtoll
