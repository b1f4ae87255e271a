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


#include "flowtoll/oracles.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "flowtoll/errors.h"
#include "flowtoll/graph_algorithms.h"

namespace flowtoll {

OptimumResult BruteForceOpt(const RoutingInstance& inst) {
  const int n = inst.num_players();
  const int m = inst.num_edges();
  std::vector<std::vector<Path>> options(n);
  double profiles = 1.0;
  for (int i = 0; i < n; ++i) {
    options[i] = EnumerateSimplePaths(inst.network(), inst.demand(i),
                                      kMaxPathsPerPlayer);
    profiles *= static_cast<double>(options[i].size());
    if (profiles > kMaxProfiles) {
      throw ResourceCapError("more than 1e7 path profiles");
    }
  }
  std::vector<std::size_t> choice(n, 0);
  Congestion y = Congestion::Zero(m);
  for (int i = 0; i < n; ++i) {
    for (int e : options[i][0]) y[e] += 1.0;
  }
  OptimumResult best;
  best.cost = kInfinity;
  best.profiles = profiles;
  while (true) {
    const double cost = RelaxedCost(inst, y);
    if (cost < best.cost - 1e-12) {
      best.cost = cost;
      best.flow.paths.clear();
      for (int i = 0; i < n; ++i) best.flow.paths.push_back(options[i][choice[i]]);
    }
    // Odometer with the last player fastest, so profiles are visited in
    // lexicographic order.
    int i = n - 1;
    while (i >= 0) {
      for (int e : options[i][choice[i]]) y[e] -= 1.0;
      if (++choice[i] < options[i].size()) {
        for (int e : options[i][choice[i]]) y[e] += 1.0;
        break;
      }
      choice[i] = 0;
      for (int e : options[i][0]) y[e] += 1.0;
      --i;
    }
    if (i < 0) break;
  }
  return best;
}

namespace {

double MarginalSlope(const Latency& l, double y, double n) {
  return (l(y) + y * l.Derivative(y)) / n;
}

double MarginalCurvature(const Latency& l, double y, double n) {
  return (2.0 * l.Derivative(y) + y * l.SecondDerivative(y)) / n;
}

}  // namespace

FractionalOptResult FractionalOpt(const RoutingInstance& inst,
                                  double tolerance) {
  const int n = inst.num_players();
  const int m = inst.num_edges();
  const double nd = n;
  const Network& net = inst.network();
  // Path-based gradient projection with column generation: each sweep moves
  // flow from every active path toward the player's cheapest path, scaled
  // by the second derivative along their symmetric difference.
  std::vector<std::vector<Path>> columns(n);
  std::vector<std::vector<double>> weights(n);
  Congestion y = Congestion::Zero(m);
  auto slopes = [&]() {
    Vector g(m);
    for (int e = 0; e < m; ++e) g[e] = MarginalSlope(net.latency(e), y[e], nd);
    return g;
  };
  {
    const Vector g = slopes();
    for (int i = 0; i < n; ++i) {
      auto sp = ShortestPath(net, g, inst.demand(i).source,
                             inst.demand(i).destination);
      columns[i].push_back(sp->path);
      weights[i].push_back(1.0);
      for (int e : sp->path) y[e] += 1.0;
    }
  }
  constexpr long kMaxSweeps = 200000;
  FractionalOptResult out;
  for (long sweep = 1; sweep <= kMaxSweeps; ++sweep) {
    Vector g = slopes();
    double lower = 0.0;
    for (int i = 0; i < n; ++i) {
      lower += ShortestPath(net, g, inst.demand(i).source,
                            inst.demand(i).destination)
                   ->cost;
    }
    const double gap = g.dot(y) - lower;
    if (gap <= tolerance) {
      out.value = RelaxedCost(inst, y);
      out.y = y;
      out.certified_gap = std::max(gap, 0.0);
      out.iterations = sweep;
      return out;
    }
    for (int i = 0; i < n; ++i) {
      g = slopes();
      auto sp = ShortestPath(net, g, inst.demand(i).source,
                             inst.demand(i).destination);
      auto found = std::find(columns[i].begin(), columns[i].end(), sp->path);
      std::size_t target;
      if (found == columns[i].end()) {
        columns[i].push_back(sp->path);
        weights[i].push_back(0.0);
        target = columns[i].size() - 1;
      } else {
        target = static_cast<std::size_t>(found - columns[i].begin());
      }
      const Vector on_target = Indicator(columns[i][target], m);
      for (std::size_t p = 0; p < columns[i].size(); ++p) {
        if (p == target || weights[i][p] <= 0.0) continue;
        const Vector on_p = Indicator(columns[i][p], m);
        double excess = 0.0;
        double curvature = 0.0;
        for (int e = 0; e < m; ++e) {
          const double diff = on_p[e] - on_target[e];
          if (diff == 0.0) continue;
          excess += diff * MarginalSlope(net.latency(e), y[e], nd);
          curvature += MarginalCurvature(net.latency(e), y[e], nd);
        }
        if (excess <= 0.0) continue;
        const double shift =
            curvature > 0.0 ? std::min(weights[i][p], excess / curvature)
                            : weights[i][p];
        weights[i][p] -= shift;
        weights[i][target] += shift;
        y += shift * (on_target - on_p);
      }
    }
  }
  throw ConvergenceError("fractional optimum not certified within the sweep cap");
}

NashCheck VerifyNash(const RoutingInstance& inst, const IntegralFlow& x,
                     const TollRule& tolls, double eta) {
  ValidateFlow(inst, x);
  const Congestion y = CongestionOf(inst, x);
  NashCheck out;
  out.worst_gain = -kInfinity;
  for (int i = 0; i < inst.num_players(); ++i) {
    const BestResponse br = IsUnsatisfied(inst, x, i, y, tolls, 0.0);
    if (br.gain > out.worst_gain) {
      out.worst_gain = br.gain;
      out.worst_player = i;
    }
  }
  out.ok = !(out.worst_gain > eta);
  return out;
}

int CountUnsatisfied(const RoutingInstance& inst, const TollVector& tolls,
                     const IntegralFlow& x, const Congestion& y, double zeta) {
  int count = 0;
  for (int i = 0; i < inst.num_players(); ++i) {
    if (IsUnsatisfied(inst, x, i, y, tolls, zeta).unsatisfied) ++count;
  }
  return count;
}

DynamicsResult BestResponseDynamics(const RoutingInstance& inst,
                                    const TollRule& tolls, IntegralFlow start,
                                    double rho, long max_moves) {
  ValidateFlow(inst, start);
  DynamicsResult out{std::move(start), 0};
  while (true) {
    const Congestion y = CongestionOf(inst, out.flow);
    bool moved = false;
    for (int i = 0; i < inst.num_players(); ++i) {
      const BestResponse br = IsUnsatisfied(inst, out.flow, i, y, tolls, rho);
      if (br.unsatisfied) {
        out.flow.paths[i] = br.path;
        ++out.moves;
        moved = true;
        break;
      }
    }
    if (!moved) return out;
    if (out.moves >= max_moves) {
      throw ConvergenceError("best-response dynamics exceeded the move cap");
    }
  }
}

std::vector<DeviationProfile> CanonicalMenu(const RoutingInstance& inst,
                                            int player,
                                            std::size_t path_cap) {
  const Demand truth = inst.demand(player);
  std::vector<Path> paths =
      EnumerateSimplePaths(inst.network(), truth, kMaxPathsPerPlayer);
  if (paths.size() > path_cap) paths.resize(path_cap);
  std::vector<DeviationProfile> menu;
  auto add = [&](std::optional<Demand> report, RemapKind remap, Path path,
                 std::string label) {
    menu.push_back({player, report, remap, std::move(path), std::move(label)});
  };
  add(truth, RemapKind::kIdentity, {}, "truthful/identity");
  add(truth, RemapKind::kBestResponse, {}, "truthful/best-response");
  for (std::size_t k = 0; k < paths.size(); ++k) {
    add(truth, RemapKind::kConstantPath, paths[k],
        "truthful/constant-" + std::to_string(k));
  }
  add(std::nullopt, RemapKind::kBestResponse, {}, "opt-out/best-response");
  for (std::size_t k = 0; k < paths.size(); ++k) {
    add(std::nullopt, RemapKind::kConstantPath, paths[k],
        "opt-out/constant-" + std::to_string(k));
  }
  std::vector<std::pair<Demand, std::string>> lies;
  if (truth.source != truth.destination) {
    lies.push_back({{truth.destination, truth.source}, "swap"});
  }
  int others = 0;
  for (int j = 0; j < inst.num_players() && others < 2; ++j) {
    const Demand d = inst.demand(j);
    if (d == truth) continue;
    bool seen = false;
    for (const auto& [lie, name] : lies) seen = seen || lie == d;
    if (seen) continue;
    lies.push_back({d, "mimic-" + std::to_string(j)});
    ++others;
  }
  for (const auto& [lie, name] : lies) {
    add(lie, RemapKind::kBestResponse, {}, "misreport-" + name +
                                               "/best-response");
    add(lie, RemapKind::kConstantPath, paths.front(),
        "misreport-" + name + "/constant-0");
  }
  return menu;
}

namespace {

// Best path for the true demand against the published noisy congestion,
// with the player's suggested unit removed. Keeps the suggestion on ties.
Path BestResponseRemap(const RoutingInstance& inst, const Demand& truth,
                       const std::optional<Path>& suggestion,
                       const MediatorOutput& out) {
  const Network& net = inst.network();
  const int m = net.num_edges();
  const Vector own =
      suggestion ? Indicator(*suggestion, m) : Vector::Zero(m);
  Vector w(m);
  for (int e = 0; e < m; ++e) {
    w[e] = net.latency(e)(out.noisy_congestion[e] + 1.0 - own[e]) +
           out.tolls[e];
  }
  auto best = ShortestPath(net, w, truth.source, truth.destination);
  if (suggestion) {
    bool feasible = true;
    try {
      ValidatePath(net, truth, *suggestion);
    } catch (const FeasibilityError&) {
      feasible = false;
    }
    if (feasible) {
      double cost = 0.0;
      for (int e : *suggestion) cost += w[e];
      if (cost <= best->cost + kTolerance) return *suggestion;
    }
  }
  return best->path;
}

// Realised cost of `player` when everyone drives `paths`.
double RealisedCost(const RoutingInstance& inst, const std::vector<Path>& paths,
                    int player, const TollVector& tolls) {
  const IntegralFlow flow{paths};
  return PathCostAt(inst, paths[player], CongestionOf(inst, flow), tolls);
}

std::vector<Path> FollowedPaths(const RoutingInstance& inst,
                                const MediatorOutput& out) {
  std::vector<Path> paths(inst.num_players());
  for (int i = 0; i < inst.num_players(); ++i) {
    if (!out.suggestions[i]) {
      throw InvariantViolation("truthful player " + std::to_string(i) +
                               " received no suggestion");
    }
    paths[i] = *out.suggestions[i];
  }
  return paths;
}

}  // namespace

DeviationGain MeasureDeviationGain(const RoutingInstance& inst,
                                   const MediatorSettings& settings,
                                   const DeviationProfile& profile,
                                   long trials, Rng& rng,
                                   PgdStageCache* cache) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  const int i = profile.player;
  if (i < 0 || i >= inst.num_players()) {
    throw std::out_of_range("deviating player out of range");
  }
  const Demand truth = inst.demand(i);
  if (profile.remap == RemapKind::kConstantPath) {
    ValidatePath(inst.network(), truth, profile.constant_path);
  }
  if (profile.remap == RemapKind::kIdentity &&
      !(profile.report && *profile.report == truth)) {
    throw std::invalid_argument(
        "identity remap needs a truthful report to stay feasible");
  }
  const MediatorReport truthful = TruthfulReports(inst);
  MediatorReport deviant = truthful;
  deviant[i] = profile.report;

  const std::uint64_t base = rng.NextU64();
  double sum = 0.0;
  double sum_sq = 0.0;
  double good_sum = 0.0;
  double dev_sum = 0.0;
  for (long k = 0; k < trials; ++k) {
    const std::uint64_t seed =
        DeriveSeed(base, static_cast<std::uint64_t>(StreamTag::kTrial),
                   static_cast<std::uint64_t>(k));
    const MediatorOutput good =
        FlowToll(inst, truthful, settings.epsilon, settings.delta,
                 settings.beta, settings.config, seed, cache);
    const double good_cost =
        RealisedCost(inst, FollowedPaths(inst, good), i, good.tolls);

    const MediatorOutput dev =
        FlowToll(inst, deviant, settings.epsilon, settings.delta,
                 settings.beta, settings.config, seed, cache);
    std::vector<Path> paths(inst.num_players());
    for (int j = 0; j < inst.num_players(); ++j) {
      if (j == i) continue;
      paths[j] = *dev.suggestions[j];
    }
    switch (profile.remap) {
      case RemapKind::kIdentity:
        paths[i] = *dev.suggestions[i];
        break;
      case RemapKind::kConstantPath:
        paths[i] = profile.constant_path;
        break;
      case RemapKind::kBestResponse:
        paths[i] = BestResponseRemap(inst, truth, dev.suggestions[i], dev);
        break;
    }
    const double dev_cost = RealisedCost(inst, paths, i, dev.tolls);
    const double d = good_cost - dev_cost;
    sum += d;
    sum_sq += d * d;
    good_sum += good_cost;
    dev_sum += dev_cost;
  }
  const double t = static_cast<double>(trials);
  DeviationGain out;
  out.trials = trials;
  out.gain = sum / t;
  out.good_cost = good_sum / t;
  out.deviation_cost = dev_sum / t;
  if (trials > 1) {
    const double var = std::max(0.0, (sum_sq - t * out.gain * out.gain) /
                                         (t - 1.0));
    out.half_width = 1.96 * std::sqrt(var / t);
  }
  return out;
}

}  // namespace flowtoll
