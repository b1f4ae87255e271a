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


// Exact ground-truth solvers and the incentive measurement harness.

#ifndef FLOWTOLL_ORACLES_H_
#define FLOWTOLL_ORACLES_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flowtoll/game.h"
#include "flowtoll/mediator.h"
#include "flowtoll/rng.h"

namespace flowtoll {

inline constexpr std::size_t kMaxPathsPerPlayer = 1000;
inline constexpr double kMaxProfiles = 1e7;

struct OptimumResult {
  IntegralFlow flow;
  double cost = 0.0;
  double profiles = 0.0;
};

// Enumerates every path profile. Ties keep the lexicographically first
// profile. Throws ResourceCapError beyond the enumeration caps.
OptimumResult BruteForceOpt(const RoutingInstance& inst);

struct FractionalOptResult {
  double value = 0.0;
  Congestion y;
  double certified_gap = 0.0;  // Frank-Wolfe duality gap at the answer
  long iterations = 0;
};

// Minimum of the convex relaxation, certified to `tolerance` by the
// Frank-Wolfe gap. Throws ConvergenceError past the iteration cap.
FractionalOptResult FractionalOpt(const RoutingInstance& inst,
                                  double tolerance = 1e-6);

struct NashCheck {
  bool ok = true;
  int worst_player = -1;
  double worst_gain = 0.0;
};

// Every player's exact best-response gain at the flow's own congestion.
NashCheck VerifyNash(const RoutingInstance& inst, const IntegralFlow& x,
                     const TollRule& tolls, double eta);

int CountUnsatisfied(const RoutingInstance& inst, const TollVector& tolls,
                     const IntegralFlow& x, const Congestion& y, double zeta);

struct DynamicsResult {
  IntegralFlow flow;
  long moves = 0;
};

// Moves the lowest-index rho-unsatisfied player (against the current exact
// congestion) to its best response until none remain.
DynamicsResult BestResponseDynamics(const RoutingInstance& inst,
                                    const TollRule& tolls, IntegralFlow start,
                                    double rho, long max_moves = 1000000);

enum class RemapKind { kIdentity, kConstantPath, kBestResponse };

struct DeviationProfile {
  int player = 0;
  // nullopt report means opt-out; otherwise the reported demand.
  std::optional<Demand> report;
  RemapKind remap = RemapKind::kIdentity;
  Path constant_path;  // used by kConstantPath
  std::string label;
};

struct MediatorSettings {
  double epsilon = kInfinity;
  double delta = 1e-3;
  double beta = 0.05;
  MediatorConfig config;
};

struct DeviationGain {
  double gain = 0.0;  // good-behaviour cost minus deviation cost
  double half_width = 0.0;
  double good_cost = 0.0;
  double deviation_cost = 0.0;
  long trials = 0;
};

// Identity, best-response remap, and each constant path (first `path_cap`)
// under truthful, opt-out and a few misreports.
std::vector<DeviationProfile> CanonicalMenu(const RoutingInstance& inst,
                                            int player,
                                            std::size_t path_cap = 4);

// Cost of player `profile.player` under the realised mediator outcome.
// Every trial reuses one seed in both arms.
DeviationGain MeasureDeviationGain(const RoutingInstance& inst,
                                   const MediatorSettings& settings,
                                   const DeviationProfile& profile,
                                   long trials, Rng& rng,
                                   PgdStageCache* cache = nullptr);

}  // namespace flowtoll

#endif  // FLOWTOLL_ORACLES_H_
