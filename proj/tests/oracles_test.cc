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
#include <functional>
#include <string>
#include <vector>

#include "flowtoll/errors.h"
#include "flowtoll/graph_algorithms.h"
#include "flowtoll/io.h"
#include "flowtoll/oracles.h"
#include "flowtoll/rng.h"
#include "gtest/gtest.h"
#include "test_fixtures.h"

namespace flowtoll {
namespace {

// Recursive profile search, kept separate from the library's odometer.
double RecursiveOpt(const RoutingInstance& inst) {
  std::vector<std::vector<Path>> menus;
  for (const Demand& d : inst.demands()) {
    menus.push_back(EnumerateSimplePaths(inst.network(), d, 1000));
  }
  double best = kInfinity;
  IntegralFlow x;
  x.paths.resize(inst.num_players());
  std::function<void(int)> rec = [&](int i) {
    if (i == inst.num_players()) {
      best = std::min(best, AverageCost(inst, x));
      return;
    }
    for (const Path& p : menus[i]) {
      x.paths[i] = p;
      rec(i + 1);
    }
  };
  rec(0);
  return best;
}

RoutingInstance Generated(GraphKind kind, int players, int edges,
                          std::uint64_t seed) {
  GeneratorParams params;
  params.kind = kind;
  params.players = players;
  params.edges = edges;
  params.seed = seed;
  return GenerateInstance(params);
}

TEST(BruteForceOptTest, Examples) {
  const OptimumResult pigou = BruteForceOpt(testing::Pigou2());
  EXPECT_DOUBLE_EQ(pigou.cost, 1.5);
  EXPECT_EQ(pigou.flow, testing::Flow({{0}, {1}}));
  const OptimumResult single = BruteForceOpt(testing::SingleEdge());
  EXPECT_DOUBLE_EQ(single.cost, 1.0);
  EXPECT_EQ(single.flow, testing::Flow({{0}}));
}

TEST(BruteForceOptTest, MatchesRecursiveSearchAndIsPermutationInvariant) {
  for (int trial = 0; trial < 12; ++trial) {
    const RoutingInstance inst =
        Generated(trial % 2 ? GraphKind::kLayeredDag : GraphKind::kGrid, 3, 8,
                  700 + trial);
    const OptimumResult r = BruteForceOpt(inst);
    EXPECT_NEAR(r.cost, RecursiveOpt(inst), 1e-12);
    EXPECT_NEAR(AverageCost(inst, r.flow), r.cost, 1e-12);
    std::vector<Demand> reversed(inst.demands().rbegin(),
                                 inst.demands().rend());
    EXPECT_NEAR(BruteForceOpt(inst.WithDemands(reversed)).cost, r.cost,
                1e-12);
  }
}

TEST(BruteForceOptTest, RefusesHugeInstances) {
  const RoutingInstance inst = Generated(GraphKind::kGrid, 4, 60, 1);
  EXPECT_THROW(BruteForceOpt(inst), ResourceCapError);
}

// Parallel links with identical demands: the relaxation reduces to
// min (1/n) sum_e y_e l_e(y_e) over the simplex sum y = n. Grid search over
// three links.
double ThreeLinkGridOpt(const RoutingInstance& inst) {
  const int n = inst.num_players();
  const int steps = 1500;
  const double h = static_cast<double>(n) / steps;
  double best = kInfinity;
  for (int a = 0; a <= steps; ++a) {
    for (int b = 0; a + b <= steps; ++b) {
      Congestion y(3);
      y << a * h, b * h, n - (a + b) * h;
      best = std::min(best, RelaxedCost(inst, y));
    }
  }
  return best;
}

TEST(FractionalOptTest, PigouAndGridSearch) {
  const FractionalOptResult pigou = FractionalOpt(testing::Pigou2());
  EXPECT_NEAR(pigou.value, 1.5, 1e-6);
  EXPECT_LE(pigou.value, BruteForceOpt(testing::Pigou2()).cost + 1e-9);
  for (int trial = 0; trial < 6; ++trial) {
    GeneratorParams params;
    params.kind = GraphKind::kParallelLinks;
    params.players = 2 + trial % 2;
    params.edges = 3;
    params.family = trial % 2 ? LatencyKind::kMonomial : LatencyKind::kAffine;
    params.seed = 40 + trial;
    const RoutingInstance inst = GenerateInstance(params);
    const FractionalOptResult r = FractionalOpt(inst);
    EXPECT_LE(r.certified_gap, 1e-6);
    EXPECT_NEAR(r.value, ThreeLinkGridOpt(inst), 1e-4);
    EXPECT_LE(r.value, BruteForceOpt(inst).cost + 1e-9);
  }
}

TEST(FractionalOptTest, SinglePathInstancesAreIntegral) {
  Network net({"s", "a", "t"}, {{0, 1}, {1, 2}},
              {Latency::Affine(2.0, 1.0), Latency::Monomial(1.0, 2, 0.0)});
  const RoutingInstance inst(net, {Demand{0, 2}, Demand{0, 2}, Demand{1, 2}});
  EXPECT_NEAR(FractionalOpt(inst).value, BruteForceOpt(inst).cost, 1e-9);
}

TEST(FractionalOptTest, HomogeneousInLinearLatencies) {
  std::vector<Latency> base = {Latency::Affine(1.0, 0.0),
                               Latency::Affine(0.5, 0.0),
                               Latency::Affine(2.0, 0.0),
                               Latency::Affine(1.0, 0.0),
                               Latency::Affine(0.25, 0.0)};
  std::vector<Latency> scaled;
  for (const Latency& l : base) {
    scaled.push_back(Latency::Affine(3.0 * l.a(), 0.0));
  }
  const std::vector<Edge> edges = {{0, 1}, {0, 2}, {1, 3}, {2, 3}, {1, 2}};
  const std::vector<std::string> names = {"s", "a", "b", "t"};
  const std::vector<Demand> demands(3, Demand{0, 3});
  const double a =
      FractionalOpt(RoutingInstance(Network(names, edges, base), demands), 1e-9)
          .value;
  const double b =
      FractionalOpt(RoutingInstance(Network(names, edges, scaled), demands),
                    1e-9)
          .value;
  EXPECT_NEAR(b, 3.0 * a, 1e-6);
}

TEST(VerifyNashTest, Examples) {
  const NashCheck split = VerifyNash(testing::Pigou2(),
                                     testing::Flow({{0}, {1}}),
                                     TollVector::Zero(2), 0.0);
  EXPECT_TRUE(split.ok);
  EXPECT_EQ(split.worst_gain, 0.0);
  const NashCheck piled = VerifyNash(testing::Pigou3(),
                                     testing::Flow({{0}, {0}, {0}}),
                                     TollVector::Zero(2), 0.5);
  EXPECT_FALSE(piled.ok);
  EXPECT_DOUBLE_EQ(piled.worst_gain, 1.0);
  EXPECT_TRUE(VerifyNash(testing::Pigou3(), testing::Flow({{0}, {0}, {0}}),
                         TollVector::Zero(2), kInfinity)
                  .ok);
}

TEST(CountUnsatisfiedTest, ExamplesAndMonotonicity) {
  const RoutingInstance pigou3 = testing::Pigou3();
  const IntegralFlow piled = testing::Flow({{0}, {0}, {0}});
  EXPECT_EQ(CountUnsatisfied(pigou3, TollVector::Zero(2), piled,
                             CongestionOf(pigou3, piled), 0.5),
            3);
  const IntegralFlow split = testing::Flow({{0}, {1}});
  EXPECT_EQ(CountUnsatisfied(testing::Pigou2(), TollVector::Zero(2), split,
                             CongestionOf(testing::Pigou2(), split), 0.0),
            0);
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const RoutingInstance inst = Generated(GraphKind::kGrid, 4, 12, 80 + trial);
    IntegralFlow x;
    for (const Demand& d : inst.demands()) {
      const auto paths = EnumerateSimplePaths(inst.network(), d, 1000);
      x.paths.push_back(paths[rng.UniformIndex(paths.size())]);
    }
    const Congestion y = CongestionOf(inst, x);
    const TollVector tolls = MarginalTolls(inst, y);
    int previous = inst.num_players();
    for (double zeta : {0.0, 0.1, 0.5, 1.0, 2.0, 5.0}) {
      const int count = CountUnsatisfied(inst, tolls, x, y, zeta);
      EXPECT_LE(count, previous);
      previous = count;
    }
  }
}

TEST(BestResponseDynamicsTest, ReachesNashUnderMarginalTolls) {
  for (int trial = 0; trial < 10; ++trial) {
    const RoutingInstance inst =
        Generated(trial % 2 ? GraphKind::kLayeredDag : GraphKind::kGrid, 4, 12,
                  90 + trial);
    IntegralFlow start;
    for (const Demand& d : inst.demands()) {
      start.paths.push_back(EnumerateSimplePaths(inst.network(), d, 1000)[0]);
    }
    const double before = Potential(inst, start);
    const DynamicsResult r =
        BestResponseDynamics(inst, MarginalCostTolls{}, start, 0.0);
    EXPECT_TRUE(VerifyNash(inst, r.flow, MarginalCostTolls{}, 1e-9).ok);
    EXPECT_LE(Potential(inst, r.flow), before + 1e-9);
    if (r.moves > 0) EXPECT_LT(Potential(inst, r.flow), before);
  }
}

TEST(DeviationTest, IdentityGainIsExactlyZero) {
  const RoutingInstance inst = testing::Diamond(2);
  MediatorSettings settings;
  for (double eps : {kInfinity, 4.0}) {
    settings.epsilon = eps;
    DeviationProfile identity;
    identity.player = 1;
    identity.report = inst.demand(1);
    identity.label = "identity";
    Rng rng(5);
    PgdStageCache cache;
    const DeviationGain g =
        MeasureDeviationGain(inst, settings, identity, 50, rng, &cache);
    EXPECT_EQ(g.gain, 0.0);
    EXPECT_EQ(g.half_width, 0.0);
    EXPECT_EQ(g.trials, 50);
  }
}

TEST(DeviationTest, CanonicalMenuRemapsAreFeasible) {
  const RoutingInstance inst = testing::Diamond(2);
  const auto menu = CanonicalMenu(inst, 0);
  ASSERT_FALSE(menu.empty());
  EXPECT_EQ(menu.front().remap, RemapKind::kIdentity);
  bool has_opt_out = false;
  for (const DeviationProfile& p : menu) {
    EXPECT_EQ(p.player, 0);
    EXPECT_FALSE(p.label.empty());
    has_opt_out = has_opt_out || !p.report.has_value();
    if (p.remap == RemapKind::kConstantPath) {
      EXPECT_NO_THROW(
          ValidatePath(inst.network(), inst.demand(0), p.constant_path));
    }
  }
  EXPECT_TRUE(has_opt_out);
}

TEST(DeviationTest, BestResponseAfterNoiseFreeSuggestionDoesNotHelp) {
  const RoutingInstance inst = testing::Pigou2();
  MediatorSettings settings;
  DeviationProfile br;
  br.player = 0;
  br.report = inst.demand(0);
  br.remap = RemapKind::kBestResponse;
  br.label = "truthful/best-response";
  Rng rng(6);
  PgdStageCache cache;
  const DeviationGain g =
      MeasureDeviationGain(inst, settings, br, 200, rng, &cache);
  EXPECT_LE(g.gain, 0.0);
}

}  // namespace
}  // namespace flowtoll
