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


#include <cmath>
#include <vector>

#include "flowtoll/errors.h"
#include "flowtoll/game.h"
#include "flowtoll/graph_algorithms.h"
#include "flowtoll/io.h"
#include "flowtoll/rng.h"
#include "gtest/gtest.h"
#include "test_fixtures.h"

namespace flowtoll {
namespace {

using testing::Flow;
using testing::Pigou2;
using testing::Pigou3;

// Independent enumeration of pigou-type costs: k players on e0 (l = y),
// the rest on e1 (l = 2).
double PigouCostByCounts(int on_e0, int players) {
  return (on_e0 * static_cast<double>(on_e0) + (players - on_e0) * 2.0) /
         players;
}

TEST(LatencyTest, AffineAndMonomialValues) {
  const Latency affine = Latency::Affine(2.0, 1.0);
  EXPECT_DOUBLE_EQ(affine(3.0), 7.0);
  EXPECT_DOUBLE_EQ(affine.Derivative(3.0), 2.0);
  EXPECT_DOUBLE_EQ(affine.SecondDerivative(3.0), 0.0);
  const Latency cubic = Latency::Monomial(1.0, 3, 0.5);
  EXPECT_DOUBLE_EQ(cubic(2.0), 8.5);
  EXPECT_DOUBLE_EQ(cubic.Derivative(2.0), 12.0);
  EXPECT_DOUBLE_EQ(cubic.SecondDerivative(2.0), 12.0);
  EXPECT_DOUBLE_EQ(cubic.Lipschitz(2), 12.0);
  EXPECT_DOUBLE_EQ(cubic(-1.0), 0.5);
}

TEST(LatencyTest, RejectsNegativeCoefficients) {
  EXPECT_THROW(Latency::Affine(-1.0, 0.0), SemanticError);
  EXPECT_THROW(Latency::Monomial(1.0, 0, 0.0), SemanticError);
}

TEST(LatencyTest, MonotoneOnSampledGrid) {
  const std::vector<Latency> ls = {Latency::Affine(0.3, 1.0),
                                   Latency::Monomial(0.7, 2, 0.0),
                                   Latency::Monomial(0.1, 4, 2.0)};
  for (const Latency& l : ls) {
    double prev = l(0.0);
    for (int k = 1; k <= 400; ++k) {
      const double v = l(k * 0.01);
      EXPECT_LE(prev, v);
      prev = v;
    }
  }
}

TEST(InstanceTest, RejectsUnroutableDemand) {
  Network net({"s", "t"}, {{0, 1}}, {Latency::Affine(1.0, 0.0)});
  EXPECT_THROW(RoutingInstance(net, {Demand{1, 0}}), SemanticError);
}

TEST(InstanceTest, GammaAndBoundedness) {
  const RoutingInstance inst = Pigou2();
  EXPECT_DOUBLE_EQ(inst.gamma(), 1.0);
  EXPECT_DOUBLE_EQ(inst.toll_cap(), 2.0);
  EXPECT_TRUE(inst.BoundednessViolations().empty());
  const RoutingInstance one = testing::Pigou(1);
  EXPECT_EQ(one.BoundednessViolations(), std::vector<int>({1}));
}

TEST(AverageCostTest, PigouProfiles) {
  const RoutingInstance inst = Pigou2();
  EXPECT_DOUBLE_EQ(AverageCost(inst, Flow({{0}, {1}})), PigouCostByCounts(1, 2));
  EXPECT_DOUBLE_EQ(AverageCost(inst, Flow({{0}, {1}})), 1.5);
  EXPECT_DOUBLE_EQ(AverageCost(inst, Flow({{0}, {0}})), 2.0);
  EXPECT_DOUBLE_EQ(AverageCost(inst, Flow({{1}, {1}})), PigouCostByCounts(0, 2));
}

TEST(AverageCostTest, DegenerateDemandRoutesEmptyPath) {
  Network net({"s", "t"}, {{0, 1}}, {Latency::Affine(1.0, 0.0)});
  const RoutingInstance inst(net, {Demand{0, 0}});
  EXPECT_DOUBLE_EQ(AverageCost(inst, Flow({{}})), 0.0);
  EXPECT_DOUBLE_EQ(PlayerCost(inst, Flow({{}}), 0, TollVector::Zero(1)), 0.0);
}

TEST(AverageCostTest, InfeasibleFlowNamesConservationRow) {
  const RoutingInstance inst = testing::Diamond(1);
  try {
    AverageCost(inst, Flow({{0, 3}}));
    FAIL() << "expected a feasibility error";
  } catch (const FeasibilityError& err) {
    EXPECT_NE(std::string(err.what()).find("vertex"), std::string::npos);
  }
}

TEST(AverageCostTest, FractionalFlowMatchesRelaxedCost) {
  const RoutingInstance inst = Pigou2();
  FractionalFlow x(2, 2);
  x << 0.5, 0.5, 0.5, 0.5;
  EXPECT_DOUBLE_EQ(AverageCost(inst, x), (1.0 * 1.0 + 1.0 * 2.0) / 2.0);
  x(0, 0) = 0.7;
  EXPECT_THROW(AverageCost(inst, x), FeasibilityError);
}

TEST(PlayerCostTest, PigouSplit) {
  const RoutingInstance inst = Pigou2();
  const TollVector zero = TollVector::Zero(2);
  EXPECT_DOUBLE_EQ(PlayerCost(inst, Flow({{0}, {1}}), 0, zero), 1.0);
  EXPECT_DOUBLE_EQ(PlayerCost(inst, Flow({{0}, {1}}), 1, zero), 2.0);
  EXPECT_THROW(PlayerCost(inst, Flow({{0}, {1}}), 2, zero), std::out_of_range);
}

TEST(PathCostAtTest, UsesGivenCongestion) {
  const RoutingInstance inst = Pigou2();
  Congestion y(2);
  y << 2.0, 0.0;
  EXPECT_DOUBLE_EQ(PathCostAt(inst, {0}, y, TollVector::Zero(2)), 2.0);
  EXPECT_DOUBLE_EQ(PathCostAt(inst, {}, y, TollVector::Zero(2)), 0.0);
  y << 0.0, 1.5;
  TollVector tau(2);
  tau << 0.0, 0.5;
  EXPECT_DOUBLE_EQ(PathCostAt(inst, {1}, y, tau), 2.5);
}

TEST(MarginalTollTest, Examples) {
  EXPECT_DOUBLE_EQ(MarginalToll(Latency::Affine(1.0, 0.0), 2.0, 100.0), 1.0);
  EXPECT_DOUBLE_EQ(MarginalToll(Latency::Monomial(3.0, 2, 1.0), 1.0, 100.0),
                   0.0);
  EXPECT_DOUBLE_EQ(MarginalToll(Latency::Monomial(1.0, 2, 0.0), 3.0, 100.0),
                   10.0);
  EXPECT_DOUBLE_EQ(MarginalToll(Latency::Monomial(1.0, 2, 0.0), 3.0, 6.0),
                   6.0);
}

TEST(MarginalTollTest, ClipsBelowOneToZero) {
  const Latency l = Latency::Affine(1.0, 0.0);
  for (double y : {0.0, 0.2, 0.5, 0.99}) {
    EXPECT_EQ(MarginalToll(l, y, 10.0), 0.0);
  }
}

TEST(PotentialTest, HandExpandedDoubleSum) {
  const RoutingInstance inst = Pigou2();
  // e0 carries 2: (l(1) + tau(1)) + (l(2) + tau(2)) = (1 + 0) + (2 + 1).
  EXPECT_DOUBLE_EQ(Potential(inst, Flow({{0}, {0}})), 4.0);
  Network net({"s"}, {{0, 0}}, {Latency::Affine(1.0, 0.0)});
  const RoutingInstance empty(net, {Demand{0, 0}});
  EXPECT_DOUBLE_EQ(Potential(empty, Flow({{}})), 0.0);
}

TEST(PotentialTest, EqualsNTimesAverageCostOnRandomFlows) {
  Rng rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    GeneratorParams params;
    params.kind = trial % 2 ? GraphKind::kLayeredDag : GraphKind::kGrid;
    params.family = trial % 3 ? LatencyKind::kMonomial : LatencyKind::kAffine;
    params.players = 2 + trial % 4;
    params.edges = 10;
    params.seed = 100 + trial;
    const RoutingInstance inst = GenerateInstance(params);
    IntegralFlow x;
    for (const Demand& d : inst.demands()) {
      const auto paths = EnumerateSimplePaths(inst.network(), d, 100000);
      x.paths.push_back(paths[rng.UniformIndex(paths.size())]);
    }
    EXPECT_NEAR(Potential(inst, x), inst.num_players() * AverageCost(inst, x),
                1e-9);
  }
}

TEST(IsUnsatisfiedTest, PigouTwoBothOnFastEdgeIsSatisfied) {
  const RoutingInstance inst = Pigou2();
  const IntegralFlow x = Flow({{0}, {0}});
  Congestion y(2);
  y << 2.0, 0.0;
  const BestResponse br =
      IsUnsatisfied(inst, x, 0, y, TollVector::Zero(2), 0.1);
  EXPECT_FALSE(br.unsatisfied);
  EXPECT_NEAR(br.gain, 0.0, 1e-12);
  EXPECT_EQ(br.path, Path({0}));
}

TEST(IsUnsatisfiedTest, PigouThreeAllOnFastEdge) {
  const RoutingInstance inst = Pigou3();
  const IntegralFlow x = Flow({{0}, {0}, {0}});
  const Congestion y = CongestionOf(inst, x);
  const BestResponse br =
      IsUnsatisfied(inst, x, 1, y, TollVector::Zero(2), 0.5);
  EXPECT_TRUE(br.unsatisfied);
  EXPECT_DOUBLE_EQ(br.gain, 1.0);
  EXPECT_EQ(br.path, Path({1}));
}

TEST(IsUnsatisfiedTest, InfiniteThresholdNeverFlags) {
  const RoutingInstance inst = Pigou3();
  const IntegralFlow x = Flow({{0}, {0}, {0}});
  const BestResponse br = IsUnsatisfied(inst, x, 0, CongestionOf(inst, x),
                                        TollVector::Zero(2), kInfinity);
  EXPECT_FALSE(br.unsatisfied);
  EXPECT_DOUBLE_EQ(br.gain, 1.0);
}

TEST(IsUnsatisfiedTest, ExchangePropertyMatchesPotentialDrop) {
  Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    GeneratorParams params;
    params.kind = GraphKind::kLayeredDag;
    params.family = trial % 2 ? LatencyKind::kMonomial : LatencyKind::kAffine;
    params.players = 3;
    params.edges = 9;
    params.seed = 500 + trial;
    const RoutingInstance inst = GenerateInstance(params);
    IntegralFlow x;
    for (const Demand& d : inst.demands()) {
      const auto paths = EnumerateSimplePaths(inst.network(), d, 100000);
      x.paths.push_back(paths[rng.UniformIndex(paths.size())]);
    }
    const Congestion y = CongestionOf(inst, x);
    for (int i = 0; i < inst.num_players(); ++i) {
      const BestResponse br =
          IsUnsatisfied(inst, x, i, y, MarginalCostTolls{}, 0.0);
      IntegralFlow moved = x;
      moved.paths[i] = br.path;
      EXPECT_NEAR(Potential(inst, x) - Potential(inst, moved),
                  br.unsatisfied ? br.gain : 0.0, 1e-9);
    }
  }
}

}  // namespace
}  // namespace flowtoll
