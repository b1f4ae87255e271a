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

#include "flowtoll/io.h"
#include "flowtoll/private_opt.h"
#include "flowtoll/rng.h"
#include "gtest/gtest.h"
#include "test_fixtures.h"

namespace flowtoll {
namespace {

// Node-arc incidence system A x = b of one demand.
void Incidence(const Network& net, const Demand& d, Matrix* a, Vector* b) {
  *a = Matrix::Zero(net.num_vertices(), net.num_edges());
  *b = Vector::Zero(net.num_vertices());
  for (int e = 0; e < net.num_edges(); ++e) {
    (*a)(net.edge(e).tail, e) += 1.0;
    (*a)(net.edge(e).head, e) -= 1.0;
  }
  if (d.source != d.destination) {
    (*b)[d.source] = 1.0;
    (*b)[d.destination] = -1.0;
  }
}

// Dense QP oracle: tries every assignment of each coordinate to {0, 1, free},
// solves the equality-constrained least squares on the free block and keeps
// the closest box-feasible candidate.
Vector ActiveSetOracle(const Network& net, const Demand& d, const Vector& v) {
  Matrix a;
  Vector b;
  Incidence(net, d, &a, &b);
  const int m = net.num_edges();
  int combos = 1;
  for (int e = 0; e < m; ++e) combos *= 3;
  Vector best;
  double best_dist = kInfinity;
  for (int code = 0; code < combos; ++code) {
    std::vector<int> state(m);
    int c = code;
    for (int e = 0; e < m; ++e) {
      state[e] = c % 3;
      c /= 3;
    }
    std::vector<int> free_idx;
    Vector x = Vector::Zero(m);
    for (int e = 0; e < m; ++e) {
      if (state[e] == 1) x[e] = 1.0;
      if (state[e] == 2) free_idx.push_back(e);
    }
    Vector rhs = b - a * x;
    const int k = static_cast<int>(free_idx.size());
    if (k > 0) {
      Matrix af(a.rows(), k);
      Vector vf(k);
      for (int j = 0; j < k; ++j) {
        af.col(j) = a.col(free_idx[j]);
        vf[j] = v[free_idx[j]];
      }
      // x_f = v_f - A_f^T mu with A_f A_f^T mu = A_f v_f - rhs.
      const Matrix gram = af * af.transpose();
      const Vector mu =
          gram.completeOrthogonalDecomposition().solve(af * vf - rhs);
      const Vector xf = vf - af.transpose() * mu;
      for (int j = 0; j < k; ++j) x[free_idx[j]] = xf[j];
    }
    if ((a * x - b).lpNorm<Eigen::Infinity>() > 1e-9) continue;
    if (x.minCoeff() < -1e-12 || x.maxCoeff() > 1.0 + 1e-12) continue;
    const double dist = (x - v).squaredNorm();
    if (dist < best_dist) {
      best_dist = dist;
      best = x;
    }
  }
  return best;
}

TEST(ProjectionTest, PigouClosedForms) {
  const RoutingInstance inst = testing::Pigou2();
  Vector v(2);
  v << 0.7, 0.7;
  Vector got = ProjectFlowPolytope(inst, 0, v);
  EXPECT_NEAR(got[0], 0.5, 1e-9);
  EXPECT_NEAR(got[1], 0.5, 1e-9);
  EXPECT_LE((got - ActiveSetOracle(inst.network(), inst.demand(0), v))
                .lpNorm<Eigen::Infinity>(),
            1e-9);
  v << 2.0, -1.0;
  got = ProjectFlowPolytope(inst, 0, v);
  EXPECT_NEAR(got[0], 1.0, 1e-9);
  EXPECT_NEAR(got[1], 0.0, 1e-9);
}

TEST(ProjectionTest, FeasiblePointIsFixed) {
  const RoutingInstance inst = testing::Diamond(1);
  const FlowPolytopeProjector projector(inst.network(), inst.demand(0));
  Vector x(5);
  x << 0.6, 0.4, 0.3, 0.7, 0.3;
  const auto r = projector.Project(x);
  EXPECT_LE((r.x - x).lpNorm<Eigen::Infinity>(), 1e-9);
  EXPECT_LE(r.kkt_residual, FlowPolytopeProjector::kKktTolerance);
}

TEST(ProjectionTest, ZeroGradientStepKeepsPoint) {
  const RoutingInstance inst = testing::Diamond(1);
  const FlowPolytopeProjector projector(inst.network(), inst.demand(0));
  Vector x(5);
  x << 1.0, 0.0, 0.0, 1.0, 1.0;
  const Vector out = FlowGdStep(projector, x, Vector::Zero(5), 0.3);
  EXPECT_LE((out - x).lpNorm<Eigen::Infinity>(), 1e-9);
}

TEST(ProjectionTest, MatchesDenseOracleOnSmallGraphs) {
  Rng rng(11);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    GeneratorParams params;
    params.kind = trial % 4 == 0 ? GraphKind::kParallelLinks
                                 : GraphKind::kLayeredDag;
    params.players = 1;
    params.edges = 4 + trial % 3;
    params.seed = 500 + trial;
    const RoutingInstance inst = GenerateInstance(params);
    if (inst.num_edges() > 6) continue;
    const FlowPolytopeProjector projector(inst.network(), inst.demand(0));
    for (int rep = 0; rep < 5; ++rep) {
      Vector v(inst.num_edges());
      for (int e = 0; e < v.size(); ++e) v[e] = rng.Uniform01() * 3.0 - 1.0;
      const auto r = projector.Project(v);
      const Vector oracle =
          ActiveSetOracle(inst.network(), inst.demand(0), v);
      ASSERT_EQ(oracle.size(), v.size());
      EXPECT_LE((r.x - oracle).lpNorm<Eigen::Infinity>(), 1e-6)
          << "trial " << trial << " rep " << rep;
      EXPECT_LE(r.kkt_residual, FlowPolytopeProjector::kKktTolerance);
      EXPECT_LE(ConservationResidual(inst.network(), inst.demand(0), r.x),
                1e-6);
      const auto again = projector.Project(r.x);
      EXPECT_LE((again.x - r.x).lpNorm<Eigen::Infinity>(), 1e-6);
      ++checked;
    }
  }
  EXPECT_GE(checked, 100);
}

TEST(ProjectionTest, LargerGridsConverge) {
  Rng rng(12);
  for (int trial = 0; trial < 5; ++trial) {
    GeneratorParams params;
    params.kind = GraphKind::kGrid;
    params.players = 1;
    params.edges = 24;
    params.seed = 900 + trial;
    const RoutingInstance inst = GenerateInstance(params);
    const FlowPolytopeProjector projector(inst.network(), inst.demand(0));
    Vector v(inst.num_edges());
    for (int e = 0; e < v.size(); ++e) v[e] = rng.Uniform01() * 2.0 - 0.5;
    const auto r = projector.Project(v);
    EXPECT_LE(r.kkt_residual, FlowPolytopeProjector::kKktTolerance);
    EXPECT_GE(r.x.minCoeff(), -1e-9);
    EXPECT_LE(r.x.maxCoeff(), 1.0 + 1e-9);
  }
}

}  // namespace
}  // namespace flowtoll
