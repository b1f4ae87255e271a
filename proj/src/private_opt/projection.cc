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
#include <string>
#include <vector>

#include "flowtoll/errors.h"
#include "flowtoll/graph_algorithms.h"
#include "flowtoll/private_opt.h"

namespace flowtoll {

struct FlowPolytopeProjector::Geometry {
  Network network;
  Matrix incidence;         // V x m, +1 on the tail row, -1 on the head row
  Matrix pseudo_inverse;    // m x V
  Matrix affine_projector;  // I - A^+ A
};

FlowPolytopeProjector::FlowPolytopeProjector(const Network& network,
                                             const Demand& demand)
    : demand_(demand) {
  const int m = network.num_edges();
  const int v_count = network.num_vertices();
  auto geometry = std::make_shared<Geometry>();
  geometry->network = network;
  geometry->incidence = Matrix::Zero(v_count, m);
  for (int e = 0; e < m; ++e) {
    geometry->incidence(network.edge(e).tail, e) += 1.0;
    geometry->incidence(network.edge(e).head, e) -= 1.0;
  }
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(geometry->incidence);
  geometry->pseudo_inverse = cod.pseudoInverse();
  geometry->affine_projector =
      Matrix::Identity(m, m) -
      geometry->pseudo_inverse * geometry->incidence;
  geometry_ = geometry;
  b_ = Vector::Zero(v_count);
  if (demand.source != demand.destination) {
    b_[demand.source] = 1.0;
    b_[demand.destination] = -1.0;
  }
  affine_offset_ = geometry_->pseudo_inverse * b_;
}

double FlowPolytopeProjector::KktResidual(const Vector& x,
                                          const Vector& v) const {
  const Matrix& a = geometry_->incidence;
  const int m = static_cast<int>(x.size());
  double primal = (a * x - b_).lpNorm<Eigen::Infinity>();
  for (int e = 0; e < m; ++e) {
    primal = std::max({primal, -x[e], x[e] - 1.0});
  }
  // Multipliers fitted on the free coordinates; stationarity then requires
  // s = x - v + A^T mu to vanish there, be >= 0 at zero and <= 0 at one.
  const Vector g = x - v;
  std::vector<int> free;
  for (int e = 0; e < m; ++e) {
    if (x[e] > kTolerance && x[e] < 1.0 - kTolerance) free.push_back(e);
  }
  Vector mu = Vector::Zero(a.rows());
  if (!free.empty()) {
    Matrix a_free(a.rows(), static_cast<Eigen::Index>(free.size()));
    Vector g_free(static_cast<Eigen::Index>(free.size()));
    for (std::size_t k = 0; k < free.size(); ++k) {
      a_free.col(static_cast<Eigen::Index>(k)) = a.col(free[k]);
      g_free[static_cast<Eigen::Index>(k)] = g[free[k]];
    }
    mu = a_free.transpose().completeOrthogonalDecomposition().solve(-g_free);
  }
  const Vector s = g + a.transpose() * mu;
  double dual = 0.0;
  for (int e = 0; e < m; ++e) {
    if (x[e] <= kTolerance) {
      dual = std::max(dual, -s[e]);
    } else if (x[e] >= 1.0 - kTolerance) {
      dual = std::max(dual, s[e]);
    } else {
      dual = std::max(dual, std::abs(s[e]));
    }
  }
  if (std::max(primal, dual) <= kKktTolerance) return std::max(primal, dual);
  // At a vertex the fit above leaves mu undetermined. The linear-optimization
  // gap g . x - min_{y in polytope} g . y is an exact certificate instead:
  // it bounds |x - P(v)|^2 / 2.
  const double gap =
      g.dot(x) - MinCostUnitFlow(geometry_->network, demand_, g).value;
  return std::max(primal, std::min(dual, std::sqrt(2.0 * std::max(gap, 0.0))));
}

bool FlowPolytopeProjector::Polish(const Vector& box_point, const Vector& v,
                                   Vector* out) const {
  const Matrix& a = geometry_->incidence;
  const int m = static_cast<int>(v.size());
  std::vector<int> free;
  Vector x = Vector::Zero(m);
  for (int e = 0; e < m; ++e) {
    if (box_point[e] >= 1.0) {
      x[e] = 1.0;
    } else if (box_point[e] > 0.0) {
      free.push_back(e);
    }
  }
  if (!free.empty()) {
    const Vector rhs = b_ - a * x;
    const auto k = static_cast<Eigen::Index>(free.size());
    Matrix a_free(a.rows(), k);
    Vector v_free(k);
    for (Eigen::Index j = 0; j < k; ++j) {
      a_free.col(j) = a.col(free[j]);
      v_free[j] = v[free[j]];
    }
    const Vector correction =
        a_free.completeOrthogonalDecomposition().solve(a_free * v_free - rhs);
    const Vector x_free = v_free - correction;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (x_free[j] < -1e-12 || x_free[j] > 1.0 + 1e-12) return false;
      x[free[j]] = std::clamp(x_free[j], 0.0, 1.0);
    }
  }
  if (KktResidual(x, v) > kKktTolerance) return false;
  *out = x;
  return true;
}

FlowPolytopeProjector::Result FlowPolytopeProjector::Project(
    const Vector& v) const {
  const Matrix& projector = geometry_->affine_projector;
  const int m = static_cast<int>(v.size());
  Vector x = v;
  Vector q = Vector::Zero(m);
  Result result;
  double residual = kInfinity;
  for (int sweep = 1; sweep <= kMaxSweeps; ++sweep) {
    const Vector affine = projector * x + affine_offset_;
    const Vector shifted = affine + q;
    x = shifted.cwiseMax(0.0).cwiseMin(1.0);
    q = shifted - x;
    const bool checkpoint =
        sweep <= 4 || sweep % 10 == 0 || sweep == kMaxSweeps;
    if (!checkpoint) continue;
    Vector polished;
    if (Polish(x, v, &polished)) {
      result.x = polished;
      result.sweeps = sweep;
      result.kkt_residual = KktResidual(polished, v);
      result.polished = true;
      return result;
    }
    residual = KktResidual(x, v);
    if (residual <= kKktTolerance) {
      result.x = x;
      result.sweeps = sweep;
      result.kkt_residual = residual;
      return result;
    }
  }
  throw ConvergenceError("flow projection stalled with KKT residual " +
                         std::to_string(residual));
}

Vector ProjectFlowPolytope(const RoutingInstance& inst, int i,
                           const Vector& v) {
  if (i < 0 || i >= inst.num_players()) {
    throw std::out_of_range("player index out of range");
  }
  if (v.size() != inst.num_edges()) {
    throw std::invalid_argument("vector length must equal the edge count");
  }
  return FlowPolytopeProjector(inst.network(), inst.demand(i)).Project(v).x;
}

Vector FlowGdStep(const FlowPolytopeProjector& projector, const Vector& x_i,
                  const Vector& grad_i, double eta) {
  return projector.Project(x_i - eta * grad_i).x;
}

}  // namespace flowtoll
