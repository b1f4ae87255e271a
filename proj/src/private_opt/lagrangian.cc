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

#include "flowtoll/private_opt.h"

namespace flowtoll {

double LagrangianValue(const RoutingInstance& inst, const FractionalFlow& x,
                       const Congestion& y, const Vector& lambda) {
  return RelaxedCost(inst, y) - lambda.dot(ViolationScores(x, y));
}

Matrix GradX(const Vector& lambda, int num_players) {
  Matrix g(num_players, lambda.size());
  for (int i = 0; i < num_players; ++i) g.row(i) = -lambda.transpose();
  return g;
}

Vector GradY(const RoutingInstance& inst, const Congestion& y,
             const Vector& lambda) {
  const double n = inst.num_players();
  Vector g(inst.num_edges());
  for (int e = 0; e < inst.num_edges(); ++e) {
    const Latency& l = inst.network().latency(e);
    g[e] = (l(y[e]) + y[e] * l.Derivative(y[e])) / n + lambda[e];
  }
  return g;
}

Vector ViolationScores(const FractionalFlow& x, const Congestion& y) {
  return CongestionOf(x) - y;
}

Vector BoxGdStep(const Vector& point, const Vector& grad, double eta,
                 double upper) {
  return (point - eta * grad).cwiseMax(0.0).cwiseMin(upper);
}

SeparableMinimum MinimizeWeightedCost(const RoutingInstance& inst,
                                      double weight, const Vector& linear) {
  const double n = inst.num_players();
  SeparableMinimum out;
  out.y = Congestion::Zero(inst.num_edges());
  for (int e = 0; e < inst.num_edges(); ++e) {
    const Latency& l = inst.network().latency(e);
    auto slope = [&](double t) {
      return weight * (l(t) + t * l.Derivative(t)) / n + linear[e];
    };
    double t;
    if (slope(0.0) >= 0.0) {
      t = 0.0;
    } else if (slope(n) <= 0.0) {
      t = n;
    } else {
      double lo = 0.0, hi = n;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * n; ++it) {
        const double mid = 0.5 * (lo + hi);
        (slope(mid) < 0.0 ? lo : hi) = mid;
      }
      t = 0.5 * (lo + hi);
    }
    out.y[e] = t;
    out.value += weight * t * l(t) / n + linear[e] * t;
  }
  return out;
}

}  // namespace flowtoll
