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

// Laplace and exponential mechanisms plus privacy accounting.

#ifndef FLOWTOLL_DP_H_
#define FLOWTOLL_DP_H_

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "flowtoll/game.h"
#include "flowtoll/rng.h"

namespace flowtoll {

// epsilon = +inf selects the noise-free diagnostic mode. Nothing run in that
// mode is private.
inline bool IsNoiseFree(double epsilon) { return std::isinf(epsilon); }

struct PrivacyGuarantee {
  double epsilon = 0.0;
  double delta = 0.0;
  bool operator==(const PrivacyGuarantee& other) const = default;
};

struct PrivacyCharge {
  std::string mechanism;
  double epsilon = 0.0;
  double delta = 0.0;
};

// Append-only list of charges.
class PrivacyLedger {
 public:
  void Charge(std::string mechanism, double epsilon, double delta);
  const std::vector<PrivacyCharge>& charges() const { return charges_; }
  bool empty() const { return charges_.empty(); }

  // Sum of all charges.
  PrivacyGuarantee BasicTotal() const;

  // k charges of (eps', delta') each compose to
  // (eps' * sqrt(8 k ln(1/delta_slack)), k delta' + delta_slack).
  // Throws std::invalid_argument if the charges are not homogeneous.
  PrivacyGuarantee AdvancedTotal(double delta_slack) const;

 private:
  std::vector<PrivacyCharge> charges_;
};

struct PrivacyBudget {
  double epsilon = 1.0;
  double delta = 1e-3;
  double beta = 0.05;
  PrivacyLedger ledger;

  // Throws std::invalid_argument outside eps > 0, delta in [0, 1),
  // beta in (0, 1).
  void Validate() const;
};

struct QualityScore {
  std::vector<double> scores;  // one per outcome, in outcome order
  double sensitivity = 1.0;
};

// Laplace(0, scale) by inverse CDF. scale = 0 returns exactly 0.
double LaplaceSample(double scale, Rng& rng);

// Samples index o with probability proportional to
// exp(epsilon * q(o) / (2 sensitivity)). epsilon = +inf returns the first
// argmax. Scores of -inf are never chosen.
std::size_t ExponentialMechanism(const QualityScore& qs, double epsilon,
                                 Rng& rng);

// Exact selection probabilities of the mechanism above.
std::vector<double> ExponentialMechanismProbabilities(const QualityScore& qs,
                                                      double epsilon);

// (2 sensitivity / epsilon) ln(|O| / beta).
double UtilityBoundExpMech(std::size_t num_outcomes, double sensitivity,
                           double epsilon, double beta);
double UtilityBoundExpMech(const QualityScore& qs, double epsilon, double beta);

// eps' = eps / sqrt(8 T ln(1/delta)).
double AdvancedCompositionEpsilon(double epsilon_total, double delta, long T);

// A DP mechanism composed with a JDP one: (2 eps_D + eps_J, delta_J).
PrivacyGuarantee DpJdpCompositionBound(double epsilon_jdp, double delta_jdp,
                                       double epsilon_dp);

}  // namespace flowtoll

#endif  // FLOWTOLL_DP_H_
