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

#include "flowtoll/dp.h"

#include <algorithm>
#include <stdexcept>
#include <utility>

#include "flowtoll/errors.h"

namespace flowtoll {

void PrivacyLedger::Charge(std::string mechanism, double epsilon,
                           double delta) {
  if (epsilon < 0.0 || delta < 0.0) {
    throw std::invalid_argument("privacy charges must be non-negative");
  }
  charges_.push_back({std::move(mechanism), epsilon, delta});
}

PrivacyGuarantee PrivacyLedger::BasicTotal() const {
  PrivacyGuarantee total;
  for (const PrivacyCharge& c : charges_) {
    total.epsilon += c.epsilon;
    total.delta += c.delta;
  }
  return total;
}

PrivacyGuarantee PrivacyLedger::AdvancedTotal(double delta_slack) const {
  if (charges_.empty()) return {};
  if (!(delta_slack > 0.0 && delta_slack < 1.0)) {
    throw std::invalid_argument("delta slack must lie in (0, 1)");
  }
  const double eps = charges_.front().epsilon;
  const double del = charges_.front().delta;
  for (const PrivacyCharge& c : charges_) {
    if (c.epsilon != eps || c.delta != del) {
      throw std::invalid_argument(
          "advanced composition needs identical charges");
    }
  }
  const double k = static_cast<double>(charges_.size());
  return {eps * std::sqrt(8.0 * k * std::log(1.0 / delta_slack)),
          k * del + delta_slack};
}

void PrivacyBudget::Validate() const {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  if (!(delta >= 0.0 && delta < 1.0)) {
    throw std::invalid_argument("delta must lie in [0, 1)");
  }
  if (!(beta > 0.0 && beta < 1.0)) {
    throw std::invalid_argument("beta must lie in (0, 1)");
  }
}

double LaplaceSample(double scale, Rng& rng) {
  if (scale < 0.0 || std::isnan(scale)) {
    throw std::invalid_argument("Laplace scale must be non-negative");
  }
  if (scale == 0.0) return 0.0;
  const double sign = (rng.NextU64() >> 63) ? 1.0 : -1.0;
  return sign * (-scale * std::log(rng.UniformOpenZero()));
}

std::vector<double> ExponentialMechanismProbabilities(const QualityScore& qs,
                                                      double epsilon) {
  if (qs.scores.empty()) {
    throw std::invalid_argument("exponential mechanism needs outcomes");
  }
  if (!(qs.sensitivity > 0.0)) {
    throw std::invalid_argument("sensitivity must be positive");
  }
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  const double best = *std::max_element(qs.scores.begin(), qs.scores.end());
  if (best == -kInfinity) {
    throw std::invalid_argument("all quality scores are -inf");
  }
  std::vector<double> p(qs.scores.size(), 0.0);
  if (IsNoiseFree(epsilon)) {
    const auto it = std::find(qs.scores.begin(), qs.scores.end(), best);
    p[static_cast<std::size_t>(it - qs.scores.begin())] = 1.0;
    return p;
  }
  const double scale = epsilon / (2.0 * qs.sensitivity);
  double total = 0.0;
  for (std::size_t o = 0; o < p.size(); ++o) {
    p[o] = std::exp(scale * (qs.scores[o] - best));
    total += p[o];
  }
  for (double& v : p) v /= total;
  return p;
}

std::size_t ExponentialMechanism(const QualityScore& qs, double epsilon,
                                 Rng& rng) {
  const std::vector<double> p = ExponentialMechanismProbabilities(qs, epsilon);
  if (IsNoiseFree(epsilon)) {
    return static_cast<std::size_t>(
        std::find(p.begin(), p.end(), 1.0) - p.begin());
  }
  const double u = rng.Uniform01();
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t o = 0; o < p.size(); ++o) {
    if (p[o] <= 0.0) continue;
    last_positive = o;
    acc += p[o];
    if (u < acc) return o;
  }
  return last_positive;
}

double UtilityBoundExpMech(std::size_t num_outcomes, double sensitivity,
                           double epsilon, double beta) {
  if (IsNoiseFree(epsilon)) return 0.0;
  return 2.0 * sensitivity / epsilon *
         std::log(static_cast<double>(num_outcomes) / beta);
}

double UtilityBoundExpMech(const QualityScore& qs, double epsilon,
                           double beta) {
  return UtilityBoundExpMech(qs.scores.size(), qs.sensitivity, epsilon, beta);
}

double AdvancedCompositionEpsilon(double epsilon_total, double delta, long T) {
  if (T < 1) throw std::invalid_argument("T must be at least 1");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("delta must lie in (0, 1)");
  }
  return epsilon_total /
         std::sqrt(8.0 * static_cast<double>(T) * std::log(1.0 / delta));
}

PrivacyGuarantee DpJdpCompositionBound(double epsilon_jdp, double delta_jdp,
                                       double epsilon_dp) {
  return {2.0 * epsilon_dp + epsilon_jdp, delta_jdp};
}

}  // namespace flowtoll
