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


// Instance and result formats, the instance generator and run plumbing.

#ifndef FLOWTOLL_IO_H_
#define FLOWTOLL_IO_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flowtoll/game.h"
#include "flowtoll/mediator.h"
#include "flowtoll/oracles.h"
#include "json.hpp"

namespace flowtoll {

using Json = nlohmann::ordered_json;

inline constexpr char kInstanceHeader[] = "flowtoll-instance v1";
inline constexpr char kResultSchema[] = "flowtoll-result/1";

// Shortest decimal text that reads back to the same double; "inf", "-inf"
// and "nan" for non-finite values.
std::string FormatDouble(double value);
// JSON number, or the FormatDouble string for non-finite values.
Json JsonNumber(double value);
// Reads either form written by JsonNumber.
double ReadJsonNumber(const Json& value);

// Line-based text format:
//   flowtoll-instance v1
//   vertex <id>
//   edge <tail> <head> affine <a> <b>
//   edge <tail> <head> monomial <a> <k> <b>
//   demand <source> <destination>
//   opt <value>
// '#' starts a comment. Throws ParseError with line and column for
// malformed text and SemanticError for invalid instances.
RoutingInstance ParseInstance(std::string_view text);
std::string SerializeInstance(const RoutingInstance& inst);

RoutingInstance LoadInstance(const std::string& path);
void SaveInstance(const std::string& path, const RoutingInstance& inst);

enum class GraphKind { kParallelLinks, kGrid, kLayeredDag };
enum class LatencyKind { kAffine, kMonomial, kPigou };

GraphKind ParseGraphKind(const std::string& name);
LatencyKind ParseLatencyKind(const std::string& name);
std::string ToString(GraphKind kind);
std::string ToString(LatencyKind kind);

struct GeneratorParams {
  GraphKind kind = GraphKind::kParallelLinks;
  int players = 2;
  int edges = 2;  // target edge count
  LatencyKind family = LatencyKind::kAffine;
  std::uint64_t seed = 1;
};

// Deterministic in the parameters. Random families keep l_e(n) <= n.
// Throws SemanticError after 100 attempts without routable demands.
RoutingInstance GenerateInstance(const GeneratorParams& params);

struct RunConfig {
  double epsilon = 1.0;
  double delta = 1e-3;
  double beta = 0.05;
  bool noise_free = false;
  std::uint64_t seed = 1;
  double c_t = 1.0;
  double c_alpha = 1.0;
  bool flip_dual_sign = false;
  long noise_free_rounds = 1000;
  long trials = 10000;
  std::string output;
  bool timing = false;

  double effective_epsilon() const { return noise_free ? kInfinity : epsilon; }
  MediatorConfig mediator() const;
  MediatorSettings settings() const;
};

Json ConfigToJson(const RunConfig& config);

struct SolveReport {
  MediatorOutput output;
  std::optional<OptimumResult> optimum;
  std::optional<double> fractional_optimum;
  double average_cost = 0.0;
  double rounded_cost = 0.0;
  double fractional_cost = 0.0;
};

// Runs the mediator on truthful reports and the exact oracles when the
// instance is small enough.
SolveReport RunSolve(const RoutingInstance& inst, const RunConfig& config);

Json SolveResultJson(const RoutingInstance& inst, const RunConfig& config,
                     const SolveReport& report);

// Invariant checks on a solve result. Returns one message per failure.
std::vector<std::string> CheckResult(const Json& result,
                                     const RoutingInstance& inst);

// Fixed-width text rendering of a two-level table.
std::string FormatTable(const std::vector<std::vector<std::string>>& rows);

}  // namespace flowtoll

#endif  // FLOWTOLL_IO_H_
