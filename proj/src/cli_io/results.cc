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
#include <sstream>
#include <string>
#include <vector>

#include "flowtoll/errors.h"
#include "flowtoll/io.h"
#include "flowtoll/private_opt.h"

namespace flowtoll {

MediatorConfig RunConfig::mediator() const {
  MediatorConfig m;
  m.pgd.c_t = c_t;
  m.pgd.flip_dual_sign = flip_dual_sign;
  m.pgd.noise_free_rounds = noise_free_rounds;
  m.c_alpha = c_alpha;
  return m;
}

MediatorSettings RunConfig::settings() const {
  MediatorSettings s;
  s.epsilon = effective_epsilon();
  s.delta = delta;
  s.beta = beta;
  s.config = mediator();
  return s;
}

Json ConfigToJson(const RunConfig& config) {
  Json j;
  j["epsilon"] = JsonNumber(config.epsilon);
  j["delta"] = JsonNumber(config.delta);
  j["beta"] = JsonNumber(config.beta);
  j["noise_free"] = config.noise_free;
  j["seed"] = config.seed;
  j["c_t"] = JsonNumber(config.c_t);
  j["c_alpha"] = JsonNumber(config.c_alpha);
  j["flip_dual_sign"] = config.flip_dual_sign;
  j["noise_free_rounds"] = config.noise_free_rounds;
  j["trials"] = config.trials;
  j["output"] = config.output;
  j["timing"] = config.timing;
  return j;
}

SolveReport RunSolve(const RoutingInstance& inst, const RunConfig& config) {
  SolveReport report;
  report.output = FlowToll(inst, TruthfulReports(inst),
                           config.effective_epsilon(), config.delta,
                           config.beta, config.mediator(), config.seed);
  try {
    report.optimum = BruteForceOpt(inst);
  } catch (const ResourceCapError&) {
    report.optimum.reset();
  }
  try {
    report.fractional_optimum = FractionalOpt(inst).value;
  } catch (const ConvergenceError&) {
    report.fractional_optimum.reset();
  }
  IntegralFlow final_flow;
  IntegralFlow rounded;
  for (int i = 0; i < inst.num_players(); ++i) {
    final_flow.paths.push_back(report.output.suggestions[i].value());
    rounded.paths.push_back(report.output.rounded[i].value());
  }
  report.average_cost = AverageCost(inst, final_flow);
  report.rounded_cost = AverageCost(inst, rounded);
  report.fractional_cost =
      RelaxedCost(inst, CongestionOf(report.output.x_bar));
  return report;
}

namespace {

Json PathJson(const std::optional<Path>& path) {
  if (!path) return nullptr;
  return Json(*path);
}

Json VectorJson(const Vector& v) {
  Json j = Json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) j.push_back(JsonNumber(v[k]));
  return j;
}

Json LedgerJson(const PrivacyLedger& ledger) {
  Json j = Json::array();
  for (const PrivacyCharge& c : ledger.charges()) {
    j.push_back({{"mechanism", c.mechanism},
                 {"epsilon", JsonNumber(c.epsilon)},
                 {"delta", JsonNumber(c.delta)}});
  }
  return j;
}

Json GuaranteeJson(const PrivacyGuarantee& g) {
  return {{"epsilon", JsonNumber(g.epsilon)}, {"delta", JsonNumber(g.delta)}};
}

}  // namespace

Json SolveResultJson(const RoutingInstance& inst, const RunConfig& config,
                     const SolveReport& report) {
  const MediatorOutput& out = report.output;
  const MediatorDiagnostics& diag = out.diagnostics;
  const int m = inst.num_edges();
  const int n = diag.effective_players;
  const double gamma = inst.gamma();
  const double eps = config.effective_epsilon();

  Json j;
  j["schema"] = kResultSchema;
  j["command"] = "solve";
  j["mode"] = config.noise_free ? "noise-free (NOT private)" : "private";
  j["config"] = ConfigToJson(config);
  j["instance"] = {{"vertices", inst.network().num_vertices()},
                   {"edges", m},
                   {"players", inst.num_players()},
                   {"gamma", JsonNumber(gamma)},
                   {"toll_cap", JsonNumber(inst.toll_cap())},
                   {"boundedness_violations", inst.BoundednessViolations()}};

  Json privacy;
  privacy["ledger"] = LedgerJson(diag.ledger);
  privacy["total"] = GuaranteeJson(diag.total);
  privacy["noisy_congestion_and_tolls"] = GuaranteeJson(diag.released);
  privacy["p_gd_rounds_charged"] = diag.pgd_ledger.charges().size();
  if (!diag.pgd_ledger.empty() && !IsNoiseFree(eps) && config.delta > 0.0) {
    privacy["p_gd_advanced_total"] =
        GuaranteeJson(diag.pgd_ledger.AdvancedTotal(config.delta / 2.0));
  }
  j["privacy"] = privacy;

  const PgdParameters& p = out.billboard.pgd_params;
  const PgdDiagnostics& pd = diag.pgd;
  Json rounds = Json::array();
  for (const PgdRoundRecord& r : pd.rounds) {
    rounds.push_back({JsonNumber(r.best_score), JsonNumber(r.chosen_score),
                      r.play.sign > 0 ? "+" : "-", r.play.edge});
  }
  j["p_gd"] = {{"rounds", p.rounds},
               {"rounds_clamped", p.rounds_clamped},
               {"epsilon_prime", JsonNumber(p.epsilon_prime)},
               {"eta_x", JsonNumber(p.eta_x)},
               {"eta_y", JsonNumber(p.eta_y)},
               {"g_x", JsonNumber(p.g_x)},
               {"g_y", JsonNumber(p.g_y)},
               {"d_x", JsonNumber(p.d_x)},
               {"d_y", JsonNumber(p.d_y)},
               {"regret_x", JsonNumber(pd.regret_x)},
               {"regret_y", JsonNumber(pd.regret_y)},
               {"regret_z", JsonNumber(pd.regret_z)},
               {"regret_lambda", JsonNumber(pd.regret_lambda)},
               {"regret_bound_z", JsonNumber(pd.regret_bound_z)},
               {"duality_gap", JsonNumber(pd.duality_gap)},
               {"lagrangian_at_average", JsonNumber(pd.lagrangian_at_average)},
               {"per_round_bound", JsonNumber(pd.per_round_bound)},
               {"per_round_violations", pd.per_round_violations},
               {"max_projection_residual",
                JsonNumber(pd.max_projection_residual)},
               {"round_records", rounds}};

  Json suggestions = Json::array();
  for (std::size_t i = 0; i < out.suggestions.size(); ++i) {
    suggestions.push_back({{"player", i},
                           {"rounded", PathJson(out.rounded[i])},
                           {"suggested", PathJson(out.suggestions[i])}});
  }
  j["suggestions"] = suggestions;
  j["tolls"] = VectorJson(out.tolls);
  j["noisy_congestion"] = VectorJson(out.noisy_congestion);

  Json costs;
  costs["average_cost"] = JsonNumber(report.average_cost);
  costs["rounded_cost"] = JsonNumber(report.rounded_cost);
  costs["fractional_cost"] = JsonNumber(report.fractional_cost);
  costs["opt"] = report.optimum ? JsonNumber(report.optimum->cost) : Json();
  costs["opt_relaxed"] = report.fractional_optimum
                             ? JsonNumber(*report.fractional_optimum)
                             : Json();
  std::optional<double> realized_alpha;
  if (report.optimum) {
    realized_alpha = report.rounded_cost - report.optimum->cost;
    costs["gap_vs_opt"] = JsonNumber(report.average_cost - report.optimum->cost);
  }
  costs["alpha_closed_form"] = JsonNumber(diag.alpha);
  costs["alpha_realized"] =
      realized_alpha ? JsonNumber(*realized_alpha) : Json();
  j["costs"] = costs;

  const double alpha_for_bounds =
      realized_alpha ? std::max(0.0, *realized_alpha) : diag.alpha;
  j["bounds"] = {
      {"alpha_used", JsonNumber(alpha_for_bounds)},
      {"zeta_hat", JsonNumber(out.billboard.zeta_hat)},
      {"eta_eq", JsonNumber(EtaEqBound(m, n, gamma, alpha_for_bounds,
                                       eps / 4.0, config.beta))},
      {"eta_opt", JsonNumber(EtaOptBound(m, n, gamma, alpha_for_bounds))},
      {"eta_game", JsonNumber(EtaGameBound(m, n, gamma, alpha_for_bounds, eps,
                                           config.beta, config.delta))},
      {"rounding_gap", JsonNumber(RoundingGapBound(m, gamma, n, config.beta))},
      {"unsatisfied_count_bound",
       JsonNumber(UnsatisfiedCountBound(m, n, gamma, alpha_for_bounds))}};
  j["unsatisfied_before_repair"] = diag.unsatisfied_before_repair;
  j["repaired_players"] = diag.repaired_players;
  return j;
}

std::vector<std::string> CheckResult(const Json& result,
                                     const RoutingInstance& inst) {
  std::vector<std::string> failures;
  auto fail = [&](const std::string& msg) { failures.push_back(msg); };
  try {
    if (result.value("schema", "") != kResultSchema) {
      fail("schema is not " + std::string(kResultSchema));
      return failures;
    }
    const int m = inst.num_edges();
    const double n = inst.num_players();
    const double cap = inst.toll_cap();
    const Json& tolls = result.at("tolls");
    const Json& y_hat = result.at("noisy_congestion");
    if (static_cast<int>(tolls.size()) != m ||
        static_cast<int>(y_hat.size()) != m) {
      fail("toll or congestion vector has the wrong length");
      return failures;
    }
    Congestion y(m);
    for (int e = 0; e < m; ++e) {
      const double tau = ReadJsonNumber(tolls[e]);
      y[e] = ReadJsonNumber(y_hat[e]);
      if (!(tau >= 0.0 && tau <= cap + kTolerance)) {
        fail("toll on edge " + std::to_string(e) + " = " + FormatDouble(tau) +
             " outside [0, n*gamma = " + FormatDouble(cap) + "]");
      }
      if (!(y[e] >= 0.0 && y[e] <= n)) {
        fail("noisy congestion on edge " + std::to_string(e) +
             " outside [0, n]");
      }
    }
    const TollVector expected = MarginalTolls(inst, y);
    for (int e = 0; e < m; ++e) {
      if (std::abs(expected[e] - ReadJsonNumber(tolls[e])) > kTolerance) {
        fail("toll on edge " + std::to_string(e) +
             " differs from the marginal toll of the noisy congestion");
      }
    }
    const Json& sugg = result.at("suggestions");
    if (static_cast<int>(sugg.size()) != inst.num_players()) {
      fail("suggestion count differs from the player count");
    } else {
      for (int i = 0; i < inst.num_players(); ++i) {
        const Json& s = sugg[i].at("suggested");
        if (s.is_null()) {
          fail("player " + std::to_string(i) + " has no suggestion");
          continue;
        }
        try {
          ValidatePath(inst.network(), inst.demand(i), s.get<Path>());
        } catch (const FeasibilityError& err) {
          fail("player " + std::to_string(i) + ": " + err.what());
        }
      }
    }
    const Json& cfg = result.at("config");
    if (!cfg.at("noise_free").get<bool>()) {
      const double eps = ReadJsonNumber(cfg.at("epsilon"));
      const double delta = ReadJsonNumber(cfg.at("delta"));
      const Json& total = result.at("privacy").at("total");
      const Json& rel =
          result.at("privacy").at("noisy_congestion_and_tolls");
      auto near = [](double a, double b) {
        return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b));
      };
      if (!near(ReadJsonNumber(total.at("epsilon")), eps) ||
          !near(ReadJsonNumber(total.at("delta")), delta)) {
        fail("ledger total differs from the configured (epsilon, delta)");
      }
      if (!near(ReadJsonNumber(rel.at("epsilon")), 0.75 * eps) ||
          !near(ReadJsonNumber(rel.at("delta")), 0.5 * delta)) {
        fail("noisy congestion and tolls are not charged (3eps/4, delta/2)");
      }
    }
  } catch (const Json::exception& err) {
    fail(std::string("malformed result: ") + err.what());
  }
  return failures;
}

std::string FormatTable(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths;
  for (const auto& row : rows) {
    if (row.size() > widths.size()) widths.resize(row.size(), 0);
    for (std::size_t c = 0; c < row.size(); ++c) {
      widths[c] = std::max(widths[c], row[c].size());
    }
  }
  std::ostringstream out;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << row[c];
      if (c + 1 < row.size()) {
        out << std::string(widths[c] - row[c].size() + 2, ' ');
      }
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace flowtoll
