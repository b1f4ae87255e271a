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

// Command-line front end: generate, solve, oracle, deviate, check, sweep.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <regex>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "flowtoll/errors.h"
#include "flowtoll/graph_algorithms.h"
#include "flowtoll/io.h"
#include "flowtoll/mediator.h"
#include "flowtoll/oracles.h"

namespace flowtoll {
namespace {

std::string ReadText(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path);
}

// A file path, or the name of a built-in Pigou game such as "pigou2".
RoutingInstance ResolveInstance(const std::string& name) {
  static const std::regex kPigou("pigou([0-9]+)");
  std::smatch match;
  if (!std::filesystem::exists(name) &&
      std::regex_match(name, match, kPigou)) {
    GeneratorParams params;
    params.kind = GraphKind::kParallelLinks;
    params.players = std::stoi(match[1].str());
    params.edges = 2;
    params.family = LatencyKind::kPigou;
    return GenerateInstance(params);
  }
  return LoadInstance(name);
}

std::string Num(double v) { return FormatDouble(v); }

std::string PathText(const std::optional<Path>& path) {
  if (!path) return "-";
  std::string s;
  for (std::size_t k = 0; k < path->size(); ++k) {
    if (k) s += ",";
    s += std::to_string((*path)[k]);
  }
  return s;
}

std::string VectorText(const Vector& v) {
  std::string s;
  for (Eigen::Index e = 0; e < v.size(); ++e) {
    if (e) s += " ";
    s += Num(v[e]);
  }
  return s;
}

void AddRunOptions(CLI::App* cmd, RunConfig* config) {
  cmd->add_option("--epsilon", config->epsilon, "Privacy parameter epsilon")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--delta", config->delta, "Privacy parameter delta")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--beta", config->beta, "Failure probability beta")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_flag("--noise-free", config->noise_free,
                "Diagnostic mode without noise (NOT private)");
  cmd->add_option("--seed", config->seed, "Master seed")
      ->envname("FLOWTOLL_SEED");
  cmd->add_option("--c-t", config->c_t, "Constant in the round budget T")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--c-alpha", config->c_alpha,
                  "Constant in the closed-form alpha")
      ->check(CLI::NonNegativeNumber);
  cmd->add_flag("--flip-dual-sign", config->flip_dual_sign,
                "Reverse the sign of the dual play");
  cmd->add_option("--noise-free-rounds", config->noise_free_rounds,
                  "Rounds of the solver in noise-free mode")
      ->check(CLI::PositiveNumber);
}

// ---------------------------------------------------------------------------

struct GenerateArgs {
  std::string kind = "parallel-links";
  std::string family = "affine";
  int players = 2;
  int edges = 2;
  std::uint64_t seed = 1;
  std::string output;
};

int RunGenerate(const GenerateArgs& args) {
  GeneratorParams params;
  params.kind = ParseGraphKind(args.kind);
  params.family = ParseLatencyKind(args.family);
  params.players = args.players;
  params.edges = args.edges;
  params.seed = args.seed;
  const RoutingInstance inst = GenerateInstance(params);
  const std::string text = SerializeInstance(inst);
  if (args.output.empty()) {
    std::cout << text;
  } else {
    WriteText(args.output, text);
  }
  const auto violations = inst.BoundednessViolations();
  if (!violations.empty()) {
    std::cerr << "warning: " << violations.size()
              << " edge(s) have l_e(n) > n\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct SolveArgs {
  std::string instance;
  RunConfig config;
  bool json = false;
};

std::string SolveTable(const RoutingInstance& inst, const RunConfig& config,
                       const SolveReport& report) {
  const MediatorOutput& out = report.output;
  const MediatorDiagnostics& d = out.diagnostics;
  std::vector<std::vector<std::string>> rows = {
      {"mode", config.noise_free ? "noise-free (NOT private)" : "private"},
      {"players / edges", std::to_string(inst.num_players()) + " / " +
                              std::to_string(inst.num_edges())},
      {"average cost", Num(report.average_cost)},
      {"rounded cost", Num(report.rounded_cost)},
      {"relaxed cost of x_bar", Num(report.fractional_cost)}};
  if (report.optimum) {
    rows.push_back({"OPT (brute force)", Num(report.optimum->cost)});
    rows.push_back(
        {"gap vs OPT", Num(report.average_cost - report.optimum->cost)});
  } else {
    rows.push_back({"OPT (brute force)", "too large to enumerate"});
  }
  if (report.fractional_optimum) {
    rows.push_back({"OPT of relaxation", Num(*report.fractional_optimum)});
  }
  rows.push_back({"privacy total (eps, delta)",
                  Num(d.total.epsilon) + ", " + Num(d.total.delta)});
  rows.push_back({"solver rounds T",
                  std::to_string(out.billboard.pgd_params.rounds)});
  rows.push_back({"R_z / R_lambda",
                  Num(d.pgd.regret_z) + " / " + Num(d.pgd.regret_lambda)});
  rows.push_back({"zeta_hat", Num(out.billboard.zeta_hat)});
  rows.push_back({"unsatisfied before repair",
                  std::to_string(d.unsatisfied_before_repair)});
  rows.push_back({"tolls", VectorText(out.tolls)});
  rows.push_back({"noisy congestion", VectorText(out.noisy_congestion)});
  for (std::size_t i = 0; i < out.suggestions.size(); ++i) {
    rows.push_back({"player " + std::to_string(i) + " path",
                    PathText(out.suggestions[i])});
  }
  return FormatTable(rows);
}

int RunSolveCommand(const SolveArgs& args) {
  const RoutingInstance inst = ResolveInstance(args.instance);
  const auto start = std::chrono::steady_clock::now();
  const SolveReport report = RunSolve(inst, args.config);
  const double secs = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - start)
                          .count();
  Json result = SolveResultJson(inst, args.config, report);
  if (args.config.timing) result["wall_clock_s"] = secs;
  const std::string text = result.dump(2) + "\n";
  if (!args.config.output.empty()) WriteText(args.config.output, text);
  if (args.json) {
    std::cout << text;
  } else {
    std::cout << SolveTable(inst, args.config, report);
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct OracleArgs {
  std::string instance;
  std::string output;
};

int RunOracle(const OracleArgs& args) {
  const RoutingInstance inst = ResolveInstance(args.instance);
  const OptimumResult opt = BruteForceOpt(inst);
  const FractionalOptResult relaxed = FractionalOpt(inst);
  const NashCheck enforced =
      VerifyNash(inst, opt.flow, MarginalCostTolls{}, 1e-9);
  IntegralFlow start;
  for (const Demand& d : inst.demands()) {
    start.paths.push_back(
        ShortestPath(inst.network(), Vector::Ones(inst.num_edges()), d.source,
                     d.destination)
            ->path);
  }
  const DynamicsResult dynamics =
      BestResponseDynamics(inst, TollVector::Zero(inst.num_edges()), start, 0);
  const NashCheck untolled = VerifyNash(
      inst, dynamics.flow, TollVector::Zero(inst.num_edges()), 1e-9);

  std::vector<std::vector<std::string>> rows = {
      {"OPT", Num(opt.cost)},
      {"profiles enumerated", Num(opt.profiles)},
      {"OPT of relaxation", Num(relaxed.value)},
      {"relaxation certificate", Num(relaxed.certified_gap)},
      {"OPT is Nash under tau*", enforced.ok ? "yes" : "no"},
      {"untolled Nash cost", Num(AverageCost(inst, dynamics.flow))},
      {"best-response moves", std::to_string(dynamics.moves)},
      {"untolled Nash verified", untolled.ok ? "yes" : "no"}};
  for (int i = 0; i < inst.num_players(); ++i) {
    rows.push_back({"OPT player " + std::to_string(i) + " path",
                    PathText(opt.flow.paths[i])});
  }
  std::cout << FormatTable(rows);

  if (!args.output.empty()) {
    Json j;
    j["schema"] = kResultSchema;
    j["command"] = "oracle";
    j["opt"] = JsonNumber(opt.cost);
    Json paths = Json::array();
    for (const Path& p : opt.flow.paths) paths.push_back(p);
    j["opt_flow"] = paths;
    j["opt_relaxed"] = JsonNumber(relaxed.value);
    j["opt_relaxed_certificate"] = JsonNumber(relaxed.certified_gap);
    j["opt_is_nash_under_marginal_tolls"] = enforced.ok;
    j["untolled_nash_cost"] = JsonNumber(AverageCost(inst, dynamics.flow));
    j["best_response_moves"] = dynamics.moves;
    WriteText(args.output, j.dump(2) + "\n");
  }
  return enforced.ok ? 0 : 2;
}

// ---------------------------------------------------------------------------

struct DeviateArgs {
  std::string instance;
  int player = 0;
  std::string menu = "canonical";
  RunConfig config;
};

int RunDeviate(const DeviateArgs& args) {
  const RoutingInstance inst = ResolveInstance(args.instance);
  if (args.player < 0 || args.player >= inst.num_players()) {
    throw std::invalid_argument("--player out of range");
  }
  const MediatorSettings settings = args.config.settings();
  PgdStageCache cache;
  std::vector<std::vector<std::string>> rows = {
      {"deviation", "gain", "95% half-width", "good cost", "deviation cost"}};
  Json table = Json::array();
  const auto menu = CanonicalMenu(inst, args.player);
  for (std::size_t k = 0; k < menu.size(); ++k) {
    Rng rng(DeriveSeed(args.config.seed,
                       static_cast<std::uint64_t>(StreamTag::kTrial), k));
    const DeviationGain g = MeasureDeviationGain(
        inst, settings, menu[k], args.config.trials, rng, &cache);
    rows.push_back({menu[k].label, Num(g.gain), Num(g.half_width),
                    Num(g.good_cost), Num(g.deviation_cost)});
    table.push_back({{"deviation", menu[k].label},
                     {"gain", JsonNumber(g.gain)},
                     {"half_width", JsonNumber(g.half_width)},
                     {"good_cost", JsonNumber(g.good_cost)},
                     {"deviation_cost", JsonNumber(g.deviation_cost)},
                     {"trials", g.trials}});
  }
  const int m = inst.num_edges();
  const int n = inst.num_players();
  const double eps = args.config.effective_epsilon();
  const double alpha = AlphaClosedForm(m, n, eps, args.config.c_alpha);
  const double eta_game = EtaGameBound(m, n, inst.gamma(), alpha, eps,
                                       args.config.beta, args.config.delta);
  std::cout << FormatTable(rows);
  std::cout << "eta_game (closed-form alpha) = " << Num(eta_game) << "\n";
  if (!args.config.output.empty()) {
    Json j;
    j["schema"] = kResultSchema;
    j["command"] = "deviate";
    j["config"] = ConfigToJson(args.config);
    j["player"] = args.player;
    j["menu"] = args.menu;
    j["eta_game"] = JsonNumber(eta_game);
    j["deviations"] = table;
    WriteText(args.config.output, j.dump(2) + "\n");
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct CheckArgs {
  std::string instance;
  std::string result;
};

int RunCheck(const CheckArgs& args) {
  const RoutingInstance inst = ResolveInstance(args.instance);
  Json result;
  try {
    result = Json::parse(ReadText(args.result));
  } catch (const Json::parse_error& e) {
    throw ParseError(1, e.byte, e.what());
  }
  const auto failures = CheckResult(result, inst);
  if (failures.empty()) {
    std::cout << "ok: all invariants hold\n";
    return 0;
  }
  for (const std::string& f : failures) std::cout << "FAIL: " << f << "\n";
  return 2;
}

// ---------------------------------------------------------------------------

struct SweepArgs {
  std::vector<std::string> instances;
  long seeds = 4;
  unsigned threads = 0;
  std::string output_dir;
  RunConfig config;
};

struct SweepCell {
  std::string instance;
  std::uint64_t seed = 0;
  std::string file;
  int exit_code = 0;
  std::string error;
  std::optional<SolveReport> report;
};

int RunSweep(const SweepArgs& args) {
  std::filesystem::create_directories(args.output_dir);
  std::vector<SweepCell> cells;
  for (const std::string& name : args.instances) {
    const std::string stem = std::filesystem::path(name).stem().string();
    for (long k = 0; k < args.seeds; ++k) {
      SweepCell cell;
      cell.instance = name;
      cell.seed = args.config.seed + static_cast<std::uint64_t>(k);
      cell.file = (std::filesystem::path(args.output_dir) /
                   (stem + "-seed" + std::to_string(cell.seed) + ".json"))
                      .string();
      cells.push_back(std::move(cell));
    }
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t k = next++; k < cells.size(); k = next++) {
      SweepCell& cell = cells[k];
      try {
        const RoutingInstance inst = ResolveInstance(cell.instance);
        RunConfig config = args.config;
        config.seed = cell.seed;
        config.output = cell.file;
        SolveReport report = RunSolve(inst, config);
        WriteText(cell.file,
                  SolveResultJson(inst, config, report).dump(2) + "\n");
        cell.report = std::move(report);
      } catch (const std::exception& e) {
        cell.exit_code = ExitCodeFor(e);
        cell.error = e.what();
      }
    }
  };
  unsigned threads = args.threads;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(cells.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();

  std::vector<std::vector<std::string>> rows = {
      {"instance", "seed", "average cost", "OPT", "unsatisfied", "file"}};
  int exit_code = 0;
  for (const SweepCell& cell : cells) {
    if (!cell.report) {
      rows.push_back({cell.instance, std::to_string(cell.seed), "error", "-",
                      "-", cell.error});
      exit_code = std::max(exit_code, cell.exit_code);
      continue;
    }
    const SolveReport& r = *cell.report;
    rows.push_back(
        {cell.instance, std::to_string(cell.seed), Num(r.average_cost),
         r.optimum ? Num(r.optimum->cost) : "-",
         std::to_string(r.output.diagnostics.unsatisfied_before_repair),
         cell.file});
  }
  std::cout << FormatTable(rows);
  return exit_code;
}

}  // namespace
}  // namespace flowtoll

int main(int argc, char** argv) {
  using namespace flowtoll;
  CLI::App app{"FlowToll: private toll mediator for atomic routing games"};
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* generate = app.add_subcommand("generate", "Write a random instance");
  generate->add_option("--kind", gen.kind, "parallel-links, grid or layered-dag");
  generate->add_option("--family", gen.family, "affine, monomial or pigou");
  generate->add_option("--players,-n", gen.players, "Number of players")
      ->check(CLI::PositiveNumber);
  generate->add_option("--edges,-m", gen.edges, "Target edge count")
      ->check(CLI::PositiveNumber);
  generate->add_option("--seed", gen.seed, "Generator seed")
      ->envname("FLOWTOLL_SEED");
  generate->add_option("--output,-o", gen.output, "Output file (default stdout)");

  SolveArgs solve_args;
  CLI::App* solve = app.add_subcommand("solve", "Run the mediator end to end");
  solve->add_option("instance", solve_args.instance,
                    "Instance file or built-in name such as pigou2")
      ->required();
  AddRunOptions(solve, &solve_args.config);
  solve->add_option("--output,-o", solve_args.config.output,
                    "Write the result JSON here");
  solve->add_flag("--timing", solve_args.config.timing,
                  "Record wall-clock time in the result");
  solve->add_flag("--json", solve_args.json,
                  "Print the result JSON instead of the table");

  OracleArgs oracle_args;
  CLI::App* oracle = app.add_subcommand("oracle", "Exact optimum and Nash checks");
  oracle->add_option("instance", oracle_args.instance, "Instance")->required();
  oracle->add_option("--output,-o", oracle_args.output, "Write JSON here");

  DeviateArgs dev;
  dev.config.noise_free = false;
  CLI::App* deviate =
      app.add_subcommand("deviate", "Measure deviation gains for one player");
  deviate->add_option("instance", dev.instance, "Instance")->required();
  deviate->add_option("--player", dev.player, "Deviating player")->required();
  deviate->add_option("--menu", dev.menu, "Deviation menu")
      ->check(CLI::IsMember({"canonical"}));
  deviate->add_option("--trials", dev.config.trials, "Monte-Carlo trials")
      ->check(CLI::PositiveNumber);
  AddRunOptions(deviate, &dev.config);
  deviate->add_option("--output,-o", dev.config.output, "Write JSON here");

  CheckArgs check_args;
  CLI::App* check = app.add_subcommand("check", "Verify a solve result");
  check->add_option("--instance", check_args.instance, "Instance")->required();
  check->add_option("--result", check_args.result, "Result JSON")->required();

  SweepArgs sweep_args;
  CLI::App* sweep =
      app.add_subcommand("sweep", "Solve many (instance, seed) cells in parallel");
  sweep->add_option("instances", sweep_args.instances, "Instances")
      ->required();
  sweep->add_option("--seeds", sweep_args.seeds, "Seeds per instance")
      ->check(CLI::PositiveNumber);
  sweep->add_option("--threads", sweep_args.threads, "Worker threads (0: all)");
  sweep->add_option("--output-dir", sweep_args.output_dir, "Result directory")
      ->required();
  AddRunOptions(sweep, &sweep_args.config);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }

  try {
    if (*generate) return RunGenerate(gen);
    if (*solve) return RunSolveCommand(solve_args);
    if (*oracle) return RunOracle(oracle_args);
    if (*deviate) return RunDeviate(dev);
    if (*check) return RunCheck(check_args);
    if (*sweep) return RunSweep(sweep_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ExitCodeFor(e);
  }
  return 3;
}
