// sabal: batch active learning as sparse approximation.
//
//   sabal solve <problem.json> [--solver greedy|iht|oracle] [--tau T] [--iters N]
//                              [--paper-literal-prox] [--out PATH]
//   sabal al <config.json> [--out PATH] [--seed S] [--include-seed-row]
//   sabal bench <config.json> [--out PATH] [--seed S]
//   sabal gen [--classes K] [--points N] [--radius R] [--noise S] [--seed S] [--out PATH]
//
// Exit codes: 0 success, 2 input error, 3 domain/runtime error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "sabal/bench.hpp"
#include "sabal/error.hpp"
#include "sabal/harness.hpp"
#include "sabal/io.hpp"
#include "sabal/solvers.hpp"

namespace {

constexpr int kExitInput = 2;
constexpr int kExitDomain = 3;

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty())
    std::cout << content;
  else
    sabal::io::write_file(out_path, content);
}

std::filesystem::path summary_path(std::filesystem::path csv) {
  if (csv.extension() == ".csv") csv.replace_extension();
  csv += ".summary.json";
  return csv;
}

struct SolveArgs {
  std::string problem;
  std::string solver = "greedy";
  double tau = 1.0;
  std::size_t iters = 100;
  double stall_tolerance = 0.0;
  bool paper_literal = false;
  std::string out;
};

int run_solve(const SolveArgs& args) {
  const auto problem = sabal::io::parse_problem(sabal::io::read_file(args.problem));
  sabal::SolveResult result;
  if (args.solver == "greedy") {
    result = sabal::greedy_solve(problem, sabal::GreedyConfig{args.tau});
  } else if (args.solver == "iht") {
    result = sabal::iht_solve(problem, sabal::IHTConfig{args.iters, args.stall_tolerance,
                                                        args.paper_literal
                                                            ? sabal::ProxRule::PaperLiteral
                                                            : sabal::ProxRule::Corrected});
  } else {
    result = sabal::brute_force_solve(problem);
  }
  emit(args.out, sabal::io::serialize_result(result, args.solver));
  return 0;
}

struct AlArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool include_seed_row = false;
};

int run_al(const AlArgs& args) {
  const std::filesystem::path config_path(args.config);
  auto cfg = sabal::io::parse_run_config(sabal::io::read_file(config_path),
                                         config_path.parent_path());
  if (!args.out.empty()) cfg.output = args.out;
  if (args.seed) cfg.seeds = {*args.seed};
  if (args.include_seed_row) cfg.base.include_seed_row = true;

  const auto dataset = sabal::io::load_dataset(cfg.dataset);
  std::string csv(sabal::io::kCurveHeader);
  csv += '\n';
  std::vector<sabal::io::ArmSummary> arms;
  for (auto strategy : cfg.strategies) {
    for (auto seed : cfg.seeds) {
      sabal::ALConfig arm = cfg.base;
      arm.strategy = strategy;
      arm.rng_seed = seed;
      const auto run = sabal::run_loop(dataset, arm);
      csv += sabal::io::curve_rows(run, strategy, seed);
      arms.push_back({strategy, seed, run.auc, run.records.back().test_accuracy});
      std::cout << sabal::strategy_name(strategy) << " seed " << seed << ": AUC "
                << sabal::io::format_real(run.auc) << "\n";
    }
  }
  sabal::io::write_file(cfg.output, csv);
  sabal::io::write_file(summary_path(cfg.output), sabal::io::serialize_summary(arms, cfg));
  return 0;
}

struct BenchArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

int run_bench(const BenchArgs& args) {
  auto cfg = sabal::io::parse_bench_config(sabal::io::read_file(args.config));
  if (args.seed) cfg.seed = *args.seed;
  const auto rows = sabal::run_bench(cfg);
  const std::string table = sabal::io::serialize_bench(rows);
  if (!args.out.empty()) {
    sabal::io::write_file(args.out, table);
  }
  std::cout << table;
  return 0;
}

struct GenArgs {
  sabal::BlobSpec spec;
  std::string out;
};

int run_gen(const GenArgs& args) {
  emit(args.out, sabal::io::serialize_dataset_csv(sabal::generate_blobs(args.spec)));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Batch active learning as sparse approximation"};
  app.require_subcommand(1);

  SolveArgs solve_args;
  auto* solve = app.add_subcommand("solve", "Solve a sparse approximation problem file");
  solve->add_option("problem", solve_args.problem, "Problem document")->required();
  solve->add_option("--solver", solve_args.solver, "greedy | iht | oracle")
      ->check(CLI::IsMember({"greedy", "iht", "oracle"}));
  solve->add_option("--tau", solve_args.tau, "Greedy scoring step size");
  solve->add_option("--iters", solve_args.iters, "IHT iterations");
  solve->add_option("--stall-tol", solve_args.stall_tolerance,
                    "IHT early exit on ||w - w_prev||_inf (0 = off)");
  solve->add_flag("--paper-literal-prox", solve_args.paper_literal,
                  "Rank prox candidates by the literal closed form");
  solve->add_option("--out", solve_args.out, "Result path (default stdout)");

  AlArgs al_args;
  auto* al = app.add_subcommand("al", "Run the active learning loop");
  al->add_option("config", al_args.config, "Run config document")->required();
  al->add_option("--out", al_args.out, "Learning-curve CSV path (overrides config)");
  al->add_option("--seed", al_args.seed, "Run a single seed (overrides config)");
  al->add_flag("--include-seed-row", al_args.include_seed_row, "Emit a round-0 row");

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "Time first-query acquisition on synthetic problems");
  bench->add_option("config", bench_args.config, "Bench config document")->required();
  bench->add_option("--out", bench_args.out, "Timing CSV path");
  bench->add_option("--seed", bench_args.seed, "Problem seed (overrides config)");

  GenArgs gen_args;
  auto* gen = app.add_subcommand("gen", "Write a Gaussian-blob dataset CSV");
  gen->add_option("--classes", gen_args.spec.classes, "Number of classes");
  gen->add_option("--points", gen_args.spec.points, "Total number of points");
  gen->add_option("--radius", gen_args.spec.radius, "Radius of the circle of centers");
  gen->add_option("--noise", gen_args.spec.noise, "Per-coordinate standard deviation");
  gen->add_option("--seed", gen_args.spec.seed, "Generator seed");
  gen->add_option("--out", gen_args.out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*solve) return run_solve(solve_args);
    if (*al) return run_al(al_args);
    if (*bench) return run_bench(bench_args);
    if (*gen) return run_gen(gen_args);
  } catch (const sabal::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return sabal::is_input_error(e.code()) ? kExitInput : kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  }
  return 0;
}
