#include <random>
#include <string>

#include "doctest.h"
#include "sabal/error.hpp"
#include "sabal/io.hpp"
#include "testing.hpp"

using namespace sabal;

namespace {

Error error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e;
  }
  FAIL("expected sabal::Error");
  return Error(ErrorCode::ParseError, "");
}

const char* kProblem = R"({
  "m": 3,
  "n": 3,
  "b": 2,
  "alpha": 0,
  "beta": 0,
  "v": [3, 2, 1],
  "phi": [1, 0, 0, 0, 1, 0, 0, 0, 1],
  "sigma2": [0, 0, 0]
})";

std::string run_config(const std::string& extra = "") {
  return R"({
  "dataset": {"kind": "blobs", "classes": 4, "points": 200, "radius": 6.0, "noise": 1.0, "seed": 2},
  "strategies": ["random", "ours_greedy"],
  "embedding_mode": "gradient",
  "seed_size": 10,
  "batch_size": 10,
  "rounds": 3,
  "alpha": 1.0,
  "beta": 0.5,
  "features": {"kind": "tanh_lift", "width": 16, "seed": 4},
  "train": {"epochs": 50, "learning_rate": 0.1, "weight_decay": 0.001, "seed": 0},
  "seeds": [0, 1],
  )" + extra + R"("output": "out/curve.csv"
})";
}

}  // namespace

TEST_CASE("problem documents parse") {
  const auto p = io::parse_problem(kProblem);
  CHECK(p.m() == 3);
  CHECK(p.n() == 3);
  CHECK(p.b == 2);
  CHECK(p.v == std::vector<double>{3.0, 2.0, 1.0});
  CHECK(p.phi(1, 1) == 1.0);
  CHECK(p.phi(0, 1) == 0.0);
}

TEST_CASE("problem documents round-trip byte for byte") {
  std::mt19937_64 rng(91);
  for (int trial = 0; trial < 20; ++trial) {
    auto p = testing::random_problem(rng, 1 + trial % 5, 2 + trial, 1, 0.1 * trial, 1.0 / 3.0);
    const std::string text = io::serialize_problem(p);
    const auto q = io::parse_problem(text);
    CHECK(q.v == p.v);
    CHECK(q.phi == p.phi);
    CHECK(q.sigma2 == p.sigma2);
    CHECK(q.alpha == p.alpha);
    CHECK(q.beta == p.beta);
    CHECK(io::serialize_problem(q) == text);
  }
}

TEST_CASE("problem parsing is strict") {
  std::string wrong_phi = kProblem;
  wrong_phi.replace(wrong_phi.find("[1, 0, 0, 0, 1, 0, 0, 0, 1]"), 27, "[1, 0, 0]");
  auto e = error_of([&] { io::parse_problem(wrong_phi); });
  CHECK(e.code() == ErrorCode::ParseError);
  CHECK(std::string(e.what()).find("'phi'") != std::string::npos);
  CHECK(std::string(e.what()).find("line 8") != std::string::npos);

  std::string extra = kProblem;
  extra.insert(extra.find("\"sigma2\""), "\"gamma\": 1,\n  ");
  e = error_of([&] { io::parse_problem(extra); });
  CHECK(std::string(e.what()).find("'gamma'") != std::string::npos);

  std::string missing = kProblem;
  missing.erase(missing.find("  \"beta\": 0,\n"), 13);
  e = error_of([&] { io::parse_problem(missing); });
  CHECK(std::string(e.what()).find("'beta'") != std::string::npos);

  std::string typed = kProblem;
  typed.replace(typed.find("\"m\": 3"), 6, "\"m\": \"3\"");
  CHECK(error_of([&] { io::parse_problem(typed); }).code() == ErrorCode::ParseError);

  e = error_of([] { io::parse_problem("{\n  \"m\": 3,\n  oops\n}"); });
  CHECK(e.code() == ErrorCode::ParseError);
  CHECK(std::string(e.what()).find("line 3") != std::string::npos);

  CHECK(error_of([] { io::parse_problem("[1, 2]"); }).code() == ErrorCode::ParseError);
  CHECK(error_of([] { io::parse_problem(""); }).code() == ErrorCode::ParseError);
}

TEST_CASE("result documents carry the solution") {
  SolveResult r;
  r.w = WeightVector(std::vector<double>{3.0, 2.0, 0.0});
  r.selected = {0, 1};
  r.objective = 1.0;
  r.trace = {{1, 4.0}, {2, 1.0}};
  const auto text = io::serialize_result(r, "greedy");
  CHECK(text.find("\"w\": [3, 2, 0]") != std::string::npos);
  CHECK(text.find("\"support\": [0, 1]") != std::string::npos);
  CHECK(text.find("\"objective\": 1") != std::string::npos);
  CHECK(text.find("\"solver\": \"greedy\"") != std::string::npos);
}

TEST_CASE("reals are written for exact round trip") {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
    CHECK(std::stod(io::format_real(x)) == x);
  }
  CHECK(io::format_real(1.0) == "1");
}

TEST_CASE("dataset CSV round-trips") {
  BlobSpec spec;
  spec.points = 50;
  spec.seed = 7;
  const auto data = generate_blobs(spec);
  const auto text = io::serialize_dataset_csv(data);
  CHECK(text.rfind("label,f1,f2\n", 0) == 0);
  const auto back = io::parse_dataset_csv(text);
  CHECK(back.features == data.features);
  CHECK(back.labels == data.labels);
  CHECK(back.num_classes == data.num_classes);
  CHECK(io::serialize_dataset_csv(back) == text);
}

TEST_CASE("dataset CSV parsing is strict") {
  CHECK(error_of([] { io::parse_dataset_csv("label,f1\n0,1.5\n1\n"); }).code() == ErrorCode::ParseError);
  CHECK(error_of([] { io::parse_dataset_csv("label,f1\n0,abc\n"); }).code() == ErrorCode::ParseError);
  CHECK(error_of([] { io::parse_dataset_csv("label,f1\n-1,0.5\n"); }).code() == ErrorCode::ParseError);
  CHECK(error_of([] { io::parse_dataset_csv("lbl,f1\n0,0.5\n"); }).code() == ErrorCode::ParseError);
  CHECK(error_of([] { io::parse_dataset_csv("label,f1\n"); }).code() == ErrorCode::ParseError);
  const auto e = error_of([] { io::parse_dataset_csv("label,f1\n0,1\n1,2\n2,x\n"); });
  CHECK(std::string(e.what()).find("line 4") != std::string::npos);
}

TEST_CASE("run configs parse with defaults and resolve paths") {
  const auto cfg = io::parse_run_config(run_config(), "/data/exp");
  CHECK(cfg.strategies == std::vector<Strategy>{Strategy::Random, Strategy::OursGreedy});
  CHECK(cfg.seeds == std::vector<std::uint64_t>{0, 1});
  CHECK(cfg.base.seed_size == 10);
  CHECK(cfg.base.beta == 0.5);
  CHECK(cfg.base.features.kind == FeatureKind::TanhLift);
  CHECK(cfg.base.features.width == 16);
  CHECK(cfg.base.train.weight_decay == 0.001);
  CHECK(cfg.base.solver.tau == 1.0);
  CHECK(cfg.base.solver.iht_iterations == 100);
  CHECK(cfg.base.ensemble_size == 5);
  CHECK_FALSE(cfg.base.include_seed_row);
  CHECK(cfg.dataset.kind == io::DatasetSource::Kind::Blobs);
  CHECK(cfg.dataset.blobs.points == 200);
  CHECK(cfg.output == std::filesystem::path("/data/exp/out/curve.csv"));

  const auto tuned = io::parse_run_config(run_config("\"tau\": 2.5, \"paper_literal_prox\": true,\n  "));
  CHECK(tuned.base.solver.tau == 2.5);
  CHECK(tuned.base.solver.prox == ProxRule::PaperLiteral);
}

TEST_CASE("run configs are strict") {
  auto e = error_of([] { io::parse_run_config(run_config("\"colour\": 1,\n  ")); });
  CHECK(e.code() == ErrorCode::ParseError);
  CHECK(std::string(e.what()).find("'colour'") != std::string::npos);

  std::string bad_strategy = run_config();
  bad_strategy.replace(bad_strategy.find("\"ours_greedy\""), 13, "\"coreset\"");
  e = error_of([&] { io::parse_run_config(bad_strategy); });
  CHECK(std::string(e.what()).find("strategies") != std::string::npos);

  std::string zero_rounds = run_config();
  zero_rounds.replace(zero_rounds.find("\"rounds\": 3"), 11, "\"rounds\": 0");
  CHECK(error_of([&] { io::parse_run_config(zero_rounds); }).code() == ErrorCode::ConfigInvalid);

  std::string nested = run_config();
  nested.replace(nested.find("\"seed\": 4}"), 10, "\"seed\": 4, \"depth\": 2}");
  e = error_of([&] { io::parse_run_config(nested); });
  CHECK(std::string(e.what()).find("'features.depth'") != std::string::npos);
  CHECK(std::string(e.what()).find("line 10") != std::string::npos);
}

TEST_CASE("bench configs parse") {
  const auto cfg = io::parse_bench_config(R"({
    "m": 64, "pool_sizes": [1000, 2000], "batch_sizes": [50],
    "strategies": ["random", "ours_iht"], "alpha": 1, "beta": 0, "seed": 3
  })");
  CHECK(cfg.m == 64);
  CHECK(cfg.pool_sizes == std::vector<std::size_t>{1000, 2000});
  CHECK(cfg.repetitions == 5);
  CHECK(error_of([] {
          io::parse_bench_config(R"({"m": 64, "pool_sizes": [10], "batch_sizes": [5],
            "strategies": ["random"], "alpha": 1, "beta": 0, "seed": 3, "repetitions": 2})");
        }).code() == ErrorCode::ConfigInvalid);
}

TEST_CASE("curve rows follow the header") {
  ALRun run;
  RoundRecord r;
  r.round = 1;
  r.labeled_count = 20;
  r.test_accuracy = 0.75;
  r.acquisition_seconds = 0.5;
  run.records.push_back(r);
  CHECK(io::curve_rows(run, Strategy::OursIHT, 4) == "1,20,0.75,0.5,ours_iht,4\n");
}
