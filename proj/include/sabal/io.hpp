#pragma once

// File formats: problem and result documents, run and bench configs (JSON
// with a fixed schema; unknown keys are rejected), dataset and learning-curve
// CSVs. Reals are written with 17 significant digits so they read back
// bit-exact. Malformed input raises Error(ParseError) or Error(ConfigInvalid)
// with a message naming the line and key.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sabal/bench.hpp"
#include "sabal/harness.hpp"
#include "sabal/problem.hpp"
#include "sabal/solvers.hpp"

namespace sabal::io {

std::string format_real(double x);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

// Problem document: keys m, n, b, alpha, beta, v, phi (m*n reals,
// column-major), sigma2. The budget is not checked against n here; that is
// the solver's call.
SparseApproxProblem parse_problem(std::string_view text);
std::string serialize_problem(const SparseApproxProblem& problem);

std::string serialize_result(const SolveResult& result, std::string_view solver);

// Dataset CSV: header "label,f1,...,fD", one sample per row.
std::string serialize_dataset_csv(const Dataset& data);
/// num_classes = 0 infers max label + 1.
Dataset parse_dataset_csv(std::string_view text, std::size_t num_classes = 0);

struct DatasetSource {
  enum class Kind { Blobs, Csv } kind = Kind::Blobs;
  BlobSpec blobs;
  std::filesystem::path csv_path;  // resolved against the config's directory
  std::uint64_t split_seed = 0;
  std::size_t classes = 0;  // csv only; 0 infers
};

struct RunConfig {
  ALConfig base;  // strategy and rng_seed are filled per arm
  std::vector<Strategy> strategies;
  std::vector<std::uint64_t> seeds;
  DatasetSource dataset;
  std::filesystem::path output;  // learning-curve CSV
};

/// base_dir resolves relative paths in the document.
RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir = {});
BenchConfig parse_bench_config(std::string_view text);

SplitDataset load_dataset(const DatasetSource& source);

inline constexpr std::string_view kCurveHeader =
    "round,labeled_count,test_accuracy,acquisition_seconds,method,seed";
std::string curve_rows(const ALRun& run, Strategy strategy, std::uint64_t seed);

struct ArmSummary {
  Strategy strategy;
  std::uint64_t seed;
  double auc;
  double final_accuracy;
};
std::string serialize_summary(const std::vector<ArmSummary>& arms, const RunConfig& config);

std::string serialize_bench(const std::vector<BenchRow>& rows);

}  // namespace sabal::io
