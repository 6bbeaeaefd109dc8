#pragma once

// First-query acquisition timing on synthetic problems.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sabal/harness.hpp"

namespace sabal {

struct BenchConfig {
  std::size_t m = 64;
  std::vector<std::size_t> pool_sizes;
  std::vector<std::size_t> batch_sizes;
  std::vector<Strategy> strategies;
  std::size_t repetitions = 5;
  double alpha = 1.0;
  double beta = 0.1;
  SolverOptions solver;
  std::uint64_t seed = 0;

  /// Throws ConfigInvalid.
  void validate() const;
};

struct BenchRow {
  Strategy strategy;
  std::size_t n;
  std::size_t b;
  double median_seconds;
  std::size_t repetitions;
};

/// Random problem shaped like an assembled one: Phi ~ N(0, 1/m), v the mean of
/// Phi's columns times n/b plus noise, sigma2 ~ U[0, 1] / n^2.
SparseApproxProblem random_problem(std::size_t m, std::size_t n, std::size_t b, double alpha,
                                   double beta, std::uint64_t seed);

/// Wall-clock seconds of one select_batch call on `problem`.
double time_selection(Strategy strategy, const SparseApproxProblem& problem,
                      const SolverOptions& options, std::uint64_t seed);

/// One row per (strategy, n, b) with b <= n: median over `repetitions` timings.
std::vector<BenchRow> run_bench(const BenchConfig& config);

}  // namespace sabal
