#include "sabal/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <string>

#include "sabal/error.hpp"

namespace sabal {

void BenchConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::ConfigInvalid, what); };
  if (m < 1) fail("m must be >= 1");
  if (pool_sizes.empty()) fail("pool_sizes must not be empty");
  if (batch_sizes.empty()) fail("batch_sizes must not be empty");
  if (strategies.empty()) fail("strategies must not be empty");
  if (repetitions < 5) fail("repetitions must be >= 5");
  for (auto s : strategies)
    if (s == Strategy::Entropy) fail("entropy has no synthetic-problem benchmark");
  for (auto n : pool_sizes)
    if (n < 1) fail("pool sizes must be >= 1");
  for (auto b : batch_sizes)
    if (b < 1) fail("batch sizes must be >= 1");
}

SparseApproxProblem random_problem(std::size_t m, std::size_t n, std::size_t b, double alpha,
                                   double beta, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double col_scale = 1.0 / std::sqrt(static_cast<double>(m));
  SparseApproxProblem p;
  p.alpha = alpha;
  p.beta = beta;
  p.b = b;
  p.phi = Matrix(m, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t r = 0; r < m; ++r) p.phi(r, j) = col_scale * normal(rng);
  p.v.assign(m, 0.0);
  const double w = static_cast<double>(b) / static_cast<double>(n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t r = 0; r < m; ++r) p.v[r] += w * p.phi(r, j);
  for (double& x : p.v) x += 0.1 * col_scale * normal(rng);
  p.sigma2.resize(n);
  const double inv_n2 = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
  for (double& s : p.sigma2) s = unit(rng) * inv_n2;
  return p;
}

double time_selection(Strategy strategy, const SparseApproxProblem& problem,
                      const SolverOptions& options, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  SelectionInputs inputs;
  inputs.pool_size = problem.n();
  inputs.problem = &problem;
  const auto start = std::chrono::steady_clock::now();
  const auto batch = select_batch(strategy, inputs, problem.b, rng, options);
  const auto stop = std::chrono::steady_clock::now();
  if (batch.size() != problem.b) throw Error(ErrorCode::DimensionMismatch, "short batch");
  return std::chrono::duration<double>(stop - start).count();
}

std::vector<BenchRow> run_bench(const BenchConfig& config) {
  config.validate();
  std::vector<BenchRow> rows;
  for (std::size_t n : config.pool_sizes) {
    for (std::size_t b : config.batch_sizes) {
      if (b > n) continue;
      const auto problem = random_problem(config.m, n, b, config.alpha, config.beta,
                                          config.seed + 7919 * n + b);
      for (Strategy s : config.strategies) {
        std::vector<double> times;
        for (std::size_t rep = 0; rep < config.repetitions; ++rep)
          times.push_back(time_selection(s, problem, config.solver, config.seed + rep));
        std::sort(times.begin(), times.end());
        const std::size_t mid = times.size() / 2;
        const double median =
            times.size() % 2 == 1 ? times[mid] : 0.5 * (times[mid - 1] + times[mid]);
        rows.push_back({s, n, b, median, config.repetitions});
      }
    }
  }
  return rows;
}

}  // namespace sabal
