#include "sabal/problem.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "sabal/error.hpp"
#include "sabal/kernels.hpp"

namespace sabal {

namespace {

void check_weights(const SparseApproxProblem& problem, std::span<const double> w) {
  if (problem.v.size() != problem.m() || problem.sigma2.size() != problem.n())
    throw Error(ErrorCode::DimensionMismatch, "problem vectors do not match phi");
  if (w.size() != problem.n())
    throw Error(ErrorCode::DimensionMismatch,
                "w has length " + std::to_string(w.size()) + ", expected " +
                    std::to_string(problem.n()));
}

bool all_finite(std::span<const double> xs) {
  for (double x : xs)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

void SparseApproxProblem::validate() const {
  if (v.size() != m())
    throw Error(ErrorCode::DimensionMismatch,
                "v has length " + std::to_string(v.size()) + ", phi has " + std::to_string(m()) +
                    " rows");
  if (sigma2.size() != n())
    throw Error(ErrorCode::DimensionMismatch,
                "sigma2 has length " + std::to_string(sigma2.size()) + ", phi has " +
                    std::to_string(n()) + " columns");
  if (m() == 0 || n() == 0) throw Error(ErrorCode::DimensionMismatch, "empty problem");
  if (!all_finite(v) || !all_finite(phi.storage()) || !all_finite(sigma2))
    throw Error(ErrorCode::DimensionMismatch, "non-finite entry in problem data");
  for (double s : sigma2)
    if (s < 0.0) throw Error(ErrorCode::DimensionMismatch, "negative sigma2 entry");
  if (!(alpha >= 0.0) || !(beta >= 0.0) || !std::isfinite(alpha) || !std::isfinite(beta))
    throw Error(ErrorCode::DimensionMismatch, "alpha and beta must be finite and >= 0");
  if (b == 0) throw Error(ErrorCode::BudgetExceedsPool, "budget b must be at least 1");
  if (b > n())
    throw Error(ErrorCode::BudgetExceedsPool,
                "budget b=" + std::to_string(b) + " exceeds pool size n=" + std::to_string(n()));
}

WeightVector::WeightVector(std::vector<double> w) : w_(std::move(w)) {
  for (double x : w_)
    if (!(x >= 0.0) || !std::isfinite(x))
      throw std::invalid_argument("weight vector entries must be finite and nonnegative");
  rebuild_support();
}

WeightVector WeightVector::clamped(std::vector<double> w) {
  for (double& x : w)
    if (!(x > 0.0)) x = 0.0;
  WeightVector out;
  out.w_ = std::move(w);
  out.rebuild_support();
  return out;
}

void WeightVector::rebuild_support() {
  support_.clear();
  for (std::size_t j = 0; j < w_.size(); ++j)
    if (w_[j] > 0.0) support_.push_back(j);
}

std::vector<double> residual(const SparseApproxProblem& problem, std::span<const double> w) {
  check_weights(problem, w);
  std::vector<double> r(problem.m());
  kernels::gemv(problem.phi, w, r);
  kernels::axpy(-1.0, problem.v, r);
  return r;
}

double eval_f1(const SparseApproxProblem& problem, std::span<const double> w) {
  const auto r = residual(problem, w);
  double reg = 0.0;
  if (problem.beta != 0.0) {
    for (double x : w) reg += (x - 1.0) * (x - 1.0);
  }
  return kernels::squared_norm(r) + problem.beta * reg;
}

double eval_f2(const SparseApproxProblem& problem, std::span<const double> w) {
  check_weights(problem, w);
  double acc = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j)
    if (w[j] > 0.0) acc += problem.sigma2[j];
  return -problem.alpha * acc;
}

std::vector<double> grad_f1(const SparseApproxProblem& problem, std::span<const double> w) {
  const auto r = residual(problem, w);
  std::vector<double> g(problem.n());
  kernels::gemv_t(problem.phi, r, g);
  for (std::size_t j = 0; j < g.size(); ++j)
    g[j] = 2.0 * g[j] + 2.0 * problem.beta * (w[j] - 1.0);
  return g;
}

}  // namespace sabal
