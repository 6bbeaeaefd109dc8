#pragma once

// The sparse approximation problem
//
//   minimize  f1(w) + f2(w)   over w >= 0 with ||w||_0 <= b
//   f1(w) = ||v - Phi w||^2 + beta ||w - 1||^2
//   f2(w) = -alpha * sum_{j : w_j > 0} sigma2_j
//
// where column j of Phi is the (scaled) expected embedding of candidate j, v is
// the pool-average embedding and sigma2_j its squared individual variance.

#include <cstddef>
#include <span>
#include <vector>

#include "sabal/matrix.hpp"

namespace sabal {

struct SparseApproxProblem {
  std::vector<double> v;       // length m
  Matrix phi;                  // m x n
  std::vector<double> sigma2;  // length n
  double alpha = 0.0;
  double beta = 0.0;
  std::size_t b = 1;

  std::size_t m() const noexcept { return phi.rows(); }
  std::size_t n() const noexcept { return phi.cols(); }

  /// Checks shapes, finiteness, sigma2 >= 0 and 1 <= b <= n.
  /// Throws DimensionMismatch on shape errors and BudgetExceedsPool when b > n.
  void validate() const;
};

/// Nonnegative weights with the support (indices of strictly positive
/// entries) cached in increasing order.
class WeightVector {
 public:
  WeightVector() = default;
  explicit WeightVector(std::size_t n) : w_(n, 0.0) {}
  /// Throws std::invalid_argument if any entry is negative or not finite.
  explicit WeightVector(std::vector<double> w);

  /// Negative entries (and -0.0) become +0.0.
  static WeightVector clamped(std::vector<double> w);

  std::size_t size() const noexcept { return w_.size(); }
  double operator[](std::size_t j) const noexcept { return w_[j]; }
  std::span<const double> values() const noexcept { return w_; }
  const std::vector<std::size_t>& support() const noexcept { return support_; }
  std::size_t nnz() const noexcept { return support_.size(); }

  friend bool operator==(const WeightVector&, const WeightVector&) = default;

 private:
  void rebuild_support();

  std::vector<double> w_;
  std::vector<std::size_t> support_;
};

double eval_f1(const SparseApproxProblem& problem, std::span<const double> w);
double eval_f2(const SparseApproxProblem& problem, std::span<const double> w);
std::vector<double> grad_f1(const SparseApproxProblem& problem, std::span<const double> w);

inline double eval_f1(const SparseApproxProblem& p, const WeightVector& w) {
  return eval_f1(p, w.values());
}
inline double eval_f2(const SparseApproxProblem& p, const WeightVector& w) {
  return eval_f2(p, w.values());
}
inline std::vector<double> grad_f1(const SparseApproxProblem& p, const WeightVector& w) {
  return grad_f1(p, w.values());
}

/// Phi w - v
std::vector<double> residual(const SparseApproxProblem& problem, std::span<const double> w);

}  // namespace sabal
