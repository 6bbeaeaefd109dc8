#pragma once

// Greedy and proximal-IHT solvers for SparseApproxProblem, their shared
// exact line search and in-support de-bias step, and an exhaustive oracle.

#include <cstddef>
#include <span>
#include <vector>

#include "sabal/problem.hpp"

namespace sabal {

struct GreedyConfig {
  double tau = 1.0;  // step size in the greedy scoring rule
};

/// How the proximal step ranks candidates.
///   Corrected:    keep the b largest  alpha*sigma2_j + 0.5*max(s_j,0)^2
///   PaperLiteral: keep the b smallest 0.5*max(-s_j,0)^2 - alpha*sigma2_j
/// Only Corrected is the true minimizer of the prox subproblem; the literal
/// rule ignores the cost 0.5*s_j^2 of leaving j out.
enum class ProxRule { Corrected, PaperLiteral };

struct IHTConfig {
  std::size_t iterations = 100;
  /// Stop once ||w - w_prev||_inf <= stall_tolerance. Zero disables the check
  /// and the solver always runs `iterations` steps.
  double stall_tolerance = 0.0;
  ProxRule prox = ProxRule::Corrected;
};

struct TracePoint {
  std::size_t iteration;
  double objective;
};

struct SolveResult {
  WeightVector w;
  double objective = 0.0;  // eval_f1(w) + eval_f2(w)
  std::vector<TracePoint> trace;
  /// The batch. Greedy: the tracked index set S in insertion order (always b
  /// entries, even when clamping zeroed some weights). IHT and the oracle:
  /// support(w) in increasing order.
  std::vector<std::size_t> selected;
  /// Size-b index set the batch was drawn from: S for greedy, the last prox
  /// selection for IHT, the best enumerated support for the oracle.
  std::vector<std::size_t> candidates;
  /// f1(w) - alpha * sum_{j in candidates} sigma2_j. For greedy and IHT this is
  /// at least `objective`; for the oracle it is the infimum over its support.
  double support_value = 0.0;
};

/// argmin over mu of f1(w - mu*u). Throws DegenerateDirection when
/// ||Phi u||^2 + beta ||u||^2 <= 1e-300.
double line_search(const SparseApproxProblem& problem, std::span<const double> u,
                   std::span<const double> w);

/// One exact gradient step restricted to the nonzero entries of w. The result
/// is not clamped; entries outside the support stay exactly zero.
std::vector<double> debias(const SparseApproxProblem& problem, std::span<const double> w);

SolveResult greedy_solve(const SparseApproxProblem& problem, const GreedyConfig& config = {});

/// Indices of the b candidates kept by the proximal step, increasing order.
std::vector<std::size_t> prox_support(std::span<const double> s, std::span<const double> sigma2,
                                      double alpha, std::size_t b,
                                      ProxRule rule = ProxRule::Corrected);

/// argmin over {w >= 0, ||w||_0 <= b} of 0.5||w - s||^2 + f2(w), in the
/// infimum sense: selected entries with s_j <= 0 come back as 0.
WeightVector prox_hard_threshold(std::span<const double> s, std::span<const double> sigma2,
                                 double alpha, std::size_t b,
                                 ProxRule rule = ProxRule::Corrected);

SolveResult iht_solve(const SparseApproxProblem& problem, const IHTConfig& config = {});

/// Largest binomial(n, b) the oracle accepts.
inline constexpr double kMaxOracleSupports = 1e6;

/// Enumerates every support of size b and minimizes f1 on each by projected
/// gradient descent. Throws ProblemTooLarge past kMaxOracleSupports.
SolveResult brute_force_solve(const SparseApproxProblem& problem);

}  // namespace sabal
