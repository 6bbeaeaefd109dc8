#include "sabal/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "sabal/error.hpp"
#include "sabal/kernels.hpp"

namespace sabal {

namespace {

constexpr double kDegenerateDenominator = 1e-300;

double line_search_or_zero(const SparseApproxProblem& problem, std::span<const double> u,
                           std::span<const double> w) {
  try {
    return line_search(problem, u, w);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateDirection) throw;
    return 0.0;
  }
}

double sigma2_sum(const SparseApproxProblem& problem, std::span<const std::size_t> idx) {
  double acc = 0.0;
  for (std::size_t j : idx) acc += problem.sigma2[j];
  return acc;
}

void finish(const SparseApproxProblem& problem, SolveResult& result) {
  const double f1 = eval_f1(problem, result.w);
  result.objective = f1 + eval_f2(problem, result.w);
  result.support_value = f1 - problem.alpha * sigma2_sum(problem, result.candidates);
}

}  // namespace

double line_search(const SparseApproxProblem& problem, std::span<const double> u,
                   std::span<const double> w) {
  if (u.size() != problem.n())
    throw Error(ErrorCode::DimensionMismatch, "direction length does not match n");
  const auto r = residual(problem, w);
  std::vector<double> phi_u(problem.m());
  kernels::gemv(problem.phi, u, phi_u);

  const double uu = kernels::squared_norm(u);
  const double den = kernels::squared_norm(phi_u) + problem.beta * uu;
  if (!(den > kDegenerateDenominator))
    throw Error(ErrorCode::DegenerateDirection, "Phi u = 0 and beta ||u||^2 = 0");

  double num = kernels::dot(r, phi_u);
  if (problem.beta != 0.0) num += problem.beta * (kernels::dot(w, u) - kernels::sum(u));
  return num / den;
}

std::vector<double> debias(const SparseApproxProblem& problem, std::span<const double> w) {
  std::vector<double> out(w.begin(), w.end());
  std::vector<std::size_t> supp;
  for (std::size_t j = 0; j < w.size(); ++j)
    if (w[j] != 0.0) supp.push_back(j);
  if (supp.empty()) return out;

  // In-support gradient; only |supp| columns are touched.
  const auto r = residual(problem, w);
  std::vector<double> u(w.size(), 0.0);
  bool any = false;
  for (std::size_t j : supp) {
    u[j] = 2.0 * kernels::dot(problem.phi.col(j), r) + 2.0 * problem.beta * (w[j] - 1.0);
    any = any || u[j] != 0.0;
  }
  if (!any) return out;

  const double mu = line_search_or_zero(problem, u, w);
  for (std::size_t j : supp) out[j] -= mu * u[j];
  return out;
}

SolveResult greedy_solve(const SparseApproxProblem& problem, const GreedyConfig& config) {
  problem.validate();
  if (!(config.tau > 0.0) || !std::isfinite(config.tau))
    throw Error(ErrorCode::ConfigInvalid, "greedy tau must be finite and > 0");

  const std::size_t n = problem.n();
  std::vector<double> w(n, 0.0);
  std::vector<bool> in_set(n, false);
  std::vector<double> e(n, 0.0);
  SolveResult result;
  result.selected.reserve(problem.b);

  for (std::size_t step = 0; step < problem.b; ++step) {
    const auto g = grad_f1(problem, w);
    std::size_t best = n;
    double best_score = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (in_set[j]) continue;
      const double score = config.tau * g[j] - problem.alpha * problem.sigma2[j];
      if (best == n || score < best_score) {
        best = j;
        best_score = score;
      }
    }
    in_set[best] = true;
    result.selected.push_back(best);

    e[best] = 1.0;
    const double mu = line_search_or_zero(problem, e, w);
    e[best] = 0.0;
    w[best] -= mu;
    w = debias(problem, w);
    for (double& x : w)
      if (!(x > 0.0)) x = 0.0;

    result.trace.push_back({step + 1, eval_f1(problem, w) + eval_f2(problem, w)});
  }

  result.w = WeightVector(std::move(w));
  result.candidates = result.selected;
  finish(problem, result);
  return result;
}

std::vector<std::size_t> prox_support(std::span<const double> s, std::span<const double> sigma2,
                                      double alpha, std::size_t b, ProxRule rule) {
  const std::size_t n = s.size();
  if (sigma2.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "s and sigma2 lengths differ");
  if (b > n)
    throw Error(ErrorCode::BudgetExceedsPool,
                "budget b=" + std::to_string(b) + " exceeds pool size n=" + std::to_string(n));

  // Both rules reduce to "keep the b best keys", larger key = better.
  std::vector<double> key(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (rule == ProxRule::Corrected) {
      const double pos = std::max(s[j], 0.0);
      key[j] = alpha * sigma2[j] + 0.5 * pos * pos;
    } else {
      const double neg = std::max(-s[j], 0.0);
      key[j] = -(0.5 * neg * neg - alpha * sigma2[j]);
    }
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  auto better = [&](std::size_t a, std::size_t c) {
    return key[a] > key[c] || (key[a] == key[c] && a < c);
  };
  if (b < n) {
    std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(b), idx.end(), better);
    idx.resize(b);
  }
  std::sort(idx.begin(), idx.end());
  return idx;
}

WeightVector prox_hard_threshold(std::span<const double> s, std::span<const double> sigma2,
                                 double alpha, std::size_t b, ProxRule rule) {
  std::vector<double> w(s.size(), 0.0);
  for (std::size_t j : prox_support(s, sigma2, alpha, b, rule)) w[j] = std::max(s[j], 0.0);
  return WeightVector::clamped(std::move(w));
}

SolveResult iht_solve(const SparseApproxProblem& problem, const IHTConfig& config) {
  problem.validate();
  if (config.iterations == 0)
    throw Error(ErrorCode::ConfigInvalid, "IHT needs at least one iteration");
  if (!(config.stall_tolerance >= 0.0))
    throw Error(ErrorCode::ConfigInvalid, "stall tolerance must be >= 0");

  const std::size_t n = problem.n();
  std::vector<double> w(n, 0.0);
  std::vector<double> z(n, 0.0);
  std::vector<double> step(n);
  SolveResult result;

  for (std::size_t it = 1; it <= config.iterations; ++it) {
    const std::vector<double> w_prev = w;

    const auto g = grad_f1(problem, z);
    const double mu = line_search_or_zero(problem, g, z);
    std::vector<double> s = z;
    kernels::axpy(-mu, g, s);

    result.candidates = prox_support(s, problem.sigma2, problem.alpha, problem.b, config.prox);
    std::fill(w.begin(), w.end(), 0.0);
    for (std::size_t j : result.candidates) w[j] = std::max(s[j], 0.0);
    w = debias(problem, w);
    for (double& x : w)
      if (!(x > 0.0)) x = 0.0;

    double max_change = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      step[j] = w[j] - w_prev[j];
      max_change = std::max(max_change, std::abs(step[j]));
    }
    // Momentum; a zero step (first iteration from w = 0, or a fixed point) gives tau = 0.
    const double tau = max_change == 0.0 ? 0.0 : line_search_or_zero(problem, step, w);
    for (std::size_t j = 0; j < n; ++j) z[j] = w[j] - tau * step[j];

    result.trace.push_back({it, eval_f1(problem, w) + eval_f2(problem, w)});
    if (config.stall_tolerance > 0.0 && max_change <= config.stall_tolerance) break;
  }

  result.w = WeightVector(std::move(w));
  result.selected = result.w.support();
  finish(problem, result);
  return result;
}

// ---------------------------------------------------------------------------
// Exhaustive oracle

namespace {

double binomial(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

// f1 restricted to a support S, in reduced coordinates:
//   f1(x) = x'Gx - 2c'x + constant,  G = Phi_S'Phi_S + beta I,  c = Phi_S'v + beta 1
struct ReducedQuadratic {
  std::size_t k;
  std::vector<double> gram;  // k x k, row-major
  std::vector<double> lin;

  double value_minus_const(std::span<const double> x) const {
    double acc = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
      double gx = 0.0;
      for (std::size_t c = 0; c < k; ++c) gx += gram[a * k + c] * x[c];
      acc += x[a] * gx - 2.0 * lin[a] * x[a];
    }
    return acc;
  }
  void half_gradient(std::span<const double> x, std::span<double> out) const {
    for (std::size_t a = 0; a < k; ++a) {
      double gx = 0.0;
      for (std::size_t c = 0; c < k; ++c) gx += gram[a * k + c] * x[c];
      out[a] = gx - lin[a];
    }
  }
};

ReducedQuadratic reduce(const SparseApproxProblem& problem, std::span<const std::size_t> support) {
  const std::size_t k = support.size();
  ReducedQuadratic q{k, std::vector<double>(k * k), std::vector<double>(k)};
  for (std::size_t a = 0; a < k; ++a) {
    const auto ca = problem.phi.col(support[a]);
    for (std::size_t c = a; c < k; ++c) {
      const double g = kernels::dot(ca, problem.phi.col(support[c])) + (a == c ? problem.beta : 0.0);
      q.gram[a * k + c] = g;
      q.gram[c * k + a] = g;
    }
    q.lin[a] = kernels::dot(ca, problem.v) + problem.beta;
  }
  return q;
}

// Solves the k x k system in place by Gaussian elimination with partial
// pivoting. Returns false on a (numerically) singular system.
bool solve_dense(std::vector<double> a, std::vector<double> rhs, std::size_t k,
                 std::vector<double>& x) {
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < k; ++r)
      if (std::abs(a[r * k + col]) > std::abs(a[piv * k + col])) piv = r;
    if (std::abs(a[piv * k + col]) < 1e-14) return false;
    if (piv != col) {
      for (std::size_t c = 0; c < k; ++c) std::swap(a[col * k + c], a[piv * k + c]);
      std::swap(rhs[col], rhs[piv]);
    }
    for (std::size_t r = col + 1; r < k; ++r) {
      const double f = a[r * k + col] / a[col * k + col];
      for (std::size_t c = col; c < k; ++c) a[r * k + c] -= f * a[col * k + c];
      rhs[r] -= f * rhs[col];
    }
  }
  x.assign(k, 0.0);
  for (std::size_t r = k; r-- > 0;) {
    double acc = rhs[r];
    for (std::size_t c = r + 1; c < k; ++c) acc -= a[r * k + c] * x[c];
    x[r] = acc / a[r * k + r];
  }
  return true;
}

// Nonnegative minimizer of the reduced quadratic by projected gradient with an
// exact (feasibility-capped) step, then an exact solve on the free set.
std::vector<double> nonneg_minimize(const ReducedQuadratic& q) {
  constexpr std::size_t kMaxIterations = 100000;
  constexpr double kTolerance = 1e-10;
  const std::size_t k = q.k;
  std::vector<double> x(k, 0.0), g(k), u(k), gu(k);

  for (std::size_t it = 0; it < kMaxIterations; ++it) {
    q.half_gradient(x, g);
    double norm2 = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
      u[a] = x[a] > 0.0 ? g[a] : std::min(g[a], 0.0);
      norm2 += u[a] * u[a];
    }
    if (std::sqrt(norm2) <= kTolerance) break;

    double curv = 0.0, slope = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
      double acc = 0.0;
      for (std::size_t c = 0; c < k; ++c) acc += q.gram[a * k + c] * u[c];
      curv += u[a] * acc;
      slope += g[a] * u[a];
    }
    if (!(curv > kDegenerateDenominator)) break;
    double mu = slope / curv;
    for (std::size_t a = 0; a < k; ++a)
      if (u[a] > 0.0) mu = std::min(mu, x[a] / u[a]);
    for (std::size_t a = 0; a < k; ++a) x[a] = std::max(x[a] - mu * u[a], 0.0);
  }

  std::vector<std::size_t> free;
  for (std::size_t a = 0; a < k; ++a)
    if (x[a] > 0.0) free.push_back(a);
  if (!free.empty()) {
    const std::size_t f = free.size();
    std::vector<double> a(f * f), rhs(f), sol;
    for (std::size_t r = 0; r < f; ++r) {
      rhs[r] = q.lin[free[r]];
      for (std::size_t c = 0; c < f; ++c) a[r * f + c] = q.gram[free[r] * k + free[c]];
    }
    if (solve_dense(a, rhs, f, sol) && std::all_of(sol.begin(), sol.end(), [](double s) { return s > 0.0; })) {
      std::vector<double> polished(k, 0.0);
      for (std::size_t r = 0; r < f; ++r) polished[free[r]] = sol[r];
      if (q.value_minus_const(polished) <= q.value_minus_const(x)) x = std::move(polished);
    }
  }
  return x;
}

}  // namespace

SolveResult brute_force_solve(const SparseApproxProblem& problem) {
  problem.validate();
  const std::size_t n = problem.n();
  const std::size_t b = problem.b;
  if (binomial(n, b) > kMaxOracleSupports)
    throw Error(ErrorCode::ProblemTooLarge,
                "binomial(" + std::to_string(n) + ", " + std::to_string(b) + ") exceeds 1e6");

  const double constant = kernels::squared_norm(problem.v) + problem.beta * static_cast<double>(n);
  std::vector<std::size_t> combo(b);
  std::iota(combo.begin(), combo.end(), std::size_t{0});

  double best_value = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best_support;
  std::vector<double> best_x;
  while (true) {
    const auto q = reduce(problem, combo);
    auto x = nonneg_minimize(q);
    const double value =
        q.value_minus_const(x) + constant - problem.alpha * sigma2_sum(problem, combo);
    if (value < best_value) {
      best_value = value;
      best_support = combo;
      best_x = std::move(x);
    }
    // Next combination in lexicographic order.
    std::size_t i = b;
    while (i > 0 && combo[i - 1] == n - b + i - 1) --i;
    if (i == 0) break;
    ++combo[i - 1];
    for (std::size_t t = i; t < b; ++t) combo[t] = combo[t - 1] + 1;
  }

  std::vector<double> w(n, 0.0);
  for (std::size_t a = 0; a < b; ++a) w[best_support[a]] = best_x[a];
  SolveResult result;
  result.w = WeightVector::clamped(std::move(w));
  result.selected = result.w.support();
  result.candidates = best_support;
  finish(problem, result);
  result.trace.push_back({1, result.objective});
  return result;
}

}  // namespace sabal
