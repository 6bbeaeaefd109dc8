#include <random>

#include "doctest.h"
#include "sabal/error.hpp"
#include "sabal/problem.hpp"
#include "testing.hpp"

using namespace sabal;

namespace {

SparseApproxProblem identity_problem(std::vector<double> v, double alpha, double beta) {
  SparseApproxProblem p;
  const std::size_t n = v.size();
  p.phi = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) p.phi(i, i) = 1.0;
  p.v = std::move(v);
  p.sigma2.assign(n, 0.0);
  p.alpha = alpha;
  p.beta = beta;
  p.b = 1;
  return p;
}

}  // namespace

TEST_CASE("eval_f1 on the identity design") {
  auto p = identity_problem({1.0, 0.0}, 0.0, 0.0);
  CHECK(eval_f1(p, WeightVector({1.0, 0.0})) == 0.0);
  p.beta = 1.0;
  CHECK(eval_f1(p, WeightVector(2)) == 3.0);
}

TEST_CASE("eval_f1 matches a straight-line recomputation") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = testing::random_problem(rng, 4, 6, 2, 0.5, 0.3);
    const auto w = testing::random_vector(rng, 6, 0.0, 2.0);
    const double ref = testing::reference_f1(p, w);
    CHECK(std::abs(eval_f1(p, w) - ref) <= 1e-12 * std::abs(ref));
  }
}

TEST_CASE("eval_f2") {
  SparseApproxProblem p = identity_problem({0.0, 0.0, 0.0}, 1.0, 0.0);
  p.sigma2 = {1.0, 2.0, 3.0};
  CHECK(eval_f2(p, WeightVector(3)) == 0.0);
  CHECK(eval_f2(p, WeightVector({0.5, 0.0, 0.1})) == -4.0);
  p.alpha = 0.0;
  CHECK(eval_f2(p, WeightVector({0.5, 0.7, 0.1})) == 0.0);
}

TEST_CASE("grad_f1 closed-form cases") {
  auto p = identity_problem({0.0, 0.0}, 0.0, 0.0);
  const auto g = grad_f1(p, WeightVector({1.0, 2.0}));
  CHECK(g[0] == 2.0);
  CHECK(g[1] == 4.0);

  SparseApproxProblem z;
  z.phi = Matrix(2, 3);
  z.v = {0.0, 0.0};
  z.sigma2.assign(3, 0.0);
  z.beta = 1.0;
  for (double x : grad_f1(z, WeightVector(3))) CHECK(x == -2.0);
}

TEST_CASE("grad_f1 matches central finite differences on 100 random instances") {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::size_t> dim(1, 8);
  std::uniform_real_distribution<double> beta(0.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = testing::random_problem(rng, dim(rng), dim(rng), 1, 1.0, beta(rng));
    const auto w = testing::random_vector(rng, p.n(), -1.0, 2.0);
    CHECK(testing::relative_error(grad_f1(p, w), testing::finite_difference_grad(p, w)) <= 1e-5);
  }
}

TEST_CASE("f1 is convex along random segments") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = testing::random_problem(rng, 5, 7, 2, 1.0, unit(rng));
    const auto w1 = testing::random_vector(rng, 7, 0.0, 3.0);
    const auto w2 = testing::random_vector(rng, 7, 0.0, 3.0);
    const double t = unit(rng);
    std::vector<double> mid(7);
    for (std::size_t j = 0; j < 7; ++j) mid[j] = t * w1[j] + (1 - t) * w2[j];
    CHECK(eval_f1(p, mid) <= t * eval_f1(p, w1) + (1 - t) * eval_f1(p, w2) + 1e-10);
    CHECK(eval_f1(p, w1) >= 0.0);
  }
}

TEST_CASE("f2 depends only on the support") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = testing::random_problem(rng, 3, 6, 2, 1.5, 0.0);
    auto w = testing::random_sparse_weights(rng, 6, 3);
    const double before = eval_f2(p, w);
    for (auto& x : w) x *= 7.5;
    CHECK(eval_f2(p, w) == before);
    CHECK(before <= 0.0);
  }
}

TEST_CASE("WeightVector tracks its support exactly") {
  const WeightVector w({0.0, 2.0, 0.0, 1e-300});
  CHECK(w.support() == std::vector<std::size_t>{1, 3});
  CHECK_THROWS_AS(WeightVector(std::vector<double>{-1.0}), std::invalid_argument);

  const auto c = WeightVector::clamped({-0.5, -0.0, 3.0});
  CHECK(c.support() == std::vector<std::size_t>{2});
  CHECK(!std::signbit(c[1]));
}

TEST_CASE("dimension errors") {
  auto p = identity_problem({1.0, 0.0}, 0.0, 0.0);
  try {
    eval_f1(p, std::vector<double>{1.0, 2.0, 3.0});
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
  CHECK_THROWS_AS(eval_f2(p, std::vector<double>{1.0}), Error);
  CHECK_THROWS_AS(grad_f1(p, std::vector<double>{}), Error);

  p.b = 3;
  try {
    p.validate();
    FAIL("expected BudgetExceedsPool");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BudgetExceedsPool);
  }
}
