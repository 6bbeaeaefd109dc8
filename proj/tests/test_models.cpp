#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "sabal/error.hpp"
#include "sabal/models.hpp"
#include "testing.hpp"

using namespace sabal;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected sabal::Error");
  return ErrorCode::ParseError;
}

// Two 2-D Gaussian clusters, unit noise, centers 6 apart.
Dataset two_clusters(std::uint64_t seed, std::size_t per_class = 100) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  Dataset d;
  d.num_classes = 2;
  d.features = Matrix(2, 2 * per_class);
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    const std::size_t y = i < per_class ? 0 : 1;
    d.features(0, i) = (y == 0 ? -3.0 : 3.0) + noise(rng);
    d.features(1, i) = noise(rng);
    d.labels.push_back(y);
  }
  return d;
}

Dataset toy_set() {
  Dataset d;
  d.num_classes = 3;
  d.features = Matrix(2, 6, {0.0, 1.0, 1.0, 0.0, -1.0, -1.0, 0.5, 0.5, 2.0, -1.0, -0.3, 0.8});
  d.labels = {0, 1, 2, 0, 1, 2};
  return d;
}

Classifier fixed_classifier(std::vector<double> w, std::vector<double> bias) {
  const std::size_t k = bias.size(), d = w.size() / k;
  return Classifier(FeatureMap::identity(d), Matrix(d, k, std::move(w)), std::move(bias));
}

// Plain-loop softmax cross-entropy of one example (oracle).
double ref_cross_entropy(const Classifier& c, const std::vector<double>& x, std::size_t y) {
  const std::size_t k = c.num_classes(), d = c.feature_dim();
  std::vector<double> z(k);
  for (std::size_t a = 0; a < k; ++a) {
    z[a] = c.bias()[a];
    for (std::size_t r = 0; r < d; ++r) z[a] += c.weights()(r, a) * x[r];
  }
  double mx = z[0];
  for (double v : z) mx = std::max(mx, v);
  double total = 0.0;
  for (double v : z) total += std::exp(v - mx);
  return std::log(total) + mx - z[y];
}

}  // namespace

TEST_CASE("separable clusters are learned") {
  const auto data = two_clusters(71);
  const auto model = train(data, FeatureMap::identity(2), TrainConfig{200, 0.1, 0.0, 3});
  CHECK(accuracy(model, data) >= 0.99);
}

TEST_CASE("a single example is memorized") {
  Dataset d;
  d.num_classes = 4;
  d.features = Matrix(3, 1, {0.2, -1.0, 0.4});
  d.labels = {2};
  for (const TrainConfig& cfg :
       {TrainConfig{1, 0.1, 0.0, 0}, TrainConfig{50, 0.01, 0.1, 9}, TrainConfig{200, 1.0, 0.0, 4}}) {
    const auto model = train(d, FeatureMap::identity(3), cfg);
    CHECK(accuracy(model, d) == 1.0);
  }
}

TEST_CASE("training is deterministic") {
  const auto data = two_clusters(72, 30);
  const auto lift = FeatureMap::tanh_lift(2, 16, 5);
  const TrainConfig cfg{40, 0.2, 1e-3, 11};
  CHECK(train(data, lift, cfg) == train(data, lift, cfg));
}

TEST_CASE("training loss ends no higher than it starts") {
  std::vector<double> history;
  train(two_clusters(73, 20), FeatureMap::tanh_lift(2, 8, 1), TrainConfig{100, 0.5, 1e-3, 2},
        &history);
  REQUIRE(history.size() == 100);
  CHECK(history.back() <= history.front());
}

TEST_CASE("training is monotone at small learning rates") {
  for (double lr : {1e-3, 5e-4}) {
    std::vector<double> history;
    train(toy_set(), FeatureMap::identity(2), TrainConfig{300, lr, 0.01, 6}, &history);
    for (std::size_t e = 1; e < history.size(); ++e) CHECK(history[e] <= history[e - 1] + 1e-9);
  }
}

TEST_CASE("training validates its inputs") {
  Dataset empty;
  empty.num_classes = 2;
  empty.features = Matrix(2, 0);
  CHECK(code_of([&] { train(empty, FeatureMap::identity(2), TrainConfig{}); }) ==
        ErrorCode::EmptyTrainingSet);
  auto bad = toy_set();
  bad.labels[0] = 3;
  CHECK(code_of([&] { train(bad, FeatureMap::identity(2), TrainConfig{}); }) ==
        ErrorCode::LabelOutOfRange);
}

TEST_CASE("zero parameters predict uniformly") {
  const auto c = fixed_classifier(std::vector<double>(6, 0.0), std::vector<double>(3, 0.0));
  const auto p = predict_proba(c, Matrix(2, 2, {1.0, 5.0, -3.0, 0.2}));
  for (double x : p.storage()) CHECK(x == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("softmax is shift invariant") {
  std::vector<double> a{1.0, -2.0, 0.5}, b{101.0, 98.0, 100.5};
  softmax_inplace(a);
  softmax_inplace(b);
  for (std::size_t k = 0; k < 3; ++k) CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-12));
}

TEST_CASE("probabilities sum to one") {
  std::mt19937_64 rng(74);
  for (int trial = 0; trial < 20; ++trial) {
    const auto c = fixed_classifier(testing::random_vector(rng, 12, -5.0, 5.0),
                                    testing::random_vector(rng, 4, -5.0, 5.0));
    const auto p = predict_proba(c, Matrix(3, 5, testing::random_vector(rng, 15, -3.0, 3.0)));
    for (std::size_t i = 0; i < 5; ++i) {
      double total = 0.0;
      for (double x : p.col(i)) total += x;
      CHECK(std::abs(total - 1.0) <= 1e-9);
    }
  }
}

TEST_CASE("untrained models refuse to predict") {
  CHECK(code_of([] { predict_logits(Classifier{}, Matrix(1, 1)); }) == ErrorCode::UntrainedModel);
  CHECK(code_of([] { per_sample_losses(Ensemble{{Classifier{}}, {0}}, std::vector<double>{0.0}, 0); }) ==
        ErrorCode::UntrainedModel);
}

TEST_CASE("per-sample losses") {
  const auto sure = fixed_classifier({0.0, 0.0}, {0.0, -1000.0});
  const auto flat = fixed_classifier({0.0, 0.0, 0.0}, {0.0, 0.0, 0.0});
  CHECK(per_sample_losses(Ensemble{{sure}, {0}}, std::vector<double>{1.0}, 0)[0] ==
        doctest::Approx(0.0));
  CHECK(per_sample_losses(Ensemble{{flat}, {0}}, std::vector<double>{1.0}, 2)[0] ==
        doctest::Approx(std::log(3.0)).epsilon(1e-15));

  std::mt19937_64 rng(75);
  Ensemble e;
  for (int i = 0; i < 4; ++i) {
    e.members.push_back(fixed_classifier(testing::random_vector(rng, 9, -2.0, 2.0),
                                         testing::random_vector(rng, 3)));
    e.seeds.push_back(i);
  }
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = testing::random_vector(rng, 3, -2.0, 2.0);
    const std::size_t y = trial % 3;
    const auto losses = per_sample_losses(e, x, y);
    for (std::size_t i = 0; i < 4; ++i)
      CHECK(losses[i] == doctest::Approx(ref_cross_entropy(e.members[i], x, y)).epsilon(1e-12));
  }
}

TEST_CASE("last-layer gradient matches finite differences") {
  std::mt19937_64 rng(76);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t k = 3, d = 4;
    auto w = testing::random_vector(rng, d * k);
    const auto bias = testing::random_vector(rng, k);
    const auto x = testing::random_vector(rng, d, -2.0, 2.0);
    const std::size_t y = trial % k;
    const auto c = fixed_classifier(w, bias);
    std::vector<double> p(k);
    c.logits_from_features(x, p);
    softmax_inplace(p);
    const double h = 1e-6;
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t r = 0; r < d; ++r) {
        const double analytic = (p[a] - (a == y ? 1.0 : 0.0)) * x[r];
        auto wp = w, wm = w;
        wp[a * d + r] += h;
        wm[a * d + r] -= h;
        const double fd = (ref_cross_entropy(fixed_classifier(wp, bias), x, y) -
                           ref_cross_entropy(fixed_classifier(wm, bias), x, y)) /
                          (2.0 * h);
        CHECK(std::abs(fd - analytic) <= 1e-5 * std::max(1.0, std::abs(analytic)));
      }
  }
}

TEST_CASE("penultimate features") {
  const auto c = fixed_classifier({1.0, 2.0, 3.0, 4.0}, {0.0, 0.0});
  CHECK(penultimate_features(c, std::vector<double>{0.25, -7.0}) == std::vector<double>{0.25, -7.0});

  const auto lift = FeatureMap::tanh_lift(2, 7, 13);
  const std::vector<double> x{0.3, -0.4};
  CHECK(lift.apply(x).size() == 7);
  CHECK(lift.apply(x) == lift.apply(x));
  CHECK(lift.apply(x) == FeatureMap::tanh_lift(2, 7, 13).apply(x));
  CHECK(lift.apply(x) != FeatureMap::tanh_lift(2, 7, 14).apply(x));
}

TEST_CASE("ensemble members differ across bootstrap seeds") {
  const auto data = two_clusters(77, 15);
  const auto e = train_ensemble(data, FeatureMap::identity(2), TrainConfig{30, 0.1, 0.0, 100}, 4);
  REQUIRE(e.size() == 4);
  CHECK(e.seeds == std::vector<std::uint64_t>{100, 101, 102, 103});
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = a + 1; b < 4; ++b) CHECK_FALSE(e.members[a] == e.members[b]);
  const auto again = train_ensemble(data, FeatureMap::identity(2), TrainConfig{30, 0.1, 0.0, 100}, 4);
  for (std::size_t a = 0; a < 4; ++a) CHECK(e.members[a] == again.members[a]);
}
