#include "sabal/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sabal/error.hpp"
#include "sabal/kernels.hpp"

namespace sabal {

namespace {

constexpr double kSimplexTolerance = 1e-9;

bool on_simplex(std::span<const double> p) {
  double total = 0.0;
  for (double x : p) {
    if (!(x >= 0.0) || !std::isfinite(x)) return false;
    total += x;
  }
  return std::abs(total - 1.0) <= kSimplexTolerance;
}

}  // namespace

void LabelDistribution::validate() const {
  for (std::size_t j = 0; j < probs.cols(); ++j)
    if (!on_simplex(probs.col(j)))
      throw Error(ErrorCode::InvalidDistribution,
                  "label distribution of candidate " + std::to_string(j) + " is not on the simplex");
}

Matrix build_sample_embedding(const Matrix& losses) {
  const std::size_t samples = losses.rows();
  if (samples == 0) throw Error(ErrorCode::EmptySampleSet, "no posterior samples");
  const double inv_m = 1.0 / static_cast<double>(samples);
  const double scale = 1.0 / std::sqrt(static_cast<double>(samples));
  Matrix g(samples, losses.cols());
  for (std::size_t k = 0; k < losses.cols(); ++k) {
    const auto col = losses.col(k);
    double mean = 0.0;
    for (double x : col) mean += x;
    mean *= inv_m;
    auto out = g.col(k);
    for (std::size_t i = 0; i < samples; ++i) out[i] = scale * (col[i] - mean);
  }
  return g;
}

std::vector<double> build_gradient_embedding(std::span<const double> probs,
                                             std::span<const double> features, std::size_t label) {
  if (!on_simplex(probs))
    throw Error(ErrorCode::InvalidDistribution, "class probabilities are not on the simplex");
  if (label >= probs.size())
    throw Error(ErrorCode::LabelOutOfRange, "label " + std::to_string(label) + " out of range");
  const std::size_t d = features.size();
  std::vector<double> out(probs.size() * d);
  for (std::size_t k = 0; k < probs.size(); ++k) {
    const double coef = probs[k] - (k == label ? 1.0 : 0.0);
    for (std::size_t i = 0; i < d; ++i) out[k * d + i] = coef * features[i];
  }
  return out;
}

SparseApproxProblem assemble_problem(const EmbeddingSet& embeddings, const LabelDistribution& dist,
                                     double alpha, double beta, std::size_t b) {
  const std::size_t n = embeddings.size();
  const std::size_t k_classes = embeddings.num_classes();
  const std::size_t m = embeddings.dim();
  if (dist.size() != n || dist.num_classes() != k_classes)
    throw Error(ErrorCode::DimensionMismatch,
                "embeddings cover " + std::to_string(n) + "x" + std::to_string(k_classes) +
                    " (candidates x classes), distribution " + std::to_string(dist.size()) + "x" +
                    std::to_string(dist.num_classes()));
  if (n == 0) throw Error(ErrorCode::DimensionMismatch, "no candidates");
  dist.validate();

  SparseApproxProblem problem;
  problem.alpha = alpha;
  problem.beta = beta;
  problem.b = b;
  problem.v.assign(m, 0.0);
  problem.phi = Matrix(m, n);
  problem.sigma2.assign(n, 0.0);

  const double inv_n = 1.0 / static_cast<double>(n);
  const double inv_b = 1.0 / static_cast<double>(b);
  std::vector<double> mean(m), diff(m);
  for (std::size_t j = 0; j < n; ++j) {
    const auto p = dist.probs.col(j);
    std::fill(mean.begin(), mean.end(), 0.0);
    for (std::size_t k = 0; k < k_classes; ++k) kernels::axpy(p[k], embeddings.g(j, k), mean);

    double sigma = 0.0;
    for (std::size_t k = 0; k < k_classes; ++k) {
      if (p[k] == 0.0) continue;
      const auto gk = embeddings.g(j, k);
      for (std::size_t r = 0; r < m; ++r) diff[r] = gk[r] - mean[r];
      sigma += p[k] * std::sqrt(kernels::squared_norm(diff));
    }
    sigma *= inv_n;
    problem.sigma2[j] = sigma * sigma;

    // Fixed summation order over j keeps v reproducible.
    kernels::axpy(1.0, mean, problem.v);
    auto col = problem.phi.col(j);
    for (std::size_t r = 0; r < m; ++r) col[r] = inv_b * mean[r];
  }
  for (double& x : problem.v) x *= inv_n;
  problem.validate();
  return problem;
}

EmbeddingSet gradient_embeddings(const Classifier& model, const Matrix& inputs) {
  if (!model.trained()) throw Error(ErrorCode::UntrainedModel, "classifier has not been trained");
  const std::size_t k_classes = model.num_classes();
  const std::size_t d = model.feature_dim();
  EmbeddingSet set(inputs.cols(), k_classes, k_classes * d, EmbeddingMode::Gradient);
  std::vector<double> h(d), p(k_classes);
  for (std::size_t j = 0; j < inputs.cols(); ++j) {
    model.feature_map().apply(inputs.col(j), h);
    model.logits_from_features(h, p);
    softmax_inplace(p);
    for (std::size_t k = 0; k < k_classes; ++k) {
      auto out = set.g(j, k);
      for (std::size_t c = 0; c < k_classes; ++c) {
        const double coef = p[c] - (c == k ? 1.0 : 0.0);
        for (std::size_t i = 0; i < d; ++i) out[c * d + i] = coef * h[i];
      }
    }
  }
  return set;
}

EmbeddingSet sample_embeddings(const Ensemble& ensemble, const Matrix& inputs) {
  if (ensemble.members.empty()) throw Error(ErrorCode::EmptySampleSet, "empty ensemble");
  const std::size_t k_classes = ensemble.members.front().num_classes();
  const std::size_t samples = ensemble.size();
  EmbeddingSet set(inputs.cols(), k_classes, samples, EmbeddingMode::PosteriorSample);
  Matrix losses(samples, k_classes);
  std::vector<double> z(k_classes);
  for (std::size_t j = 0; j < inputs.cols(); ++j) {
    for (std::size_t i = 0; i < samples; ++i) {
      const auto& member = ensemble.members[i];
      member.logits_from_features(member.feature_map().apply(inputs.col(j)), z);
      for (std::size_t k = 0; k < k_classes; ++k) losses(i, k) = cross_entropy(z, k);
    }
    const Matrix g = build_sample_embedding(losses);
    for (std::size_t k = 0; k < k_classes; ++k) {
      const auto src = g.col(k);
      std::copy(src.begin(), src.end(), set.g(j, k).begin());
    }
  }
  return set;
}

double temperature_nll(const Matrix& logits, std::span<const std::size_t> labels, double t) {
  std::vector<double> z(logits.rows());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.cols(); ++i) {
    const auto col = logits.col(i);
    for (std::size_t k = 0; k < z.size(); ++k) z[k] = col[k] / t;
    total += cross_entropy(z, labels[i]);
  }
  return total / static_cast<double>(logits.cols());
}

CalibrationResult fit_temperature(const Matrix& logits, std::span<const std::size_t> labels) {
  if (logits.cols() == 0 || labels.empty())
    throw Error(ErrorCode::EmptyValidationSet, "temperature scaling needs validation data");
  if (labels.size() != logits.cols())
    throw Error(ErrorCode::DimensionMismatch, "one label per logit column expected");
  for (std::size_t y : labels)
    if (y >= logits.rows()) throw Error(ErrorCode::LabelOutOfRange, "validation label out of range");

  auto nll = [&](double t) { return temperature_nll(logits, labels, t); };
  CalibrationResult result;
  result.nll_before = nll(1.0);
  result.nll_after = result.nll_before;

  const double lo_value = nll(kMinTemperature);
  const double hi_value = nll(kMaxTemperature);
  const double flat = 1e-14 * (1.0 + std::abs(result.nll_before));
  if (std::abs(lo_value - result.nll_before) <= flat && std::abs(hi_value - result.nll_before) <= flat)
    return result;

  // The NLL is convex in 1/T, hence unimodal in T.
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = kMinTemperature, hi = kMaxTemperature;
  double x1 = hi - ratio * (hi - lo), x2 = lo + ratio * (hi - lo);
  double f1 = nll(x1), f2 = nll(x2);
  while (hi - lo > 1e-4) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - ratio * (hi - lo);
      f1 = nll(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + ratio * (hi - lo);
      f2 = nll(x2);
    }
  }
  const double t = 0.5 * (lo + hi);
  const double value = nll(t);
  if (value < result.nll_before) {
    result.temperature = t;
    result.nll_after = value;
  }
  return result;
}

LabelDistribution predictive_distribution(const Classifier& model, const Matrix& inputs,
                                          double temperature) {
  if (!(temperature > 0.0)) throw Error(ErrorCode::ConfigInvalid, "temperature must be > 0");
  LabelDistribution dist{predict_logits(model, inputs)};
  for (std::size_t j = 0; j < dist.probs.cols(); ++j) {
    auto col = dist.probs.col(j);
    for (double& z : col) z /= temperature;
    softmax_inplace(col);
  }
  return dist;
}

LabelDistribution predictive_distribution(const Ensemble& ensemble, const Matrix& inputs) {
  if (ensemble.members.empty()) throw Error(ErrorCode::UntrainedModel, "empty ensemble");
  LabelDistribution dist{Matrix(ensemble.members.front().num_classes(), inputs.cols())};
  const double weight = 1.0 / static_cast<double>(ensemble.size());
  for (const auto& member : ensemble.members) {
    const Matrix p = predict_proba(member, inputs);
    kernels::axpy(weight, p.storage(), std::span<double>(dist.probs.data(), p.storage().size()));
  }
  return dist;
}

}  // namespace sabal
