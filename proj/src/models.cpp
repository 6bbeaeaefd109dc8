#include "sabal/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "sabal/error.hpp"
#include "sabal/kernels.hpp"

namespace sabal {

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.num_classes = num_classes;
  out.features = Matrix(dim(), indices.size());
  out.labels.reserve(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto src = features.col(indices[i]);
    std::copy(src.begin(), src.end(), out.features.col(i).begin());
    out.labels.push_back(labels[indices[i]]);
  }
  return out;
}

// ---------------------------------------------------------------------------

FeatureMap FeatureMap::identity(std::size_t input_dim) {
  FeatureMap f;
  f.kind_ = FeatureKind::Identity;
  f.input_dim_ = input_dim;
  f.output_dim_ = input_dim;
  return f;
}

FeatureMap FeatureMap::tanh_lift(std::size_t input_dim, std::size_t width, std::uint64_t seed,
                                 double scale) {
  if (width == 0) throw Error(ErrorCode::ConfigInvalid, "tanh lift width must be >= 1");
  FeatureMap f;
  f.kind_ = FeatureKind::TanhLift;
  f.input_dim_ = input_dim;
  f.output_dim_ = width;
  f.seed_ = seed;
  f.scale_ = scale;
  f.projection_ = Matrix(input_dim, width);
  f.offset_.resize(width);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  std::uniform_real_distribution<double> phase(-std::numbers::pi, std::numbers::pi);
  for (std::size_t i = 0; i < width; ++i) {
    for (std::size_t r = 0; r < input_dim; ++r) f.projection_(r, i) = normal(rng);
    f.offset_[i] = phase(rng);
  }
  return f;
}

void FeatureMap::apply(std::span<const double> x, std::span<double> out) const {
  if (x.size() != input_dim_ || out.size() != output_dim_)
    throw Error(ErrorCode::DimensionMismatch, "feature map input/output size");
  if (kind_ == FeatureKind::Identity) {
    std::copy(x.begin(), x.end(), out.begin());
    return;
  }
  kernels::gemv_t(projection_, x, out);
  for (std::size_t i = 0; i < output_dim_; ++i) out[i] = std::tanh(out[i] + offset_[i]);
}

std::vector<double> FeatureMap::apply(std::span<const double> x) const {
  std::vector<double> out(output_dim_);
  apply(x, out);
  return out;
}

Matrix FeatureMap::apply_all(const Matrix& inputs) const {
  Matrix out(output_dim_, inputs.cols());
  for (std::size_t i = 0; i < inputs.cols(); ++i) apply(inputs.col(i), out.col(i));
  return out;
}

// ---------------------------------------------------------------------------

Classifier::Classifier(FeatureMap feature_map, Matrix weights, std::vector<double> bias)
    : feature_map_(std::move(feature_map)),
      weights_(std::move(weights)),
      bias_(std::move(bias)),
      trained_(true) {
  if (weights_.rows() != feature_map_.output_dim() || bias_.size() != weights_.cols())
    throw Error(ErrorCode::DimensionMismatch, "classifier parameter shapes");
}

void Classifier::logits_from_features(std::span<const double> h, std::span<double> out) const {
  if (!trained_) throw Error(ErrorCode::UntrainedModel, "classifier has not been trained");
  kernels::gemv_t(weights_, h, out);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += bias_[k];
}

void softmax_inplace(std::span<double> z) {
  const double mx = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (double& x : z) {
    x = std::exp(x - mx);
    total += x;
  }
  for (double& x : z) x /= total;
}

double cross_entropy(std::span<const double> logits, std::size_t label) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double x : logits) total += std::exp(x - mx);
  return mx + std::log(total) - logits[label];
}

Classifier train(const Dataset& data, const FeatureMap& feature_map, const TrainConfig& config,
                 std::vector<double>* loss_history) {
  if (data.size() == 0) throw Error(ErrorCode::EmptyTrainingSet, "no labeled examples");
  if (config.epochs == 0) throw Error(ErrorCode::ConfigInvalid, "epochs must be >= 1");
  if (!(config.learning_rate > 0.0) || !(config.weight_decay >= 0.0))
    throw Error(ErrorCode::ConfigInvalid, "learning rate must be > 0, weight decay >= 0");
  if (data.dim() != feature_map.input_dim())
    throw Error(ErrorCode::DimensionMismatch, "dataset dimension does not match feature map");
  const std::size_t k_classes = data.num_classes;
  for (std::size_t y : data.labels)
    if (y >= k_classes)
      throw Error(ErrorCode::LabelOutOfRange,
                  "label " + std::to_string(y) + " with " + std::to_string(k_classes) + " classes");

  const Matrix h = feature_map.apply_all(data.features);
  const std::size_t d = h.rows();
  const std::size_t n = data.size();
  const double inv_n = 1.0 / static_cast<double>(n);

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> init(-0.01, 0.01);
  Matrix w(d, k_classes);
  for (std::size_t k = 0; k < k_classes; ++k)
    for (std::size_t r = 0; r < d; ++r) w(r, k) = init(rng);
  std::vector<double> bias(k_classes);
  for (double& b : bias) b = init(rng);

  Matrix grad_w(d, k_classes);
  std::vector<double> grad_b(k_classes);
  std::vector<double> z(k_classes);
  if (loss_history) loss_history->clear();

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::fill(grad_w.data(), grad_w.data() + d * k_classes, 0.0);
    std::fill(grad_b.begin(), grad_b.end(), 0.0);
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto hi = h.col(i);
      kernels::gemv_t(w, hi, z);
      for (std::size_t k = 0; k < k_classes; ++k) z[k] += bias[k];
      loss += cross_entropy(z, data.labels[i]);
      softmax_inplace(z);
      z[data.labels[i]] -= 1.0;
      for (std::size_t k = 0; k < k_classes; ++k) {
        kernels::axpy(z[k], hi, grad_w.col(k));
        grad_b[k] += z[k];
      }
    }
    const double decay = config.weight_decay * kernels::squared_norm(w.storage());
    if (loss_history) loss_history->push_back(loss * inv_n + decay);

    for (std::size_t k = 0; k < k_classes; ++k) {
      auto wk = w.col(k);
      const auto gk = grad_w.col(k);
      for (std::size_t r = 0; r < d; ++r)
        wk[r] -= config.learning_rate * (gk[r] * inv_n + 2.0 * config.weight_decay * wk[r]);
      bias[k] -= config.learning_rate * grad_b[k] * inv_n;
    }
  }
  return Classifier(feature_map, std::move(w), std::move(bias));
}

Matrix predict_logits(const Classifier& model, const Matrix& inputs) {
  if (!model.trained()) throw Error(ErrorCode::UntrainedModel, "classifier has not been trained");
  Matrix out(model.num_classes(), inputs.cols());
  std::vector<double> h(model.feature_dim());
  for (std::size_t i = 0; i < inputs.cols(); ++i) {
    model.feature_map().apply(inputs.col(i), h);
    model.logits_from_features(h, out.col(i));
  }
  return out;
}

Matrix predict_proba(const Classifier& model, const Matrix& inputs) {
  Matrix out = predict_logits(model, inputs);
  for (std::size_t i = 0; i < out.cols(); ++i) softmax_inplace(out.col(i));
  return out;
}

std::vector<double> penultimate_features(const Classifier& model, std::span<const double> input) {
  return model.feature_map().apply(input);
}

double accuracy(const Classifier& model, const Dataset& data) {
  if (data.size() == 0) return 0.0;
  const Matrix logits = predict_logits(model, data.features);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto col = logits.col(i);
    const auto best = static_cast<std::size_t>(std::max_element(col.begin(), col.end()) - col.begin());
    if (best == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

Ensemble train_ensemble(const Dataset& data, const FeatureMap& feature_map,
                        const TrainConfig& config, std::size_t members) {
  if (members == 0) throw Error(ErrorCode::ConfigInvalid, "ensemble needs at least one member");
  if (data.size() == 0) throw Error(ErrorCode::EmptyTrainingSet, "no labeled examples");
  Ensemble ensemble;
  for (std::size_t e = 0; e < members; ++e) {
    const std::uint64_t seed = config.seed + e;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
    std::vector<std::size_t> resample(data.size());
    for (auto& i : resample) i = pick(rng);
    TrainConfig member_config = config;
    member_config.seed = seed;
    ensemble.members.push_back(train(data.subset(resample), feature_map, member_config));
    ensemble.seeds.push_back(seed);
  }
  return ensemble;
}

std::vector<double> per_sample_losses(const Ensemble& ensemble, std::span<const double> input,
                                      std::size_t label) {
  if (ensemble.members.empty()) throw Error(ErrorCode::UntrainedModel, "empty ensemble");
  std::vector<double> out;
  out.reserve(ensemble.size());
  std::vector<double> z;
  for (const auto& member : ensemble.members) {
    if (!member.trained()) throw Error(ErrorCode::UntrainedModel, "untrained ensemble member");
    if (label >= member.num_classes())
      throw Error(ErrorCode::LabelOutOfRange, "label outside the member's classes");
    z.resize(member.num_classes());
    member.logits_from_features(member.feature_map().apply(input), z);
    out.push_back(cross_entropy(z, label));
  }
  return out;
}

}  // namespace sabal
