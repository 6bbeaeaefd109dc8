#pragma once

// Multinomial logistic regression over an optional fixed random tanh lift,
// trained by full-batch gradient descent. Supplies what the acquisition step
// needs: class probabilities, penultimate features and per-sample losses.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sabal/matrix.hpp"

namespace sabal {

/// Labeled samples. features is D x N: column i is sample i.
struct Dataset {
  Matrix features;
  std::vector<std::size_t> labels;
  std::size_t num_classes = 0;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dim() const noexcept { return features.rows(); }
  /// Copies the samples at `indices`, in that order.
  Dataset subset(std::span<const std::size_t> indices) const;
};

enum class FeatureKind { Identity, TanhLift };

/// phi(x) = x, or phi(x) = tanh(A x + c) with A, c drawn once from `seed`.
class FeatureMap {
 public:
  FeatureMap() = default;
  static FeatureMap identity(std::size_t input_dim);
  /// A ~ N(0, scale^2), c ~ U[-pi, pi].
  static FeatureMap tanh_lift(std::size_t input_dim, std::size_t width, std::uint64_t seed,
                              double scale = 1.0);

  FeatureKind kind() const noexcept { return kind_; }
  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t output_dim() const noexcept { return output_dim_; }
  std::uint64_t seed() const noexcept { return seed_; }
  double scale() const noexcept { return scale_; }

  void apply(std::span<const double> x, std::span<double> out) const;
  std::vector<double> apply(std::span<const double> x) const;
  /// Column-wise apply: D x N -> d x N.
  Matrix apply_all(const Matrix& inputs) const;

  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;

 private:
  FeatureKind kind_ = FeatureKind::Identity;
  std::size_t input_dim_ = 0;
  std::size_t output_dim_ = 0;
  std::uint64_t seed_ = 0;
  double scale_ = 1.0;
  Matrix projection_;  // input_dim x width; column i maps to output i
  std::vector<double> offset_;
};

struct TrainConfig {
  std::size_t epochs = 200;
  double learning_rate = 0.1;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;
};

class Classifier {
 public:
  Classifier() = default;  // untrained
  /// weights is d x K (column k holds class k's weights).
  Classifier(FeatureMap feature_map, Matrix weights, std::vector<double> bias);

  bool trained() const noexcept { return trained_; }
  std::size_t num_classes() const noexcept { return weights_.cols(); }
  std::size_t feature_dim() const noexcept { return weights_.rows(); }
  const FeatureMap& feature_map() const noexcept { return feature_map_; }
  const Matrix& weights() const noexcept { return weights_; }
  const std::vector<double>& bias() const noexcept { return bias_; }

  /// Logits for already-lifted features h.
  void logits_from_features(std::span<const double> h, std::span<double> out) const;

  friend bool operator==(const Classifier&, const Classifier&) = default;

 private:
  FeatureMap feature_map_;
  Matrix weights_;
  std::vector<double> bias_;
  bool trained_ = false;
};

/// Minimizes mean cross-entropy + weight_decay * ||W||^2 for exactly
/// config.epochs full-batch steps from a seeded U[-0.01, 0.01] start.
/// loss_history, when given, receives the objective at the start of each epoch.
Classifier train(const Dataset& data, const FeatureMap& feature_map, const TrainConfig& config,
                 std::vector<double>* loss_history = nullptr);

/// K x N logits for D x N inputs.
Matrix predict_logits(const Classifier& model, const Matrix& inputs);
/// K x N softmax probabilities.
Matrix predict_proba(const Classifier& model, const Matrix& inputs);

std::vector<double> penultimate_features(const Classifier& model, std::span<const double> input);

/// Fraction of correctly classified samples.
double accuracy(const Classifier& model, const Dataset& data);

struct Ensemble {
  std::vector<Classifier> members;
  std::vector<std::uint64_t> seeds;

  std::size_t size() const noexcept { return members.size(); }
};

/// Member i is trained on a bootstrap resample (with replacement, same size)
/// drawn with seed config.seed + i, and initialized with that seed too.
Ensemble train_ensemble(const Dataset& data, const FeatureMap& feature_map,
                        const TrainConfig& config, std::size_t members);

/// Cross-entropy of each member on (input, label).
std::vector<double> per_sample_losses(const Ensemble& ensemble, std::span<const double> input,
                                      std::size_t label);

// Numerics shared with the embeddings module.
void softmax_inplace(std::span<double> z);
/// -log softmax(z)[label], computed stably.
double cross_entropy(std::span<const double> logits, std::size_t label);

}  // namespace sabal
