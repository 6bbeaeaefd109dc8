#pragma once

// Per-candidate embeddings g_j(y) and assembly of the sparse approximation
// problem from them.
//
// Two realizations of g_j(y):
//   posterior samples: centered losses of y under m posterior draws, scaled by 1/sqrt(m)
//   gradient:          last-layer cross-entropy gradient (p - e_y) (x) h(x_j)
//
// With a label distribution P(x_j) over K classes the problem data are
//   gbar_j = sum_k P_jk g_j(k)
//   v      = (1/n) sum_j gbar_j
//   Phi    = (1/b) [gbar_1 ... gbar_n]
//   sigma_j = (1/n) sum_k P_jk ||g_j(k) - gbar_j||,  sigma2_j = sigma_j^2

#include <cstddef>
#include <span>
#include <vector>

#include "sabal/matrix.hpp"
#include "sabal/models.hpp"
#include "sabal/problem.hpp"

namespace sabal {

/// probs is K x n: column j is the estimated label distribution of candidate j.
struct LabelDistribution {
  Matrix probs;

  std::size_t num_classes() const noexcept { return probs.rows(); }
  std::size_t size() const noexcept { return probs.cols(); }
  /// Throws InvalidDistribution unless every column is nonnegative and sums
  /// to 1 within 1e-9.
  void validate() const;
};

enum class EmbeddingMode { PosteriorSample, Gradient };

class EmbeddingSet {
 public:
  EmbeddingSet() = default;
  EmbeddingSet(std::size_t n, std::size_t num_classes, std::size_t dim, EmbeddingMode mode)
      : n_(n), k_(num_classes), m_(dim), mode_(mode), data_(n * num_classes * dim, 0.0) {}

  std::size_t size() const noexcept { return n_; }
  std::size_t num_classes() const noexcept { return k_; }
  std::size_t dim() const noexcept { return m_; }
  EmbeddingMode mode() const noexcept { return mode_; }

  std::span<double> g(std::size_t j, std::size_t k) noexcept {
    return {data_.data() + (j * k_ + k) * m_, m_};
  }
  std::span<const double> g(std::size_t j, std::size_t k) const noexcept {
    return {data_.data() + (j * k_ + k) * m_, m_};
  }
  const std::vector<double>& storage() const noexcept { return data_; }

 private:
  std::size_t n_ = 0;
  std::size_t k_ = 0;
  std::size_t m_ = 0;
  EmbeddingMode mode_ = EmbeddingMode::Gradient;
  std::vector<double> data_;
};

/// losses is S x K with losses(i, k) = loss of label k under posterior draw i.
/// Returns an S x K matrix whose column k is g(k). Throws EmptySampleSet if S = 0.
Matrix build_sample_embedding(const Matrix& losses);

/// vec((p - e_label) (x) h), class-major (entry k*d + i). Throws
/// InvalidDistribution if probs is not on the simplex (1e-9).
std::vector<double> build_gradient_embedding(std::span<const double> probs,
                                             std::span<const double> features, std::size_t label);

SparseApproxProblem assemble_problem(const EmbeddingSet& embeddings, const LabelDistribution& dist,
                                     double alpha, double beta, std::size_t b);

/// Gradient embeddings of every column of `inputs` at the model's current
/// (uncalibrated) probabilities.
EmbeddingSet gradient_embeddings(const Classifier& model, const Matrix& inputs);
/// Posterior-sample embeddings with ensemble members as the draws.
EmbeddingSet sample_embeddings(const Ensemble& ensemble, const Matrix& inputs);

struct CalibrationResult {
  double temperature = 1.0;
  double nll_before = 0.0;  // at T = 1
  double nll_after = 0.0;
};

inline constexpr double kMinTemperature = 0.05;
inline constexpr double kMaxTemperature = 10.0;

/// Mean NLL of softmax(logits / T). logits is K x N.
double temperature_nll(const Matrix& logits, std::span<const std::size_t> labels, double t);

/// Golden-section search for T in [0.05, 10] (resolution 1e-4) minimizing the
/// validation NLL. Returns T = 1 if the NLL does not depend on T, and never a
/// T whose NLL exceeds the T = 1 value.
CalibrationResult fit_temperature(const Matrix& logits, std::span<const std::size_t> labels);

LabelDistribution predictive_distribution(const Classifier& model, const Matrix& inputs,
                                          double temperature = 1.0);
/// Uniform average of member softmax outputs (no temperature).
LabelDistribution predictive_distribution(const Ensemble& ensemble, const Matrix& inputs);

}  // namespace sabal
