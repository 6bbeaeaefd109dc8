#pragma once

// The batch active learning loop: random seed batch, then rounds of
// {estimate label distributions, embed, assemble, select, reveal labels,
// retrain from scratch, evaluate}. Labels of queried points come from the
// held-out ground truth.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sabal/embeddings.hpp"
#include "sabal/models.hpp"
#include "sabal/solvers.hpp"

namespace sabal {

enum class Strategy {
  OursGreedy,
  OursIHT,
  Random,
  Entropy,
  TopVariance,
  BiasOnlyGreedy,
  BiasOnlyIHT,
};

const char* strategy_name(Strategy s) noexcept;
std::optional<Strategy> parse_strategy(std::string_view name);
const char* embedding_mode_name(EmbeddingMode mode) noexcept;
std::optional<EmbeddingMode> parse_embedding_mode(std::string_view name);

/// True for strategies that solve the sparse approximation problem.
bool uses_solver(Strategy s) noexcept;

struct FeatureSpec {
  FeatureKind kind = FeatureKind::Identity;
  std::size_t width = 0;  // tanh lift only
  std::uint64_t seed = 0;
  double scale = 1.0;

  FeatureMap make(std::size_t input_dim) const;
};

struct SolverOptions {
  double tau = 1.0;
  std::size_t iht_iterations = 100;
  ProxRule prox = ProxRule::Corrected;
};

struct ALConfig {
  Strategy strategy = Strategy::Random;
  EmbeddingMode embedding_mode = EmbeddingMode::Gradient;
  std::size_t seed_size = 1;
  std::size_t batch_size = 1;
  std::size_t rounds = 1;
  double alpha = 1.0;
  double beta = 0.0;
  SolverOptions solver;
  std::size_t ensemble_size = 5;
  FeatureSpec features;
  TrainConfig train;
  std::uint64_t rng_seed = 0;
  bool include_seed_row = false;

  /// Throws ConfigInvalid.
  void validate() const;
};

struct SplitDataset {
  Dataset train;  // the pool; labels are revealed only when queried
  Dataset validation;
  Dataset test;
};

struct ALState {
  std::vector<std::size_t> labeled;    // increasing order
  std::vector<std::size_t> unlabeled;  // increasing order
  std::size_t round = 0;
};

struct RoundRecord {
  std::size_t round = 0;
  std::size_t labeled_count = 0;
  double test_accuracy = 0.0;
  double acquisition_seconds = 0.0;
  std::vector<std::size_t> selected_indices;  // pool indices
};

struct ALRun {
  std::vector<RoundRecord> records;
  double auc = 0.0;
  ALState final_state;
};

/// What a strategy may look at when choosing among the unlabeled candidates.
struct SelectionInputs {
  std::size_t pool_size = 0;                      // number of candidates
  const SparseApproxProblem* problem = nullptr;   // solver strategies, TopVariance
  const LabelDistribution* predictive = nullptr;  // Entropy
};

/// Returns exactly b distinct candidate positions in [0, pool_size).
/// Throws BudgetExceedsPool if b > pool_size and ConfigInvalid if a required
/// input is missing.
std::vector<std::size_t> select_batch(Strategy strategy, const SelectionInputs& inputs,
                                      std::size_t b, std::mt19937_64& rng,
                                      const SolverOptions& options = {});

ALRun run_loop(const SplitDataset& dataset, const ALConfig& config);

/// 100 x mean test accuracy over the records. Throws EmptyRecordList.
double learning_curve_auc(std::span<const RoundRecord> records);

struct BlobSpec {
  std::size_t classes = 4;
  std::size_t points = 2500;  // total, split evenly across classes
  double radius = 6.0;
  double noise = 1.0;
  std::uint64_t seed = 0;

  /// Throws ConfigInvalid.
  void validate() const;
};

/// Isotropic 2-D Gaussian clusters, class-major order. Centers sit on a circle
/// at evenly spaced angles with a seeded phase.
Dataset generate_blobs(const BlobSpec& spec);
/// Seeded shuffle, then 70/10/20 train/validation/test.
SplitDataset split_dataset(const Dataset& data, std::uint64_t seed);
SplitDataset make_blobs(const BlobSpec& spec);

}  // namespace sabal
