#include "sabal/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "sabal/error.hpp"

namespace sabal {

namespace {

struct StrategyName {
  Strategy strategy;
  const char* name;
};

constexpr StrategyName kStrategyNames[] = {
    {Strategy::OursGreedy, "ours_greedy"},
    {Strategy::OursIHT, "ours_iht"},
    {Strategy::Random, "random"},
    {Strategy::Entropy, "entropy"},
    {Strategy::TopVariance, "top_variance"},
    {Strategy::BiasOnlyGreedy, "bias_only_greedy"},
    {Strategy::BiasOnlyIHT, "bias_only_iht"},
};

// Top-b positions by descending key, ties to the smaller position.
std::vector<std::size_t> top_b(std::span<const double> key, std::size_t b) {
  std::vector<std::size_t> idx(key.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(b), idx.end(),
                    [&](std::size_t a, std::size_t c) {
                      return key[a] > key[c] || (key[a] == key[c] && a < c);
                    });
  idx.resize(b);
  return idx;
}

std::vector<std::size_t> solver_batch(const SolveResult& result, std::size_t b) {
  std::vector<std::size_t> out = result.selected;
  // Clamping can leave fewer than b positive weights; top up from the
  // size-b candidate set the solver worked with.
  for (std::size_t j : result.candidates) {
    if (out.size() >= b) break;
    if (std::find(out.begin(), out.end(), j) == out.end()) out.push_back(j);
  }
  return out;
}

void require_problem(const SelectionInputs& inputs, Strategy s) {
  if (inputs.problem == nullptr)
    throw Error(ErrorCode::ConfigInvalid,
                std::string(strategy_name(s)) + " needs an assembled problem");
  if (inputs.problem->n() != inputs.pool_size)
    throw Error(ErrorCode::DimensionMismatch, "problem size differs from the candidate pool");
}

}  // namespace

const char* strategy_name(Strategy s) noexcept {
  for (const auto& entry : kStrategyNames)
    if (entry.strategy == s) return entry.name;
  return "unknown";
}

std::optional<Strategy> parse_strategy(std::string_view name) {
  for (const auto& entry : kStrategyNames)
    if (name == entry.name) return entry.strategy;
  return std::nullopt;
}

const char* embedding_mode_name(EmbeddingMode mode) noexcept {
  return mode == EmbeddingMode::Gradient ? "gradient" : "posterior_sample";
}

std::optional<EmbeddingMode> parse_embedding_mode(std::string_view name) {
  if (name == "gradient") return EmbeddingMode::Gradient;
  if (name == "posterior_sample") return EmbeddingMode::PosteriorSample;
  return std::nullopt;
}

bool uses_solver(Strategy s) noexcept {
  return s == Strategy::OursGreedy || s == Strategy::OursIHT || s == Strategy::BiasOnlyGreedy ||
         s == Strategy::BiasOnlyIHT;
}

FeatureMap FeatureSpec::make(std::size_t input_dim) const {
  if (kind == FeatureKind::Identity) return FeatureMap::identity(input_dim);
  return FeatureMap::tanh_lift(input_dim, width, seed, scale);
}

void ALConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::ConfigInvalid, what); };
  if (seed_size < 1) fail("seed_size must be >= 1");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (rounds < 1) fail("rounds must be >= 1");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) fail("alpha must be finite and >= 0");
  if (!(beta >= 0.0) || !std::isfinite(beta)) fail("beta must be finite and >= 0");
  if (!(solver.tau > 0.0) || !std::isfinite(solver.tau)) fail("tau must be finite and > 0");
  if (solver.iht_iterations < 1) fail("iht_iterations must be >= 1");
  if (embedding_mode == EmbeddingMode::PosteriorSample && ensemble_size < 1)
    fail("ensemble_size must be >= 1");
  if (features.kind == FeatureKind::TanhLift && features.width < 1)
    fail("features.width must be >= 1");
  if (train.epochs < 1) fail("train.epochs must be >= 1");
  if (!(train.learning_rate > 0.0)) fail("train.learning_rate must be > 0");
  if (!(train.weight_decay >= 0.0)) fail("train.weight_decay must be >= 0");
}

std::vector<std::size_t> select_batch(Strategy strategy, const SelectionInputs& inputs,
                                      std::size_t b, std::mt19937_64& rng,
                                      const SolverOptions& options) {
  const std::size_t n = inputs.pool_size;
  if (b > n)
    throw Error(ErrorCode::BudgetExceedsPool,
                "batch of " + std::to_string(b) + " from " + std::to_string(n) + " candidates");

  switch (strategy) {
    case Strategy::Random: {
      // Partial Fisher-Yates.
      std::vector<std::size_t> idx(n);
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      for (std::size_t i = 0; i < b; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(idx[i], idx[pick(rng)]);
      }
      idx.resize(b);
      return idx;
    }
    case Strategy::Entropy: {
      if (inputs.predictive == nullptr || inputs.predictive->size() != n)
        throw Error(ErrorCode::ConfigInvalid, "entropy needs predictive probabilities");
      std::vector<double> h(n, 0.0);
      for (std::size_t j = 0; j < n; ++j)
        for (double p : inputs.predictive->probs.col(j))
          if (p > 0.0) h[j] -= p * std::log(p);
      return top_b(h, b);
    }
    case Strategy::TopVariance:
      require_problem(inputs, strategy);
      return top_b(inputs.problem->sigma2, b);
    case Strategy::OursGreedy:
    case Strategy::BiasOnlyGreedy:
    case Strategy::OursIHT:
    case Strategy::BiasOnlyIHT: {
      require_problem(inputs, strategy);
      SparseApproxProblem problem = *inputs.problem;
      problem.b = b;
      if (strategy == Strategy::BiasOnlyGreedy || strategy == Strategy::BiasOnlyIHT)
        problem.alpha = 0.0;
      const bool greedy = strategy == Strategy::OursGreedy || strategy == Strategy::BiasOnlyGreedy;
      const SolveResult result =
          greedy ? greedy_solve(problem, GreedyConfig{options.tau})
                 : iht_solve(problem, IHTConfig{options.iht_iterations, 0.0, options.prox});
      return solver_batch(result, b);
    }
  }
  throw Error(ErrorCode::ConfigInvalid, "unknown strategy");
}

double learning_curve_auc(std::span<const RoundRecord> records) {
  if (records.empty()) throw Error(ErrorCode::EmptyRecordList, "no rounds recorded");
  double total = 0.0;
  for (const auto& r : records) total += r.test_accuracy;
  return 100.0 * total / static_cast<double>(records.size());
}

ALRun run_loop(const SplitDataset& dataset, const ALConfig& config) {
  config.validate();
  const Dataset& pool = dataset.train;
  const std::size_t needed = config.seed_size + config.rounds * config.batch_size;
  if (pool.size() < needed)
    throw Error(ErrorCode::PoolExhausted,
                "pool of " + std::to_string(pool.size()) + " cannot supply " +
                    std::to_string(needed) + " labels");
  const bool needs_validation =
      config.strategy != Strategy::Random && config.embedding_mode == EmbeddingMode::Gradient;
  if (needs_validation && dataset.validation.size() == 0)
    throw Error(ErrorCode::EmptyValidationSet, "temperature scaling needs validation data");

  std::mt19937_64 rng(config.rng_seed);
  const FeatureMap feature_map = config.features.make(pool.dim());
  TrainConfig train_config = config.train;
  train_config.seed = config.train.seed + config.rng_seed;

  ALState state;
  {
    std::vector<std::size_t> all(pool.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    SelectionInputs inputs;
    inputs.pool_size = all.size();
    const auto seed_batch = select_batch(Strategy::Random, inputs, config.seed_size, rng);
    std::vector<bool> taken(pool.size(), false);
    for (std::size_t i : seed_batch) taken[i] = true;
    for (std::size_t i = 0; i < pool.size(); ++i)
      (taken[i] ? state.labeled : state.unlabeled).push_back(i);
  }

  ALRun run;
  Classifier model = train(pool.subset(state.labeled), feature_map, train_config);
  if (config.include_seed_row) {
    RoundRecord r;
    r.round = 0;
    r.labeled_count = state.labeled.size();
    r.test_accuracy = accuracy(model, dataset.test);
    r.selected_indices = state.labeled;
    run.records.push_back(std::move(r));
  }

  using Clock = std::chrono::steady_clock;
  for (std::size_t t = 1; t <= config.rounds; ++t) {
    state.round = t;
    const Dataset candidates = pool.subset(state.unlabeled);

    // Ensemble training is model fitting, so it stays outside the timed section.
    Ensemble ensemble;
    const bool posterior = config.embedding_mode == EmbeddingMode::PosteriorSample;
    if (posterior && config.strategy != Strategy::Random) {
      TrainConfig ensemble_config = train_config;
      ensemble_config.seed = train_config.seed + 1000 * t;
      ensemble = train_ensemble(pool.subset(state.labeled), feature_map, ensemble_config,
                                config.ensemble_size);
    }

    const auto start = Clock::now();
    std::vector<std::size_t> positions;
    SelectionInputs inputs;
    inputs.pool_size = candidates.size();
    if (config.strategy == Strategy::Random) {
      positions = select_batch(config.strategy, inputs, config.batch_size, rng, config.solver);
    } else {
      LabelDistribution dist;
      EmbeddingSet embeddings;
      if (posterior) {
        dist = predictive_distribution(ensemble, candidates.features);
        if (config.strategy != Strategy::Entropy)
          embeddings = sample_embeddings(ensemble, candidates.features);
      } else {
        const auto calibration = fit_temperature(predict_logits(model, dataset.validation.features),
                                                 dataset.validation.labels);
        dist = predictive_distribution(model, candidates.features, calibration.temperature);
        if (config.strategy != Strategy::Entropy)
          embeddings = gradient_embeddings(model, candidates.features);
      }
      SparseApproxProblem problem;
      if (config.strategy == Strategy::Entropy) {
        inputs.predictive = &dist;
      } else {
        problem = assemble_problem(embeddings, dist, config.alpha, config.beta, config.batch_size);
        inputs.problem = &problem;
      }
      positions = select_batch(config.strategy, inputs, config.batch_size, rng, config.solver);
    }
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();

    RoundRecord record;
    record.round = t;
    record.acquisition_seconds = seconds;
    std::vector<bool> chosen(state.unlabeled.size(), false);
    for (std::size_t p : positions) {
      chosen[p] = true;
      record.selected_indices.push_back(state.unlabeled[p]);
    }
    std::vector<std::size_t> remaining;
    remaining.reserve(state.unlabeled.size() - positions.size());
    for (std::size_t p = 0; p < state.unlabeled.size(); ++p)
      if (!chosen[p]) remaining.push_back(state.unlabeled[p]);
    state.unlabeled = std::move(remaining);
    state.labeled.insert(state.labeled.end(), record.selected_indices.begin(),
                         record.selected_indices.end());
    std::sort(state.labeled.begin(), state.labeled.end());

    // Reinitialize and retrain on the enlarged labeled set.
    model = train(pool.subset(state.labeled), feature_map, train_config);
    record.labeled_count = state.labeled.size();
    record.test_accuracy = accuracy(model, dataset.test);
    run.records.push_back(std::move(record));
  }

  run.auc = learning_curve_auc(run.records);
  run.final_state = std::move(state);
  return run;
}

// ---------------------------------------------------------------------------

void BlobSpec::validate() const {
  if (classes < 2) throw Error(ErrorCode::ConfigInvalid, "blobs need at least 2 classes");
  if (points < classes) throw Error(ErrorCode::ConfigInvalid, "fewer points than classes");
  if (!(radius >= 0.0) || !std::isfinite(radius))
    throw Error(ErrorCode::ConfigInvalid, "radius must be finite and >= 0");
  if (!(noise >= 0.0) || !std::isfinite(noise))
    throw Error(ErrorCode::ConfigInvalid, "noise must be finite and >= 0");
}

Dataset generate_blobs(const BlobSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);
  const double phase = phase_dist(rng);
  std::normal_distribution<double> normal(0.0, 1.0);

  Dataset data;
  data.num_classes = spec.classes;
  data.features = Matrix(2, spec.points);
  data.labels.reserve(spec.points);
  std::size_t i = 0;
  for (std::size_t k = 0; k < spec.classes; ++k) {
    const std::size_t count = spec.points / spec.classes + (k < spec.points % spec.classes ? 1 : 0);
    const double angle = phase + 2.0 * std::numbers::pi * static_cast<double>(k) /
                                     static_cast<double>(spec.classes);
    const double cx = spec.radius * std::cos(angle);
    const double cy = spec.radius * std::sin(angle);
    for (std::size_t c = 0; c < count; ++c, ++i) {
      const double dx = normal(rng);
      const double dy = normal(rng);
      data.features(0, i) = cx + spec.noise * dx;
      data.features(1, i) = cy + spec.noise * dy;
      data.labels.push_back(k);
    }
  }
  return data;
}

SplitDataset split_dataset(const Dataset& data, std::uint64_t seed) {
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(order[i - 1], order[pick(rng)]);
  }
  const std::size_t n_train = data.size() * 7 / 10;
  const std::size_t n_val = data.size() / 10;
  const std::span<const std::size_t> all(order);
  SplitDataset split;
  split.train = data.subset(all.subspan(0, n_train));
  split.validation = data.subset(all.subspan(n_train, n_val));
  split.test = data.subset(all.subspan(n_train + n_val));
  return split;
}

SplitDataset make_blobs(const BlobSpec& spec) { return split_dataset(generate_blobs(spec), spec.seed); }

}  // namespace sabal
