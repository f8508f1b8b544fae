#pragma once

// Multinomial logistic regression over bag-of-words counts, trained with the
// class-uniform batch sampler. A desk-scale stand-in for finetuning a
// pretrained encoder on the mined dataset.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "patternmine/dataset.hpp"

namespace patternmine {

/// Sparse feature vector: (vocabulary index, value) pairs sorted by index.
using SparseVector = std::vector<std::pair<std::uint32_t, double>>;

struct LinearModel {
  std::vector<std::string> labels;
  std::vector<std::string> vocab;  // index -> token
  std::unordered_map<std::string, std::uint32_t> index;
  std::vector<double> weights;  // row-major [labels.size() x vocab.size()]
  std::vector<double> bias;
  std::uint64_t seed = 0;
  bool pair = false;

  std::size_t num_classes() const { return labels.size(); }
  std::size_t vocab_size() const { return vocab.size(); }
  double& weight(std::size_t c, std::size_t j) { return weights[c * vocab.size() + j]; }
  double weight(std::size_t c, std::size_t j) const { return weights[c * vocab.size() + j]; }

  /// Rebuilds `index` from `vocab`.
  void reindex();

  /// Count features of a token list; out-of-vocabulary tokens are ignored.
  SparseVector featurize(std::span<const std::string> tokens) const;
  std::vector<double> logits(const SparseVector& x) const;
  std::vector<double> probabilities(const SparseVector& x) const;
  std::size_t predict(const SparseVector& x) const;
};

/// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> logits);

struct TrainOptions {
  std::size_t steps = 5000;
  double learning_rate = 0.1;
  double l2 = 1e-4;
  std::size_t min_frequency = 2;
};

struct TrainResult {
  LinearModel model;
  std::vector<double> batch_loss;  // loss of each step's batch before its update
};

/// Mean cross-entropy of the batch plus (l2 / 2) * |W|^2 (bias unpenalised).
double batch_loss(const LinearModel& model, std::span<const SparseVector> xs,
                  std::span<const std::size_t> ys, double l2);

struct Gradient {
  std::vector<double> weights;  // same layout as LinearModel::weights
  std::vector<double> bias;
};

/// Analytic gradient of batch_loss with respect to weights and bias.
Gradient batch_gradient(const LinearModel& model, std::span<const SparseVector> xs,
                        std::span<const std::size_t> ys, double l2);

/// Builds the vocabulary (tokens seen at least min_frequency times in the
/// training data, sorted), initialises all parameters to zero and runs
/// `steps` mini-batch gradient steps on batches from BatchSampler.
/// Throws Error(DivergenceDetected) if the loss becomes non-finite and
/// Error(DegenerateVocabulary) if no token survives the frequency cut.
TrainResult train(const BalancedDataset& ds, const SamplerSpec& sampler,
                  const TrainOptions& options = {});

struct LabeledExample {
  std::string text;  // single-input tasks
  std::string hyp;   // pair tasks
  std::string prem;
  bool pair = false;
  std::string label;
};

struct EvalResult {
  double accuracy = 0.0;
  std::size_t n_correct = 0;
  std::size_t n_total = 0;
  std::map<std::string, double> per_class_accuracy;  // over examples whose gold label is the key
};

/// Argmax accuracy. Throws Error(EmptyInput) for an empty set and
/// Error(UnknownLabel) for a gold label the model does not know.
EvalResult evaluate(const LinearModel& model, std::span<const LabeledExample> labeled);

std::vector<std::string> labeled_tokens(const LabeledExample& ex);

void save_model(const LinearModel& model, const std::filesystem::path& path);
LinearModel load_model(const std::filesystem::path& path);

/// JSONL of {"text": ..., "label": ...} or {"hyp": ..., "prem": ..., "label": ...}.
std::vector<LabeledExample> read_labeled(const std::filesystem::path& path);
void write_labeled(const std::filesystem::path& path, std::span<const LabeledExample> labeled);

}  // namespace patternmine
