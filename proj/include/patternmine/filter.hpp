#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "patternmine/dataset.hpp"
#include "patternmine/miner.hpp"

namespace patternmine {

/// A scorer's verdict on one mined example. One JSONL line per record:
///
///   {"example_ref":{"shard_id":0,"doc_index":12,"byte_offset":40},
///    "predicted_label":"positive","confidence":0.91,
///    "per_class_probs":{"negative":0.09,"positive":0.91}}
///
/// per_class_probs is optional.
struct ScoreRecord {
  ExampleRef example_ref;
  std::string predicted_label;
  double confidence = 0.0;
  std::optional<std::map<std::string, double>> per_class_probs;
};

inline constexpr double kProbabilitySumTolerance = 1e-6;

/// confidence in [0, 1]; if per_class_probs is present it sums to 1 within
/// kProbabilitySumTolerance and its maximum is (predicted_label, confidence).
/// Throws Error(InvalidScore).
void validate(const ScoreRecord& record);

struct FilterOptions {
  double fraction = 0.10;
  // Take floor(fraction * mismatches) within each mined class instead of globally.
  bool per_class = false;
};

struct FilterReport {
  std::size_t n_examples = 0;
  std::size_t n_mismatches = 0;
  std::size_t n_removed = 0;
  double removal_fraction = 0.0;  // the configured fraction
  bool per_class = false;
  double agreement_pct = 100.0;
  // Lowest confidence among removed examples; unset when nothing was removed.
  std::optional<double> confidence_threshold_used;
};

struct FilterResult {
  std::vector<MinedExample> kept;     // input order preserved
  std::vector<MinedExample> removed;  // input order preserved
  FilterReport report;
};

/// Removes the floor(fraction * M) most confident of the M examples whose
/// predicted label differs from the mined label. Ties in confidence go to
/// the smaller example_ref. Scores for refs not among `examples` are ignored.
/// Throws Error(MissingScore), Error(DuplicateScore), Error(InvalidArgument)
/// for a fraction outside [0, 1].
FilterResult filter_mismatches(std::span<const MinedExample> examples,
                               std::span<const ScoreRecord> scores,
                               const FilterOptions& options = {});

/// 100 * |mined label == predicted label| / |examples|.
/// Throws Error(EmptyInput) for no examples, otherwise as filter_mismatches.
double label_agreement(std::span<const MinedExample> examples, std::span<const ScoreRecord> scores);

struct NaiveBayesOptions {
  std::size_t folds = 5;
  double alpha = 1.0;  // Laplace smoothing
};

/// Cross-fitted multinomial naive Bayes over lowercased unigrams: each
/// example is scored by a model fitted on the other folds. Records come back
/// in the dataset's example order. Throws Error(InvalidArgument) for fewer
/// than two classes, Error(EmptyClass), Error(DegenerateVocabulary).
std::vector<ScoreRecord> builtin_score(const BalancedDataset& ds, const NaiveBayesOptions& options = {});

/// Scores from known labels (confidence 1): the oracle filter used to bound
/// what a perfect scorer would achieve on synthetic data. `true_labels` is
/// parallel to `examples`.
std::vector<ScoreRecord> oracle_scores(std::span<const MinedExample> examples,
                                       std::span<const std::string> true_labels,
                                       std::span<const std::string> labels);

void write_scores(const std::filesystem::path& path, std::span<const ScoreRecord> scores);

/// Every line is validated; malformed lines raise Error(InvalidScore) with
/// the line number.
std::vector<ScoreRecord> read_scores(const std::filesystem::path& path);

}  // namespace patternmine
