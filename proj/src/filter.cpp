#include "patternmine/filter.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include "patternmine/error.hpp"
#include "patternmine/json_io.hpp"
#include "patternmine/text_features.hpp"
#include "patternmine/trainer.hpp"

namespace patternmine {

using nlohmann::json;

namespace {

std::string ref_string(const ExampleRef& r) {
  return "(" + std::to_string(r.shard_id) + ", " + std::to_string(r.doc_index) + ", " +
         std::to_string(r.byte_offset) + ")";
}

// For each example, the score assigned to it.
std::vector<const ScoreRecord*> align_scores(std::span<const MinedExample> examples,
                                             std::span<const ScoreRecord> scores) {
  std::vector<const ScoreRecord*> by_ref(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) by_ref[i] = &scores[i];
  std::sort(by_ref.begin(), by_ref.end(), [](const ScoreRecord* a, const ScoreRecord* b) {
    return a->example_ref < b->example_ref;
  });
  for (std::size_t i = 1; i < by_ref.size(); ++i) {
    if (by_ref[i]->example_ref == by_ref[i - 1]->example_ref) {
      throw Error(ErrorCode::DuplicateScore,
                  "more than one score for example " + ref_string(by_ref[i]->example_ref));
    }
  }
  std::vector<const ScoreRecord*> aligned;
  aligned.reserve(examples.size());
  for (const auto& ex : examples) {
    auto it = std::lower_bound(by_ref.begin(), by_ref.end(), ex.ref,
                               [](const ScoreRecord* s, const ExampleRef& r) { return s->example_ref < r; });
    if (it == by_ref.end() || (*it)->example_ref != ex.ref) {
      throw Error(ErrorCode::MissingScore, "no score for example " + ref_string(ex.ref));
    }
    validate(**it);
    aligned.push_back(*it);
  }
  return aligned;
}

std::size_t removal_count(double fraction, std::size_t mismatches) {
  // The epsilon keeps products such as 0.1 * 30 from flooring to one less.
  const auto k = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(mismatches) + 1e-9));
  return std::min(k, mismatches);
}

}  // namespace

void validate(const ScoreRecord& r) {
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::InvalidScore, "score for example " + ref_string(r.example_ref) + ": " + why);
  };
  if (r.predicted_label.empty()) fail("empty predicted_label");
  if (!(r.confidence >= 0.0 && r.confidence <= 1.0)) fail("confidence outside [0, 1]");
  if (!r.per_class_probs) return;
  const auto& probs = *r.per_class_probs;
  if (probs.empty()) fail("empty per_class_probs");
  double sum = 0.0;
  double best = -1.0;
  for (const auto& [label, p] : probs) {
    if (!(p >= 0.0 && p <= 1.0)) fail("probability of " + label + " outside [0, 1]");
    sum += p;
    best = std::max(best, p);
  }
  if (std::abs(sum - 1.0) > kProbabilitySumTolerance) fail("per_class_probs do not sum to 1");
  const auto it = probs.find(r.predicted_label);
  if (it == probs.end()) fail("predicted_label missing from per_class_probs");
  if (it->second < best - kProbabilitySumTolerance) fail("predicted_label is not the most probable class");
  if (std::abs(it->second - r.confidence) > kProbabilitySumTolerance) {
    fail("confidence differs from the predicted class probability");
  }
}

FilterResult filter_mismatches(std::span<const MinedExample> examples,
                               std::span<const ScoreRecord> scores, const FilterOptions& options) {
  if (!(options.fraction >= 0.0 && options.fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "filter fraction must lie in [0, 1]");
  }
  const auto aligned = align_scores(examples, scores);

  std::vector<std::size_t> mismatches;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (aligned[i]->predicted_label != examples[i].label) mismatches.push_back(i);
  }
  std::stable_sort(mismatches.begin(), mismatches.end(), [&](std::size_t a, std::size_t b) {
    if (aligned[a]->confidence != aligned[b]->confidence) {
      return aligned[a]->confidence > aligned[b]->confidence;
    }
    return examples[a].ref < examples[b].ref;
  });

  std::vector<char> remove(examples.size(), 0);
  if (options.per_class) {
    std::map<std::string, std::vector<std::size_t>> by_label;
    for (std::size_t i : mismatches) by_label[examples[i].label].push_back(i);
    for (const auto& [label, group] : by_label) {
      const std::size_t k = removal_count(options.fraction, group.size());
      for (std::size_t j = 0; j < k; ++j) remove[group[j]] = 1;
    }
  } else {
    const std::size_t k = removal_count(options.fraction, mismatches.size());
    for (std::size_t j = 0; j < k; ++j) remove[mismatches[j]] = 1;
  }

  FilterResult out;
  FilterReport& rep = out.report;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (remove[i]) {
      out.removed.push_back(examples[i]);
      const double c = aligned[i]->confidence;
      rep.confidence_threshold_used =
          rep.confidence_threshold_used ? std::min(*rep.confidence_threshold_used, c) : c;
    } else {
      out.kept.push_back(examples[i]);
    }
  }
  rep.n_examples = examples.size();
  rep.n_mismatches = mismatches.size();
  rep.n_removed = out.removed.size();
  rep.removal_fraction = options.fraction;
  rep.per_class = options.per_class;
  rep.agreement_pct =
      examples.empty()
          ? 100.0
          : 100.0 * static_cast<double>(examples.size() - mismatches.size()) /
                static_cast<double>(examples.size());
  return out;
}

double label_agreement(std::span<const MinedExample> examples, std::span<const ScoreRecord> scores) {
  if (examples.empty()) throw Error(ErrorCode::EmptyInput, "label agreement of an empty set");
  const auto aligned = align_scores(examples, scores);
  std::size_t matches = 0;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    matches += aligned[i]->predicted_label == examples[i].label;
  }
  return 100.0 * static_cast<double>(matches) / static_cast<double>(examples.size());
}

std::vector<ScoreRecord> builtin_score(const BalancedDataset& ds, const NaiveBayesOptions& options) {
  const std::size_t n_classes = ds.labels.size();
  if (n_classes < 2) throw Error(ErrorCode::InvalidArgument, "scoring needs at least two classes");
  if (options.folds < 2) throw Error(ErrorCode::InvalidArgument, "scoring needs at least two folds");
  const std::size_t n = ds.examples.size();

  std::vector<std::size_t> cls(n);
  std::vector<std::size_t> class_sizes(n_classes, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto it = std::find(ds.labels.begin(), ds.labels.end(), ds.examples[i].label);
    if (it == ds.labels.end()) throw Error(ErrorCode::UnknownLabel, "label " + ds.examples[i].label);
    cls[i] = static_cast<std::size_t>(it - ds.labels.begin());
    ++class_sizes[cls[i]];
  }
  for (std::size_t c = 0; c < n_classes; ++c) {
    if (class_sizes[c] == 0) throw Error(ErrorCode::EmptyClass, "class " + ds.labels[c] + " is empty");
  }

  std::unordered_map<std::string, std::uint32_t> ids;
  std::vector<std::vector<std::uint32_t>> docs(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& tok : example_tokens(ds.examples[i])) {
      auto [it, inserted] = ids.emplace(std::move(tok), static_cast<std::uint32_t>(ids.size()));
      docs[i].push_back(it->second);
    }
  }
  if (ids.empty()) throw Error(ErrorCode::DegenerateVocabulary, "no tokens in any example");
  const std::size_t vocab = ids.size();

  // Folds by rank in ref order, so fold membership ignores input order.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return ds.examples[a].ref < ds.examples[b].ref; });
  const std::size_t folds = std::min(options.folds, n);
  std::vector<std::size_t> fold(n);
  for (std::size_t r = 0; r < n; ++r) fold[order[r]] = r % folds;

  std::vector<ScoreRecord> out(n);
  std::vector<double> counts(n_classes * vocab);
  std::vector<double> totals(n_classes);
  std::vector<double> docs_per_class(n_classes);
  std::vector<char> seen(vocab);
  std::vector<double> log_score(n_classes);
  for (std::size_t f = 0; f < folds; ++f) {
    std::fill(counts.begin(), counts.end(), 0.0);
    std::fill(totals.begin(), totals.end(), 0.0);
    std::fill(docs_per_class.begin(), docs_per_class.end(), 0.0);
    std::fill(seen.begin(), seen.end(), 0);
    std::size_t n_train = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (fold[i] == f) continue;
      ++n_train;
      docs_per_class[cls[i]] += 1.0;
      for (std::uint32_t t : docs[i]) {
        counts[cls[i] * vocab + t] += 1.0;
        totals[cls[i]] += 1.0;
        seen[t] = 1;
      }
    }
    const double fold_vocab = static_cast<double>(std::count(seen.begin(), seen.end(), 1));
    for (std::size_t i = 0; i < n; ++i) {
      if (fold[i] != f) continue;
      for (std::size_t c = 0; c < n_classes; ++c) {
        double s = std::log((docs_per_class[c] + options.alpha) /
                            (static_cast<double>(n_train) + options.alpha * static_cast<double>(n_classes)));
        const double denom = totals[c] + options.alpha * fold_vocab;
        for (std::uint32_t t : docs[i]) {
          if (!seen[t]) continue;
          s += std::log((counts[c * vocab + t] + options.alpha) / denom);
        }
        log_score[c] = s;
      }
      const std::vector<double> post = softmax(log_score);
      const std::size_t best =
          static_cast<std::size_t>(std::max_element(post.begin(), post.end()) - post.begin());
      ScoreRecord& rec = out[i];
      rec.example_ref = ds.examples[i].ref;
      rec.predicted_label = ds.labels[best];
      rec.confidence = post[best];
      rec.per_class_probs.emplace();
      for (std::size_t c = 0; c < n_classes; ++c) (*rec.per_class_probs)[ds.labels[c]] = post[c];
    }
  }
  return out;
}

std::vector<ScoreRecord> oracle_scores(std::span<const MinedExample> examples,
                                       std::span<const std::string> true_labels,
                                       std::span<const std::string> labels) {
  if (true_labels.size() != examples.size()) {
    throw Error(ErrorCode::InvalidArgument, "oracle_scores: one true label per example required");
  }
  std::vector<ScoreRecord> out;
  out.reserve(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    ScoreRecord r;
    r.example_ref = examples[i].ref;
    r.predicted_label = true_labels[i];
    r.confidence = 1.0;
    r.per_class_probs.emplace();
    for (const auto& l : labels) (*r.per_class_probs)[l] = l == true_labels[i] ? 1.0 : 0.0;
    if (!r.per_class_probs->contains(true_labels[i])) {
      throw Error(ErrorCode::UnknownLabel, "oracle label " + true_labels[i]);
    }
    out.push_back(std::move(r));
  }
  return out;
}

void write_scores(const std::filesystem::path& path, std::span<const ScoreRecord> scores) {
  std::string text;
  for (const auto& s : scores) {
    text += dump_line(json(s));
    text += '\n';
  }
  write_text_file(path, text);
}

std::vector<ScoreRecord> read_scores(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IOError, "cannot open " + path.string());
  std::vector<ScoreRecord> out;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ScoreRecord r;
    try {
      json::parse(line).get_to(r);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::InvalidScore,
                  path.string() + ":" + std::to_string(n) + ": malformed score record: " + e.what());
    }
    validate(r);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace patternmine
