#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "patternmine/miner.hpp"
#include "patternmine/rng.hpp"
#include "patternmine/task.hpp"

namespace patternmine {

inline constexpr std::size_t kDefaultClassCap = 40000;

using CountsByVerbalizer = std::map<std::string, std::map<std::string, std::size_t>>;

struct BalancedDataset {
  std::vector<std::string> labels;     // class order of the task
  std::vector<MinedExample> examples;  // ordered by ref
  std::map<std::string, std::size_t> per_class_counts;
  CountsByVerbalizer per_verbalizer_counts;
  CountsByVerbalizer supply;  // mined examples available per bucket before capping
  std::size_t cap = kDefaultClassCap;
  std::uint64_t seed = 0;

  /// Recomputes the two count maps from `examples`.
  void recount();
};

/// Per-verbalizer take counts for one class. Starts from cap / n with the
/// remainder going to the first verbalizers in declaration order; any bucket
/// whose supply is below its quota is taken whole and the shortfall is shared
/// again among the remaining buckets, until the cap is met or supply runs
/// out.
std::vector<std::size_t> verbalizer_quotas(std::span<const std::size_t> supply, std::size_t cap);

/// Caps every class at `cap` examples, spread evenly across its verbalizers.
/// Examples inside a bucket are chosen by seeded sampling without
/// replacement. Throws Error(EmptyClass) when a task class has no examples
/// and Error(UnknownLabel) for examples outside the task.
BalancedDataset balance(std::span<const MinedExample> examples, const TaskSpec& task,
                        std::size_t cap = kDefaultClassCap, std::uint64_t seed = 0);

struct SamplerSpec {
  std::uint64_t seed = 0;
  std::size_t batch_size = 32;
};

inline constexpr std::string_view kSamplerStrategy = "uniform_class_then_uniform_example";

/// Draws batches by picking each instance's class uniformly over the classes,
/// then an example of that class uniformly with replacement. Batches hold
/// indices into BalancedDataset::examples.
class BatchSampler {
 public:
  /// Throws Error(EmptyClass) if any class has no examples.
  BatchSampler(const BalancedDataset& ds, const SamplerSpec& spec);

  std::vector<std::size_t> next_batch();
  std::size_t num_classes() const { return by_class_.size(); }

 private:
  std::vector<std::vector<std::size_t>> by_class_;
  std::size_t batch_size_;
  Rng rng_;
};

std::vector<std::vector<std::size_t>> draw_batches(const BalancedDataset& ds,
                                                   const SamplerSpec& spec,
                                                   std::size_t n_batches);

struct FilterReport;

/// Context recorded in the manifest next to the dataset's own counts.
struct ExportInfo {
  std::string task_name;
  std::string task_sha256;
  std::map<std::string, std::string> input_digests;  // name -> sha256
  std::optional<std::map<std::string, std::size_t>> pre_filter_counts;
  const FilterReport* filter = nullptr;
  SamplerSpec sampler;
};

struct DatasetManifest {
  std::filesystem::path dataset_path;
  std::filesystem::path manifest_path;
  std::size_t n_examples = 0;
  std::map<std::string, std::size_t> per_class_counts;
  std::string dataset_sha256;
  std::string json;  // manifest text as written
};

/// Writes `dataset.jsonl` and `manifest.json` into `dir`, creating it if
/// needed. Output is a pure function of the inputs. Throws Error(IOError).
DatasetManifest export_dataset(const BalancedDataset& ds, const std::filesystem::path& dir,
                               const ExportInfo& info);

/// Reloads a dataset JSONL file. Cap, seed and supply come from a
/// `manifest.json` next to it when one exists.
BalancedDataset load_dataset(const std::filesystem::path& dataset_jsonl, const TaskSpec& task);

}  // namespace patternmine
