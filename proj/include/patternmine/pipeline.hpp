#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "patternmine/dataset.hpp"
#include "patternmine/filter.hpp"
#include "patternmine/miner.hpp"
#include "patternmine/task.hpp"

namespace patternmine {

struct ScorerChoice {
  bool builtin = true;
  std::filesystem::path file;  // score file when !builtin
};

/// "builtin" or "file:PATH". Throws Error(InvalidArgument).
ScorerChoice parse_scorer(std::string_view text);

struct PipelineConfig {
  std::filesystem::path task_file;
  std::filesystem::path corpus_dir;
  std::filesystem::path output_dir;
  std::size_t cap = kDefaultClassCap;
  double filter_fraction = 0.10;
  bool no_filter = false;
  bool per_class_filter = false;
  ScorerChoice scorer;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  bool swap_nli_roles = false;
  bool dedup = false;
  std::size_t batch_size = 32;
};

nlohmann::json to_json_value(const PipelineConfig& config);

/// --workers if given, else PATTERNMINE_WORKERS, else the hardware thread count.
unsigned resolve_workers(std::optional<unsigned> flag);

struct BuildOutcome {
  TaskSpec task;
  MiningResult mining;
  BalancedDataset balanced;            // capped, before filtering
  std::optional<FilterResult> filter;  // unset with no_filter
  BalancedDataset dataset;             // what was exported
  DatasetManifest manifest;
  std::string corpus_sha256;
  std::map<std::string, std::string> input_digests;
};

/// mine -> balance -> (score -> filter) -> export. Every intermediate lands in
/// output_dir: mined.jsonl, mining_stats.json, balanced.jsonl, scores.jsonl
/// and filter_report.json (when filtering), dataset.jsonl, manifest.json.
BuildOutcome run_build(const PipelineConfig& config);

/// Common envelope for the JSON run report every subcommand writes.
nlohmann::json make_run_report(std::string_view subcommand, nlohmann::json config,
                               const std::map<std::string, std::string>& input_digests,
                               nlohmann::json outputs);

}  // namespace patternmine
