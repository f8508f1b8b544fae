#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "patternmine/filter.hpp"
#include "patternmine/miner.hpp"
#include "patternmine/trainer.hpp"

namespace patternmine {

void to_json(nlohmann::json& j, const ExampleRef& ref);
void from_json(const nlohmann::json& j, ExampleRef& ref);

/// {"label","verbalizer","input" | "hyp","prem","shard_id","doc_index",
///  "byte_offset","matched_span","pattern_index"}
void to_json(nlohmann::json& j, const MinedExample& ex);
void from_json(const nlohmann::json& j, MinedExample& ex);

void to_json(nlohmann::json& j, const MiningStats& stats);
void to_json(nlohmann::json& j, const ScoreRecord& record);
void from_json(const nlohmann::json& j, ScoreRecord& record);
void to_json(nlohmann::json& j, const FilterReport& report);
void to_json(nlohmann::json& j, const EvalResult& result);

/// Compact single-line dump; invalid UTF-8 is replaced rather than thrown on.
std::string dump_line(const nlohmann::json& j);
/// Indented dump for reports and manifests, with a trailing newline.
std::string dump_pretty(const nlohmann::json& j);

void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

void write_examples(const std::filesystem::path& path, std::span<const MinedExample> examples);
/// Throws Error(IOError) naming the offending line on malformed input.
std::vector<MinedExample> read_examples(const std::filesystem::path& path);

}  // namespace patternmine
