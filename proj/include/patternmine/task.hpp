#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace patternmine {

enum class Arity { single_input, pair_input };

std::string_view to_string(Arity arity);
Arity arity_from_string(std::string_view text);

/// Strings that stand in for one class label inside a pattern. The first
/// entry is the class's designated single verbalizer.
struct VerbalizerSet {
  std::string label;
  std::vector<std::string> verbalizers;
};

/// A classification task: its classes, their verbalizers and the mining
/// pattern templates. Loaded from a task definition file:
///
///   { "task": "sentiment", "arity": "single",
///     "patterns": ["(is|was) {VERBALIZER}*. {INPUT}"],
///     "classes": [{ "label": "positive", "verbalizers": ["good", ...] }],
///     "swap_roles": false }
struct TaskSpec {
  std::string name;
  Arity arity = Arity::single_input;
  std::vector<std::string> patterns;
  std::vector<VerbalizerSet> classes;
  // Record the pre-verbalizer sentence of a pair pattern as the premise.
  bool swap_roles = false;
  // SHA-256 of the file the task was loaded from; empty for in-memory tasks.
  std::string source_sha256;

  std::vector<std::string> labels() const;
  /// Index of `label` in `classes`. Throws Error(UnknownLabel).
  std::size_t class_index(std::string_view label) const;
  bool has_label(std::string_view label) const;
};

/// Checks the verbalizer invariants: non-empty strings, no sentence
/// terminators, no surrounding whitespace, and no verbalizer shared between
/// labels (compared case-insensitively, as matching is). Also checks for
/// duplicate labels and at least one pattern. Throws Error(InvalidTask).
void validate(const TaskSpec& task);

TaskSpec parse_task(std::string_view json_text);
TaskSpec load_task(const std::filesystem::path& path);
std::string task_to_json(const TaskSpec& task);

}  // namespace patternmine
