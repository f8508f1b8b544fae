#pragma once

// Mining-pattern templates and their compilation into case-insensitive
// regular expressions.
//
// Template syntax:
//   {VERBALIZER}              the class's verbalizers as one alternation group
//   {INPUT}                   one sentence, captured as the example input
//   {INPUT:HYP} {INPUT:PREM}  one sentence each, for pair tasks
//   *                         non-sentence-ending characters, lazily
//   \*  \{  \}  \\            literal characters
// Anything else is literal text. Whitespace runs match any whitespace run, a
// "." directly after `*` matches a run of sentence terminators, and a
// parenthesised alternation of plain words such as "(is|was)" is kept as a
// regex group.

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "patternmine/task.hpp"

namespace patternmine {

enum class InputRole { single, hyp, prem };

struct LiteralToken {
  std::string text;
  bool operator==(const LiteralToken&) const = default;
};
struct VerbalizerSlot {
  bool operator==(const VerbalizerSlot&) const = default;
};
struct StarToken {
  bool operator==(const StarToken&) const = default;
};
struct InputSlot {
  InputRole role = InputRole::single;
  bool operator==(const InputSlot&) const = default;
};

using TemplateToken = std::variant<LiteralToken, VerbalizerSlot, StarToken, InputSlot>;

struct PatternTemplate {
  std::string raw;
  std::vector<TemplateToken> tokens;
  Arity arity = Arity::single_input;
};

/// Throws Error(MalformedTemplate) on unbalanced braces, unknown keywords, bad
/// escapes, or a slot count that does not fit `arity`.
PatternTemplate parse_template(std::string_view raw, Arity arity);

/// Inverse of parse_template: serialize(parse_template(s, a).tokens) == s.
std::string serialize(std::span<const TemplateToken> tokens);

/// Backslash-escapes regex metacharacters so the result matches `text` literally.
std::string escape_regex(std::string_view text);

/// "(v1|v2|...)" with each verbalizer escaped, in declaration order.
std::string expand_verbalizer_group(const VerbalizerSet& vs);

enum class CaptureRole { input, hyp, prem, verbalizer };

std::string_view to_string(CaptureRole role);

struct CaptureGroup {
  int index = 0;  // capturing-group number in regex_source
  CaptureRole role = CaptureRole::input;
  bool operator==(const CaptureGroup&) const = default;
};

struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  bool empty() const { return begin == end; }
};

/// Byte offsets of one match, relative to the searched text.
struct MatchSpans {
  Span whole;
  Span verbalizer;
  Span input;
  Span hyp;
  Span prem;
};

namespace detail {
struct RegexProgram;
}

class CompiledMatcher {
 public:
  std::string label;
  std::size_t class_index = 0;
  std::size_t pattern_index = 0;
  Arity arity = Arity::single_input;
  std::string regex_source;
  std::vector<CaptureGroup> capture_map;
  std::vector<std::string> verbalizers;

  /// Leftmost match starting at or after `from`. `text` is the whole
  /// document so that matching at `from > 0` sees the preceding character.
  std::optional<MatchSpans> search(std::string_view text, std::size_t from = 0) const;

  /// The declared verbalizer equal (ignoring ASCII case) to `matched`, or
  /// nullptr if there is none.
  const std::string* canonical_verbalizer(std::string_view matched) const;

 private:
  friend CompiledMatcher compile(const PatternTemplate&, const VerbalizerSet&, bool);
  std::shared_ptr<const detail::RegexProgram> program_;
};

/// Expands a template with one class's verbalizers. With `swap_roles`, the
/// HYP and PREM captures of a pair template exchange roles. Throws
/// Error(CompileError) if the resulting expression is rejected by the regex
/// engine.
CompiledMatcher compile(const PatternTemplate& tmpl, const VerbalizerSet& vs,
                        bool swap_roles = false);

/// One matcher per (pattern, class), pattern-major, in declaration order.
std::vector<CompiledMatcher> compile_task(const TaskSpec& task);

}  // namespace patternmine
