#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "patternmine/corpus.hpp"
#include "patternmine/pattern_dsl.hpp"
#include "patternmine/task.hpp"

namespace patternmine {

/// Location of a match: shard, record within the shard, byte offset of the
/// match start within the record's text.
struct ExampleRef {
  std::uint64_t shard_id = 0;
  std::uint64_t doc_index = 0;
  std::uint64_t byte_offset = 0;

  auto operator<=>(const ExampleRef&) const = default;
};

/// Captured sentences shorter than this many characters are discarded; a
/// period is always taken to end a sentence, so abbreviations such as
/// "U.S.A." otherwise produce fragment "sentences".
inline constexpr std::size_t kMinSentenceLength = 4;

struct MinedExample {
  std::string label;
  std::string verbalizer;  // declared spelling of the alternation member that matched
  bool pair = false;
  std::string input;       // single-input tasks
  std::string hyp;         // pair tasks
  std::string prem;
  ExampleRef ref;
  std::string matched_span;
  std::uint64_t pattern_index = 0;

  bool operator==(const MinedExample&) const = default;
};

/// Applies a fixed set of matchers to documents. Holds a verbalizer
/// prefilter so that the regex engine only runs on documents that contain at
/// least one verbalizer of the matcher in question.
class DocumentMiner {
 public:
  explicit DocumentMiner(std::vector<CompiledMatcher> matchers);

  struct Counters {
    std::uint64_t matches = 0;        // before the length rule
    std::uint64_t too_short = 0;
    std::uint64_t offset_collisions = 0;
  };

  /// Non-overlapping leftmost matches of every matcher, merged by byte
  /// offset. When two matchers match at the same offset the earlier matcher
  /// (pattern-major, then class order) keeps it. Captured sentences are
  /// whitespace-trimmed and dropped if shorter than kMinSentenceLength.
  std::vector<MinedExample> mine(std::string_view doc, std::uint64_t shard_id,
                                 std::uint64_t doc_index, Counters* counters = nullptr) const;

  std::span<const CompiledMatcher> matchers() const { return matchers_; }

 private:
  struct Entry {
    std::string lowered;
    std::uint64_t mask;  // bit i: matcher i's verbalizer alternation contains it
  };

  std::uint64_t candidate_mask(std::string_view doc) const;

  std::vector<CompiledMatcher> matchers_;
  std::vector<std::vector<Entry>> by_first_byte_;  // 256 buckets, keyed by lowercased first byte
  bool prefilter_ = true;
};

/// Convenience wrapper over DocumentMiner for a single document.
std::vector<MinedExample> mine_document(std::string_view doc,
                                        std::span<const CompiledMatcher> matchers,
                                        std::uint64_t shard_id = 0, std::uint64_t doc_index = 0);

struct MiningOptions {
  // Stop reading further shards once the shards processed so far hold at least
  // this many examples in every (class, verbalizer) bucket. 0 disables it.
  std::uint64_t per_class_cap = 40000;
  unsigned workers = 1;
  // Drop later examples whose (label, captured text) repeats an earlier one.
  bool dedup = false;
};

struct MiningStats {
  std::uint64_t shards_total = 0;
  std::uint64_t shards_processed = 0;
  std::uint64_t documents = 0;
  std::uint64_t bytes = 0;
  std::uint64_t malformed_records = 0;
  std::uint64_t raw_matches = 0;
  std::uint64_t dropped_too_short = 0;
  std::uint64_t offset_collisions = 0;
  std::uint64_t duplicates_removed = 0;
  bool stopped_early = false;
  // label -> verbalizer -> examples kept, every declared bucket present.
  std::map<std::string, std::map<std::string, std::uint64_t>> per_bucket;
};

struct MiningResult {
  std::vector<MinedExample> examples;  // ordered by ref
  MiningStats stats;
};

/// Mines every shard and merges per-shard results in shard_id order, so the
/// output does not depend on the number of workers. Early stopping is decided
/// on the shard prefix, never on worker timing. A shard that fails to read
/// aborts the run with Error(ShardIOError).
MiningResult mine_corpus(std::span<const CorpusShard> shards, const TaskSpec& task,
                         const MiningOptions& options = {});

}  // namespace patternmine
