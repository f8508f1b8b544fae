#include <gtest/gtest.h>

#include <fstream>

#include "oracle.hpp"
#include "patternmine/error.hpp"
#include "patternmine/miner.hpp"
#include "patternmine/pattern_dsl.hpp"
#include "patternmine/rng.hpp"
#include "synthetic.hpp"
#include "printers.hpp"
#include "temp_dir.hpp"

namespace pm = patternmine;
using pm::testing::TempDir;

namespace {

const std::filesystem::path kTasks = std::filesystem::path(PATTERNMINE_SOURCE_DIR) / "tasks";

const pm::TaskSpec& sentiment() {
  static const pm::TaskSpec task = pm::load_task(kTasks / "sentiment.json");
  return task;
}

std::vector<pm::MinedExample> mine(std::string_view doc, const pm::TaskSpec& task = sentiment()) {
  const auto matchers = pm::compile_task(task);
  return pm::mine_document(doc, matchers);
}

void write_lines(const std::filesystem::path& p, const std::vector<std::string>& lines) {
  std::ofstream out(p, std::ios::binary);
  for (const auto& l : lines) out << l << '\n';
}

}  // namespace

TEST(MineDocument, SingleContext) {
  const auto found = mine("The screen is good. Battery lasts all day.");
  ASSERT_EQ(found.size(), 1u);
  EXPECT_EQ(found[0].label, "positive");
  EXPECT_EQ(found[0].verbalizer, "good");
  EXPECT_EQ(found[0].input, "Battery lasts all day.");
  EXPECT_EQ(found[0].ref.byte_offset, 11u);
  EXPECT_EQ(found[0].matched_span, "is good. Battery lasts all day.");
}

TEST(MineDocument, ShortCaptureIsDropped) {
  pm::DocumentMiner miner(pm::compile_task(sentiment()));
  pm::DocumentMiner::Counters counters;
  EXPECT_TRUE(miner.mine("U.S.A. is good. Hi.", 0, 0, &counters).empty());
  EXPECT_EQ(counters.matches, 1u);
  EXPECT_EQ(counters.too_short, 1u);
  // Four code points is enough, counted in characters rather than bytes.
  EXPECT_EQ(mine("It is good. Okay.").size(), 1u);
  EXPECT_EQ(mine("It is good. \xC3\xA9t\xC3\xA9.").size(), 1u);   // "été." is 4 code points
  EXPECT_TRUE(mine("It is good. \xC3\xA9\xC3\xA9.").empty());      // "éé." is 3
}

TEST(MineDocument, NoVerbalizerNoExamples) {
  EXPECT_TRUE(mine("The weather is mild. Nobody complained about anything.").empty());
  EXPECT_TRUE(mine("").empty());
}

TEST(MineDocument, VerbalizerIsCanonicalised) {
  const auto found = mine("It WAS Terrible!!! Nobody laughed once.");
  ASSERT_EQ(found.size(), 1u);
  EXPECT_EQ(found[0].label, "negative");
  EXPECT_EQ(found[0].verbalizer, "terrible");
  EXPECT_EQ(found[0].input, "Nobody laughed once.");
}

TEST(MineDocument, MatchesAreMergedByOffset) {
  const auto found = mine("It was bad. The plot drags on. It is great. The cast shines though.");
  ASSERT_EQ(found.size(), 2u);
  EXPECT_EQ(found[0].label, "negative");
  EXPECT_EQ(found[1].label, "positive");
  EXPECT_LT(found[0].ref.byte_offset, found[1].ref.byte_offset);
}

TEST(MineDocument, NonOverlappingWithinOneMatcher) {
  // The second context lies inside the first match's capture, so it is consumed.
  const auto found = mine("It was good. This is good. Then more text follows here.");
  ASSERT_EQ(found.size(), 1u);
  EXPECT_EQ(found[0].input, "This is good.");
}

TEST(MineDocument, EqualOffsetGoesToEarlierClass) {
  pm::TaskSpec task;
  task.name = "overlap";
  task.arity = pm::Arity::single_input;
  task.patterns = {"{VERBALIZER}*. {INPUT}"};
  task.classes = {{"first", {"alpha"}}, {"second", {"alphabet"}}};
  pm::DocumentMiner miner(pm::compile_task(task));
  pm::DocumentMiner::Counters counters;
  const auto found = miner.mine("alphabet soup. Tastes like letters.", 0, 0, &counters);
  ASSERT_EQ(found.size(), 1u);
  EXPECT_EQ(found[0].label, "first");
  EXPECT_EQ(counters.offset_collisions, 1u);
}

TEST(MineDocument, PairTaskCapturesBothSentences) {
  const auto task = pm::load_task(kTasks / "nli.json");
  const auto found = mine("The sky darkened. Therefore, rain was coming soon.", task);
  ASSERT_EQ(found.size(), 1u);
  EXPECT_TRUE(found[0].pair);
  EXPECT_EQ(found[0].label, "entailment");
  EXPECT_EQ(found[0].hyp, "The sky darkened.");
  EXPECT_EQ(found[0].prem, "rain was coming soon.");
}

// Round trip: re-running the pattern on matched_span reproduces the example.
TEST(MineDocument, MatchedSpanRematches) {
  pm::testing::TempDir dir;
  pm::testing::PlantedCorpusSpec spec;
  spec.planted_per_class = 40;
  spec.distractor_docs = 80;
  spec.decoy_docs = 20;
  spec.shards = 2;
  pm::testing::write_planted_sentiment_corpus(dir.path(), sentiment(), spec);
  const auto result = pm::mine_corpus(pm::list_shards(dir.path()), sentiment(), {.per_class_cap = 0});
  ASSERT_FALSE(result.examples.empty());
  for (const auto& ex : result.examples) {
    const auto again = mine(ex.matched_span);
    ASSERT_FALSE(again.empty()) << ex.matched_span;
    EXPECT_EQ(again[0].ref.byte_offset, 0u);
    EXPECT_EQ(again[0].input, ex.input);
    EXPECT_EQ(again[0].label, ex.label);
    EXPECT_EQ(again[0].matched_span, ex.matched_span);
  }
}

// The miner against the hand-written oracle on random fragment soup.
TEST(MineDocument, AgreesWithOracleOnRandomText) {
  const auto pattern = pm::testing::sentiment_oracle_pattern(sentiment());
  const auto matchers = pm::compile_task(sentiment());
  pm::DocumentMiner miner(matchers);
  const std::vector<std::string> frags = {"is",    "was", " ",   "  ",  "good", "Bad",  "awful",
                                          "great", "x",   "Hi",  ".",   "!",    "?",    "fun",
                                          "word",  "\t",  "this", "terrible", "Okay", "abc"};
  pm::Rng rng(3);
  std::size_t total = 0;
  for (int trial = 0; trial < 5000; ++trial) {
    std::string doc;
    const std::size_t n = 2 + rng.below(24);
    for (std::size_t i = 0; i < n; ++i) {
      doc += frags[rng.below(frags.size())];
      if (rng.below(4) != 0) doc += ' ';  // mostly word-separated, sometimes glued
    }
    const auto got = miner.mine(doc, 0, 0);
    const auto want = pm::testing::oracle_mine_document(doc, pattern, 0, 0);
    total += want.size();
    ASSERT_EQ(got.size(), want.size()) << '"' << doc << '"';
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_EQ(got[i].ref, want[i].ref) << doc;
      EXPECT_EQ(got[i].input, want[i].input) << doc;
      EXPECT_EQ(got[i].verbalizer, want[i].verbalizer) << doc;
      EXPECT_EQ(got[i].matched_span, want[i].matched_span) << doc;
    }
  }
  EXPECT_GT(total, 200u);
}

TEST(MineCorpus, ShardOrderAndWorkerIndependence) {
  TempDir dir;
  pm::testing::PlantedCorpusSpec spec;
  spec.planted_per_class = 150;
  spec.distractor_docs = 400;
  spec.shards = 6;
  pm::testing::write_planted_sentiment_corpus(dir.path(), sentiment(), spec);
  const auto shards = pm::list_shards(dir.path());
  const auto one = pm::mine_corpus(shards, sentiment(), {.per_class_cap = 0, .workers = 1});
  for (unsigned w : {2u, 3u, 8u}) {
    const auto many = pm::mine_corpus(shards, sentiment(), {.per_class_cap = 0, .workers = w});
    EXPECT_EQ(many.examples, one.examples) << w << " workers";
    EXPECT_EQ(many.stats.documents, one.stats.documents);
  }
  EXPECT_TRUE(std::is_sorted(one.examples.begin(), one.examples.end(),
                             [](const auto& a, const auto& b) { return a.ref < b.ref; }));
  EXPECT_EQ(one.stats.shards_processed, 6u);
  EXPECT_EQ(one.stats.malformed_records, 0u);
}

// Property: appending documents never changes the examples found in the
// documents that were already there.
TEST(MineCorpus, AppendingDocumentsIsMonotone) {
  TempDir dir;
  pm::Rng rng(17);
  const std::vector<std::string> pool = {"It is good. Everyone enjoyed the show.",
                                         "Nothing to report today.",
                                         "This was awful. The soup was cold again.",
                                         "The lake is great! Swimming is allowed there.",
                                         "is bad. Tiny."};
  std::vector<std::string> lines;
  std::vector<pm::MinedExample> previous;
  for (int round = 0; round < 30; ++round) {
    lines.push_back(pool[rng.below(pool.size())]);
    write_lines(dir / "a.txt", lines);
    const auto now = pm::mine_corpus(pm::list_shards(dir.path()), sentiment(), {.per_class_cap = 0}).examples;
    ASSERT_GE(now.size(), previous.size());
    EXPECT_TRUE(std::equal(previous.begin(), previous.end(), now.begin()));
    previous = now;
  }
}

TEST(MineCorpus, EarlyStopAtShardGranularity) {
  TempDir dir;
  // Each shard holds 3 examples of every verbalizer; a cap of 10 is reached
  // by the end of the fourth shard.
  for (int s = 0; s < 8; ++s) {
    std::vector<std::string> lines;
    for (int k = 0; k < 3; ++k) {
      for (const auto& c : sentiment().classes) {
        for (const auto& v : c.verbalizers) lines.push_back("It was " + v + ". Shard line here.");
      }
    }
    write_lines(dir / ("s" + std::to_string(s) + ".txt"), lines);
  }
  const auto shards = pm::list_shards(dir.path());
  for (unsigned w : {1u, 4u}) {
    const auto r = pm::mine_corpus(shards, sentiment(), {.per_class_cap = 10, .workers = w});
    EXPECT_TRUE(r.stats.stopped_early);
    EXPECT_EQ(r.stats.shards_processed, 4u);
    EXPECT_EQ(r.examples.size(), 4u * 24u);
    for (const auto& [label, per] : r.stats.per_bucket) {
      for (const auto& [v, n] : per) EXPECT_EQ(n, 12u) << label << "/" << v;
    }
  }
  const auto all = pm::mine_corpus(shards, sentiment(), {.per_class_cap = 0});
  EXPECT_FALSE(all.stats.stopped_early);
  EXPECT_EQ(all.examples.size(), 8u * 24u);
}

TEST(MineCorpus, UnreadableShardIsShardIOError) {
  TempDir dir;
  write_lines(dir / "a.txt", {"It was good. Fine words here."});
  auto shards = pm::list_shards(dir.path());
  shards.push_back({1, dir / "missing.txt", pm::ShardFormat::plain_text});
  for (unsigned w : {1u, 2u}) {
    try {
      pm::mine_corpus(shards, sentiment(), {.per_class_cap = 0, .workers = w});
      FAIL();
    } catch (const pm::Error& e) {
      EXPECT_EQ(e.code(), pm::ErrorCode::ShardIOError);
    }
  }
}

TEST(MineCorpus, DedupIsOptIn) {
  TempDir dir;
  write_lines(dir / "a.txt", {"It was good. Same words here.", "It is great. Same words here.",
                              "It was bad. Same words here."});
  const auto shards = pm::list_shards(dir.path());
  EXPECT_EQ(pm::mine_corpus(shards, sentiment(), {.per_class_cap = 0}).examples.size(), 3u);
  const auto d = pm::mine_corpus(shards, sentiment(), {.per_class_cap = 0, .dedup = true});
  EXPECT_EQ(d.examples.size(), 2u);
  EXPECT_EQ(d.stats.duplicates_removed, 1u);
}
