#include <gtest/gtest.h>

#include <cctype>
#include <functional>
#include <regex>

#include "patternmine/error.hpp"
#include "patternmine/pattern_dsl.hpp"
#include "patternmine/rng.hpp"

namespace pm = patternmine;

namespace {

pm::VerbalizerSet positive() { return {"positive", {"good", "great", "awesome", "incredible"}}; }
pm::VerbalizerSet entailment() {
  return {"entailment", {"Yes", "Therefore", "Thus", "Accordingly", "Hence", "For this reason"}};
}

pm::ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const pm::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return pm::ErrorCode::InvalidArgument;
}

std::string text_at(std::string_view doc, pm::Span s) { return std::string(doc.substr(s.begin, s.size())); }

// std::regex (ECMAScript) has no named groups; drop the names so the same
// expression can be run through a second engine.
std::string without_group_names(std::string rx) {
  for (std::size_t at; (at = rx.find("(?<")) != std::string::npos;) {
    const std::size_t close = rx.find('>', at);
    rx.erase(at + 1, close - at);
  }
  return rx;
}

}  // namespace

TEST(ParseTemplate, SentimentPatternTokens) {
  const auto t = pm::parse_template("(is|was) {VERBALIZER}*. {INPUT}", pm::Arity::single_input);
  const std::vector<pm::TemplateToken> expected = {
      pm::LiteralToken{"(is|was) "}, pm::VerbalizerSlot{}, pm::StarToken{},
      pm::LiteralToken{". "}, pm::InputSlot{pm::InputRole::single}};
  EXPECT_EQ(t.tokens, expected);
}

TEST(ParseTemplate, PairPatternTokens) {
  const auto t = pm::parse_template("{INPUT:HYP} {VERBALIZER}, {INPUT:PREM}", pm::Arity::pair_input);
  const std::vector<pm::TemplateToken> expected = {
      pm::InputSlot{pm::InputRole::hyp}, pm::LiteralToken{" "}, pm::VerbalizerSlot{},
      pm::LiteralToken{", "}, pm::InputSlot{pm::InputRole::prem}};
  EXPECT_EQ(t.tokens, expected);
}

TEST(ParseTemplate, EscapesBecomeLiterals) {
  const auto t = pm::parse_template(R"(\{x\} \* \\ {VERBALIZER} {INPUT})", pm::Arity::single_input);
  ASSERT_FALSE(t.tokens.empty());
  EXPECT_EQ(std::get<pm::LiteralToken>(t.tokens[0]).text, "{x} * \\ ");
}

TEST(ParseTemplate, RejectsMalformedTemplates) {
  const std::vector<std::pair<std::string, pm::Arity>> bad = {
      {"{VERBALIZER} and {VERBALIZER}", pm::Arity::single_input},
      {"{VERBALIZER} {INPUT", pm::Arity::single_input},
      {"{VERBALIZER} INPUT}", pm::Arity::single_input},
      {"{VERBALIZER} {{INPUT}}", pm::Arity::single_input},
      {"{VERBALIZER} {SENTENCE}", pm::Arity::single_input},
      {"{VERBALIZER} {input}", pm::Arity::single_input},
      {"{INPUT}", pm::Arity::single_input},
      {"{VERBALIZER}", pm::Arity::single_input},
      {"{VERBALIZER} {INPUT} {INPUT}", pm::Arity::single_input},
      {"{VERBALIZER} {INPUT}", pm::Arity::pair_input},
      {"{INPUT:HYP} {VERBALIZER}", pm::Arity::pair_input},
      {"{INPUT:HYP} {VERBALIZER} {INPUT:PREM}", pm::Arity::single_input},
      {R"({VERBALIZER} \d {INPUT})", pm::Arity::single_input},
      {R"({VERBALIZER} {INPUT}\)", pm::Arity::single_input},
      {"", pm::Arity::single_input},
  };
  for (const auto& [raw, arity] : bad) {
    SCOPED_TRACE(raw);
    EXPECT_EQ(code_of([&] { pm::parse_template(raw, arity); }), pm::ErrorCode::MalformedTemplate);
  }
}

// Property: serialize is the inverse of parse on every well-formed template.
TEST(ParseTemplate, RoundTripProperty) {
  const std::vector<std::string> pieces = {"a",  "b c", "(is|was)", ".", ",", "*", "\\*", "\\{",
                                           "\\}", "\\\\", " ", "?", "(x)", "|", "-"};
  pm::Rng rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<std::string> parts;
    const std::size_t n = rng.below(6);
    for (std::size_t i = 0; i < n; ++i) parts.push_back(pieces[rng.below(pieces.size())]);
    parts.insert(parts.begin() + static_cast<std::ptrdiff_t>(rng.below(parts.size() + 1)), "{VERBALIZER}");
    parts.insert(parts.begin() + static_cast<std::ptrdiff_t>(rng.below(parts.size() + 1)), "{INPUT}");
    std::string raw;
    for (const auto& p : parts) raw += p;
    SCOPED_TRACE(raw);
    const auto t = pm::parse_template(raw, pm::Arity::single_input);
    const std::string back = pm::serialize(t.tokens);
    EXPECT_EQ(pm::parse_template(back, pm::Arity::single_input).tokens, t.tokens);
    // Only redundant escapes may differ, and the template grammar has none.
    EXPECT_EQ(back, raw);
  }
}

TEST(Expansion, VerbalizerGroup) {
  EXPECT_EQ(pm::expand_verbalizer_group({"p", {"good", "great", "awesome"}}), "(good|great|awesome)");
  EXPECT_EQ(pm::expand_verbalizer_group({"p", {"good"}}), "(good)");
  EXPECT_EQ(pm::expand_verbalizer_group({"p", {"a.b", "c+"}}), "(a\\.b|c\\+)");
}

TEST(Expansion, SentimentRegexAndCaptureMap) {
  const auto t = pm::parse_template("(is|was) {VERBALIZER}*. {INPUT}", pm::Arity::single_input);
  const auto m = pm::compile(t, positive());
  EXPECT_NE(m.regex_source.find("(good|great|awesome|incredible)"), std::string::npos);
  EXPECT_EQ(m.regex_source,
            R"((is|was)\s+(good|great|awesome|incredible)[^.!?]*?[.!?]+\s+(?<input>[^.!?]+[.!?]+))");
  const std::vector<pm::CaptureGroup> expected = {{2, pm::CaptureRole::verbalizer},
                                                  {3, pm::CaptureRole::input}};
  EXPECT_EQ(m.capture_map, expected);
}

TEST(Expansion, MultiWordVerbalizerMatchesCaseInsensitively) {
  const auto t = pm::parse_template("{INPUT:HYP} {VERBALIZER}, {INPUT:PREM}", pm::Arity::pair_input);
  const auto m = pm::compile(t, entailment());
  const std::string doc = "The cat sat. FOR THIS REASON, the mat was warm.";
  const auto hit = m.search(doc);
  ASSERT_TRUE(hit);
  EXPECT_EQ(text_at(doc, hit->verbalizer), "FOR THIS REASON");
  EXPECT_EQ(*m.canonical_verbalizer(text_at(doc, hit->verbalizer)), "For this reason");
  EXPECT_EQ(text_at(doc, hit->hyp), "The cat sat.");
  EXPECT_EQ(text_at(doc, hit->prem), "the mat was warm.");

  const auto swapped = pm::compile(t, entailment(), /*swap_roles=*/true);
  const auto hit2 = swapped.search(doc);
  ASSERT_TRUE(hit2);
  EXPECT_EQ(text_at(doc, hit2->prem), "The cat sat.");
  EXPECT_EQ(text_at(doc, hit2->hyp), "the mat was warm.");
}

TEST(Expansion, SingleWordParenthesesStayLiteral) {
  const auto t = pm::parse_template("(so) {VERBALIZER}*. {INPUT}", pm::Arity::single_input);
  const auto m = pm::compile(t, positive());
  EXPECT_EQ(m.regex_source.rfind(R"(\(so\)\s+)", 0), 0u);
  EXPECT_EQ(m.capture_map.front().index, 1);
}

TEST(Expansion, VerbalizerMetacharactersAreEscaped) {
  const auto t = pm::parse_template("{VERBALIZER}*. {INPUT}", pm::Arity::single_input);
  const auto m = pm::compile(t, {"tech", {"C++", "a.b"}});
  EXPECT_TRUE(m.search("I like C++ a lot. It compiles slowly."));
  EXPECT_FALSE(m.search("I like axb a lot. It compiles slowly."));
  EXPECT_TRUE(m.search("I like a.b a lot. It compiles slowly."));
}

TEST(Compile, SentimentGolden) {
  const auto t = pm::parse_template("(is|was) {VERBALIZER}*. {INPUT}", pm::Arity::single_input);
  const auto m = pm::compile(t, positive());
  const std::string doc = "The movie was good. I cried twice.";
  const auto hit = m.search(doc);
  ASSERT_TRUE(hit);
  EXPECT_EQ(text_at(doc, hit->input), "I cried twice.");
  EXPECT_EQ(text_at(doc, hit->verbalizer), "good");
  EXPECT_EQ(hit->whole.begin, doc.find("was"));
  EXPECT_EQ(hit->whole.end, doc.size());
}

TEST(Compile, TopicGolden) {
  const auto t = pm::parse_template("{VERBALIZER}*. {INPUT}", pm::Arity::single_input);
  const auto m = pm::compile(t, {"world", {"World", "Politics", "Elections"}});
  const std::string doc = "World. Stocks fell today.";
  const auto hit = m.search(doc);
  ASSERT_TRUE(hit);
  EXPECT_EQ(text_at(doc, hit->input), "Stocks fell today.");
}

TEST(Compile, StarIsLazyAndStopsAtTerminators) {
  const auto t = pm::parse_template("(is|was) {VERBALIZER}*. {INPUT}", pm::Arity::single_input);
  const auto m = pm::compile(t, positive());
  const std::string doc = "It was great fun overall!!  Next sentence here? Another one.";
  const auto hit = m.search(doc);
  ASSERT_TRUE(hit);
  EXPECT_EQ(text_at(doc, hit->input), "Next sentence here?");
  EXPECT_FALSE(m.search("It was great fun overall"));
  EXPECT_FALSE(m.search("It was great. "));
}

TEST(Compile, EmptyAndUnrelatedTextDoNotMatch) {
  for (const auto* raw : {"(is|was) {VERBALIZER}*. {INPUT}", "{VERBALIZER}*. {INPUT}"}) {
    const auto m = pm::compile(pm::parse_template(raw, pm::Arity::single_input), positive());
    EXPECT_FALSE(m.search(""));
    EXPECT_FALSE(m.search("Nothing to see. Move along."));
  }
}

TEST(Compile, SearchFromOffsetSeesPrecedingText) {
  const auto m = pm::compile(pm::parse_template("{VERBALIZER}*. {INPUT}", pm::Arity::single_input),
                             positive());
  const std::string doc = "good one. First. great two. Second one.";
  const auto first = m.search(doc);
  ASSERT_TRUE(first);
  const auto second = m.search(doc, first->whole.end);
  ASSERT_TRUE(second);
  EXPECT_EQ(text_at(doc, second->input), "Second one.");
}

// Property: changing the case of any letters never changes whether or where
// a pattern matches.
TEST(Compile, CaseInsensitivityProperty) {
  const auto m = pm::compile(pm::parse_template("(is|was) {VERBALIZER}*. {INPUT}", pm::Arity::single_input),
                             positive());
  const std::vector<std::string> docs = {"The food was incredible, truly. We will return soon.",
                                         "It is awesome! Buy it now.", "This is good. No.",
                                         "Was Great . Hmm.", "nothing here at all."};
  pm::Rng rng(5);
  for (const auto& base : docs) {
    const auto expected = m.search(base);
    for (int trial = 0; trial < 200; ++trial) {
      std::string doc = base;
      for (char& c : doc) {
        if (rng.below(2) && std::isalpha(static_cast<unsigned char>(c))) {
          c = std::isupper(static_cast<unsigned char>(c)) ? static_cast<char>(std::tolower(c))
                                                          : static_cast<char>(std::toupper(c));
        }
      }
      const auto got = m.search(doc);
      ASSERT_EQ(got.has_value(), expected.has_value()) << doc;
      if (got) {
        EXPECT_EQ(got->whole.begin, expected->whole.begin);
        EXPECT_EQ(got->whole.end, expected->whole.end);
        EXPECT_EQ(got->input.begin, expected->input.begin);
      }
    }
  }
}

TEST(Compile, DeterministicAcrossRuns) {
  const auto t = pm::parse_template("{INPUT:HYP} {VERBALIZER}, {INPUT:PREM}", pm::Arity::pair_input);
  const auto a = pm::compile(t, entailment());
  const auto b = pm::compile(t, entailment());
  EXPECT_EQ(a.regex_source, b.regex_source);
  EXPECT_EQ(a.capture_map, b.capture_map);
}

// Cross-engine check: std::regex must agree with the compiled matcher on
// every random document built from pattern fragments.
TEST(Compile, AgreesWithStdRegex) {
  const auto m = pm::compile(pm::parse_template("(is|was) {VERBALIZER}*. {INPUT}", pm::Arity::single_input),
                             positive());
  const std::regex reference(without_group_names(m.regex_source),
                             std::regex::ECMAScript | std::regex::icase);
  const std::vector<std::string> frags = {"is",  "was", " ",  "  ", "good", "GREAT", "awesome", "x",
                                          "Hi", ".",   "!",  "?",  "fun",  "word",  "\t",      "this"};
  pm::Rng rng(21);
  int matched = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    std::string doc;
    const std::size_t n = 3 + rng.below(14);
    for (std::size_t i = 0; i < n; ++i) {
      doc += frags[rng.below(frags.size())];
      if (rng.below(4) != 0) doc += ' ';  // mostly word-separated, sometimes glued
    }
    std::smatch sm;
    const bool ref_hit = std::regex_search(doc, sm, reference);
    const auto hit = m.search(doc);
    ASSERT_EQ(hit.has_value(), ref_hit) << '"' << doc << '"';
    if (hit) {
      ++matched;
      EXPECT_EQ(hit->whole.begin, static_cast<std::size_t>(sm.position(0))) << doc;
      EXPECT_EQ(hit->whole.size(), static_cast<std::size_t>(sm.length(0))) << doc;
      EXPECT_EQ(hit->input.begin, static_cast<std::size_t>(sm.position(3))) << doc;
    }
  }
  EXPECT_GT(matched, 50);
}

TEST(Compile, TaskCompilationIsPatternMajor) {
  pm::TaskSpec task;
  task.name = "t";
  task.arity = pm::Arity::single_input;
  task.patterns = {"{VERBALIZER}*. {INPUT}", "(is|was) {VERBALIZER}*. {INPUT}"};
  task.classes = {positive(), {"negative", {"bad", "awful"}}};
  const auto ms = pm::compile_task(task);
  ASSERT_EQ(ms.size(), 4u);
  EXPECT_EQ(ms[0].pattern_index, 0u);
  EXPECT_EQ(ms[0].class_index, 0u);
  EXPECT_EQ(ms[1].pattern_index, 0u);
  EXPECT_EQ(ms[1].class_index, 1u);
  EXPECT_EQ(ms[2].pattern_index, 1u);
  EXPECT_EQ(ms[3].label, "negative");
}
