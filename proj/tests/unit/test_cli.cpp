#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <fstream>

#include "json.hpp"
#include "patternmine/json_io.hpp"
#include "patternmine/trainer.hpp"
#include "synthetic.hpp"
#include "temp_dir.hpp"

namespace pm = patternmine;
using nlohmann::json;
using pm::testing::TempDir;

namespace {

const std::filesystem::path kSource = PATTERNMINE_SOURCE_DIR;

struct Run {
  int status = -1;
  std::string out;
};

// Runs the CLI with `args`, capturing stdout; stderr goes to `err_file` if given.
Run cli(const std::string& args, const std::filesystem::path& err_file = {}) {
  std::string cmd = std::string("'") + PATTERNMINE_CLI_PATH + "' " + args;
  cmd += err_file.empty() ? " 2>/dev/null" : " 2>'" + err_file.string() + "'";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  for (std::size_t n; (n = fread(buf, 1, sizeof buf, pipe)) > 0;) r.out.append(buf, n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST(Cli, CompilePrintsRegex) {
  const auto r = cli("compile --task " + q(kSource / "tasks/sentiment.json"));
  ASSERT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("(good|great|awesome|incredible)"), std::string::npos);
}

TEST(Cli, BuildTrainEvalAgreement) {
  TempDir dir;
  const auto task = pm::load_task(kSource / "tasks/sentiment.json");
  pm::testing::write_review_corpus(dir / "corpus", task, 150, 1);
  const auto build = cli("build --task " + q(kSource / "tasks/sentiment.json") + " --corpus " +
                         q(dir / "corpus") + " --out " + q(dir / "run") + " --no-filter --cap 100 --workers 2");
  ASSERT_EQ(build.status, 0);
  for (const char* f : {"mined.jsonl", "mining_stats.json", "balanced.jsonl", "dataset.jsonl",
                        "manifest.json", "run_report.json"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / "run" / f)) << f;
  }
  EXPECT_FALSE(std::filesystem::exists(dir / "run" / "scores.jsonl"));
  const auto manifest = json::parse(pm::read_text_file(dir / "run" / "manifest.json"));
  EXPECT_EQ(manifest.at("per_class_counts").at("positive"), 100);
  const auto report = json::parse(pm::read_text_file(dir / "run" / "run_report.json"));
  EXPECT_EQ(report.at("subcommand"), "build");

  // Same inputs, byte-identical dataset.
  ASSERT_EQ(cli("build --task " + q(kSource / "tasks/sentiment.json") + " --corpus " + q(dir / "corpus") +
                " --out " + q(dir / "run2") + " --no-filter --cap 100 --workers 1")
                .status,
            0);
  EXPECT_EQ(pm::read_text_file(dir / "run" / "dataset.jsonl"), pm::read_text_file(dir / "run2" / "dataset.jsonl"));
  EXPECT_EQ(pm::read_text_file(dir / "run" / "manifest.json"), pm::read_text_file(dir / "run2" / "manifest.json"));

  ASSERT_EQ(cli("train --task " + q(kSource / "tasks/sentiment.json") + " --dataset " +
                q(dir / "run/dataset.jsonl") + " --out " + q(dir / "model") + " --steps 300")
                .status,
            0);
  const auto test = pm::testing::review_test_set(50, 2);
  pm::write_labeled(dir / "test.jsonl", test);
  const auto eval = cli("eval --model " + q(dir / "model/model.json") + " --data " + q(dir / "test.jsonl"));
  ASSERT_EQ(eval.status, 0);
  EXPECT_GT(json::parse(eval.out).at("accuracy").get<double>(), 0.7);

  ASSERT_EQ(cli("score --task " + q(kSource / "tasks/sentiment.json") + " --dataset " +
                q(dir / "run/dataset.jsonl") + " --out " + q(dir / "scored"))
                .status,
            0);
  const auto agree = cli("agreement --dataset " + q(dir / "run/dataset.jsonl") + " --scores " +
                         q(dir / "scored/scores.jsonl"));
  ASSERT_EQ(agree.status, 0);
  const double pct = std::stod(agree.out);
  EXPECT_GT(pct, 50.0);
  EXPECT_LE(pct, 100.0);

  ASSERT_EQ(cli("filter --task " + q(kSource / "tasks/sentiment.json") + " --dataset " +
                q(dir / "run/dataset.jsonl") + " --scores " + q(dir / "scored/scores.jsonl") + " --out " +
                q(dir / "filtered") + " --filter-fraction 0.5")
                .status,
            0);
  const auto fr = json::parse(pm::read_text_file(dir / "filtered/filter_report.json"));
  EXPECT_EQ(fr.at("n_removed").get<std::size_t>(), fr.at("n_mismatches").get<std::size_t>() / 2);
}

TEST(Cli, ErrorsAreReportedAsJson) {
  TempDir dir;
  std::ofstream(dir / "bad.json") << R"({"task":"t","arity":"single","patterns":["{VERBALIZER} {NOPE}"],"classes":[{"label":"a","verbalizers":["x"]}]})";
  const auto r = cli("compile --task " + q(dir / "bad.json"), dir / "err.txt");
  EXPECT_EQ(r.status, 2);
  const auto err = json::parse(pm::read_text_file(dir / "err.txt"));
  EXPECT_EQ(err.at("error"), "MalformedTemplate");

  std::filesystem::create_directories(dir / "empty");
  const auto m = cli("mine --task " + q(kSource / "tasks/sentiment.json") + " --corpus " + q(dir / "empty") +
                         " --out " + q(dir / "o"),
                     dir / "err2.txt");
  EXPECT_EQ(m.status, 2);
  EXPECT_EQ(json::parse(pm::read_text_file(dir / "err2.txt")).at("error"), "ShardIOError");
}
