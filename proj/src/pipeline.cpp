#include "patternmine/pipeline.hpp"

#include <charconv>
#include <cstdlib>
#include <thread>

#include "patternmine/digest.hpp"
#include "patternmine/error.hpp"
#include "patternmine/json_io.hpp"

namespace patternmine {

using nlohmann::json;

ScorerChoice parse_scorer(std::string_view text) {
  if (text == "builtin") return {};
  if (text.starts_with("file:") && text.size() > 5) return {false, std::string(text.substr(5))};
  throw Error(ErrorCode::InvalidArgument, "scorer must be \"builtin\" or \"file:PATH\"");
}

json to_json_value(const PipelineConfig& c) {
  return json{{"task", c.task_file.string()},
              {"corpus", c.corpus_dir.string()},
              {"out", c.output_dir.string()},
              {"cap", c.cap},
              {"filter_fraction", c.filter_fraction},
              {"no_filter", c.no_filter},
              {"per_class_filter", c.per_class_filter},
              {"scorer", c.scorer.builtin ? "builtin" : "file:" + c.scorer.file.string()},
              {"seed", c.seed},
              {"workers", c.workers},
              {"swap_nli_roles", c.swap_nli_roles},
              {"dedup", c.dedup},
              {"batch_size", c.batch_size}};
}

unsigned resolve_workers(std::optional<unsigned> flag) {
  if (flag) return std::max(1u, *flag);
  if (const char* env = std::getenv("PATTERNMINE_WORKERS")) {
    unsigned v = 0;
    const std::string_view s(env);
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || v == 0) {
      throw Error(ErrorCode::InvalidArgument, "PATTERNMINE_WORKERS must be a positive integer");
    }
    return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

BuildOutcome run_build(const PipelineConfig& config) {
  namespace fs = std::filesystem;
  BuildOutcome out;
  out.task = load_task(config.task_file);
  if (config.swap_nli_roles) out.task.swap_roles = true;
  const fs::path& dir = config.output_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IOError, "cannot create " + dir.string() + ": " + ec.message());

  const auto shards = list_shards(config.corpus_dir);
  std::vector<fs::path> shard_paths;
  for (const auto& s : shards) shard_paths.push_back(s.path);
  out.corpus_sha256 = sha256_files(shard_paths);
  out.input_digests = {{"task", out.task.source_sha256}, {"corpus", out.corpus_sha256}};

  MiningOptions mining;
  mining.per_class_cap = config.cap;
  mining.workers = config.workers;
  mining.dedup = config.dedup;
  out.mining = mine_corpus(shards, out.task, mining);
  write_examples(dir / "mined.jsonl", out.mining.examples);
  write_text_file(dir / "mining_stats.json", dump_pretty(json(out.mining.stats)));

  out.balanced = balance(out.mining.examples, out.task, config.cap, config.seed);
  write_examples(dir / "balanced.jsonl", out.balanced.examples);

  ExportInfo info;
  info.task_name = out.task.name;
  info.task_sha256 = out.task.source_sha256;
  info.input_digests = out.input_digests;
  info.sampler = {config.seed, config.batch_size};
  out.dataset = out.balanced;
  if (!config.no_filter) {
    std::vector<ScoreRecord> scores;
    if (config.scorer.builtin) {
      scores = builtin_score(out.balanced);
    } else {
      scores = read_scores(config.scorer.file);
      info.input_digests["scores"] = sha256_file(config.scorer.file);
    }
    write_scores(dir / "scores.jsonl", scores);
    FilterOptions fo;
    fo.fraction = config.filter_fraction;
    fo.per_class = config.per_class_filter;
    out.filter = filter_mismatches(out.balanced.examples, scores, fo);
    write_text_file(dir / "filter_report.json", dump_pretty(json(out.filter->report)));
    out.dataset.examples = out.filter->kept;
    out.dataset.recount();
    info.pre_filter_counts = out.balanced.per_class_counts;
    info.filter = &out.filter->report;
  }
  out.manifest = export_dataset(out.dataset, dir, info);
  return out;
}

json make_run_report(std::string_view subcommand, json config,
                     const std::map<std::string, std::string>& input_digests, json outputs) {
  return json{{"tool", {{"name", "patternmine"}, {"version", PATTERNMINE_VERSION}}},
              {"subcommand", subcommand},
              {"config", std::move(config)},
              {"input_digests", input_digests},
              {"outputs", std::move(outputs)}};
}

}  // namespace patternmine
