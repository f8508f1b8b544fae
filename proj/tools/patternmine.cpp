// patternmine: compile mining patterns, mine a sharded corpus, balance,
// score, filter, export, and train/evaluate the surrogate classifier.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "patternmine/dataset.hpp"
#include "patternmine/digest.hpp"
#include "patternmine/error.hpp"
#include "patternmine/filter.hpp"
#include "patternmine/json_io.hpp"
#include "patternmine/pattern_dsl.hpp"
#include "patternmine/pipeline.hpp"
#include "patternmine/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace patternmine;

namespace {

struct Options {
  std::string task;
  std::string corpus;
  std::string out;
  std::string mined;
  std::string dataset;
  std::string scores;
  std::string model;
  std::string data;
  std::string scorer = "builtin";
  std::size_t cap = kDefaultClassCap;
  double filter_fraction = 0.10;
  std::uint64_t seed = 0;
  std::optional<unsigned> workers;
  std::size_t batch_size = 32;
  std::size_t steps = 5000;
  double lr = 0.1;
  double l2 = 1e-4;
  std::size_t min_frequency = 2;
  bool no_filter = false;
  bool per_class = false;
  bool swap_nli_roles = false;
  bool dedup = false;
};

TaskSpec load_task_for(const Options& o) {
  TaskSpec task = load_task(o.task);
  if (o.swap_nli_roles) task.swap_roles = true;
  return task;
}

void write_report(const fs::path& dir, std::string_view subcommand, json config,
                  const std::map<std::string, std::string>& inputs, json outputs,
                  std::chrono::steady_clock::time_point started) {
  json report = make_run_report(subcommand, std::move(config), inputs, std::move(outputs));
  report["elapsed_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  write_text_file(dir / "run_report.json", dump_pretty(report));
}

json matcher_dump(const TaskSpec& task) {
  json matchers = json::array();
  for (const auto& m : compile_task(task)) {
    json captures = json::array();
    for (const auto& cg : m.capture_map) {
      captures.push_back({{"group", cg.index}, {"role", to_string(cg.role)}});
    }
    matchers.push_back({{"pattern_index", m.pattern_index},
                        {"pattern", task.patterns[m.pattern_index]},
                        {"label", m.label},
                        {"regex", m.regex_source},
                        {"flags", "icase"},
                        {"captures", std::move(captures)},
                        {"verbalizers", m.verbalizers}});
  }
  return json{{"task", task.name}, {"matchers", std::move(matchers)}};
}

int run(int argc, char** argv) {
  CLI::App app{"Regex-based mining of weakly labeled text classification datasets"};
  app.require_subcommand(1);
  app.set_version_flag("--version", PATTERNMINE_VERSION);
  Options o;

  auto add_task = [&](CLI::App* sub) {
    sub->add_option("--task", o.task, "Task definition JSON")->required()->check(CLI::ExistingFile);
  };
  auto add_swap = [&](CLI::App* sub) {
    sub->add_flag("--swap-nli-roles", o.swap_nli_roles,
                  "Record the sentence before the verbalizer as the premise");
  };
  auto add_workers = [&](CLI::App* sub) {
    sub->add_option("--workers", o.workers, "Mining threads (default: $PATTERNMINE_WORKERS or all cores)");
  };

  auto* compile_cmd = app.add_subcommand("compile", "Print the regular expression of every (pattern, class)");
  add_task(compile_cmd);
  add_swap(compile_cmd);
  compile_cmd->add_option("--out", o.out, "Also write matchers.json and a run report here");

  auto* mine_cmd = app.add_subcommand("mine", "Mine examples from a directory of shards");
  add_task(mine_cmd);
  add_swap(mine_cmd);
  add_workers(mine_cmd);
  mine_cmd->add_option("--corpus", o.corpus, "Shard directory")->required();
  mine_cmd->add_option("--out", o.out, "Output directory")->required();
  mine_cmd->add_option("--cap", o.cap, "Stop after shards that fill every bucket to this size (0: never)");
  mine_cmd->add_flag("--dedup", o.dedup, "Drop exact duplicate texts within a class");

  auto* balance_cmd = app.add_subcommand("balance", "Cap and balance mined examples, then export");
  add_task(balance_cmd);
  balance_cmd->add_option("--mined", o.mined, "mined.jsonl")->required()->check(CLI::ExistingFile);
  balance_cmd->add_option("--out", o.out, "Output directory")->required();
  balance_cmd->add_option("--cap", o.cap, "Examples per class")->check(CLI::PositiveNumber);
  balance_cmd->add_option("--seed", o.seed);
  balance_cmd->add_option("--batch-size", o.batch_size)->check(CLI::PositiveNumber);

  auto* score_cmd = app.add_subcommand("score", "Score a dataset with the built-in naive Bayes scorer");
  add_task(score_cmd);
  score_cmd->add_option("--dataset", o.dataset, "dataset.jsonl")->required()->check(CLI::ExistingFile);
  score_cmd->add_option("--out", o.out, "Output directory")->required();

  auto* filter_cmd = app.add_subcommand("filter", "Remove the most confident label mismatches");
  add_task(filter_cmd);
  filter_cmd->add_option("--dataset", o.dataset, "dataset.jsonl")->required()->check(CLI::ExistingFile);
  filter_cmd->add_option("--scores", o.scores, "Score JSONL")->required()->check(CLI::ExistingFile);
  filter_cmd->add_option("--out", o.out, "Output directory")->required();
  filter_cmd->add_option("--filter-fraction", o.filter_fraction)->check(CLI::Range(0.0, 1.0));
  filter_cmd->add_flag("--per-class", o.per_class, "Apply the fraction within each mined class");
  filter_cmd->add_option("--batch-size", o.batch_size)->check(CLI::PositiveNumber);

  auto* build_cmd = app.add_subcommand("build", "mine + balance + filter + export");
  add_task(build_cmd);
  add_swap(build_cmd);
  add_workers(build_cmd);
  build_cmd->add_option("--corpus", o.corpus, "Shard directory")->required();
  build_cmd->add_option("--out", o.out, "Output directory")->required();
  build_cmd->add_option("--cap", o.cap, "Examples per class")->check(CLI::PositiveNumber);
  build_cmd->add_option("--filter-fraction", o.filter_fraction)->check(CLI::Range(0.0, 1.0));
  build_cmd->add_option("--scorer", o.scorer, "builtin | file:PATH");
  build_cmd->add_option("--seed", o.seed);
  build_cmd->add_option("--batch-size", o.batch_size)->check(CLI::PositiveNumber);
  build_cmd->add_flag("--no-filter", o.no_filter, "Skip scoring and filtering");
  build_cmd->add_flag("--per-class", o.per_class, "Apply the filter fraction within each class");
  build_cmd->add_flag("--dedup", o.dedup, "Drop exact duplicate texts within a class");

  auto* train_cmd = app.add_subcommand("train", "Train the bag-of-words classifier on a dataset");
  add_task(train_cmd);
  train_cmd->add_option("--dataset", o.dataset, "dataset.jsonl")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--out", o.out, "Output directory")->required();
  train_cmd->add_option("--steps", o.steps)->check(CLI::PositiveNumber);
  train_cmd->add_option("--lr", o.lr)->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--l2", o.l2)->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--min-frequency", o.min_frequency);
  train_cmd->add_option("--batch-size", o.batch_size)->check(CLI::PositiveNumber);
  train_cmd->add_option("--seed", o.seed);

  auto* eval_cmd = app.add_subcommand("eval", "Accuracy of a trained model on labeled JSONL");
  eval_cmd->add_option("--model", o.model, "model.json")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--data", o.data, "Labeled JSONL")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--out", o.out, "Also write eval.json and a run report here");

  auto* agree_cmd = app.add_subcommand("agreement", "Percentage of mined labels a scorer agrees with");
  agree_cmd->add_option("--dataset", o.dataset, "dataset.jsonl")->required()->check(CLI::ExistingFile);
  agree_cmd->add_option("--scores", o.scores, "Score JSONL")->required()->check(CLI::ExistingFile);
  agree_cmd->add_option("--out", o.out, "Also write agreement.json and a run report here");

  CLI11_PARSE(app, argc, argv);
  const auto started = std::chrono::steady_clock::now();
  const fs::path out_dir = o.out;

  if (compile_cmd->parsed()) {
    const TaskSpec task = load_task_for(o);
    const json dump = matcher_dump(task);
    std::cout << dump_pretty(dump);
    if (!o.out.empty()) {
      write_text_file(out_dir / "matchers.json", dump_pretty(dump));
      write_report(out_dir, "compile", {{"task", o.task}, {"swap_nli_roles", o.swap_nli_roles}},
                   {{"task", task.source_sha256}}, {{"matchers", "matchers.json"}}, started);
    }
    return 0;
  }

  if (mine_cmd->parsed()) {
    const TaskSpec task = load_task_for(o);
    const auto shards = list_shards(o.corpus);
    std::vector<fs::path> paths;
    for (const auto& s : shards) paths.push_back(s.path);
    MiningOptions mo;
    mo.per_class_cap = o.cap;
    mo.workers = resolve_workers(o.workers);
    mo.dedup = o.dedup;
    const MiningResult r = mine_corpus(shards, task, mo);
    write_examples(out_dir / "mined.jsonl", r.examples);
    write_text_file(out_dir / "mining_stats.json", dump_pretty(json(r.stats)));
    write_report(out_dir, "mine",
                 {{"task", o.task}, {"corpus", o.corpus}, {"cap", o.cap}, {"workers", mo.workers},
                  {"dedup", o.dedup}, {"swap_nli_roles", o.swap_nli_roles}},
                 {{"task", task.source_sha256}, {"corpus", sha256_files(paths)}},
                 {{"mined", "mined.jsonl"}, {"stats", "mining_stats.json"}, {"examples", r.examples.size()}},
                 started);
    std::cerr << "mined " << r.examples.size() << " examples from " << r.stats.documents
              << " documents\n";
    return 0;
  }

  if (balance_cmd->parsed()) {
    const TaskSpec task = load_task_for(o);
    const auto mined = read_examples(o.mined);
    const BalancedDataset ds = balance(mined, task, o.cap, o.seed);
    ExportInfo info;
    info.task_name = task.name;
    info.task_sha256 = task.source_sha256;
    info.input_digests = {{"task", task.source_sha256}, {"mined", sha256_file(o.mined)}};
    info.sampler = {o.seed, o.batch_size};
    const DatasetManifest m = export_dataset(ds, out_dir, info);
    write_report(out_dir, "balance", {{"task", o.task}, {"mined", o.mined}, {"cap", o.cap}, {"seed", o.seed}},
                 info.input_digests,
                 {{"dataset", "dataset.jsonl"}, {"manifest", "manifest.json"}, {"examples", m.n_examples}},
                 started);
    return 0;
  }

  if (score_cmd->parsed()) {
    const TaskSpec task = load_task_for(o);
    const BalancedDataset ds = load_dataset(o.dataset, task);
    const auto scores = builtin_score(ds);
    write_scores(out_dir / "scores.jsonl", scores);
    write_report(out_dir, "score", {{"task", o.task}, {"dataset", o.dataset}, {"scorer", "builtin"}},
                 {{"task", task.source_sha256}, {"dataset", sha256_file(o.dataset)}},
                 {{"scores", "scores.jsonl"}, {"records", scores.size()}}, started);
    return 0;
  }

  if (filter_cmd->parsed()) {
    const TaskSpec task = load_task_for(o);
    BalancedDataset ds = load_dataset(o.dataset, task);
    const auto scores = read_scores(o.scores);
    FilterOptions fo;
    fo.fraction = o.filter_fraction;
    fo.per_class = o.per_class;
    const FilterResult fr = filter_mismatches(ds.examples, scores, fo);
    ExportInfo info;
    info.task_name = task.name;
    info.task_sha256 = task.source_sha256;
    info.input_digests = {{"task", task.source_sha256},
                          {"dataset", sha256_file(o.dataset)},
                          {"scores", sha256_file(o.scores)}};
    info.pre_filter_counts = ds.per_class_counts;
    info.filter = &fr.report;
    info.sampler = {ds.seed, o.batch_size};
    ds.examples = fr.kept;
    ds.recount();
    export_dataset(ds, out_dir, info);
    write_examples(out_dir / "removed.jsonl", fr.removed);
    write_text_file(out_dir / "filter_report.json", dump_pretty(json(fr.report)));
    write_report(out_dir, "filter",
                 {{"task", o.task}, {"dataset", o.dataset}, {"scores", o.scores},
                  {"filter_fraction", o.filter_fraction}, {"per_class", o.per_class}},
                 info.input_digests,
                 {{"dataset", "dataset.jsonl"}, {"removed", "removed.jsonl"},
                  {"report", json(fr.report)}},
                 started);
    return 0;
  }

  if (build_cmd->parsed()) {
    PipelineConfig c;
    c.task_file = o.task;
    c.corpus_dir = o.corpus;
    c.output_dir = o.out;
    c.cap = o.cap;
    c.filter_fraction = o.filter_fraction;
    c.no_filter = o.no_filter;
    c.per_class_filter = o.per_class;
    c.scorer = parse_scorer(o.scorer);
    c.seed = o.seed;
    c.workers = resolve_workers(o.workers);
    c.swap_nli_roles = o.swap_nli_roles;
    c.dedup = o.dedup;
    c.batch_size = o.batch_size;
    const BuildOutcome r = run_build(c);
    json outputs{{"mined", "mined.jsonl"},
                 {"mining_stats", "mining_stats.json"},
                 {"balanced", "balanced.jsonl"},
                 {"dataset", "dataset.jsonl"},
                 {"manifest", "manifest.json"},
                 {"examples", r.manifest.n_examples}};
    if (r.filter) {
      outputs["scores"] = "scores.jsonl";
      outputs["filter_report"] = "filter_report.json";
    }
    json config = to_json_value(c);
    config.erase("workers");  // does not affect the output
    write_report(out_dir, "build", std::move(config), r.input_digests, std::move(outputs), started);
    std::cerr << "exported " << r.manifest.n_examples << " examples to " << r.manifest.dataset_path.string()
              << "\n";
    return 0;
  }

  if (train_cmd->parsed()) {
    const TaskSpec task = load_task_for(o);
    const BalancedDataset ds = load_dataset(o.dataset, task);
    TrainOptions to;
    to.steps = o.steps;
    to.learning_rate = o.lr;
    to.l2 = o.l2;
    to.min_frequency = o.min_frequency;
    const TrainResult r = train(ds, {o.seed, o.batch_size}, to);
    save_model(r.model, out_dir / "model.json");
    write_report(out_dir, "train",
                 {{"task", o.task}, {"dataset", o.dataset}, {"steps", o.steps}, {"lr", o.lr},
                  {"l2", o.l2}, {"min_frequency", o.min_frequency}, {"batch_size", o.batch_size},
                  {"seed", o.seed}},
                 {{"task", task.source_sha256}, {"dataset", sha256_file(o.dataset)}},
                 {{"model", "model.json"},
                  {"vocab_size", r.model.vocab_size()},
                  {"first_batch_loss", r.batch_loss.front()},
                  {"last_batch_loss", r.batch_loss.back()}},
                 started);
    return 0;
  }

  if (eval_cmd->parsed()) {
    const LinearModel model = load_model(o.model);
    const auto labeled = read_labeled(o.data);
    const EvalResult r = evaluate(model, labeled);
    std::cout << dump_pretty(json(r));
    if (!o.out.empty()) {
      write_text_file(out_dir / "eval.json", dump_pretty(json(r)));
      write_report(out_dir, "eval", {{"model", o.model}, {"data", o.data}},
                   {{"model", sha256_file(o.model)}, {"data", sha256_file(o.data)}},
                   {{"eval", "eval.json"}, {"accuracy", r.accuracy}}, started);
    }
    return 0;
  }

  if (agree_cmd->parsed()) {
    const auto examples = read_examples(o.dataset);
    const auto scores = read_scores(o.scores);
    const double pct = label_agreement(examples, scores);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", pct);
    std::cout << buf << "\n";
    if (!o.out.empty()) {
      write_text_file(out_dir / "agreement.json", dump_pretty(json{{"agreement_pct", pct}}));
      write_report(out_dir, "agreement", {{"dataset", o.dataset}, {"scores", o.scores}},
                   {{"dataset", sha256_file(o.dataset)}, {"scores", sha256_file(o.scores)}},
                   {{"agreement_pct", pct}}, started);
    }
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::cerr << dump_line(json{{"error", to_string(e.code())}, {"message", e.what()}}) << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << dump_line(json{{"error", "Internal"}, {"message", e.what()}}) << "\n";
    return 3;
  }
}
