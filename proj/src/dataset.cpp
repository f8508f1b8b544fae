#include "patternmine/dataset.hpp"

#include <algorithm>
#include <numeric>

#include "patternmine/digest.hpp"
#include "patternmine/error.hpp"
#include "patternmine/json_io.hpp"

namespace patternmine {

using nlohmann::json;

void BalancedDataset::recount() {
  per_class_counts.clear();
  per_verbalizer_counts.clear();
  for (const auto& l : labels) per_class_counts[l] = 0;
  for (const auto& ex : examples) {
    ++per_class_counts[ex.label];
    ++per_verbalizer_counts[ex.label][ex.verbalizer];
  }
}

std::vector<std::size_t> verbalizer_quotas(std::span<const std::size_t> supply, std::size_t cap) {
  std::vector<std::size_t> take(supply.size(), 0);
  std::vector<std::size_t> active(supply.size());
  std::iota(active.begin(), active.end(), std::size_t{0});
  std::size_t remaining = cap;
  while (!active.empty() && remaining > 0) {
    const std::size_t q = remaining / active.size();
    const std::size_t r = remaining % active.size();
    std::vector<std::size_t> still_active;
    for (std::size_t rank = 0; rank < active.size(); ++rank) {
      const std::size_t i = active[rank];
      if (supply[i] <= q + (rank < r ? 1 : 0)) {
        take[i] = supply[i];
        remaining -= supply[i];
      } else {
        still_active.push_back(i);
      }
    }
    if (still_active.size() == active.size()) {
      for (std::size_t rank = 0; rank < active.size(); ++rank) {
        take[active[rank]] = q + (rank < r ? 1 : 0);
      }
      break;
    }
    active = std::move(still_active);
  }
  return take;
}

BalancedDataset balance(std::span<const MinedExample> examples, const TaskSpec& task,
                        std::size_t cap, std::uint64_t seed) {
  if (cap == 0) throw Error(ErrorCode::InvalidArgument, "cap must be positive");
  // buckets[class][verbalizer] -> example indices in input order
  std::vector<std::vector<std::vector<std::size_t>>> buckets(task.classes.size());
  for (std::size_t c = 0; c < task.classes.size(); ++c) {
    buckets[c].resize(task.classes[c].verbalizers.size());
  }
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const MinedExample& ex = examples[i];
    const std::size_t c = task.class_index(ex.label);
    const auto& vs = task.classes[c].verbalizers;
    const auto it = std::find(vs.begin(), vs.end(), ex.verbalizer);
    if (it == vs.end()) {
      throw Error(ErrorCode::InvalidArgument,
                  "verbalizer \"" + ex.verbalizer + "\" is not declared for class " + ex.label);
    }
    buckets[c][static_cast<std::size_t>(it - vs.begin())].push_back(i);
  }

  BalancedDataset ds;
  ds.labels = task.labels();
  ds.cap = cap;
  ds.seed = seed;
  std::vector<std::size_t> chosen;
  for (std::size_t c = 0; c < task.classes.size(); ++c) {
    const VerbalizerSet& vs = task.classes[c];
    std::vector<std::size_t> supply;
    for (std::size_t v = 0; v < vs.verbalizers.size(); ++v) {
      supply.push_back(buckets[c][v].size());
      ds.supply[vs.label][vs.verbalizers[v]] = buckets[c][v].size();
    }
    if (std::accumulate(supply.begin(), supply.end(), std::size_t{0}) == 0) {
      throw Error(ErrorCode::EmptyClass, "class \"" + vs.label + "\" has no mined examples");
    }
    const std::vector<std::size_t> take = verbalizer_quotas(supply, cap);
    for (std::size_t v = 0; v < vs.verbalizers.size(); ++v) {
      std::vector<std::size_t>& bucket = buckets[c][v];
      if (take[v] < bucket.size()) {
        // Sample from ref order so the choice does not depend on input order.
        std::sort(bucket.begin(), bucket.end(), [&](std::size_t a, std::size_t b) {
          if (examples[a].ref != examples[b].ref) return examples[a].ref < examples[b].ref;
          return a < b;
        });
        Rng rng(derive_seed(seed, vs.label + '\x1f' + vs.verbalizers[v]));
        for (std::size_t k = 0; k < take[v]; ++k) {
          const std::size_t j = k + static_cast<std::size_t>(rng.below(bucket.size() - k));
          std::swap(bucket[k], bucket[j]);
        }
        bucket.resize(take[v]);
      }
      chosen.insert(chosen.end(), bucket.begin(), bucket.end());
    }
  }
  std::sort(chosen.begin(), chosen.end(), [&](std::size_t a, std::size_t b) {
    if (examples[a].ref != examples[b].ref) return examples[a].ref < examples[b].ref;
    return a < b;
  });
  ds.examples.reserve(chosen.size());
  for (std::size_t i : chosen) ds.examples.push_back(examples[i]);
  ds.recount();
  return ds;
}

BatchSampler::BatchSampler(const BalancedDataset& ds, const SamplerSpec& spec)
    : by_class_(ds.labels.size()),
      batch_size_(spec.batch_size),
      rng_(derive_seed(spec.seed, kSamplerStrategy)) {
  if (spec.batch_size == 0) throw Error(ErrorCode::InvalidArgument, "batch_size must be positive");
  if (ds.labels.empty()) throw Error(ErrorCode::EmptyClass, "dataset has no classes");
  for (std::size_t i = 0; i < ds.examples.size(); ++i) {
    const auto it = std::find(ds.labels.begin(), ds.labels.end(), ds.examples[i].label);
    if (it == ds.labels.end()) {
      throw Error(ErrorCode::UnknownLabel, "example label \"" + ds.examples[i].label + "\"");
    }
    by_class_[static_cast<std::size_t>(it - ds.labels.begin())].push_back(i);
  }
  for (std::size_t c = 0; c < by_class_.size(); ++c) {
    if (by_class_[c].empty()) {
      throw Error(ErrorCode::EmptyClass, "class \"" + ds.labels[c] + "\" has no examples");
    }
  }
}

std::vector<std::size_t> BatchSampler::next_batch() {
  std::vector<std::size_t> batch(batch_size_);
  for (auto& slot : batch) {
    const auto& members = by_class_[rng_.below(by_class_.size())];
    slot = members[rng_.below(members.size())];
  }
  return batch;
}

std::vector<std::vector<std::size_t>> draw_batches(const BalancedDataset& ds,
                                                   const SamplerSpec& spec,
                                                   std::size_t n_batches) {
  BatchSampler sampler(ds, spec);
  std::vector<std::vector<std::size_t>> out;
  out.reserve(n_batches);
  for (std::size_t i = 0; i < n_batches; ++i) out.push_back(sampler.next_batch());
  return out;
}

namespace {

json reference_finetuning() {
  // Hyperparameters of the encoder finetuning this dataset is meant for.
  // Informational only; the bundled trainer does not use them.
  return json{{"model", "RoBERTa-base (123M)"},
              {"model_selection", "last"},
              {"batch_size", 32},
              {"optimizer", "adam"},
              {"learning_rate", 1e-5},
              {"lr_schedule", "6% warmup with linear decay"},
              {"adam_epsilon", 1e-8},
              {"adam_beta1", 0.9},
              {"adam_beta2", 0.999},
              {"weight_decay", 0},
              {"classifier_dropout", 0},
              {"attention_dropout", 0.1},
              {"hidden_dropout", 0.4},
              {"max_steps", 5000},
              {"batch_sampler", "inverse class frequency weighted sampling"}};
}

}  // namespace

DatasetManifest export_dataset(const BalancedDataset& ds, const std::filesystem::path& dir,
                               const ExportInfo& info) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IOError, "cannot create " + dir.string() + ": " + ec.message());

  std::string lines;
  for (const auto& ex : ds.examples) {
    lines += dump_line(json(ex));
    lines += '\n';
  }
  DatasetManifest m;
  m.dataset_path = dir / "dataset.jsonl";
  m.manifest_path = dir / "manifest.json";
  m.n_examples = ds.examples.size();
  m.per_class_counts = ds.per_class_counts;
  m.dataset_sha256 = sha256_hex(lines);

  json doc;
  doc["format"] = "patternmine-dataset-manifest/1";
  doc["tool"] = {{"name", "patternmine"}, {"version", PATTERNMINE_VERSION}};
  doc["task"] = {{"name", info.task_name}, {"sha256", info.task_sha256}};
  doc["inputs"] = info.input_digests;
  doc["dataset"] = {{"file", "dataset.jsonl"},
                    {"sha256", m.dataset_sha256},
                    {"n_examples", m.n_examples}};
  doc["cap"] = ds.cap;
  doc["seed"] = ds.seed;
  doc["balancing"] = {
      {"quota",
       "cap / n_verbalizers per class, remainder to the first verbalizers in declaration "
       "order; shortfall of under-supplied verbalizers redistributed until the cap is met "
       "or supply runs out"},
      {"selection", "seeded uniform sampling without replacement within each bucket"},
      {"order", "cap applied before filtering"}};
  doc["per_class_counts"] = ds.per_class_counts;
  doc["per_verbalizer_counts"] = ds.per_verbalizer_counts;
  doc["supply"] = ds.supply;
  doc["pre_filter_counts"] = info.pre_filter_counts ? json(*info.pre_filter_counts) : json(nullptr);
  doc["filter"] = info.filter ? json(*info.filter) : json(nullptr);
  doc["sampler"] = {{"strategy", kSamplerStrategy},
                    {"seed", info.sampler.seed},
                    {"batch_size", info.sampler.batch_size}};
  doc["reference_finetuning"] = reference_finetuning();
  m.json = dump_pretty(doc);

  write_text_file(m.dataset_path, lines);
  write_text_file(m.manifest_path, m.json);
  return m;
}

BalancedDataset load_dataset(const std::filesystem::path& dataset_jsonl, const TaskSpec& task) {
  BalancedDataset ds;
  ds.labels = task.labels();
  ds.examples = read_examples(dataset_jsonl);
  for (const auto& ex : ds.examples) {
    if (!task.has_label(ex.label)) {
      throw Error(ErrorCode::UnknownLabel, "dataset label \"" + ex.label + "\" not in task " + task.name);
    }
  }
  const auto manifest_path = dataset_jsonl.parent_path() / "manifest.json";
  std::error_code ec;
  if (std::filesystem::exists(manifest_path, ec)) {
    const json doc = json::parse(read_text_file(manifest_path), nullptr, false);
    if (doc.is_object()) {
      ds.cap = doc.value("cap", kDefaultClassCap);
      ds.seed = doc.value("seed", std::uint64_t{0});
      if (auto it = doc.find("supply"); it != doc.end() && it->is_object()) {
        ds.supply = it->get<CountsByVerbalizer>();
      }
    }
  }
  ds.recount();
  return ds;
}

}  // namespace patternmine
