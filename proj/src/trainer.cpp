#include "patternmine/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "patternmine/error.hpp"
#include "patternmine/json_io.hpp"
#include "patternmine/text_features.hpp"

namespace patternmine {

using nlohmann::json;

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.begin(), logits.end());
  if (out.empty()) return out;
  const double mx = *std::max_element(out.begin(), out.end());
  double sum = 0.0;
  for (double& v : out) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : out) v /= sum;
  return out;
}

void LinearModel::reindex() {
  index.clear();
  index.reserve(vocab.size());
  for (std::size_t i = 0; i < vocab.size(); ++i) index.emplace(vocab[i], static_cast<std::uint32_t>(i));
}

SparseVector LinearModel::featurize(std::span<const std::string> tokens) const {
  std::map<std::uint32_t, double> counts;
  for (const auto& t : tokens) {
    if (auto it = index.find(t); it != index.end()) counts[it->second] += 1.0;
  }
  return {counts.begin(), counts.end()};
}

std::vector<double> LinearModel::logits(const SparseVector& x) const {
  std::vector<double> z(bias);
  for (std::size_t c = 0; c < num_classes(); ++c) {
    const double* row = weights.data() + c * vocab.size();
    for (const auto& [j, v] : x) z[c] += row[j] * v;
  }
  return z;
}

std::vector<double> LinearModel::probabilities(const SparseVector& x) const {
  return softmax(logits(x));
}

std::size_t LinearModel::predict(const SparseVector& x) const {
  const auto z = logits(x);
  return static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
}

namespace {

// Softmax output minus one-hot target, per batch element; also returns the
// mean cross-entropy through `mean_ce`.
std::vector<std::vector<double>> residuals(const LinearModel& model, std::span<const SparseVector> xs,
                                           std::span<const std::size_t> ys, double& mean_ce) {
  std::vector<std::vector<double>> out;
  out.reserve(xs.size());
  double ce = 0.0;
  for (std::size_t b = 0; b < xs.size(); ++b) {
    auto z = model.logits(xs[b]);
    const double mx = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - mx);
    const double log_norm = mx + std::log(sum);
    ce += log_norm - z[ys[b]];
    for (double& v : z) v = std::exp(v - log_norm);
    z[ys[b]] -= 1.0;
    out.push_back(std::move(z));
  }
  mean_ce = xs.empty() ? 0.0 : ce / static_cast<double>(xs.size());
  return out;
}

double squared_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

}  // namespace

double batch_loss(const LinearModel& model, std::span<const SparseVector> xs,
                  std::span<const std::size_t> ys, double l2) {
  double ce = 0.0;
  residuals(model, xs, ys, ce);
  return ce + 0.5 * l2 * squared_norm(model.weights);
}

Gradient batch_gradient(const LinearModel& model, std::span<const SparseVector> xs,
                        std::span<const std::size_t> ys, double l2) {
  double ce = 0.0;
  const auto res = residuals(model, xs, ys, ce);
  Gradient g;
  g.weights.resize(model.weights.size());
  g.bias.assign(model.num_classes(), 0.0);
  for (std::size_t i = 0; i < g.weights.size(); ++i) g.weights[i] = l2 * model.weights[i];
  const double inv = xs.empty() ? 0.0 : 1.0 / static_cast<double>(xs.size());
  const std::size_t vocab = model.vocab_size();
  for (std::size_t b = 0; b < xs.size(); ++b) {
    for (std::size_t c = 0; c < model.num_classes(); ++c) {
      const double r = res[b][c] * inv;
      g.bias[c] += r;
      for (const auto& [j, v] : xs[b]) g.weights[c * vocab + j] += r * v;
    }
  }
  return g;
}

TrainResult train(const BalancedDataset& ds, const SamplerSpec& sampler,
                  const TrainOptions& options) {
  BatchSampler batches(ds, sampler);

  std::vector<std::vector<std::string>> tokens;
  tokens.reserve(ds.examples.size());
  std::map<std::string, std::size_t> freq;
  for (const auto& ex : ds.examples) {
    tokens.push_back(example_tokens(ex));
    for (const auto& t : tokens.back()) ++freq[t];
  }

  TrainResult result;
  LinearModel& model = result.model;
  model.labels = ds.labels;
  model.seed = sampler.seed;
  model.pair = !ds.examples.empty() && ds.examples.front().pair;
  for (const auto& [tok, count] : freq) {
    if (count >= options.min_frequency) model.vocab.push_back(tok);
  }
  if (model.vocab.empty()) {
    throw Error(ErrorCode::DegenerateVocabulary, "no token reaches the minimum frequency");
  }
  model.reindex();
  model.weights.assign(model.num_classes() * model.vocab_size(), 0.0);
  model.bias.assign(model.num_classes(), 0.0);

  std::vector<SparseVector> features;
  features.reserve(tokens.size());
  for (const auto& t : tokens) features.push_back(model.featurize(t));
  std::vector<std::size_t> targets;
  targets.reserve(ds.examples.size());
  for (const auto& ex : ds.examples) {
    targets.push_back(static_cast<std::size_t>(
        std::find(ds.labels.begin(), ds.labels.end(), ex.label) - ds.labels.begin()));
  }

  const double lr = options.learning_rate;
  const std::size_t vocab = model.vocab_size();
  std::vector<SparseVector> xs;
  std::vector<std::size_t> ys;
  result.batch_loss.reserve(options.steps);
  for (std::size_t step = 0; step < options.steps; ++step) {
    const auto batch = batches.next_batch();
    xs.clear();
    ys.clear();
    for (std::size_t i : batch) {
      xs.push_back(features[i]);
      ys.push_back(targets[i]);
    }
    double ce = 0.0;
    const auto res = residuals(model, xs, ys, ce);
    const double loss = ce + 0.5 * options.l2 * squared_norm(model.weights);
    if (!std::isfinite(loss)) {
      throw Error(ErrorCode::DivergenceDetected,
                  "loss became non-finite at step " + std::to_string(step));
    }
    result.batch_loss.push_back(loss);

    // W <- W - lr * (data gradient + l2 * W), with the decay applied densely
    // and the data term only where the batch has features.
    const double decay = 1.0 - lr * options.l2;
    if (decay != 1.0) {
      for (double& w : model.weights) w *= decay;
    }
    const double scale = lr / static_cast<double>(xs.size());
    for (std::size_t b = 0; b < xs.size(); ++b) {
      for (std::size_t c = 0; c < model.num_classes(); ++c) {
        const double r = res[b][c] * scale;
        if (r == 0.0) continue;
        model.bias[c] -= r;
        double* row = model.weights.data() + c * vocab;
        for (const auto& [j, v] : xs[b]) row[j] -= r * v;
      }
    }
  }
  for (double w : model.weights) {
    if (!std::isfinite(w)) throw Error(ErrorCode::DivergenceDetected, "non-finite weight after training");
  }
  return result;
}

std::vector<std::string> labeled_tokens(const LabeledExample& ex) {
  return ex.pair ? pair_tokens(ex.hyp, ex.prem) : tokenize(ex.text);
}

EvalResult evaluate(const LinearModel& model, std::span<const LabeledExample> labeled) {
  if (labeled.empty()) throw Error(ErrorCode::EmptyInput, "evaluation set is empty");
  EvalResult r;
  std::map<std::string, std::pair<std::size_t, std::size_t>> per_class;  // correct, total
  for (const auto& ex : labeled) {
    const auto it = std::find(model.labels.begin(), model.labels.end(), ex.label);
    if (it == model.labels.end()) {
      throw Error(ErrorCode::UnknownLabel, "evaluation label \"" + ex.label + "\" unknown to the model");
    }
    const auto gold = static_cast<std::size_t>(it - model.labels.begin());
    const bool correct = model.predict(model.featurize(labeled_tokens(ex))) == gold;
    r.n_correct += correct;
    auto& pc = per_class[ex.label];
    pc.first += correct;
    ++pc.second;
  }
  r.n_total = labeled.size();
  r.accuracy = static_cast<double>(r.n_correct) / static_cast<double>(r.n_total);
  for (const auto& [label, pc] : per_class) {
    r.per_class_accuracy[label] = static_cast<double>(pc.first) / static_cast<double>(pc.second);
  }
  return r;
}

void save_model(const LinearModel& model, const std::filesystem::path& path) {
  json weights = json::array();
  for (std::size_t c = 0; c < model.num_classes(); ++c) {
    weights.push_back(std::vector<double>(model.weights.begin() + static_cast<std::ptrdiff_t>(c * model.vocab_size()),
                                          model.weights.begin() + static_cast<std::ptrdiff_t>((c + 1) * model.vocab_size())));
  }
  json doc{{"format", "patternmine-linear-model/1"},
           {"labels", model.labels},
           {"vocab", model.vocab},
           {"weights", std::move(weights)},
           {"bias", model.bias},
           {"seed", model.seed},
           {"pair", model.pair}};
  write_text_file(path, dump_line(doc) + "\n");
}

LinearModel load_model(const std::filesystem::path& path) {
  LinearModel m;
  try {
    const json doc = json::parse(read_text_file(path));
    doc.at("labels").get_to(m.labels);
    doc.at("vocab").get_to(m.vocab);
    doc.at("bias").get_to(m.bias);
    m.seed = doc.value("seed", std::uint64_t{0});
    m.pair = doc.value("pair", false);
    const auto rows = doc.at("weights").get<std::vector<std::vector<double>>>();
    if (rows.size() != m.labels.size() || m.bias.size() != m.labels.size()) {
      throw Error(ErrorCode::IOError, path.string() + ": weight rows do not match labels");
    }
    for (const auto& row : rows) {
      if (row.size() != m.vocab.size()) {
        throw Error(ErrorCode::IOError, path.string() + ": weight row width does not match vocabulary");
      }
      m.weights.insert(m.weights.end(), row.begin(), row.end());
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::IOError, path.string() + ": malformed model: " + e.what());
  }
  m.reindex();
  if (m.index.size() != m.vocab.size()) {
    throw Error(ErrorCode::IOError, path.string() + ": duplicate vocabulary entries");
  }
  return m;
}

std::vector<LabeledExample> read_labeled(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IOError, "cannot open " + path.string());
  std::vector<LabeledExample> out;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      LabeledExample ex;
      j.at("label").get_to(ex.label);
      ex.pair = j.contains("hyp");
      if (ex.pair) {
        j.at("hyp").get_to(ex.hyp);
        j.at("prem").get_to(ex.prem);
      } else {
        j.at("text").get_to(ex.text);
      }
      out.push_back(std::move(ex));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::IOError,
                  path.string() + ":" + std::to_string(n) + ": malformed labeled example: " + e.what());
    }
  }
  return out;
}

void write_labeled(const std::filesystem::path& path, std::span<const LabeledExample> labeled) {
  std::string text;
  for (const auto& ex : labeled) {
    json j{{"label", ex.label}};
    if (ex.pair) {
      j["hyp"] = ex.hyp;
      j["prem"] = ex.prem;
    } else {
      j["text"] = ex.text;
    }
    text += dump_line(j) + "\n";
  }
  write_text_file(path, text);
}

}  // namespace patternmine
