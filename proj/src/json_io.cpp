#include "patternmine/json_io.hpp"

#include <fstream>
#include <sstream>

#include "patternmine/error.hpp"

namespace patternmine {

using nlohmann::json;

void to_json(json& j, const ExampleRef& ref) {
  j = json{{"shard_id", ref.shard_id}, {"doc_index", ref.doc_index}, {"byte_offset", ref.byte_offset}};
}

void from_json(const json& j, ExampleRef& ref) {
  j.at("shard_id").get_to(ref.shard_id);
  j.at("doc_index").get_to(ref.doc_index);
  j.at("byte_offset").get_to(ref.byte_offset);
}

void to_json(json& j, const MinedExample& ex) {
  to_json(j, ex.ref);
  j["label"] = ex.label;
  j["verbalizer"] = ex.verbalizer;
  if (ex.pair) {
    j["hyp"] = ex.hyp;
    j["prem"] = ex.prem;
  } else {
    j["input"] = ex.input;
  }
  j["matched_span"] = ex.matched_span;
  j["pattern_index"] = ex.pattern_index;
}

void from_json(const json& j, MinedExample& ex) {
  from_json(j, ex.ref);
  j.at("label").get_to(ex.label);
  j.at("verbalizer").get_to(ex.verbalizer);
  ex.pair = j.contains("hyp");
  if (ex.pair) {
    j.at("hyp").get_to(ex.hyp);
    j.at("prem").get_to(ex.prem);
  } else {
    j.at("input").get_to(ex.input);
  }
  ex.matched_span = j.value("matched_span", std::string{});
  ex.pattern_index = j.value("pattern_index", std::uint64_t{0});
}

void to_json(json& j, const MiningStats& s) {
  j = json{{"shards_total", s.shards_total},
           {"shards_processed", s.shards_processed},
           {"documents", s.documents},
           {"bytes", s.bytes},
           {"malformed_records", s.malformed_records},
           {"raw_matches", s.raw_matches},
           {"dropped_too_short", s.dropped_too_short},
           {"offset_collisions", s.offset_collisions},
           {"duplicates_removed", s.duplicates_removed},
           {"stopped_early", s.stopped_early},
           {"per_bucket", s.per_bucket}};
}

void to_json(json& j, const ScoreRecord& r) {
  j = json{{"example_ref", r.example_ref},
           {"predicted_label", r.predicted_label},
           {"confidence", r.confidence}};
  if (r.per_class_probs) j["per_class_probs"] = *r.per_class_probs;
}

void from_json(const json& j, ScoreRecord& r) {
  j.at("example_ref").get_to(r.example_ref);
  j.at("predicted_label").get_to(r.predicted_label);
  j.at("confidence").get_to(r.confidence);
  r.per_class_probs.reset();
  if (auto it = j.find("per_class_probs"); it != j.end() && !it->is_null()) {
    r.per_class_probs = it->get<std::map<std::string, double>>();
  }
}

void to_json(json& j, const FilterReport& r) {
  j = json{{"n_examples", r.n_examples},
           {"n_mismatches", r.n_mismatches},
           {"n_removed", r.n_removed},
           {"removal_fraction", r.removal_fraction},
           {"per_class", r.per_class},
           {"agreement_pct", r.agreement_pct},
           {"rounding", "floor"}};
  j["confidence_threshold_used"] =
      r.confidence_threshold_used ? json(*r.confidence_threshold_used) : json(nullptr);
}

void to_json(json& j, const EvalResult& r) {
  j = json{{"accuracy", r.accuracy},
           {"n_correct", r.n_correct},
           {"n_total", r.n_total},
           {"per_class_accuracy", r.per_class_accuracy}};
}

std::string dump_line(const json& j) {
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::string dump_pretty(const json& j) {
  return j.dump(2, ' ', false, json::error_handler_t::replace) + "\n";
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IOError, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::IOError, "write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IOError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_examples(const std::filesystem::path& path, std::span<const MinedExample> examples) {
  std::string text;
  for (const auto& ex : examples) {
    text += dump_line(json(ex));
    text += '\n';
  }
  write_text_file(path, text);
}

std::vector<MinedExample> read_examples(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IOError, "cannot open " + path.string());
  std::vector<MinedExample> out;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line).get<MinedExample>());
    } catch (const json::exception& e) {
      throw Error(ErrorCode::IOError,
                  path.string() + ":" + std::to_string(n) + ": malformed example: " + e.what());
    }
  }
  return out;
}

}  // namespace patternmine
