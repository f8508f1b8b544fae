#include "patternmine/task.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "patternmine/digest.hpp"
#include "patternmine/error.hpp"
#include "patternmine/text_util.hpp"

namespace patternmine {

using nlohmann::json;

std::string_view to_string(Arity arity) {
  return arity == Arity::single_input ? "single" : "pair";
}

Arity arity_from_string(std::string_view text) {
  if (text == "single") return Arity::single_input;
  if (text == "pair") return Arity::pair_input;
  throw Error(ErrorCode::InvalidTask,
              "arity must be \"single\" or \"pair\", got \"" + std::string(text) + "\"");
}

std::vector<std::string> TaskSpec::labels() const {
  std::vector<std::string> out;
  out.reserve(classes.size());
  for (const auto& c : classes) out.push_back(c.label);
  return out;
}

std::size_t TaskSpec::class_index(std::string_view label) const {
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (classes[i].label == label) return i;
  }
  throw Error(ErrorCode::UnknownLabel,
              "label \"" + std::string(label) + "\" is not a class of task " + name);
}

bool TaskSpec::has_label(std::string_view label) const {
  return std::any_of(classes.begin(), classes.end(),
                     [&](const VerbalizerSet& c) { return c.label == label; });
}

void validate(const TaskSpec& task) {
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::InvalidTask, "task " + task.name + ": " + what);
  };
  if (task.patterns.empty()) fail("no patterns");
  if (task.classes.empty()) fail("no classes");
  std::map<std::string, std::string> owner;  // lowercased verbalizer -> label
  std::vector<std::string> seen_labels;
  for (const auto& c : task.classes) {
    if (c.label.empty()) fail("empty class label");
    if (std::find(seen_labels.begin(), seen_labels.end(), c.label) != seen_labels.end()) {
      fail("duplicate label \"" + c.label + "\"");
    }
    seen_labels.push_back(c.label);
    if (c.verbalizers.empty()) fail("class \"" + c.label + "\" has no verbalizers");
    for (const auto& v : c.verbalizers) {
      if (v.empty()) fail("empty verbalizer in class \"" + c.label + "\"");
      if (std::any_of(v.begin(), v.end(), is_terminator)) {
        fail("verbalizer \"" + v + "\" contains a sentence terminator");
      }
      if (trim(v).size() != v.size()) {
        fail("verbalizer \"" + v + "\" has surrounding whitespace");
      }
      auto [it, inserted] = owner.emplace(ascii_lowercase(v), c.label);
      if (!inserted) {
        fail("verbalizer \"" + v + "\" appears under both \"" + it->second + "\" and \"" +
             c.label + "\"");
      }
    }
  }
}

TaskSpec parse_task(std::string_view json_text) {
  json doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(ErrorCode::InvalidTask, "task definition is not a JSON object");
  }
  TaskSpec task;
  try {
    task.name = doc.at("task").get<std::string>();
    task.arity = arity_from_string(doc.at("arity").get<std::string>());
    task.patterns = doc.at("patterns").get<std::vector<std::string>>();
    for (const auto& c : doc.at("classes")) {
      task.classes.push_back({c.at("label").get<std::string>(),
                              c.at("verbalizers").get<std::vector<std::string>>()});
    }
    task.swap_roles = doc.value("swap_roles", false);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidTask, std::string("task definition: ") + e.what());
  }
  validate(task);
  return task;
}

TaskSpec load_task(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IOError, "cannot open task file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  TaskSpec task = parse_task(text);
  task.source_sha256 = sha256_hex(text);
  return task;
}

std::string task_to_json(const TaskSpec& task) {
  json doc;
  doc["task"] = task.name;
  doc["arity"] = std::string(to_string(task.arity));
  doc["patterns"] = task.patterns;
  doc["swap_roles"] = task.swap_roles;
  json classes = json::array();
  for (const auto& c : task.classes) {
    classes.push_back({{"label", c.label}, {"verbalizers", c.verbalizers}});
  }
  doc["classes"] = std::move(classes);
  return doc.dump(2);
}

}  // namespace patternmine
