#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kgbench/diagnostics.hpp"
#include "kgbench/graph.hpp"
#include "kgbench/text.hpp"

namespace kgbench {

enum class TaskKind { document, web };

enum class TaskType {
  information_extraction,
  comprehension,
  summarization,
  question_answering,
  multi_hop_reasoning,
  comparison,
  analysis,
  reasoning,
  fact_verification,
  figure_interpretation,
  table_qa,
  cross_reference,
};

enum class Difficulty { Easy, Medium, Hard, Expert };

inline const char* to_string(TaskKind k) { return k == TaskKind::document ? "document" : "web"; }

inline const char* to_string(TaskType t) {
  switch (t) {
    case TaskType::information_extraction: return "information_extraction";
    case TaskType::comprehension: return "comprehension";
    case TaskType::summarization: return "summarization";
    case TaskType::question_answering: return "question_answering";
    case TaskType::multi_hop_reasoning: return "multi_hop_reasoning";
    case TaskType::comparison: return "comparison";
    case TaskType::analysis: return "analysis";
    case TaskType::reasoning: return "reasoning";
    case TaskType::fact_verification: return "fact_verification";
    case TaskType::figure_interpretation: return "figure_interpretation";
    case TaskType::table_qa: return "table_qa";
    case TaskType::cross_reference: return "cross_reference";
  }
  return "?";
}

inline const char* to_string(Difficulty d) {
  switch (d) {
    case Difficulty::Easy: return "Easy";
    case Difficulty::Medium: return "Medium";
    case Difficulty::Hard: return "Hard";
    case Difficulty::Expert: return "Expert";
  }
  return "?";
}

inline const std::vector<TaskType>& all_task_types() {
  static const std::vector<TaskType> kAll = {
      TaskType::information_extraction, TaskType::comprehension,  TaskType::summarization,
      TaskType::question_answering,     TaskType::multi_hop_reasoning, TaskType::comparison,
      TaskType::analysis,               TaskType::reasoning,      TaskType::fact_verification,
      TaskType::figure_interpretation,  TaskType::table_qa,       TaskType::cross_reference};
  return kAll;
}

inline std::optional<TaskKind> task_kind_from_string(std::string_view s) {
  if (s == "document") return TaskKind::document;
  if (s == "web") return TaskKind::web;
  return std::nullopt;
}

inline std::optional<TaskType> task_type_from_string(std::string_view s) {
  for (TaskType t : all_task_types())
    if (s == to_string(t)) return t;
  return std::nullopt;
}

inline std::optional<Difficulty> difficulty_from_string(std::string_view s) {
  for (Difficulty d : {Difficulty::Easy, Difficulty::Medium, Difficulty::Hard, Difficulty::Expert})
    if (s == to_string(d)) return d;
  return std::nullopt;
}

inline int difficulty_index(Difficulty d) { return static_cast<int>(d); }

enum class WebAction { navigate, click, input, select, wait, assert_visible, extract };

inline const char* to_string(WebAction a) {
  switch (a) {
    case WebAction::navigate: return "navigate";
    case WebAction::click: return "click";
    case WebAction::input: return "input";
    case WebAction::select: return "select";
    case WebAction::wait: return "wait";
    case WebAction::assert_visible: return "assert_visible";
    case WebAction::extract: return "extract";
  }
  return "?";
}

inline std::optional<WebAction> web_action_from_string(std::string_view s) {
  for (WebAction a : {WebAction::navigate, WebAction::click, WebAction::input, WebAction::select,
                      WebAction::wait, WebAction::assert_visible, WebAction::extract})
    if (s == to_string(a)) return a;
  return std::nullopt;
}

struct WebStep {
  int index = 0;
  WebAction action = WebAction::click;
  std::string target;  // selector, or URL for navigate
  std::string value;   // input / select only
};

struct Provenance {
  std::string source_id;  // template_id or pattern_id
  std::vector<std::string> subgraph_nodes;
  std::string generator = "template";  // "template" | "llm"
};

struct Task {
  std::string task_id;
  TaskKind kind = TaskKind::document;
  TaskType type = TaskType::comprehension;
  Difficulty difficulty = Difficulty::Easy;
  std::string prompt;
  std::optional<std::string> gold_answer;  // document tasks
  std::vector<std::string> citations;
  std::vector<WebStep> web_steps;  // web tasks
  std::optional<std::string> chain_name;
  Provenance provenance;
  std::map<std::string, std::string> metadata;
};

// Pure function of provenance and content: regeneration under the same seed
// is byte-identical, and the id doubles as a stable sort key.
inline std::string compute_task_id(const Task& task) {
  std::uint64_t h = fnv1a64(to_string(task.kind));
  h = fnv1a64(task.provenance.source_id, h);
  std::vector<std::string> nodes = task.provenance.subgraph_nodes;
  std::sort(nodes.begin(), nodes.end());
  for (const std::string& id : nodes) h = fnv1a64(id, h);
  h = fnv1a64(task.prompt, h);
  if (task.gold_answer) h = fnv1a64(*task.gold_answer, h);
  for (const WebStep& step : task.web_steps) {
    h = fnv1a64(to_string(step.action), h);
    h = fnv1a64(step.target, h);
    h = fnv1a64(step.value, h);
  }
  if (task.chain_name) h = fnv1a64(*task.chain_name, h);
  return "task_" + hex64(h);
}

inline json task_to_json(const Task& task) {
  json j;
  j["task_id"] = task.task_id;
  j["kind"] = to_string(task.kind);
  j["task_type"] = to_string(task.type);
  j["difficulty"] = to_string(task.difficulty);
  j["prompt"] = task.prompt;
  if (task.gold_answer) j["gold_answer"] = *task.gold_answer;
  j["citations"] = task.citations;
  if (!task.web_steps.empty()) {
    json steps = json::array();
    for (const WebStep& s : task.web_steps) {
      json step{{"index", s.index}, {"action", to_string(s.action)}, {"target", s.target}};
      if (!s.value.empty()) step["value"] = s.value;
      steps.push_back(std::move(step));
    }
    j["web_steps"] = std::move(steps);
  }
  if (task.chain_name) j["chain_name"] = *task.chain_name;
  j["provenance"] = json{{"source_id", task.provenance.source_id},
                         {"subgraph_nodes", task.provenance.subgraph_nodes},
                         {"generator", task.provenance.generator}};
  j["metadata"] = task.metadata;
  return j;
}

// Strict reader: unknown fields are rejected, enums validated, invariants
// (gold for document tasks, steps for web tasks) enforced.
inline Task task_from_json(const json& j) {
  Graph::check_keys(j, {"task_id", "kind", "task_type", "difficulty", "prompt", "gold_answer", "citations",
                        "web_steps", "chain_name", "provenance", "metadata"},
                    "task record");
  Task task;
  task.task_id = j.at("task_id").get<std::string>();
  auto kind = task_kind_from_string(j.at("kind").get<std::string>());
  if (!kind) throw ValidationError("task " + task.task_id + ": unknown kind");
  task.kind = *kind;
  auto type = task_type_from_string(j.at("task_type").get<std::string>());
  if (!type) throw ValidationError("task " + task.task_id + ": unknown task_type");
  task.type = *type;
  auto difficulty = difficulty_from_string(j.at("difficulty").get<std::string>());
  if (!difficulty) throw ValidationError("task " + task.task_id + ": unknown difficulty");
  task.difficulty = *difficulty;
  task.prompt = j.at("prompt").get<std::string>();
  if (j.contains("gold_answer")) task.gold_answer = j["gold_answer"].get<std::string>();
  task.citations = j.at("citations").get<std::vector<std::string>>();
  if (j.contains("web_steps")) {
    for (const json& s : j["web_steps"]) {
      Graph::check_keys(s, {"index", "action", "target", "value"}, "web step");
      WebStep step;
      step.index = s.at("index").get<int>();
      auto action = web_action_from_string(s.at("action").get<std::string>());
      if (!action) throw ValidationError("task " + task.task_id + ": unknown web action");
      step.action = *action;
      step.target = s.at("target").get<std::string>();
      step.value = s.value("value", "");
      task.web_steps.push_back(std::move(step));
    }
  }
  if (j.contains("chain_name")) task.chain_name = j["chain_name"].get<std::string>();
  const json& prov = j.at("provenance");
  Graph::check_keys(prov, {"source_id", "subgraph_nodes", "generator"}, "task provenance");
  task.provenance.source_id = prov.at("source_id").get<std::string>();
  task.provenance.subgraph_nodes = prov.at("subgraph_nodes").get<std::vector<std::string>>();
  task.provenance.generator = prov.at("generator").get<std::string>();
  task.metadata = j.at("metadata").get<std::map<std::string, std::string>>();

  if (task.kind == TaskKind::document) {
    if (!task.gold_answer) throw ValidationError("task " + task.task_id + ": document task without gold_answer");
    if (!task.web_steps.empty())
      throw ValidationError("task " + task.task_id + ": document task must not carry web_steps");
  } else {
    if (task.web_steps.empty()) throw ValidationError("task " + task.task_id + ": web task without steps");
    for (std::size_t i = 0; i < task.web_steps.size(); ++i) {
      if (task.web_steps[i].index != static_cast<int>(i))
        throw ValidationError("task " + task.task_id + ": non-contiguous step indexes");
      WebAction a = task.web_steps[i].action;
      if ((a == WebAction::input || a == WebAction::select) && task.web_steps[i].value.empty())
        throw ValidationError("task " + task.task_id + ": input/select step without value");
    }
  }
  return task;
}

inline void write_tasks_jsonl(const std::vector<Task>& tasks, std::ostream& out) {
  for (const Task& task : tasks) out << task_to_json(task).dump() << "\n";
}

inline std::vector<Task> read_tasks_jsonl(std::istream& in) {
  std::vector<Task> tasks;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw ValidationError("tasks line " + std::to_string(lineno) + ": malformed JSON");
    tasks.push_back(task_from_json(j));
  }
  return tasks;
}

struct PageContext {
  struct Mark {
    std::string mark_id;
    std::string selector;
    std::string kind;
    std::string text;
  };
  std::string url;
  std::string title;
  std::vector<Mark> marks;
  std::string screenshot_ref;

  std::string marked_element_table() const {
    std::string out;
    for (const Mark& m : marks)
      out += m.mark_id + "\t" + m.kind + "\t" + m.selector + "\t" + m.text + "\n";
    return out;
  }
};

}  // namespace kgbench
