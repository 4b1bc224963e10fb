#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kgbench/diagnostics.hpp"
#include "kgbench/embedding.hpp"
#include "kgbench/gateway.hpp"
#include "kgbench/graph.hpp"
#include "kgbench/task.hpp"
#include "kgbench/text.hpp"

namespace kgbench {

// --- token-overlap metrics ---------------------------------------------------

// Token F1 between predicted and gold spans. Multiset intersection by
// default (the standard QA convention; it penalizes token stuffing); the
// flag switches to set semantics. Both sides empty scores 1, exactly one
// empty scores 0.
inline double token_f1(std::string_view pred, std::string_view gold, bool multiset = true) {
  auto p = token_multiset(pred);
  auto g = token_multiset(gold);
  std::size_t p_total = 0, g_total = 0, overlap = 0;
  for (const auto& [t, c] : p) p_total += multiset ? c : 1;
  for (const auto& [t, c] : g) g_total += multiset ? c : 1;
  for (const auto& [t, c] : p) {
    auto it = g.find(t);
    if (it != g.end()) overlap += multiset ? std::min(c, it->second) : 1;
  }
  if (p_total == 0 && g_total == 0) return 1.0;
  if (p_total == 0 || g_total == 0) return 0.0;
  if (overlap == 0) return 0.0;
  double precision = static_cast<double>(overlap) / static_cast<double>(p_total);
  double recall = static_cast<double>(overlap) / static_cast<double>(g_total);
  return 2.0 * precision * recall / (precision + recall);
}

inline std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::size_t> previous(b.size() + 1, 0), current(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      current[j] = a[i - 1] == b[j - 1] ? previous[j - 1] + 1 : std::max(previous[j], current[j - 1]);
    }
    std::swap(previous, current);
  }
  return previous[b.size()];
}

// ROUGE-L over token-level LCS:
//   (1 + beta^2) * R * P / (R + beta^2 * P),  R = LCS/|gold|, P = LCS/|pred|.
inline double rouge_l(std::string_view pred, std::string_view gold, double beta = 1.0) {
  auto p = tokenize(pred);
  auto g = tokenize(gold);
  if (p.empty() && g.empty()) return 1.0;
  if (p.empty() || g.empty()) return 0.0;
  std::size_t lcs = lcs_length(p, g);
  if (lcs > std::min(p.size(), g.size())) throw Error("rouge_l: LCS exceeded operand length");
  if (lcs == 0) return 0.0;
  double recall = static_cast<double>(lcs) / static_cast<double>(g.size());
  double precision = static_cast<double>(lcs) / static_cast<double>(p.size());
  return (1.0 + beta * beta) * recall * precision / (recall + beta * beta * precision);
}

// --- judge prompts -----------------------------------------------------------

// Assembled byte-for-byte; golden-file tests pin the exact output.
inline std::string build_answer_judge_prompt(const std::string& task_prompt, const std::string& gold_answer,
                                             const std::string& pred_answer) {
  return "You are an expert evaluator assessing the quality of an AI-generated answer. Please evaluate "
         "the following:\n"
         "\n"
         "TASK: " + task_prompt + "\n"
         "GOLD STANDARD ANSWER: " + gold_answer + "\n"
         "GENERATED ANSWER: " + pred_answer + "\n"
         "\n"
         "Rate the generated answer on these 3 key dimensions (0.0 to 1.0):\n"
         "\n"
         "1. ANSWER_QUALITY: Overall quality and accuracy of the answer compared to the gold standard\n"
         "2. RELEVANCE: How well the answer addresses the specific task/question\n"
         "3. COMPLETENESS: How complete and comprehensive the answer is\n"
         "\n"
         "Provide your assessment in JSON format:\n"
         "{\n"
         "    \"answer_quality\": <score>,\n"
         "    \"relevance\": <score>,\n"
         "    \"completeness\": <score>\n"
         "}\n"
         "\n"
         "Be objective and focus on the most important aspects of answer quality.";
}

struct Trajectory {
  std::vector<std::string> actions;
  bool success = false;
  std::string error_message;
  std::string final_url;
  std::string final_title;
};

inline std::string build_trajectory_judge_prompt(const std::string& task_prompt, const std::string& task_id,
                                                 const Trajectory& trajectory) {
  std::string header = task_prompt.empty() ? "Complete task: " + task_id : task_prompt;
  std::string actions;
  for (std::size_t i = 0; i < trajectory.actions.size(); ++i) {
    if (i > 0) actions += "\n";
    actions += "- " + trajectory.actions[i];
  }
  return "Task: " + header + "\n"
         "\n"
         "Execution Summary:\n"
         "- Actions executed: " + std::to_string(trajectory.actions.size()) + "\n"
         "- Success: " + (trajectory.success ? "True" : "False") + "\n"
         "- Error message: " + (trajectory.error_message.empty() ? "None" : trajectory.error_message) + "\n"
         "\n"
         "Current page URL: " + (trajectory.final_url.empty() ? "Unknown" : trajectory.final_url) + "\n"
         "Current page title: " + (trajectory.final_title.empty() ? "Unknown" : trajectory.final_title) + "\n"
         "\n"
         "Actions executed:\n" + actions + "\n"
         "\n"
         "Please evaluate if the task has been completed successfully by analyzing the current page state. "
         "Consider:\n"
         "1. Whether all required actions were performed\n"
         "2. Whether the final state matches the task requirements\n"
         "3. Whether any errors occurred that prevent completion\n"
         "4. Whether the current page content indicates task completion\n"
         "\n"
         "Respond with valid JSON format (no markdown, no code blocks):\n"
         "{\n"
         "    \"task_completed\": true,\n"
         "    \"confidence\": 0.8,\n"
         "    \"reasoning\": \"explanation of your evaluation\",\n"
         "    \"missing_actions\": [\"list of any missing actions\"],\n"
         "    \"final_state_analysis\": \"description of current page state\"\n"
         "}";
}

// --- verdict parsing ---------------------------------------------------------

struct JudgeVerdict {
  double answer_quality = 0.0;
  double relevance = 0.0;
  double completeness = 0.0;

  double aggregate() const { return (answer_quality + relevance + completeness) / 3.0; }
};

struct TrajectoryVerdict {
  bool task_completed = false;
  double confidence = 0.0;
  std::string reasoning;
  std::vector<std::string> missing_actions;
  std::string final_state_analysis;
};

inline std::string strip_code_fences(std::string_view text) {
  std::string t = trim(text);
  if (starts_with(t, "```")) {
    std::size_t newline = t.find('\n');
    t = newline == std::string::npos ? "" : t.substr(newline + 1);
    std::size_t fence = t.rfind("```");
    if (fence != std::string::npos) t = t.substr(0, fence);
  }
  return trim(t);
}

namespace metricsdetail {

inline std::optional<json> parse_strict_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (!j.is_discarded()) return j;
  j = json::parse(strip_code_fences(text), nullptr, false);
  if (!j.is_discarded()) return j;
  return std::nullopt;
}

inline double clamp_score(double x, const char* name, Diagnostics* diags) {
  if (x < 0.0 || x > 1.0) {
    warn(diags, std::string("judge score ") + name + " out of range; clamped");
    return std::min(1.0, std::max(0.0, x));
  }
  return x;
}

inline std::optional<JudgeVerdict> parse_answer_verdict(const std::string& text, Diagnostics* diags) {
  auto j = parse_strict_json(text);
  if (!j) return std::nullopt;
  if (!j->contains("answer_quality") || !j->contains("relevance") || !j->contains("completeness"))
    return std::nullopt;
  if (!(*j)["answer_quality"].is_number() || !(*j)["relevance"].is_number() ||
      !(*j)["completeness"].is_number())
    return std::nullopt;
  JudgeVerdict v;
  v.answer_quality = clamp_score((*j)["answer_quality"].get<double>(), "answer_quality", diags);
  v.relevance = clamp_score((*j)["relevance"].get<double>(), "relevance", diags);
  v.completeness = clamp_score((*j)["completeness"].get<double>(), "completeness", diags);
  return v;
}

inline std::optional<TrajectoryVerdict> parse_trajectory_verdict(const std::string& text,
                                                                 Diagnostics* diags) {
  auto j = parse_strict_json(text);
  if (!j) return std::nullopt;
  if (!j->contains("task_completed") || !(*j)["task_completed"].is_boolean()) return std::nullopt;
  if (!j->contains("confidence") || !(*j)["confidence"].is_number()) return std::nullopt;
  TrajectoryVerdict v;
  v.task_completed = (*j)["task_completed"].get<bool>();
  v.confidence = clamp_score((*j)["confidence"].get<double>(), "confidence", diags);
  v.reasoning = j->value("reasoning", "");
  if (j->contains("missing_actions") && (*j)["missing_actions"].is_array())
    for (const json& a : (*j)["missing_actions"]) v.missing_actions.push_back(a.get<std::string>());
  v.final_state_analysis = j->value("final_state_analysis", "");
  return v;
}

template <typename Verdict, typename Parser>
std::optional<Verdict> judged_with_repair(LlmGateway& gateway, Purpose purpose, const std::string& prompt,
                                          Parser parse, Diagnostics* diags) {
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::string text = prompt;
    if (attempt == 1) text += "\n\nRespond with valid JSON only";
    try {
      Completion completion = gateway.complete(make_user_request("", text), purpose);
      auto verdict = parse(completion.text, diags);
      if (verdict) return verdict;
      warn(diags, std::string("judge returned unparseable verdict (attempt ") +
                      std::to_string(attempt + 1) + ")");
    } catch (const Error& e) {
      warn(diags, std::string("judge request failed: ") + e.what());
    }
  }
  return std::nullopt;
}

}  // namespace metricsdetail

// LLM-as-judge for document answers: prompt per the fixed template, strict
// JSON parse, one repair retry; two failures leave the verdict missing.
inline std::optional<JudgeVerdict> judge_answer(const Task& task, const std::string& pred_answer,
                                                LlmGateway& gateway, Diagnostics* diags = nullptr) {
  if (task.kind != TaskKind::document || !task.gold_answer)
    throw Error("judge_answer: needs a document task with a gold answer");
  std::string prompt = build_answer_judge_prompt(task.prompt, *task.gold_answer, pred_answer);
  return metricsdetail::judged_with_repair<JudgeVerdict>(
      gateway, Purpose::judge_answer, prompt, metricsdetail::parse_answer_verdict, diags);
}

inline std::optional<TrajectoryVerdict> judge_trajectory(const Task& task, const Trajectory& trajectory,
                                                         LlmGateway& gateway, Diagnostics* diags = nullptr) {
  if (task.kind != TaskKind::web) throw Error("judge_trajectory: needs a web task");
  std::string prompt = build_trajectory_judge_prompt(task.prompt, task.task_id, trajectory);
  return metricsdetail::judged_with_repair<TrajectoryVerdict>(
      gateway, Purpose::judge_trajectory, prompt, metricsdetail::parse_trajectory_verdict, diags);
}

inline double success_rate(const std::vector<TrajectoryVerdict>& verdicts) {
  if (verdicts.empty()) throw Error("success_rate: no verdicts");
  std::size_t completed = 0;
  for (const TrajectoryVerdict& v : verdicts)
    if (v.task_completed) ++completed;
  return static_cast<double>(completed) / static_cast<double>(verdicts.size());
}

// --- trajectories file -------------------------------------------------------

inline std::map<std::string, Trajectory> read_trajectories_jsonl(std::istream& in) {
  std::map<std::string, Trajectory> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw ValidationError("trajectories line " + std::to_string(lineno) + ": malformed JSON");
    Graph::check_keys(j, {"task_id", "actions", "success", "error_message", "final_url", "final_title"},
                      "trajectory record");
    Trajectory t;
    t.actions = j.at("actions").get<std::vector<std::string>>();
    t.success = j.at("success").get<bool>();
    t.error_message = j.value("error_message", "");
    t.final_url = j.value("final_url", "");
    t.final_title = j.value("final_title", "");
    out[j.at("task_id").get<std::string>()] = std::move(t);
  }
  return out;
}

// --- reference agent ---------------------------------------------------------

// Minimal retrieve-then-respond agent for document tasks: top-k semantic
// chunks by cosine against the prompt embedding, then one completion. Under
// the mock gateway the answer is the top-1 chunk, a deterministic baseline.
inline std::string run_reference_agent(const Task& task, const Graph& graph, const Embedder& embedder,
                                       LlmGateway& gateway, std::size_t top_k = 3) {
  if (task.kind != TaskKind::document) throw Error("run_reference_agent: document tasks only");
  if (top_k == 0) throw Error("run_reference_agent: top_k must be >= 1");
  auto query = embedder.embed(task.prompt);
  auto ranked = graph.index().knn_query(query, graph.index().size() == 0 ? 1 : graph.index().size());
  std::vector<const Node*> chunks;
  for (const auto& [id, sim] : ranked) {
    (void)sim;
    const Node& node = graph.node(id);
    if (node.kind.category == NodeCategory::SemanticChunk) chunks.push_back(&node);
    if (chunks.size() == top_k) break;
  }
  if (chunks.empty()) throw Error("run_reference_agent: retrieval found no chunks");
  if (gateway.is_mock()) return chunks.front()->text;

  std::string prompt = "Answer the question using only the context below. Cite nothing else.\n\nContext:\n";
  for (const Node* chunk : chunks) prompt += chunk->text + "\n\n";
  prompt += "Question:\n" + task.prompt + "\n\nAnswer:";
  return gateway.complete(make_user_request("", prompt), Purpose::doc_task).text;
}

// --- evaluation report -------------------------------------------------------

struct EvalRow {
  std::string task_id;
  TaskKind kind = TaskKind::document;
  std::optional<double> f1;
  std::optional<double> rouge_l;
  std::optional<double> judge_aggregate;
  std::optional<bool> task_completed;
  std::string error;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  std::size_t judge_missing = 0;
  Usage usage;

  template <typename Getter>
  std::optional<double> mean_of(Getter get) const {
    double sum = 0.0;
    std::size_t n = 0;
    for (const EvalRow& row : rows) {
      auto v = get(row);
      if (v) {
        sum += *v;
        ++n;
      }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
  }

  json to_json() const {
    json out;
    json rows_json = json::array();
    for (const EvalRow& row : rows) {
      json r{{"task_id", row.task_id}, {"kind", to_string(row.kind)}};
      if (row.f1) r["f1"] = *row.f1;
      if (row.rouge_l) r["rouge_l"] = *row.rouge_l;
      if (row.judge_aggregate) r["llm_judge"] = *row.judge_aggregate;
      if (row.task_completed) r["task_completed"] = *row.task_completed;
      if (!row.error.empty()) r["error"] = row.error;
      rows_json.push_back(std::move(r));
    }
    out["rows"] = std::move(rows_json);
    json aggregates = json::object();
    if (auto m = mean_of([](const EvalRow& r) { return r.f1; })) aggregates["mean_f1"] = *m;
    if (auto m = mean_of([](const EvalRow& r) { return r.rouge_l; })) aggregates["mean_rouge_l"] = *m;
    if (auto m = mean_of([](const EvalRow& r) { return r.judge_aggregate; }))
      aggregates["mean_llm_judge"] = *m;
    std::size_t web_total = 0, web_completed = 0;
    for (const EvalRow& row : rows) {
      if (row.task_completed) {
        ++web_total;
        if (*row.task_completed) ++web_completed;
      }
    }
    if (web_total > 0)
      aggregates["success_rate"] = static_cast<double>(web_completed) / static_cast<double>(web_total);
    aggregates["judge_missing"] = judge_missing;
    out["aggregates"] = std::move(aggregates);
    out["usage"] =
        json{{"prompt_tokens", usage.prompt_tokens}, {"completion_tokens", usage.completion_tokens}};
    return out;
  }

  std::string to_csv() const {
    std::ostringstream out;
    out << "task_id,kind,f1,rouge_l,llm_judge,task_completed,error\n";
    for (const EvalRow& row : rows) {
      out << row.task_id << "," << to_string(row.kind) << ",";
      if (row.f1) out << *row.f1;
      out << ",";
      if (row.rouge_l) out << *row.rouge_l;
      out << ",";
      if (row.judge_aggregate) out << *row.judge_aggregate;
      out << ",";
      if (row.task_completed) out << (*row.task_completed ? "true" : "false");
      out << ",";
      std::string err = row.error;
      std::replace(err.begin(), err.end(), ',', ';');
      out << err << "\n";
    }
    return out.str();
  }
};

}  // namespace kgbench
