#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <optional>
#include <set>
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

struct QualityScore {
  double clarity = 0.0;
  double relevance = 0.0;
  double difficulty_fit = 0.0;
  double completeness = 0.0;

  // Always recomputed from the components, never cached.
  double overall() const { return (clarity + relevance + difficulty_fit + completeness) / 4.0; }
};

namespace coveragedetail {

inline Difficulty web_band(std::size_t steps) {
  if (steps <= 2) return Difficulty::Easy;
  if (steps <= 4) return Difficulty::Medium;
  if (steps <= 6) return Difficulty::Hard;
  return Difficulty::Expert;
}

inline Difficulty doc_band(std::size_t subgraph_nodes) {
  if (subgraph_nodes <= 3) return Difficulty::Easy;
  if (subgraph_nodes <= 6) return Difficulty::Medium;
  if (subgraph_nodes <= 12) return Difficulty::Hard;
  return Difficulty::Expert;
}

// Fraction of references (citations, and step selectors for web tasks) that
// resolve against the graph.
inline double reference_validity(const Task& task, const Graph& graph) {
  std::size_t total = 0, valid = 0;
  for (const std::string& id : task.citations) {
    ++total;
    if (graph.has_node(id)) ++valid;
  }
  if (task.kind == TaskKind::web) {
    std::set<std::string> selectors;
    for (const auto& [id, node] : graph.nodes()) {
      (void)id;
      auto it = node.metadata.find("selector");
      if (it != node.metadata.end()) selectors.insert(it->second);
    }
    for (const WebStep& step : task.web_steps) {
      if (step.action == WebAction::navigate || step.action == WebAction::wait) continue;
      ++total;
      if (selectors.count(step.target) != 0) ++valid;
    }
  }
  if (total == 0) return 0.0;
  return static_cast<double>(valid) / static_cast<double>(total);
}

}  // namespace coveragedetail

// Rule-based quality components; an optional judge replaces clarity,
// relevance, and completeness with LLM scores (difficulty_fit stays
// structural either way).
inline QualityScore score_quality(const Task& task, const Graph& graph, LlmGateway* judge = nullptr,
                                  Diagnostics* diags = nullptr) {
  QualityScore score;
  std::size_t prompt_tokens = token_count(task.prompt);
  bool unresolved = task.prompt.find("{{") != std::string::npos;
  if (unresolved || prompt_tokens == 0) {
    score.clarity = 0.0;
  } else if (prompt_tokens < 8) {
    score.clarity = static_cast<double>(prompt_tokens) / 8.0;
  } else if (prompt_tokens > 400) {
    score.clarity = 400.0 / static_cast<double>(prompt_tokens);
  } else {
    score.clarity = 1.0;
  }

  score.relevance = task.prompt.empty() ? 0.0 : coveragedetail::reference_validity(task, graph);

  Difficulty expected = task.kind == TaskKind::web
                            ? coveragedetail::web_band(task.web_steps.size())
                            : coveragedetail::doc_band(task.provenance.subgraph_nodes.size());
  int delta = std::abs(difficulty_index(expected) - difficulty_index(task.difficulty));
  score.difficulty_fit = 1.0 - static_cast<double>(delta) / 3.0;

  std::size_t required = 0, present = 0;
  auto field = [&](bool ok) {
    ++required;
    if (ok) ++present;
  };
  field(!task.prompt.empty());
  field(!task.citations.empty());
  if (task.kind == TaskKind::document) {
    field(task.gold_answer.has_value() && !task.gold_answer->empty());
  } else {
    field(!task.web_steps.empty());
    field(task.chain_name.has_value() || task.metadata.count("pattern") != 0);
  }
  score.completeness = static_cast<double>(present) / static_cast<double>(required);

  if (judge != nullptr) {
    try {
      std::string prompt =
          "Score this benchmark task on clarity, relevance, and completeness (each 0.0 to 1.0).\n\nTASK "
          "PROMPT:\n" + task.prompt + "\n\nRespond in JSON: {\"clarity\": <score>, \"relevance\": <score>, "
          "\"completeness\": <score>}";
      Completion completion = judge->complete(make_user_request("", prompt), Purpose::quality);
      json verdict = json::parse(completion.text, nullptr, false);
      if (verdict.is_discarded() || !verdict.contains("clarity") || !verdict.contains("relevance") ||
          !verdict.contains("completeness"))
        throw ProtocolError("quality judge returned malformed verdict");
      auto clamp = [](double x) { return std::min(1.0, std::max(0.0, x)); };
      score.clarity = clamp(verdict["clarity"].get<double>());
      score.relevance = clamp(verdict["relevance"].get<double>());
      score.completeness = clamp(verdict["completeness"].get<double>());
    } catch (const Error& e) {
      warn(diags, std::string("quality judge failed (") + e.what() + "); keeping rule-based scores");
    }
  }
  return score;
}

// A task is reachable when every cited or targeted node can be walked to
// (undirected) from the task's root Document / WebPage node. Tasks with no
// references at all are vacuous and rejected.
inline bool reachability_check(const Task& task, const Graph& graph) {
  if (task.citations.empty() && task.web_steps.empty()) return false;
  for (const std::string& id : task.citations)
    if (!graph.has_node(id)) return false;

  // Locate the root.
  std::string root;
  if (task.kind == TaskKind::web) {
    auto it = task.metadata.find("page_url");
    if (it == task.metadata.end()) return false;
    std::string page_id = "p:" + it->second;
    if (!graph.has_node(page_id)) return false;
    root = page_id;
  } else {
    if (task.citations.empty()) return false;
    const Node& first = graph.node(task.citations.front());
    std::string doc_id = "d:" + first.source_path;
    if (!graph.has_node(doc_id)) return false;
    root = doc_id;
  }

  std::set<std::string> reachable{root};
  std::deque<std::string> frontier{root};
  while (!frontier.empty()) {
    std::string id = frontier.front();
    frontier.pop_front();
    for (std::size_t idx : graph.out_edges(id)) {
      const std::string& next = graph.edges()[idx].dst;
      if (reachable.insert(next).second) frontier.push_back(next);
    }
    for (std::size_t idx : graph.in_edges(id)) {
      const std::string& next = graph.edges()[idx].src;
      if (reachable.insert(next).second) frontier.push_back(next);
    }
  }
  for (const std::string& id : task.citations)
    if (reachable.count(id) == 0) return false;
  if (task.kind == TaskKind::web) {
    std::set<std::string> reachable_selectors;
    for (const std::string& id : reachable) {
      const Node& node = graph.node(id);
      auto it = node.metadata.find("selector");
      if (it != node.metadata.end()) reachable_selectors.insert(it->second);
    }
    for (const WebStep& step : task.web_steps) {
      if (step.action == WebAction::navigate || step.action == WebAction::wait) continue;
      if (reachable_selectors.count(step.target) == 0) return false;
    }
  }
  return true;
}

// --- coverage dimensions -----------------------------------------------------

// One bucket per dimension per task. Web: node type, edge type, pattern,
// page, website type, difficulty. Document: task type, difficulty, template,
// variable set, content length.
inline std::vector<std::pair<std::string, std::string>> task_buckets(const Task& task) {
  std::vector<std::pair<std::string, std::string>> buckets;
  if (task.kind == TaskKind::web) {
    std::string action_sig;
    {
      std::set<std::string> actions;
      for (const WebStep& s : task.web_steps) actions.insert(to_string(s.action));
      action_sig = join(std::vector<std::string>(actions.begin(), actions.end()), "+");
    }
    buckets.emplace_back("node_type",
                         task.metadata.count("node_types") ? task.metadata.at("node_types") : action_sig);
    buckets.emplace_back("edge_type",
                         task.metadata.count("edge_types") ? task.metadata.at("edge_types") : "none");
    buckets.emplace_back("pattern", task.provenance.source_id);
    buckets.emplace_back("page", task.metadata.count("page_url") ? task.metadata.at("page_url") : "unknown");
    buckets.emplace_back("website_type",
                         task.metadata.count("website_type") ? task.metadata.at("website_type") : "general");
    buckets.emplace_back("difficulty", to_string(task.difficulty));
  } else {
    buckets.emplace_back("task_type", to_string(task.type));
    buckets.emplace_back("difficulty", to_string(task.difficulty));
    buckets.emplace_back("template", task.provenance.source_id);
    buckets.emplace_back("variable",
                         task.metadata.count("variables") ? task.metadata.at("variables") : "none");
    std::size_t n = token_count(task.prompt);
    buckets.emplace_back("content_length", n < 50 ? "short" : (n <= 150 ? "medium" : "long"));
  }
  return buckets;
}

using BucketSet = std::set<std::pair<std::string, std::string>>;

inline BucketSet bucket_set(const Task& task) {
  auto v = task_buckets(task);
  return BucketSet(v.begin(), v.end());
}

// Newly covered (dimension, bucket) pairs over the pool's total bucket
// universe.
inline double coverage_gain(const BucketSet& covered, const BucketSet& candidate, std::size_t pool_buckets) {
  if (pool_buckets == 0) return 0.0;
  std::size_t fresh = 0;
  for (const auto& bucket : candidate)
    if (covered.count(bucket) == 0) ++fresh;
  return static_cast<double>(fresh) / static_cast<double>(pool_buckets);
}

// --- similarity --------------------------------------------------------------

namespace coveragedetail {

inline double jaccard_tokens(const std::string& a, const std::string& b) {
  auto ta = tokenize(a);
  auto tb = tokenize(b);
  std::set<std::string> sa(ta.begin(), ta.end());
  std::set<std::string> sb(tb.begin(), tb.end());
  if (sa.empty() && sb.empty()) return 1.0;
  std::size_t inter = 0;
  for (const std::string& t : sa)
    if (sb.count(t) != 0) ++inter;
  std::size_t uni = sa.size() + sb.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

inline double jaccard_multiset(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::map<std::string, std::size_t> ca, cb;
  for (const std::string& x : a) ++ca[x];
  for (const std::string& x : b) ++cb[x];
  std::size_t inter = 0, uni = 0;
  for (const auto& [key, count] : ca) {
    auto it = cb.find(key);
    inter += it == cb.end() ? 0 : std::min(count, it->second);
    uni += std::max(count, it == cb.end() ? std::size_t{0} : it->second);
  }
  for (const auto& [key, count] : cb)
    if (ca.count(key) == 0) uni += count;
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace coveragedetail

// Multi-level similarity. Web tasks: 0.3 pattern identity + 0.3 step-action
// multiset overlap + 0.4 prompt similarity; document tasks: prompt
// similarity alone. Prompt similarity is embedding cosine clamped to [0,1],
// or token Jaccard when no embedder is supplied (mock mode).
inline double task_similarity(const Task& a, const Task& b, const Embedder* embedder = nullptr) {
  if (a.kind != b.kind) throw Error("task_similarity: cannot compare document and web tasks");
  double prompt_sim;
  if (embedder != nullptr) {
    auto ea = embedder->embed(a.prompt);
    auto eb = embedder->embed(b.prompt);
    prompt_sim = std::min(1.0, std::max(0.0, cosine_similarity(ea, eb)));
  } else {
    prompt_sim = coveragedetail::jaccard_tokens(a.prompt, b.prompt);
  }
  if (a.kind == TaskKind::document) return prompt_sim;
  double same_pattern = a.provenance.source_id == b.provenance.source_id ? 1.0 : 0.0;
  std::vector<std::string> sa, sb;
  for (const WebStep& s : a.web_steps) sa.push_back(to_string(s.action));
  for (const WebStep& s : b.web_steps) sb.push_back(to_string(s.action));
  double step_sim = coveragedetail::jaccard_multiset(sa, sb);
  return 0.3 * same_pattern + 0.3 * step_sim + 0.4 * prompt_sim;
}

// --- MMR selection -----------------------------------------------------------

struct SelectionConfig {
  double lambda = 0.7;           // relevance vs redundancy trade-off
  double alpha = 0.5;            // quality vs coverage mix inside relevance
  double quality_threshold = 0.6;
  std::size_t target_size = 32;

  void validate() const {
    if (lambda < 0.0 || lambda > 1.0) throw ConfigError("selection: lambda must lie in [0,1]");
    if (alpha < 0.0 || alpha > 1.0) throw ConfigError("selection: alpha must lie in [0,1]");
    if (quality_threshold < 0.0 || quality_threshold > 1.0)
      throw ConfigError("selection: quality_threshold must lie in [0,1]");
    if (target_size == 0) throw ConfigError("selection: target_size must be >= 1");
  }
};

// Greedy MMR: pick argmax of
//   lambda * (alpha * quality + (1 - alpha) * coverage_gain)
//     - (1 - lambda) * max similarity to the selected set,
// ties broken by lexicographically smaller task id. Deterministic and
// invariant to candidate input order.
inline std::vector<std::string> mmr_select(const std::vector<Task>& candidates,
                                           const std::map<std::string, double>& quality,
                                           const SelectionConfig& config, const Embedder* embedder = nullptr) {
  config.validate();
  std::vector<const Task*> pool;
  for (const Task& t : candidates) pool.push_back(&t);
  std::sort(pool.begin(), pool.end(),
            [](const Task* a, const Task* b) { return a->task_id < b->task_id; });

  BucketSet pool_buckets;
  std::map<const Task*, BucketSet> buckets;
  for (const Task* t : pool) {
    buckets[t] = bucket_set(*t);
    pool_buckets.insert(buckets[t].begin(), buckets[t].end());
  }

  std::vector<std::string> selected;
  std::vector<const Task*> selected_tasks;
  BucketSet covered;
  std::set<const Task*> remaining(pool.begin(), pool.end());
  while (selected.size() < config.target_size && !remaining.empty()) {
    const Task* best = nullptr;
    double best_score = 0.0;
    for (const Task* t : pool) {
      if (remaining.count(t) == 0) continue;
      double q = quality.count(t->task_id) ? quality.at(t->task_id) : 0.0;
      double gain = coverage_gain(covered, buckets[t], pool_buckets.size());
      double redundancy = 0.0;
      for (const Task* s : selected_tasks) {
        if (s->kind != t->kind) continue;  // cross-kind tasks are trivially dissimilar
        redundancy = std::max(redundancy, task_similarity(*t, *s, embedder));
      }
      double score = config.lambda * (config.alpha * q + (1.0 - config.alpha) * gain) -
                     (1.0 - config.lambda) * redundancy;
      if (best == nullptr || score > best_score ||
          (score == best_score && t->task_id < best->task_id)) {
        best = t;
        best_score = score;
      }
    }
    selected.push_back(best->task_id);
    selected_tasks.push_back(best);
    covered.insert(buckets[best].begin(), buckets[best].end());
    remaining.erase(best);
  }
  return selected;
}

// Selection report: pool and filter counts plus per-dimension coverage of
// the selected set over the pool's buckets.
inline json selection_report(std::size_t pool_size, std::size_t filtered_quality,
                             std::size_t filtered_reachability, const std::vector<Task>& pool,
                             const std::vector<std::string>& selected_ids) {
  std::set<std::string> chosen(selected_ids.begin(), selected_ids.end());
  std::map<std::string, std::set<std::string>> pool_dim, selected_dim;
  for (const Task& t : pool) {
    for (const auto& [dim, bucket] : task_buckets(t)) {
      pool_dim[dim].insert(bucket);
      if (chosen.count(t.task_id) != 0) selected_dim[dim].insert(bucket);
    }
  }
  json coverage = json::object();
  for (const auto& [dim, values] : pool_dim) {
    double fraction = values.empty() ? 0.0
                                     : static_cast<double>(selected_dim[dim].size()) /
                                           static_cast<double>(values.size());
    coverage[dim] = fraction;
  }
  return json{{"pool_size", pool_size},
              {"filtered_out", json{{"quality", filtered_quality}, {"reachability", filtered_reachability}}},
              {"selected_ids", selected_ids},
              {"per_dimension_coverage", coverage}};
}

}  // namespace kgbench
