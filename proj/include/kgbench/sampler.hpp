#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kgbench/diagnostics.hpp"
#include "kgbench/graph.hpp"

namespace kgbench {

enum class SampleMode { document, web };

// Node-type universes per mode. The web set deliberately excludes document
// element kinds, so e.g. Heading nodes on a page stay out of web subgraphs.
inline const std::set<NodeCategory>& document_node_set() {
  static const std::set<NodeCategory> kSet = {NodeCategory::Paragraph,     NodeCategory::Heading,
                                              NodeCategory::Table,         NodeCategory::Figure,
                                              NodeCategory::SemanticChunk, NodeCategory::Entity};
  return kSet;
}

inline const std::set<NodeCategory>& web_node_set() {
  static const std::set<NodeCategory> kSet = {NodeCategory::WebPage, NodeCategory::WebElement};
  return kSet;
}

inline const std::set<ElementKind>& default_seed_kinds() {
  static const std::set<ElementKind> kSet = {ElementKind::button, ElementKind::input,
                                             ElementKind::search_box, ElementKind::form,
                                             ElementKind::link, ElementKind::navigation,
                                             ElementKind::filter};
  return kSet;
}

struct SeedSelector {
  std::set<ElementKind> kinds = default_seed_kinds();
  std::optional<std::string> page_url;  // restricts seeds to one page
};

struct TaskObjective {
  std::string goal_text;
  std::vector<double> goal_embedding;
  SampleMode mode = SampleMode::document;
  std::set<NodeCategory> required_node_kinds;
  std::set<EdgeKind> required_edge_kinds;
  std::optional<std::string> required_context;  // substring of a contextual_path label
  std::optional<SeedSelector> seed_selector;    // web mode
};

struct SamplerConfig {
  double tau = 0.5;  // document relevance threshold, strict inequality
  int k = 2;         // web neighbourhood hops

  void validate() const {
    if (!(tau > 0.0 && tau < 1.0)) throw Error("sampler: tau must lie in (0,1)");
    if (k < 1) throw Error("sampler: k must be >= 1");
  }
};

struct Subgraph {
  std::set<std::string> node_ids;
  std::vector<Edge> edges;  // induced, deterministic order
  std::set<std::string> seed_ids;
  std::string objective_ref;

  bool contains(const std::string& id) const { return node_ids.count(id) != 0; }
  std::size_t size() const { return node_ids.size(); }
  bool empty() const { return node_ids.empty(); }
};

// Induced edge set: exactly the graph edges with both endpoints selected.
inline std::vector<Edge> induced_edges(const Graph& graph, const std::set<std::string>& node_ids) {
  std::vector<Edge> edges;
  for (const Edge& e : graph.edges())
    if (node_ids.count(e.src) != 0 && node_ids.count(e.dst) != 0) edges.push_back(e);
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    if (a.src != b.src) return a.src < b.src;
    if (a.dst != b.dst) return a.dst < b.dst;
    return static_cast<int>(a.kind) < static_cast<int>(b.kind);
  });
  return edges;
}

inline Subgraph make_subgraph(const Graph& graph, std::set<std::string> node_ids,
                              std::set<std::string> seed_ids = {}, std::string objective_ref = "") {
  Subgraph sg;
  sg.edges = induced_edges(graph, node_ids);
  sg.node_ids = std::move(node_ids);
  sg.seed_ids = std::move(seed_ids);
  sg.objective_ref = std::move(objective_ref);
  return sg;
}

inline double relevance(const Node& node, const TaskObjective& objective) {
  return cosine_similarity(node.embedding, objective.goal_embedding);
}

// Structural alignment: kind membership plus an optional contextual-path
// constraint. Computable without an LLM by construction.
inline bool struct_match(const Node& node, const TaskObjective& objective) {
  if (objective.required_node_kinds.count(node.kind.category) == 0) return false;
  if (objective.required_context) {
    for (const std::string& label : node.contextual_path)
      if (contains_ci(label, *objective.required_context)) return true;
    return false;
  }
  return true;
}

// Document branch: include nodes that clear the relevance threshold or
// structurally match, restricted to document node types.
inline Subgraph sample_document_subgraph(const Graph& graph, const TaskObjective& objective,
                                         const SamplerConfig& config) {
  config.validate();
  if (objective.mode != SampleMode::document) throw Error("sample_document_subgraph: objective mode must be document");
  std::set<std::string> selected;
  for (const auto& [id, node] : graph.nodes()) {
    if (document_node_set().count(node.kind.category) == 0) continue;
    if (relevance(node, objective) > config.tau || struct_match(node, objective)) selected.insert(id);
  }
  return make_subgraph(graph, std::move(selected), {}, objective.goal_text);
}

// Task seeds: interactive elements, optionally restricted by the objective's
// selector (kinds and/or page).
inline std::set<std::string> identify_seeds(const Graph& graph, const TaskObjective& objective) {
  if (objective.mode != SampleMode::web) throw Error("identify_seeds: objective mode must be web");
  SeedSelector selector = objective.seed_selector.value_or(SeedSelector{});
  std::set<std::string> seeds;
  for (const auto& [id, node] : graph.nodes()) {
    if (node.kind.category != NodeCategory::WebElement) continue;
    if (selector.kinds.count(*node.kind.element_kind) == 0) continue;
    if (selector.page_url) {
      auto it = node.metadata.find("url");
      if (it == node.metadata.end() || it->second != *selector.page_url) continue;
    }
    seeds.insert(id);
  }
  return seeds;
}

// Web branch: seeds plus their k-hop neighbours restricted to web node types.
inline Subgraph sample_web_subgraph(const Graph& graph, const TaskObjective& objective,
                                    const SamplerConfig& config, Diagnostics* diags = nullptr) {
  config.validate();
  if (objective.mode != SampleMode::web) throw Error("sample_web_subgraph: objective mode must be web");
  std::set<std::string> seeds = identify_seeds(graph, objective);
  if (seeds.empty()) {
    warn(diags, "web sampling found no seeds for objective \"" + objective.goal_text + "\"");
    return make_subgraph(graph, {}, {}, objective.goal_text);
  }
  std::set<std::string> selected(seeds.begin(), seeds.end());
  for (const std::string& seed : seeds) {
    for (const std::string& neighbor : graph.k_hop_neighbors(seed, config.k)) {
      if (web_node_set().count(graph.node(neighbor).kind.category) != 0) selected.insert(neighbor);
    }
  }
  return make_subgraph(graph, std::move(selected), std::move(seeds), objective.goal_text);
}

inline Subgraph sample_subgraph(const Graph& graph, const TaskObjective& objective,
                                const SamplerConfig& config, Diagnostics* diags = nullptr) {
  return objective.mode == SampleMode::document ? sample_document_subgraph(graph, objective, config)
                                                : sample_web_subgraph(graph, objective, config, diags);
}

}  // namespace kgbench
