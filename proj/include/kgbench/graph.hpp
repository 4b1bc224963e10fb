#pragma once

#include <cmath>
#include <cstddef>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "kgbench/diagnostics.hpp"
#include "kgbench/text.hpp"

namespace kgbench {

using json = nlohmann::json;

enum class NodeCategory {
  Paragraph,
  Heading,
  Table,
  Figure,
  SemanticChunk,
  Entity,
  Document,
  WebPage,
  WebElement,
};

enum class ElementKind {
  button,
  input,
  form,
  link,
  navigation,
  modal,
  toast,
  search_box,
  filter,
  result_item,
  business_data,
};

enum class EntityClass { person, location, organization, other };

enum class EdgeKind {
  sequence,
  contains,
  entity_relation,
  semantic_similarity,
  figure_context,
  table_context,
  co_reference,
  cross_doc_link,
  nav_to,
  form_submit,
  click_trigger,
  fills,
  controls,
  layout,
  data_flow,
};

inline const char* to_string(NodeCategory c) {
  switch (c) {
    case NodeCategory::Paragraph: return "Paragraph";
    case NodeCategory::Heading: return "Heading";
    case NodeCategory::Table: return "Table";
    case NodeCategory::Figure: return "Figure";
    case NodeCategory::SemanticChunk: return "SemanticChunk";
    case NodeCategory::Entity: return "Entity";
    case NodeCategory::Document: return "Document";
    case NodeCategory::WebPage: return "WebPage";
    case NodeCategory::WebElement: return "WebElement";
  }
  return "?";
}

inline const char* to_string(ElementKind k) {
  switch (k) {
    case ElementKind::button: return "button";
    case ElementKind::input: return "input";
    case ElementKind::form: return "form";
    case ElementKind::link: return "link";
    case ElementKind::navigation: return "navigation";
    case ElementKind::modal: return "modal";
    case ElementKind::toast: return "toast";
    case ElementKind::search_box: return "search_box";
    case ElementKind::filter: return "filter";
    case ElementKind::result_item: return "result_item";
    case ElementKind::business_data: return "business_data";
  }
  return "?";
}

inline const char* to_string(EntityClass c) {
  switch (c) {
    case EntityClass::person: return "person";
    case EntityClass::location: return "location";
    case EntityClass::organization: return "organization";
    case EntityClass::other: return "other";
  }
  return "?";
}

inline const char* to_string(EdgeKind k) {
  switch (k) {
    case EdgeKind::sequence: return "sequence";
    case EdgeKind::contains: return "contains";
    case EdgeKind::entity_relation: return "entity_relation";
    case EdgeKind::semantic_similarity: return "semantic_similarity";
    case EdgeKind::figure_context: return "figure_context";
    case EdgeKind::table_context: return "table_context";
    case EdgeKind::co_reference: return "co_reference";
    case EdgeKind::cross_doc_link: return "cross_doc_link";
    case EdgeKind::nav_to: return "nav_to";
    case EdgeKind::form_submit: return "form_submit";
    case EdgeKind::click_trigger: return "click_trigger";
    case EdgeKind::fills: return "fills";
    case EdgeKind::controls: return "controls";
    case EdgeKind::layout: return "layout";
    case EdgeKind::data_flow: return "data_flow";
  }
  return "?";
}

template <typename E>
inline std::optional<E> enum_from_string(std::string_view name, std::initializer_list<E> all) {
  for (E value : all) {
    if (name == to_string(value)) return value;
  }
  return std::nullopt;
}

inline std::optional<NodeCategory> node_category_from_string(std::string_view s) {
  return enum_from_string(s, {NodeCategory::Paragraph, NodeCategory::Heading, NodeCategory::Table,
                              NodeCategory::Figure, NodeCategory::SemanticChunk, NodeCategory::Entity,
                              NodeCategory::Document, NodeCategory::WebPage, NodeCategory::WebElement});
}

inline std::optional<ElementKind> element_kind_from_string(std::string_view s) {
  return enum_from_string(s, {ElementKind::button, ElementKind::input, ElementKind::form, ElementKind::link,
                              ElementKind::navigation, ElementKind::modal, ElementKind::toast,
                              ElementKind::search_box, ElementKind::filter, ElementKind::result_item,
                              ElementKind::business_data});
}

inline std::optional<EntityClass> entity_class_from_string(std::string_view s) {
  return enum_from_string(s, {EntityClass::person, EntityClass::location, EntityClass::organization,
                              EntityClass::other});
}

inline std::optional<EdgeKind> edge_kind_from_string(std::string_view s) {
  return enum_from_string(
      s, {EdgeKind::sequence, EdgeKind::contains, EdgeKind::entity_relation, EdgeKind::semantic_similarity,
          EdgeKind::figure_context, EdgeKind::table_context, EdgeKind::co_reference, EdgeKind::cross_doc_link,
          EdgeKind::nav_to, EdgeKind::form_submit, EdgeKind::click_trigger, EdgeKind::fills, EdgeKind::controls,
          EdgeKind::layout, EdgeKind::data_flow});
}

// Text-side relations come first in the enum; everything from nav_to on
// models web interactions.
inline bool is_web_edge(EdgeKind k) { return static_cast<int>(k) >= static_cast<int>(EdgeKind::nav_to); }
inline bool is_text_edge(EdgeKind k) { return !is_web_edge(k); }

struct NodeKind {
  NodeCategory category = NodeCategory::Paragraph;
  std::optional<ElementKind> element_kind;
  std::optional<EntityClass> entity_class;

  // The name used by pattern matchers: element kind for web elements,
  // category otherwise.
  std::string name() const {
    if (category == NodeCategory::WebElement && element_kind) return to_string(*element_kind);
    return to_string(category);
  }

  bool valid() const {
    if ((category == NodeCategory::WebElement) != element_kind.has_value()) return false;
    if (category == NodeCategory::Entity && !entity_class.has_value()) return false;
    if (category != NodeCategory::Entity && entity_class.has_value()) return false;
    return true;
  }

  static NodeKind of(NodeCategory c) { return NodeKind{c, std::nullopt, std::nullopt}; }
  static NodeKind element(ElementKind k) { return NodeKind{NodeCategory::WebElement, k, std::nullopt}; }
  static NodeKind entity(EntityClass c) { return NodeKind{NodeCategory::Entity, std::nullopt, c}; }
};

struct Node {
  std::string id;
  NodeKind kind;
  std::string text;  // fused text+visual content
  std::vector<double> embedding;
  std::map<std::string, std::string> metadata;
  std::string source_path;
  std::vector<std::string> contextual_path;
};

struct Edge {
  std::string src;
  std::string dst;
  EdgeKind kind = EdgeKind::contains;
  double weight = 1.0;
};

// Plain cosine. Zero vectors yield 0.0 instead of erroring so degenerate
// mock embeddings never abort sampling; the flag overload reports it.
inline double cosine_similarity(std::span<const double> a, std::span<const double> b, bool* degenerate) {
  if (a.size() != b.size())
    throw Error("cosine_similarity: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                std::to_string(b.size()) + ")");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) {
    if (degenerate != nullptr) *degenerate = true;
    return 0.0;
  }
  if (degenerate != nullptr) *degenerate = false;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

inline double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  return cosine_similarity(a, b, nullptr);
}

inline double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
  return cosine_similarity(std::span<const double>(a), std::span<const double>(b));
}

// Exact nearest-neighbour index: a linear scan over (id, embedding) pairs.
// Corpus sizes here never justify approximate structures.
class VectorIndex {
 public:
  explicit VectorIndex(std::size_t dimension = 384) : dimension_(dimension) {}

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return entries_.size(); }

  void insert(const std::string& id, const std::vector<double>& embedding) {
    if (embedding.size() != dimension_)
      throw Error("vector index: dimension mismatch for node " + id);
    entries_[id] = embedding;
  }

  // Descending similarity, ties broken by ascending node id.
  std::vector<std::pair<std::string, double>> knn_query(std::span<const double> query,
                                                        std::size_t top_k) const {
    if (query.size() != dimension_) throw Error("knn_query: dimension mismatch");
    if (top_k == 0) throw Error("knn_query: top_k must be >= 1");
    std::vector<std::pair<std::string, double>> scored;
    scored.reserve(entries_.size());
    for (const auto& [id, emb] : entries_) {
      scored.emplace_back(id, cosine_similarity(query, std::span<const double>(emb)));
    }
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    if (scored.size() > top_k) scored.resize(top_k);
    return scored;
  }

  const std::map<std::string, std::vector<double>>& entries() const { return entries_; }

 private:
  std::size_t dimension_;
  std::map<std::string, std::vector<double>> entries_;
};

// Heterogeneous knowledge graph G = (V, E, R). Single-writer during
// construction; freeze() makes it immutable and safe for concurrent reads.
class Graph {
 public:
  explicit Graph(std::size_t dimension = 384) : dimension_(dimension), index_(dimension) {}

  std::size_t dimension() const { return dimension_; }
  bool frozen() const { return frozen_; }
  void freeze() { frozen_ = true; }

  const std::string& add_node(Node node) {
    ensure_mutable();
    if (!node.kind.valid()) throw Error("add_node: inconsistent kind for node " + node.id);
    if (nodes_.count(node.id) != 0) throw Error("add_node: duplicate node id " + node.id);
    if (node.embedding.size() != dimension_)
      throw Error("add_node: embedding dimension " + std::to_string(node.embedding.size()) +
                  " does not match graph dimension " + std::to_string(dimension_) + " (node " + node.id + ")");
    index_.insert(node.id, node.embedding);
    auto [it, _] = nodes_.emplace(node.id, std::move(node));
    return it->first;
  }

  std::size_t add_edge(const std::string& src, const std::string& dst, EdgeKind kind, double weight = 1.0) {
    ensure_mutable();
    if (nodes_.count(src) == 0) throw Error("add_edge: unknown endpoint " + src);
    if (nodes_.count(dst) == 0) throw Error("add_edge: unknown endpoint " + dst);
    if (!edge_keys_.insert({src, dst, kind}).second)
      throw Error("add_edge: duplicate edge (" + src + ", " + dst + ", " + to_string(kind) + ")");
    std::size_t idx = edges_.size();
    edges_.push_back(Edge{src, dst, kind, weight});
    out_adjacency_[src].push_back(idx);
    in_adjacency_[dst].push_back(idx);
    relation_set_.insert(kind);
    return idx;
  }

  bool has_node(const std::string& id) const { return nodes_.count(id) != 0; }

  const Node& node(const std::string& id) const {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw Error("unknown node " + id);
    return it->second;
  }

  const std::map<std::string, Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::set<EdgeKind>& relation_set() const { return relation_set_; }
  const VectorIndex& index() const { return index_; }

  static const std::vector<std::size_t>& no_edges() {
    static const std::vector<std::size_t> empty;
    return empty;
  }

  const std::vector<std::size_t>& out_edges(const std::string& id) const {
    auto it = out_adjacency_.find(id);
    return it == out_adjacency_.end() ? no_edges() : it->second;
  }

  const std::vector<std::size_t>& in_edges(const std::string& id) const {
    auto it = in_adjacency_.find(id);
    return it == in_adjacency_.end() ? no_edges() : it->second;
  }

  // Undirected BFS; returns nodes at hop distance 1..k, never the source.
  std::set<std::string> k_hop_neighbors(const std::string& start, int k) const {
    if (nodes_.count(start) == 0) throw Error("k_hop_neighbors: unknown node " + start);
    if (k < 0) throw Error("k_hop_neighbors: k must be >= 0");
    std::set<std::string> visited{start};
    std::set<std::string> result;
    std::deque<std::pair<std::string, int>> frontier{{start, 0}};
    while (!frontier.empty()) {
      auto [id, depth] = frontier.front();
      frontier.pop_front();
      if (depth == k) continue;
      for (std::size_t idx : out_edges(id)) {
        const std::string& next = edges_[idx].dst;
        if (visited.insert(next).second) {
          result.insert(next);
          frontier.emplace_back(next, depth + 1);
        }
      }
      for (std::size_t idx : in_edges(id)) {
        const std::string& next = edges_[idx].src;
        if (visited.insert(next).second) {
          result.insert(next);
          frontier.emplace_back(next, depth + 1);
        }
      }
    }
    return result;
  }

  json to_json() const {
    json nodes = json::array();
    for (const auto& [id, node] : nodes_) {
      json n;
      n["id"] = id;
      n["kind"] = to_string(node.kind.category);
      if (node.kind.element_kind) n["element_kind"] = to_string(*node.kind.element_kind);
      if (node.kind.entity_class) n["entity_class"] = to_string(*node.kind.entity_class);
      n["text"] = node.text;
      n["embedding"] = node.embedding;
      n["metadata"] = node.metadata;
      n["source_path"] = node.source_path;
      n["contextual_path"] = node.contextual_path;
      nodes.push_back(std::move(n));
    }
    // Stored edge order is part of the serialized form.
    json edges = json::array();
    for (const Edge& e : edges_) {
      edges.push_back(json{{"src", e.src}, {"dst", e.dst}, {"kind", to_string(e.kind)}, {"weight", e.weight}});
    }
    return json{{"version", kFormatVersion}, {"dimension", dimension_}, {"nodes", std::move(nodes)},
                {"edges", std::move(edges)}};
  }

  std::string serialize() const { return to_json().dump(2) + "\n"; }

  static Graph from_json(const json& j) {
    if (!j.is_object()) throw Error("graph payload: expected a JSON object");
    check_keys(j, {"version", "dimension", "nodes", "edges"}, "graph");
    if (!j.contains("version") || !j["version"].is_number_integer())
      throw Error("graph payload: missing integer version");
    if (j["version"].get<int>() != kFormatVersion)
      throw Error("graph payload: unsupported version " + j["version"].dump());
    if (!j.contains("dimension") || !j.contains("nodes") || !j.contains("edges"))
      throw Error("graph payload: missing dimension/nodes/edges");
    Graph g(j["dimension"].get<std::size_t>());
    for (const json& n : j["nodes"]) {
      check_keys(n, {"id", "kind", "element_kind", "entity_class", "text", "embedding", "metadata",
                     "source_path", "contextual_path"},
                 "graph node");
      Node node;
      node.id = n.at("id").get<std::string>();
      auto category = node_category_from_string(n.at("kind").get<std::string>());
      if (!category) throw Error("graph node " + node.id + ": unknown kind " + n.at("kind").dump());
      node.kind.category = *category;
      if (n.contains("element_kind")) {
        auto ek = element_kind_from_string(n["element_kind"].get<std::string>());
        if (!ek) throw Error("graph node " + node.id + ": unknown element_kind");
        node.kind.element_kind = ek;
      }
      if (n.contains("entity_class")) {
        auto ec = entity_class_from_string(n["entity_class"].get<std::string>());
        if (!ec) throw Error("graph node " + node.id + ": unknown entity_class");
        node.kind.entity_class = ec;
      }
      node.text = n.at("text").get<std::string>();
      node.embedding = n.at("embedding").get<std::vector<double>>();
      node.metadata = n.at("metadata").get<std::map<std::string, std::string>>();
      node.source_path = n.at("source_path").get<std::string>();
      node.contextual_path = n.at("contextual_path").get<std::vector<std::string>>();
      g.add_node(std::move(node));
    }
    for (const json& e : j["edges"]) {
      check_keys(e, {"src", "dst", "kind", "weight"}, "graph edge");
      auto kind = edge_kind_from_string(e.at("kind").get<std::string>());
      if (!kind) throw Error("graph edge: unknown kind " + e.at("kind").dump());
      g.add_edge(e.at("src").get<std::string>(), e.at("dst").get<std::string>(), *kind,
                 e.value("weight", 1.0));
    }
    return g;
  }

  static Graph deserialize(std::string_view bytes) {
    json j = json::parse(bytes, nullptr, false);
    if (j.is_discarded()) throw Error("graph payload: malformed JSON");
    return from_json(j);
  }

  static constexpr int kFormatVersion = 1;

  static void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const std::string& context) {
    if (!obj.is_object()) throw Error(context + ": expected a JSON object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      bool known = false;
      for (const char* key : allowed) {
        if (it.key() == key) {
          known = true;
          break;
        }
      }
      if (!known) throw Error(context + ": unknown field \"" + it.key() + "\"");
    }
  }

 private:
  void ensure_mutable() const {
    if (frozen_) throw Error("graph is frozen; mutation is not allowed");
  }

  std::size_t dimension_;
  bool frozen_ = false;
  std::map<std::string, Node> nodes_;
  std::vector<Edge> edges_;
  std::set<std::tuple<std::string, std::string, EdgeKind>> edge_keys_;
  std::map<std::string, std::vector<std::size_t>> out_adjacency_;
  std::map<std::string, std::vector<std::size_t>> in_adjacency_;
  std::set<EdgeKind> relation_set_;
  VectorIndex index_;
};

}  // namespace kgbench
