#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kgbench/diagnostics.hpp"
#include "kgbench/graph.hpp"
#include "kgbench/sampler.hpp"
#include "kgbench/task.hpp"
#include "kgbench/text.hpp"

namespace kgbench {

struct GraphRequirements {
  std::set<NodeCategory> required_node_kinds;
  std::set<EdgeKind> required_edge_kinds;
  int min_nodes = 1;
  int max_nodes = 64;
  int max_hops = 16;

  void validate() const {
    if (min_nodes > max_nodes) throw ValidationError("requirements: min_nodes exceeds max_nodes");
    if (max_hops < 1) throw ValidationError("requirements: max_hops must be >= 1");
  }
};

struct EvaluationSpec {
  std::vector<std::string> metrics;  // e.g. f1, rouge_l, llm_judge
  bool exact_match = false;
  bool require_citations = true;
  bool require_reasoning_path = false;
};

struct TaskTemplate {
  std::string template_id;
  std::string name;
  std::string description;
  TaskType task_type = TaskType::comprehension;
  Difficulty difficulty = Difficulty::Easy;
  std::string prompt_template;
  std::string gold_template;
  GraphRequirements requirements;
  EvaluationSpec evaluation;
  std::string version = "1";
  std::vector<std::string> tags;
};

// Longest shortest-path over reachable pairs, undirected, via all-pairs BFS.
// Subgraphs are small; exactness beats speed here.
inline int subgraph_diameter(const Subgraph& subgraph) {
  std::map<std::string, std::vector<std::string>> adj;
  for (const Edge& e : subgraph.edges) {
    adj[e.src].push_back(e.dst);
    adj[e.dst].push_back(e.src);
  }
  int diameter = 0;
  for (const std::string& start : subgraph.node_ids) {
    std::map<std::string, int> dist{{start, 0}};
    std::deque<std::string> frontier{start};
    while (!frontier.empty()) {
      std::string id = frontier.front();
      frontier.pop_front();
      for (const std::string& next : adj[id]) {
        if (dist.count(next) == 0) {
          dist[next] = dist[id] + 1;
          diameter = std::max(diameter, dist[next]);
          frontier.push_back(next);
        }
      }
    }
  }
  return diameter;
}

inline bool template_matches(const TaskTemplate& tmpl, const Subgraph& subgraph, const Graph& graph) {
  const GraphRequirements& req = tmpl.requirements;
  req.validate();
  std::set<NodeCategory> present_kinds;
  for (const std::string& id : subgraph.node_ids) present_kinds.insert(graph.node(id).kind.category);
  for (NodeCategory kind : req.required_node_kinds)
    if (present_kinds.count(kind) == 0) return false;
  std::set<EdgeKind> present_edges;
  for (const Edge& e : subgraph.edges) present_edges.insert(e.kind);
  for (EdgeKind kind : req.required_edge_kinds)
    if (present_edges.count(kind) == 0) return false;
  int n = static_cast<int>(subgraph.size());
  if (n < req.min_nodes || n > req.max_nodes) return false;
  return subgraph_diameter(subgraph) <= req.max_hops;
}

namespace templatedetail {

inline std::string variable_list_name(NodeCategory c) {
  switch (c) {
    case NodeCategory::Paragraph: return "paragraphs";
    case NodeCategory::Heading: return "headings";
    case NodeCategory::Table: return "tables";
    case NodeCategory::Figure: return "figures";
    case NodeCategory::SemanticChunk: return "chunks";
    case NodeCategory::Entity: return "entities";
    case NodeCategory::Document: return "documents";
    case NodeCategory::WebPage: return "pages";
    case NodeCategory::WebElement: return "elements";
  }
  return "nodes";
}

inline json item_json(const Node& node) {
  json meta = json::object();
  for (const auto& [k, v] : node.metadata) meta[k] = v;
  return json{{"content", node.text},
              {"first_sentence", first_sentence(node.text)},
              {"first_line", node.text.substr(0, node.text.find('\n'))},
              {"node_id", node.id},
              {"metadata", std::move(meta)}};
}

// Orders nodes by (source_path, in-document order, id); node ids stay out of
// the primary key so relabelings that preserve order keys do not reorder
// variables.
inline std::vector<const Node*> ordered_nodes(const Subgraph& subgraph, const Graph& graph) {
  std::vector<const Node*> nodes;
  for (const std::string& id : subgraph.node_ids) nodes.push_back(&graph.node(id));
  std::sort(nodes.begin(), nodes.end(), [](const Node* a, const Node* b) {
    if (a->source_path != b->source_path) return a->source_path < b->source_path;
    std::string oa = a->metadata.count("order") ? a->metadata.at("order") : "";
    std::string ob = b->metadata.count("order") ? b->metadata.at("order") : "";
    if (oa != ob) return oa < ob;
    return a->id < b->id;
  });
  return nodes;
}

inline std::string shared_terms(const std::string& a, const std::string& b) {
  auto ta = tokenize(a);
  std::set<std::string> sa(ta.begin(), ta.end());
  auto tb = tokenize(b);
  std::set<std::string> sb(tb.begin(), tb.end());
  static const std::set<std::string> kCommon = {"the", "a",  "an",  "and", "of",  "in", "to", "is",
                                                "are", "on", "for", "with", "that", "it", "as", "at"};
  std::vector<std::string> shared;
  for (const std::string& t : sa)
    if (sb.count(t) != 0 && kCommon.count(t) == 0 && t.size() > 2) shared.push_back(t);
  std::sort(shared.begin(), shared.end());
  if (shared.size() > 3) shared.resize(3);
  return join(shared, ", ");
}

}  // namespace templatedetail

// Deterministic variable map: per required kind a list of matching nodes in
// (source_path, order) order, edge-relation triples, and document metadata.
// Values are JSON so the renderer can walk dotted and indexed paths.
inline json extract_variables(const TaskTemplate& tmpl, const Subgraph& subgraph, const Graph& graph) {
  auto nodes = templatedetail::ordered_nodes(subgraph, graph);
  std::map<NodeCategory, std::vector<const Node*>> by_kind;
  for (const Node* n : nodes) by_kind[n->kind.category].push_back(n);

  for (NodeCategory kind : tmpl.requirements.required_node_kinds) {
    if (by_kind[kind].empty())
      throw ValidationError(std::string("required kind ") + to_string(kind) + " absent");
  }

  json vars = json::object();
  for (const auto& [kind, list] : by_kind) {
    json arr = json::array();
    for (const Node* n : list) arr.push_back(templatedetail::item_json(*n));
    vars[templatedetail::variable_list_name(kind)] = std::move(arr);
  }

  // items: nodes of the template's required kinds, in global order.
  json items = json::array();
  for (const Node* n : nodes)
    if (tmpl.requirements.required_node_kinds.count(n->kind.category) != 0)
      items.push_back(templatedetail::item_json(*n));
  vars["comparison_items"] = items;
  vars["items"] = std::move(items);

  // Edge relations as (src_text, kind, dst_text) triples, filtered to the
  // required edge kinds when the template names any.
  json edges = json::array();
  std::string shared;
  for (const Edge& e : subgraph.edges) {
    if (!tmpl.requirements.required_edge_kinds.empty() &&
        tmpl.requirements.required_edge_kinds.count(e.kind) == 0)
      continue;
    const Node& src = graph.node(e.src);
    const Node& dst = graph.node(e.dst);
    if (edges.empty()) shared = templatedetail::shared_terms(src.text, dst.text);
    edges.push_back(json{{"src", src.text}, {"kind", to_string(e.kind)}, {"dst", dst.text},
                         {"src_id", e.src}, {"dst_id", e.dst}});
  }
  vars["edges"] = std::move(edges);
  if (shared.empty() && nodes.size() >= 2)
    shared = templatedetail::shared_terms(nodes[0]->text, nodes[1]->text);
  vars["shared_terms"] = shared;

  json names = json::array();
  std::vector<std::string> entity_names;
  for (const Node* n : by_kind[NodeCategory::Entity]) entity_names.push_back(n->text);
  vars["entity_names"] = join(entity_names, ", ");

  // Document metadata from the first node's source document.
  std::string title, author, source_path;
  for (const Node* n : nodes) {
    if (!source_path.empty()) break;
    source_path = n->source_path;
    if (n->kind.category == NodeCategory::Document) {
      title = n->metadata.count("title") ? n->metadata.at("title") : n->text;
      author = n->metadata.count("author") ? n->metadata.at("author") : "";
    } else if (!n->contextual_path.empty()) {
      title = n->contextual_path.front();
    }
  }
  if (title.empty() && graph.has_node("d:" + source_path)) title = graph.node("d:" + source_path).text;
  vars["title"] = title;
  vars["author"] = author;
  vars["source_path"] = source_path;
  vars["num_nodes"] = subgraph.size();
  return vars;
}

// {{ path }} interpolation where path := IDENT ('.' IDENT | '[' INT ']')*.
// Deliberately minimal: no loops or conditionals.
inline std::string render(std::string_view template_text, const json& variables) {
  std::string out;
  std::size_t pos = 0;
  while (pos < template_text.size()) {
    std::size_t open = template_text.find("{{", pos);
    if (open == std::string_view::npos) {
      out.append(template_text.substr(pos));
      break;
    }
    out.append(template_text.substr(pos, open - pos));
    std::size_t close = template_text.find("}}", open);
    if (close == std::string_view::npos)
      throw ValidationError("render: unterminated placeholder at offset " + std::to_string(open));
    std::string path = trim(template_text.substr(open + 2, close - open - 2));
    if (path.empty()) throw ValidationError("render: empty placeholder path");

    const json* value = &variables;
    std::size_t i = 0;
    std::string consumed;
    while (i < path.size()) {
      if (path[i] == '[') {
        std::size_t end = path.find(']', i);
        if (end == std::string::npos) throw ValidationError("render: malformed index in path " + path);
        std::string index_text = path.substr(i + 1, end - i - 1);
        if (index_text.empty() || index_text.find_first_not_of("0123456789") != std::string::npos)
          throw ValidationError("render: malformed index in path " + path);
        if (!value->is_array())
          throw ValidationError("render: type mismatch at \"" + consumed + "\" in path " + path +
                                " (indexing a non-list)");
        std::size_t index = std::stoul(index_text);
        if (index >= value->size())
          throw ValidationError("render: unknown path " + path + " (index " + index_text +
                                " out of range)");
        value = &(*value)[index];
        consumed += "[" + index_text + "]";
        i = end + 1;
      } else {
        if (path[i] == '.') ++i;
        std::size_t end = i;
        while (end < path.size() && path[end] != '.' && path[end] != '[') ++end;
        std::string key = path.substr(i, end - i);
        if (key.empty()) throw ValidationError("render: malformed path " + path);
        if (!value->is_object())
          throw ValidationError("render: type mismatch at \"" + consumed + "\" in path " + path);
        auto it = value->find(key);
        if (it == value->end()) throw ValidationError("render: unknown path " + path);
        value = &*it;
        consumed += consumed.empty() ? key : "." + key;
        i = end;
      }
    }
    if (value->is_string()) out += value->get<std::string>();
    else out += value->dump();
    pos = close + 2;
  }
  return out;
}

// --- library file format -----------------------------------------------------

inline json template_to_json(const TaskTemplate& t) {
  json req{{"required_node_kinds", json::array()},
           {"required_edge_kinds", json::array()},
           {"min_nodes", t.requirements.min_nodes},
           {"max_nodes", t.requirements.max_nodes},
           {"max_hops", t.requirements.max_hops}};
  for (NodeCategory k : t.requirements.required_node_kinds) req["required_node_kinds"].push_back(to_string(k));
  for (EdgeKind k : t.requirements.required_edge_kinds) req["required_edge_kinds"].push_back(to_string(k));
  return json{{"template_id", t.template_id},
              {"name", t.name},
              {"description", t.description},
              {"task_type", to_string(t.task_type)},
              {"difficulty", to_string(t.difficulty)},
              {"prompt_template", t.prompt_template},
              {"gold_template", t.gold_template},
              {"requirements", std::move(req)},
              {"evaluation", json{{"metrics", t.evaluation.metrics},
                                  {"exact_match", t.evaluation.exact_match},
                                  {"require_citations", t.evaluation.require_citations},
                                  {"require_reasoning_path", t.evaluation.require_reasoning_path}}},
              {"version", t.version},
              {"tags", t.tags}};
}

inline TaskTemplate template_from_json(const json& j) {
  Graph::check_keys(j, {"template_id", "name", "description", "task_type", "difficulty", "prompt_template",
                        "gold_template", "requirements", "evaluation", "version", "tags"},
                    "task template");
  TaskTemplate t;
  t.template_id = j.at("template_id").get<std::string>();
  t.name = j.value("name", "");
  t.description = j.value("description", "");
  auto type = task_type_from_string(j.at("task_type").get<std::string>());
  if (!type) throw ValidationError("template " + t.template_id + ": unknown task_type");
  t.task_type = *type;
  auto difficulty = difficulty_from_string(j.at("difficulty").get<std::string>());
  if (!difficulty) throw ValidationError("template " + t.template_id + ": unknown difficulty");
  t.difficulty = *difficulty;
  t.prompt_template = j.at("prompt_template").get<std::string>();
  t.gold_template = j.at("gold_template").get<std::string>();
  const json& req = j.at("requirements");
  Graph::check_keys(req, {"required_node_kinds", "required_edge_kinds", "min_nodes", "max_nodes", "max_hops"},
                    "template requirements");
  for (const json& k : req.at("required_node_kinds")) {
    auto kind = node_category_from_string(k.get<std::string>());
    if (!kind) throw ValidationError("template " + t.template_id + ": unknown node kind " + k.dump());
    t.requirements.required_node_kinds.insert(*kind);
  }
  for (const json& k : req.at("required_edge_kinds")) {
    auto kind = edge_kind_from_string(k.get<std::string>());
    if (!kind) throw ValidationError("template " + t.template_id + ": unknown edge kind " + k.dump());
    t.requirements.required_edge_kinds.insert(*kind);
  }
  t.requirements.min_nodes = req.value("min_nodes", 1);
  t.requirements.max_nodes = req.value("max_nodes", 64);
  t.requirements.max_hops = req.value("max_hops", 16);
  t.requirements.validate();
  const json& ev = j.at("evaluation");
  Graph::check_keys(ev, {"metrics", "exact_match", "require_citations", "require_reasoning_path"},
                    "template evaluation");
  t.evaluation.metrics = ev.value("metrics", std::vector<std::string>{});
  t.evaluation.exact_match = ev.value("exact_match", false);
  t.evaluation.require_citations = ev.value("require_citations", true);
  t.evaluation.require_reasoning_path = ev.value("require_reasoning_path", false);
  t.version = j.value("version", "1");
  t.tags = j.value("tags", std::vector<std::string>{});
  return t;
}

inline json template_library_to_json(const std::vector<TaskTemplate>& lib) {
  json out = json::array();
  for (const TaskTemplate& t : lib) out.push_back(template_to_json(t));
  return out;
}

inline std::vector<TaskTemplate> load_template_library(const json& j) {
  if (!j.is_array()) throw ValidationError("template library: expected a JSON array");
  std::vector<TaskTemplate> lib;
  for (const json& entry : j) lib.push_back(template_from_json(entry));
  return lib;
}

// One template per task type. Requirements are kept permissive enough that a
// small corpus still yields instances; difficulty is carried by the task
// type rather than the structure.
inline std::vector<TaskTemplate> builtin_template_library() {
  std::vector<TaskTemplate> lib;
  auto add = [&](const char* id, const char* name, const char* desc, TaskType type, Difficulty diff,
                 std::set<NodeCategory> node_kinds, std::set<EdgeKind> edge_kinds, int min_nodes,
                 const char* prompt, const char* gold, std::vector<std::string> metrics, bool exact,
                 std::vector<std::string> tags) {
    TaskTemplate t;
    t.template_id = id;
    t.name = name;
    t.description = desc;
    t.task_type = type;
    t.difficulty = diff;
    t.prompt_template = prompt;
    t.gold_template = gold;
    t.requirements.required_node_kinds = std::move(node_kinds);
    t.requirements.required_edge_kinds = std::move(edge_kinds);
    t.requirements.min_nodes = min_nodes;
    t.requirements.max_nodes = 256;
    t.requirements.max_hops = 32;
    t.evaluation.metrics = std::move(metrics);
    t.evaluation.exact_match = exact;
    t.evaluation.require_citations = true;
    t.tags = std::move(tags);
    lib.push_back(std::move(t));
  };

  add("tpl.info_extraction", "Entity listing", "Extract the named entities mentioned in a passage",
      TaskType::information_extraction, Difficulty::Easy,
      {NodeCategory::SemanticChunk, NodeCategory::Entity}, {}, 2,
      "Read the following passage and list the named entities it mentions.\n\nPassage:\n{{ chunks[0].content }}\n\nAnswer with a comma-separated list of entity names.",
      "{{ entity_names }}", {"f1", "rouge_l"}, false, {"extraction"});
  add("tpl.comprehension", "Main point", "Explain the main point of a passage", TaskType::comprehension,
      Difficulty::Easy, {NodeCategory::SemanticChunk}, {}, 1,
      "Read the passage below and explain its main point in one or two sentences.\n\nPassage:\n{{ chunks[0].content }}",
      "{{ chunks[0].first_sentence }}", {"f1", "rouge_l", "llm_judge"}, false, {"understanding"});
  add("tpl.summarization", "Two-passage summary", "Summarize the key information in two passages",
      TaskType::summarization, Difficulty::Medium, {NodeCategory::SemanticChunk}, {}, 2,
      "Summarize the key information in the following passages.\n\nPassage 1:\n{{ chunks[0].content }}\n\nPassage 2:\n{{ chunks[1].content }}",
      "{{ chunks[0].first_sentence }} {{ chunks[1].first_sentence }}", {"rouge_l", "llm_judge"}, false,
      {"summary"});
  add("tpl.question_answering", "Context QA", "Answer a question from a single passage",
      TaskType::question_answering, Difficulty::Easy, {NodeCategory::Paragraph}, {}, 1,
      "Answer the question using only the context below.\n\nContext:\n{{ paragraphs[0].content }}\n\nQuestion: What does this passage describe?",
      "{{ paragraphs[0].first_sentence }}", {"f1", "rouge_l", "llm_judge"}, false, {"qa"});
  add("tpl.multi_hop", "Connected passages", "Combine two related passages to answer a question",
      TaskType::multi_hop_reasoning, Difficulty::Hard, {NodeCategory::SemanticChunk},
      {EdgeKind::semantic_similarity}, 2,
      "Combine information from both passages to answer.\n\nPassage A:\n{{ edges[0].src }}\n\nPassage B:\n{{ edges[0].dst }}\n\nQuestion: What topic connects passage A and passage B?",
      "Both passages discuss {{ shared_terms }}.", {"f1", "llm_judge"}, false, {"multi-hop"});
  add("tpl.comparison", "Item comparison", "Compare two pieces of information drawn from the corpus",
      TaskType::comparison, Difficulty::Medium, {NodeCategory::Paragraph}, {}, 2,
      "Compare the following pieces of information:\n\n- Item 1: {{ comparison_items[0].content }}\n- Item 2: {{ comparison_items[1].content }}\n\nHow do these two items relate to each other? Provide a detailed comparison and cite your sources.",
      "Item 1 covers: {{ comparison_items[0].first_sentence }} Item 2 covers: {{ comparison_items[1].first_sentence }}",
      {"rouge_l", "llm_judge"}, false, {"comparison"});
  add("tpl.analysis", "Entity analysis", "Analyze the role an entity plays in a passage", TaskType::analysis,
      Difficulty::Hard, {NodeCategory::SemanticChunk, NodeCategory::Entity}, {}, 2,
      "Analyze the role of {{ entities[0].content }} in the following passage.\n\nPassage:\n{{ chunks[0].content }}\n\nDescribe what the passage says about it and why it matters.",
      "{{ entities[0].content }} appears in the context: {{ chunks[0].first_sentence }}", {"llm_judge"},
      false, {"analysis"});
  add("tpl.reasoning", "Section reasoning", "Draw a conclusion from a statement under a section",
      TaskType::reasoning, Difficulty::Hard, {NodeCategory::Paragraph, NodeCategory::Heading}, {}, 2,
      "Under the section \"{{ headings[0].content }}\", the document states:\n\n{{ paragraphs[0].content }}\n\nWhat can be concluded from this statement? Explain your reasoning step by step.",
      "{{ paragraphs[0].first_sentence }}", {"llm_judge"}, false, {"reasoning"});
  add("tpl.fact_check", "Claim verification", "Verify a claim against its source passage",
      TaskType::fact_verification, Difficulty::Medium, {NodeCategory::SemanticChunk}, {}, 1,
      "Consider this claim: \"{{ chunks[0].first_sentence }}\"\n\nBased on the passage below, is the claim supported?\n\nPassage:\n{{ chunks[0].content }}\n\nAnswer \"supported\" or \"not supported\" and quote the relevant sentence.",
      "supported", {"f1"}, true, {"verification"});
  add("tpl.figure", "Figure reading", "Interpret a figure from its description",
      TaskType::figure_interpretation, Difficulty::Medium, {NodeCategory::Figure}, {}, 1,
      "A figure in this document is described as: {{ figures[0].content }}\n\nWhat information does this figure convey?",
      "{{ figures[0].content }}", {"rouge_l", "llm_judge"}, false, {"figure"});
  add("tpl.table_qa", "Table columns", "Read a table and report its columns", TaskType::table_qa,
      Difficulty::Medium, {NodeCategory::Table}, {}, 1,
      "Use the table below to answer.\n\nTable:\n{{ tables[0].content }}\n\nQuestion: What columns does this table contain?",
      "{{ tables[0].first_line }}", {"f1", "rouge_l"}, false, {"table"});
  add("tpl.cross_reference", "Cross-document link", "Relate passages from two different documents",
      TaskType::cross_reference, Difficulty::Expert, {NodeCategory::SemanticChunk},
      {EdgeKind::cross_doc_link}, 2,
      "Two different documents contain related passages.\n\nDocument 1 passage:\n{{ edges[0].src }}\n\nDocument 2 passage:\n{{ edges[0].dst }}\n\nWhat shared subject links these two documents?",
      "Both documents discuss {{ shared_terms }}.", {"f1", "llm_judge"}, false, {"cross-document"});
  return lib;
}

}  // namespace kgbench
