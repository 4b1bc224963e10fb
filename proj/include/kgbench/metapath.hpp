#pragma once

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kgbench/diagnostics.hpp"
#include "kgbench/graph.hpp"
#include "kgbench/sampler.hpp"
#include "kgbench/text.hpp"

namespace kgbench {

enum class PatternTier { business, general, basic };

inline const char* to_string(PatternTier t) {
  switch (t) {
    case PatternTier::business: return "business";
    case PatternTier::general: return "general";
    case PatternTier::basic: return "basic";
  }
  return "?";
}

inline std::optional<PatternTier> pattern_tier_from_string(std::string_view s) {
  if (s == "business") return PatternTier::business;
  if (s == "general") return PatternTier::general;
  if (s == "basic") return PatternTier::basic;
  return std::nullopt;
}

// Type names in patterns are matched case-insensitively with underscores
// ignored, so SearchBox == search_box and NavTo == nav_to.
inline std::string normalize_type_name(std::string_view name) {
  std::string out;
  for (char c : name)
    if (c != '_') out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

struct Quantifier {
  int min = 1;
  int max = 1;
  bool unbounded = false;
  std::string lexeme;  // original spelling, empty when unquantified

  bool admits(int count) const { return count >= min && (unbounded || count <= max); }
};

// One unit of a compiled pattern: the incoming edge matcher (empty on the
// first atom, where repetitions may arrive over any edge) plus the node
// matcher, optional slot, and quantifier.
struct PatternAtom {
  std::vector<std::string> edge_idents;  // empty for the first atom
  std::set<EdgeKind> edge_kinds;
  std::vector<std::string> type_idents;
  std::set<std::string> alternatives;  // normalized
  std::optional<std::string> slot;
  Quantifier quant;

  bool matches_node(const Node& node) const {
    return alternatives.count(normalize_type_name(node.kind.name())) != 0;
  }

  // The first atom's within-unit repetitions traverse any edge kind.
  bool matches_edge(EdgeKind kind) const {
    return edge_idents.empty() ? true : edge_kinds.count(kind) != 0;
  }
};

struct MetapathPattern {
  std::string id;
  std::string name;
  PatternTier tier = PatternTier::basic;
  std::string source_text;
  std::vector<PatternAtom> atoms;

  // Canonical single-spaced form; equals source_text modulo whitespace.
  std::string canonical() const {
    std::string out;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const PatternAtom& atom = atoms[i];
      if (i > 0) out += " -[" + join(atom.edge_idents, "|") + "]-> ";
      out += join(atom.type_idents, "|");
      if (atom.slot) out += "($" + *atom.slot + ")";
      out += atom.quant.lexeme;
    }
    return out;
  }
};

struct MetapathInstance {
  std::string pattern_id;
  std::map<std::string, std::string> bindings;  // slot -> node id
  std::vector<std::string> path_nodes;
  std::vector<std::size_t> path_edges;  // indices into the subgraph edge list
};

// --- pattern parsing ---------------------------------------------------------

namespace metapathdetail {

struct Lexer {
  std::string_view text;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  bool at_end() {
    skip_ws();
    return pos >= text.size();
  }

  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }

  bool try_consume(std::string_view token) {
    skip_ws();
    if (text.substr(pos, token.size()) == token) {
      pos += token.size();
      return true;
    }
    return false;
  }

  void expect(std::string_view token) {
    if (!try_consume(token)) throw ParseError("expected '" + std::string(token) + "'", pos);
  }

  std::string ident() {
    skip_ws();
    std::size_t start = pos;
    if (pos >= text.size() ||
        !(std::isalpha(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
      throw ParseError("expected identifier", pos);
    while (pos < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
      ++pos;
    return std::string(text.substr(start, pos - start));
  }

  int integer() {
    skip_ws();
    std::size_t start = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos == start) throw ParseError("expected integer", pos);
    return std::stoi(std::string(text.substr(start, pos - start)));
  }
};

inline std::vector<std::string> parse_type_expr(Lexer& lex) {
  std::vector<std::string> idents{lex.ident()};
  while (lex.try_consume("|")) idents.push_back(lex.ident());
  return idents;
}

inline Quantifier parse_quantifier(Lexer& lex) {
  Quantifier q;
  lex.skip_ws();
  std::size_t start = lex.pos;
  if (lex.try_consume("?")) {
    q = {0, 1, false, "?"};
  } else if (lex.try_consume("*")) {
    q = {0, 0, true, "*"};
  } else if (lex.try_consume("+")) {
    q = {1, 0, true, "+"};
  } else if (lex.try_consume("{")) {
    int lo = lex.integer();
    int hi = lo;
    if (lex.try_consume(",")) hi = lex.integer();
    lex.expect("}");
    if (hi < lo) throw ParseError("quantifier max below min", start);
    q.min = lo;
    q.max = hi;
    q.unbounded = false;
    q.lexeme = std::string(lex.text.substr(start, lex.pos - start));
  }
  return q;
}

}  // namespace metapathdetail

// Grammar:
//   pattern := atom (edge atom)* ;
//   atom    := TYPEEXPR ('(' '$' IDENT ')')? QUANT? ;
//   edge    := '-[' TYPEEXPR ']->' ;
//   QUANT   := '?' | '*' | '+' | '{' INT (',' INT)? '}' ;
inline MetapathPattern parse_pattern(std::string_view text, std::string id = "", std::string name = "",
                                     PatternTier tier = PatternTier::basic) {
  metapathdetail::Lexer lex{text};
  MetapathPattern pattern;
  pattern.id = std::move(id);
  pattern.name = std::move(name);
  pattern.tier = tier;
  pattern.source_text = std::string(text);

  std::set<std::string> slot_names;
  auto parse_atom = [&](std::vector<std::string> edge_idents) {
    PatternAtom atom;
    atom.edge_idents = std::move(edge_idents);
    for (const std::string& ident : atom.edge_idents) {
      for (EdgeKind kind :
           {EdgeKind::sequence, EdgeKind::contains, EdgeKind::entity_relation, EdgeKind::semantic_similarity,
            EdgeKind::figure_context, EdgeKind::table_context, EdgeKind::co_reference, EdgeKind::cross_doc_link,
            EdgeKind::nav_to, EdgeKind::form_submit, EdgeKind::click_trigger, EdgeKind::fills,
            EdgeKind::controls, EdgeKind::layout, EdgeKind::data_flow}) {
        if (normalize_type_name(ident) == normalize_type_name(to_string(kind))) atom.edge_kinds.insert(kind);
      }
    }
    atom.type_idents = metapathdetail::parse_type_expr(lex);
    for (const std::string& ident : atom.type_idents) atom.alternatives.insert(normalize_type_name(ident));
    if (lex.try_consume("(")) {
      lex.expect("$");
      std::string slot = lex.ident();
      lex.expect(")");
      if (!slot_names.insert(slot).second) throw ParseError("duplicate slot name $" + slot, lex.pos);
      atom.slot = std::move(slot);
    }
    atom.quant = metapathdetail::parse_quantifier(lex);
    pattern.atoms.push_back(std::move(atom));
  };

  parse_atom({});
  while (!lex.at_end()) {
    lex.expect("-[");
    std::vector<std::string> edge_idents = metapathdetail::parse_type_expr(lex);
    lex.expect("]->");
    parse_atom(std::move(edge_idents));
  }
  return pattern;
}

// --- matching ----------------------------------------------------------------

// Unbounded quantifiers are capped by total path length so matching
// terminates on cyclic graphs.
inline constexpr std::size_t kMaxPatternPathLength = 16;

inline std::vector<MetapathInstance> match_pattern(const MetapathPattern& pattern, const Subgraph& subgraph,
                                                   const Graph& graph,
                                                   std::size_t max_path_length = kMaxPatternPathLength) {
  std::vector<MetapathInstance> results;
  if (pattern.atoms.empty() || subgraph.empty()) return results;

  // Out-adjacency over the induced edge list (matching is directed).
  std::map<std::string, std::vector<std::size_t>> adjacency;
  for (std::size_t i = 0; i < subgraph.edges.size(); ++i) adjacency[subgraph.edges[i].src].push_back(i);

  const std::size_t unit_count = pattern.atoms.size();
  std::set<std::string> seen_keys;

  std::vector<std::string> path_nodes;
  std::vector<std::size_t> path_edges;
  std::map<std::string, std::string> bindings;

  auto all_optional_from = [&](std::size_t unit) {
    for (std::size_t u = unit; u < unit_count; ++u)
      if (pattern.atoms[u].quant.min > 0) return false;
    return true;
  };

  auto emit = [&]() {
    // Declared slots must all be bound; an optional slot atom matched zero
    // times invalidates the instance.
    for (const PatternAtom& atom : pattern.atoms)
      if (atom.slot && bindings.count(*atom.slot) == 0) return;
    MetapathInstance instance;
    instance.pattern_id = pattern.id;
    instance.bindings = bindings;
    instance.path_nodes = path_nodes;
    instance.path_edges = path_edges;
    std::string key = join(instance.path_nodes, "\x1f");
    key += "\x1e";
    for (std::size_t e : instance.path_edges) key += std::to_string(e) + ",";
    key += "\x1e";
    for (const auto& [slot, node] : instance.bindings) key += slot + "=" + node + ";";
    if (seen_keys.insert(key).second) results.push_back(std::move(instance));
  };

  // inside(u, reps): the path currently ends on the reps-th node of unit u.
  auto inside = [&](auto&& self, std::size_t u, int reps) -> void {
    const PatternAtom& atom = pattern.atoms[u];
    if (reps >= atom.quant.min) {
      if (all_optional_from(u + 1)) emit();
      // Enter a later unit; intervening units must be skippable.
      for (std::size_t w = u + 1; w < unit_count; ++w) {
        const PatternAtom& next = pattern.atoms[w];
        if (path_nodes.size() < max_path_length) {
          for (std::size_t edge_idx : adjacency[path_nodes.back()]) {
            const Edge& e = subgraph.edges[edge_idx];
            if (next.edge_kinds.count(e.kind) == 0) continue;
            if (!next.matches_node(graph.node(e.dst))) continue;
            path_nodes.push_back(e.dst);
            path_edges.push_back(edge_idx);
            bool bound = false;
            if (next.slot && bindings.count(*next.slot) == 0) {
              bindings[*next.slot] = e.dst;
              bound = true;
            }
            self(self, w, 1);
            if (bound) bindings.erase(*next.slot);
            path_nodes.pop_back();
            path_edges.pop_back();
          }
        }
        if (next.quant.min > 0) break;
      }
    }
    // Repeat within the unit.
    if (atom.quant.admits(reps + 1) && path_nodes.size() < max_path_length) {
      for (std::size_t edge_idx : adjacency[path_nodes.back()]) {
        const Edge& e = subgraph.edges[edge_idx];
        if (!atom.matches_edge(e.kind)) continue;
        if (!atom.matches_node(graph.node(e.dst))) continue;
        path_nodes.push_back(e.dst);
        path_edges.push_back(edge_idx);
        self(self, u, reps + 1);
        path_nodes.pop_back();
        path_edges.pop_back();
      }
    }
  };

  // Start points: the first unit, or any later unit reachable by skipping
  // leading optional units.
  std::vector<std::string> start_nodes(subgraph.node_ids.begin(), subgraph.node_ids.end());
  for (const std::string& node_id : start_nodes) {
    const Node& node = graph.node(node_id);
    for (std::size_t w = 0; w < unit_count; ++w) {
      const PatternAtom& atom = pattern.atoms[w];
      if (atom.matches_node(node)) {
        path_nodes.push_back(node_id);
        bool bound = false;
        if (atom.slot) {
          bindings[*atom.slot] = node_id;
          bound = true;
        }
        inside(inside, w, 1);
        if (bound) bindings.erase(*atom.slot);
        path_nodes.pop_back();
      }
      if (atom.quant.min > 0) break;  // cannot skip a mandatory unit
    }
  }

  std::sort(results.begin(), results.end(), [](const MetapathInstance& a, const MetapathInstance& b) {
    if (a.path_nodes.front() != b.path_nodes.front()) return a.path_nodes.front() < b.path_nodes.front();
    if (a.path_nodes.size() != b.path_nodes.size()) return a.path_nodes.size() < b.path_nodes.size();
    if (a.path_nodes != b.path_nodes) return a.path_nodes < b.path_nodes;
    if (a.path_edges != b.path_edges) return a.path_edges < b.path_edges;
    return a.bindings < b.bindings;
  });
  return results;
}

// Re-validates an instance against its pattern; used by tests and the
// instance invariant check.
inline bool validate_instance(const MetapathPattern& pattern, const MetapathInstance& instance,
                              const Subgraph& subgraph, const Graph& graph) {
  if (instance.path_nodes.empty()) return false;
  for (const std::string& id : instance.path_nodes)
    if (!subgraph.contains(id)) return false;
  for (std::size_t i = 0; i < instance.path_edges.size(); ++i) {
    if (instance.path_edges[i] >= subgraph.edges.size()) return false;
    const Edge& e = subgraph.edges[instance.path_edges[i]];
    if (e.src != instance.path_nodes[i] || e.dst != instance.path_nodes[i + 1]) return false;
  }
  for (const PatternAtom& atom : pattern.atoms)
    if (atom.slot && instance.bindings.count(*atom.slot) == 0) return false;
  for (const auto& [slot, node_id] : instance.bindings) {
    bool declared = false;
    bool matched = false;
    for (const PatternAtom& atom : pattern.atoms) {
      if (atom.slot == slot) {
        declared = true;
        if (atom.matches_node(graph.node(node_id))) matched = true;
      }
    }
    if (!declared || !matched) return false;
  }
  return instance.path_edges.size() + 1 == instance.path_nodes.size();
}

// --- tier selection ----------------------------------------------------------

// Business patterns lead when the subgraph holds business data; general
// patterns join when their mandatory kinds are present; basic patterns
// always trail as the fallback.
inline std::vector<const MetapathPattern*> select_patterns(const std::vector<MetapathPattern>& library,
                                                           const Subgraph& subgraph, const Graph& graph) {
  std::set<std::string> present;
  bool has_business = false;
  for (const std::string& id : subgraph.node_ids) {
    const Node& node = graph.node(id);
    present.insert(normalize_type_name(node.kind.name()));
    if (node.kind.element_kind == ElementKind::business_data) has_business = true;
  }
  auto applicable = [&](const MetapathPattern& pattern) {
    for (const PatternAtom& atom : pattern.atoms) {
      if (atom.quant.min == 0) continue;
      bool any = false;
      for (const std::string& alt : atom.alternatives)
        if (present.count(alt) != 0) any = true;
      if (!any) return false;
    }
    return true;
  };
  std::vector<const MetapathPattern*> ordered;
  if (has_business)
    for (const MetapathPattern& p : library)
      if (p.tier == PatternTier::business) ordered.push_back(&p);
  for (const MetapathPattern& p : library)
    if (p.tier == PatternTier::general && applicable(p)) ordered.push_back(&p);
  for (const MetapathPattern& p : library)
    if (p.tier == PatternTier::basic) ordered.push_back(&p);
  return ordered;
}

// --- library -----------------------------------------------------------------

inline std::vector<MetapathPattern> builtin_pattern_library() {
  std::vector<MetapathPattern> lib;
  auto add = [&](const char* id, const char* name, PatternTier tier, const char* text) {
    lib.push_back(parse_pattern(text, id, name, tier));
  };
  add("biz.search_submit", "Search and submit over business data", PatternTier::business,
      "SearchBox($search) -[Fills]-> BusinessData($query) -[Controls]-> Button($submit)");
  add("biz.form_fill", "Fill a form field and submit", PatternTier::business,
      "Input($field) -[FormSubmit]-> Form($form)");
  add("biz.result_controls", "Act on a result collection", PatternTier::business,
      "BusinessData($results) -[Controls]-> Button($action)");
  add("gen.search_button", "Search box next to its button", PatternTier::general,
      "SearchBox($search) -[Layout]-> Button($submit)");
  add("gen.nav_chain", "Chain of navigation links", PatternTier::general,
      "Link($start) -[Layout]-> Link+");
  add("gen.button_modal", "Button opening a modal", PatternTier::general,
      "Button($trigger) -[ClickTrigger]-> Modal($dialog)");
  add("gen.button_toast", "Button raising a toast", PatternTier::general,
      "Button($trigger) -[ClickTrigger]-> Toast($note)");
  add("basic.button", "Single button", PatternTier::basic, "Button($target)");
  add("basic.link", "Single link", PatternTier::basic, "Link($target)");
  return lib;
}

inline json pattern_library_to_json(const std::vector<MetapathPattern>& library) {
  json out = json::array();
  for (const MetapathPattern& p : library)
    out.push_back(json{{"id", p.id}, {"name", p.name}, {"tier", to_string(p.tier)}, {"pattern", p.source_text}});
  return out;
}

inline std::vector<MetapathPattern> load_pattern_library(const json& j) {
  if (!j.is_array()) throw Error("pattern library: expected a JSON array");
  std::vector<MetapathPattern> lib;
  for (const json& entry : j) {
    Graph::check_keys(entry, {"id", "name", "tier", "pattern"}, "pattern library entry");
    auto tier = pattern_tier_from_string(entry.at("tier").get<std::string>());
    if (!tier) throw Error("pattern library: unknown tier " + entry.at("tier").dump());
    lib.push_back(parse_pattern(entry.at("pattern").get<std::string>(), entry.at("id").get<std::string>(),
                                entry.value("name", ""), *tier));
  }
  return lib;
}

}  // namespace kgbench
