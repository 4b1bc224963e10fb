#pragma once

// Independent reference implementations used to cross-check the library.
// Everything here is written from the definitions, on purpose with different
// data structures and control flow than the production code.

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "kgbench/coverage.hpp"
#include "kgbench/graph.hpp"
#include "kgbench/metapath.hpp"
#include "kgbench/sampler.hpp"
#include "kgbench/task.hpp"

namespace oracle {

// --- token metrics -----------------------------------------------------------

inline std::vector<std::string> simple_tokens(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char raw : text) {
    unsigned char c = static_cast<unsigned char>(raw);
    bool alnum = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
    if (alnum) {
      cur.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : raw);
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// F1 via sorted-list two-pointer intersection.
inline double f1_bruteforce(const std::string& pred, const std::string& gold) {
  auto p = simple_tokens(pred);
  auto g = simple_tokens(gold);
  if (p.empty() && g.empty()) return 1.0;
  if (p.empty() || g.empty()) return 0.0;
  std::sort(p.begin(), p.end());
  std::sort(g.begin(), g.end());
  std::size_t i = 0, j = 0, overlap = 0;
  while (i < p.size() && j < g.size()) {
    if (p[i] == g[j]) {
      ++overlap;
      ++i;
      ++j;
    } else if (p[i] < g[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  if (overlap == 0) return 0.0;
  double precision = double(overlap) / double(p.size());
  double recall = double(overlap) / double(g.size());
  return 2.0 * precision * recall / (precision + recall);
}

// LCS by exhaustive subsequence enumeration over the shorter side. Only
// usable for short inputs; that is the point of an oracle.
inline std::size_t lcs_bruteforce(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  const auto& small = a.size() <= b.size() ? a : b;
  const auto& large = a.size() <= b.size() ? b : a;
  std::size_t best = 0;
  std::size_t combos = std::size_t{1} << small.size();
  for (std::size_t mask = 0; mask < combos; ++mask) {
    std::vector<std::string> candidate;
    for (std::size_t i = 0; i < small.size(); ++i)
      if (mask & (std::size_t{1} << i)) candidate.push_back(small[i]);
    if (candidate.size() <= best) continue;
    // subsequence test against the larger side
    std::size_t pos = 0;
    bool ok = true;
    for (const std::string& token : candidate) {
      while (pos < large.size() && large[pos] != token) ++pos;
      if (pos == large.size()) {
        ok = false;
        break;
      }
      ++pos;
    }
    if (ok) best = candidate.size();
  }
  return best;
}

inline double rouge_l_bruteforce(const std::string& pred, const std::string& gold, double beta = 1.0) {
  auto p = simple_tokens(pred);
  auto g = simple_tokens(gold);
  if (p.empty() && g.empty()) return 1.0;
  if (p.empty() || g.empty()) return 0.0;
  double lcs = double(lcs_bruteforce(p, g));
  if (lcs == 0.0) return 0.0;
  double r = lcs / double(g.size());
  double pr = lcs / double(p.size());
  return (1.0 + beta * beta) * r * pr / (r + beta * beta * pr);
}

// --- vector math -------------------------------------------------------------

inline double cosine_bruteforce(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  double na = 0.0, nb = 0.0;
  for (double x : a) na += x * x;
  for (double x : b) nb += x * x;
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / std::sqrt(na) / std::sqrt(nb);
}

inline std::vector<std::pair<std::string, double>> knn_bruteforce(
    const std::map<std::string, std::vector<double>>& entries, const std::vector<double>& query,
    std::size_t top_k) {
  std::vector<std::pair<std::string, double>> all(entries.size());
  std::size_t i = 0;
  for (const auto& [id, emb] : entries) all[i++] = {id, cosine_bruteforce(query, emb)};
  // selection sort, deliberately naive
  for (std::size_t a = 0; a < all.size(); ++a) {
    std::size_t best = a;
    for (std::size_t b = a + 1; b < all.size(); ++b) {
      if (all[b].second > all[best].second ||
          (all[b].second == all[best].second && all[b].first < all[best].first))
        best = b;
    }
    std::swap(all[a], all[best]);
  }
  if (all.size() > top_k) all.resize(top_k);
  return all;
}

// --- Algorithm 1 transcription -----------------------------------------------

// Literal line-by-line transcription of the sampling algorithm: visit every
// node, evaluate per mode, collect edges between selected nodes at the end.
struct SamplingOracleResult {
  std::set<std::string> nodes;
  std::set<std::tuple<std::string, std::string, int>> edges;
};

inline bool oracle_struct_match(const kgbench::Node& node, const kgbench::TaskObjective& objective) {
  if (objective.required_node_kinds.count(node.kind.category) == 0) return false;
  if (!objective.required_context) return true;
  std::string needle = kgbench::to_lower(*objective.required_context);
  for (const std::string& label : node.contextual_path)
    if (kgbench::to_lower(label).find(needle) != std::string::npos) return true;
  return false;
}

inline SamplingOracleResult sampling_oracle(const kgbench::Graph& graph,
                                            const kgbench::TaskObjective& objective, double tau, int k) {
  using namespace kgbench;
  SamplingOracleResult out;
  for (const auto& [id, node] : graph.nodes()) {
    if (objective.mode == SampleMode::document) {
      double cos = cosine_bruteforce(node.embedding, objective.goal_embedding);
      if (cos > tau || oracle_struct_match(node, objective)) {
        bool in_type_set = node.kind.category == NodeCategory::Paragraph ||
                           node.kind.category == NodeCategory::Heading ||
                           node.kind.category == NodeCategory::Table ||
                           node.kind.category == NodeCategory::Figure ||
                           node.kind.category == NodeCategory::SemanticChunk ||
                           node.kind.category == NodeCategory::Entity;
        if (in_type_set) out.nodes.insert(id);
      }
    } else {
      // seed membership
      bool is_seed = false;
      if (node.kind.category == NodeCategory::WebElement) {
        SeedSelector selector = objective.seed_selector.value_or(SeedSelector{});
        if (selector.kinds.count(*node.kind.element_kind) != 0) {
          is_seed = true;
          if (selector.page_url) {
            auto it = node.metadata.find("url");
            is_seed = it != node.metadata.end() && it->second == *selector.page_url;
          }
        }
      }
      if (is_seed) {
        out.nodes.insert(id);
        // plain BFS to depth k, both directions
        std::map<std::string, int> dist{{id, 0}};
        std::deque<std::string> queue{id};
        while (!queue.empty()) {
          std::string cur = queue.front();
          queue.pop_front();
          if (dist[cur] == k) continue;
          for (const Edge& e : graph.edges()) {
            std::string next;
            if (e.src == cur) next = e.dst;
            else if (e.dst == cur) next = e.src;
            else continue;
            if (dist.count(next) == 0) {
              dist[next] = dist[cur] + 1;
              queue.push_back(next);
              const Node& neighbor = graph.node(next);
              if (neighbor.kind.category == NodeCategory::WebPage ||
                  neighbor.kind.category == NodeCategory::WebElement)
                out.nodes.insert(next);
            }
          }
        }
      }
    }
  }
  for (const kgbench::Edge& e : graph.edges())
    if (out.nodes.count(e.src) != 0 && out.nodes.count(e.dst) != 0)
      out.edges.insert({e.src, e.dst, static_cast<int>(e.kind)});
  return out;
}

// --- meta-path enumeration -----------------------------------------------------

// Exhaustive enumeration: expand the pattern's quantifiers into every linear
// type sequence up to the length cap, then walk the subgraph for each. Node
// and edge matching is re-derived here from the raw pattern identifiers
// (type_idents / edge_idents) rather than the compiled matcher state.
using PathKey = std::pair<std::vector<std::string>, std::vector<std::size_t>>;

inline std::string oracle_normalize(const std::string& name) {
  std::string out;
  for (char c : name)
    if (c != '_') out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

inline bool oracle_node_matches(const kgbench::PatternAtom& atom, const kgbench::Node& node) {
  std::string name = oracle_normalize(node.kind.name());
  for (const std::string& ident : atom.type_idents)
    if (oracle_normalize(ident) == name) return true;
  return false;
}

inline bool oracle_edge_matches(const kgbench::PatternAtom& atom, kgbench::EdgeKind kind) {
  if (atom.edge_idents.empty()) return true;  // first atom: any edge
  std::string name = oracle_normalize(kgbench::to_string(kind));
  for (const std::string& ident : atom.edge_idents)
    if (oracle_normalize(ident) == name) return true;
  return false;
}

inline std::set<PathKey> metapath_oracle(const kgbench::MetapathPattern& pattern,
                                         const kgbench::Subgraph& subgraph, const kgbench::Graph& graph,
                                         std::size_t cap = kgbench::kMaxPatternPathLength) {
  using namespace kgbench;
  std::set<PathKey> results;
  const std::size_t units = pattern.atoms.size();
  if (units == 0) return results;

  // Step 1: all repetition assignments with total length in [1, cap].
  std::vector<std::vector<int>> assignments;
  std::vector<int> current(units, 0);
  auto recurse = [&](auto&& self, std::size_t u, std::size_t total) -> void {
    if (u == units) {
      if (total >= 1) assignments.push_back(current);
      return;
    }
    const Quantifier& q = pattern.atoms[u].quant;
    int max_reps = q.unbounded ? static_cast<int>(cap) : q.max;
    for (int reps = q.min; reps <= max_reps; ++reps) {
      if (total + static_cast<std::size_t>(reps) > cap) break;
      // a slot never binds on a zero-rep unit, which would invalidate it
      if (reps == 0 && pattern.atoms[u].slot) continue;
      current[u] = reps;
      self(self, u + 1, total + static_cast<std::size_t>(reps));
    }
    current[u] = 0;
  };
  recurse(recurse, 0, 0);

  // Step 2: for each assignment, build the linear matcher sequence and
  // enumerate matching walks.
  for (const std::vector<int>& reps : assignments) {
    struct Slot {
      const kgbench::PatternAtom* atom;
    };
    std::vector<Slot> sequence;
    for (std::size_t u = 0; u < units; ++u)
      for (int r = 0; r < reps[u]; ++r) sequence.push_back({&pattern.atoms[u]});
    if (sequence.empty()) continue;

    std::vector<std::string> nodes;
    std::vector<std::size_t> edges;
    auto walk = [&](auto&& self, std::size_t position) -> void {
      if (position == sequence.size()) {
        results.insert({nodes, edges});
        return;
      }
      if (position == 0) {
        for (const std::string& id : subgraph.node_ids) {
          if (!oracle_node_matches(*sequence[0].atom, graph.node(id))) continue;
          nodes.push_back(id);
          self(self, 1);
          nodes.pop_back();
        }
        return;
      }
      // Both within-unit repetitions and unit entries traverse the unit's
      // own edge matcher; the first atom's empty matcher admits any edge.
      for (std::size_t e = 0; e < subgraph.edges.size(); ++e) {
        const kgbench::Edge& edge = subgraph.edges[e];
        if (edge.src != nodes.back()) continue;
        if (!oracle_edge_matches(*sequence[position].atom, edge.kind)) continue;
        if (!oracle_node_matches(*sequence[position].atom, graph.node(edge.dst))) continue;
        nodes.push_back(edge.dst);
        edges.push_back(e);
        self(self, position + 1);
        nodes.pop_back();
        edges.pop_back();
      }
    };
    walk(walk, 0);
  }
  return results;
}

// --- greedy selection ----------------------------------------------------------

// Exhaustive greedy MMR, recomputing everything from scratch each round with
// its own bucket and similarity code.
inline std::vector<std::pair<std::string, std::string>> oracle_buckets(const kgbench::Task& task) {
  using namespace kgbench;
  std::vector<std::pair<std::string, std::string>> out;
  if (task.kind == TaskKind::web) {
    std::string actions;
    {
      std::set<std::string> set;
      for (const WebStep& s : task.web_steps) set.insert(to_string(s.action));
      for (const std::string& a : set) actions += a + "+";
      if (!actions.empty()) actions.pop_back();
    }
    out.push_back({"node_type", task.metadata.count("node_types") ? task.metadata.at("node_types") : actions});
    out.push_back({"edge_type", task.metadata.count("edge_types") ? task.metadata.at("edge_types") : "none"});
    out.push_back({"pattern", task.provenance.source_id});
    out.push_back({"page", task.metadata.count("page_url") ? task.metadata.at("page_url") : "unknown"});
    out.push_back(
        {"website_type", task.metadata.count("website_type") ? task.metadata.at("website_type") : "general"});
    out.push_back({"difficulty", to_string(task.difficulty)});
  } else {
    out.push_back({"task_type", to_string(task.type)});
    out.push_back({"difficulty", to_string(task.difficulty)});
    out.push_back({"template", task.provenance.source_id});
    out.push_back({"variable", task.metadata.count("variables") ? task.metadata.at("variables") : "none"});
    std::size_t n = simple_tokens(task.prompt).size();
    out.push_back({"content_length", n < 50 ? "short" : (n <= 150 ? "medium" : "long")});
  }
  return out;
}

inline double oracle_similarity(const kgbench::Task& a, const kgbench::Task& b) {
  using namespace kgbench;
  auto jaccard_set = [](const std::string& x, const std::string& y) {
    auto tx = simple_tokens(x);
    auto ty = simple_tokens(y);
    std::set<std::string> sx(tx.begin(), tx.end()), sy(ty.begin(), ty.end());
    if (sx.empty() && sy.empty()) return 1.0;
    std::size_t inter = 0;
    for (const auto& t : sx) inter += sy.count(t);
    std::size_t uni = sx.size() + sy.size() - inter;
    return uni == 0 ? 0.0 : double(inter) / double(uni);
  };
  double prompt_sim = jaccard_set(a.prompt, b.prompt);
  if (a.kind == TaskKind::document) return prompt_sim;
  double pattern = a.provenance.source_id == b.provenance.source_id ? 1.0 : 0.0;
  std::multiset<std::string> sa, sb;
  for (const WebStep& s : a.web_steps) sa.insert(to_string(s.action));
  for (const WebStep& s : b.web_steps) sb.insert(to_string(s.action));
  std::multiset<std::string> inter;
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::inserter(inter, inter.begin()));
  std::multiset<std::string> uni;
  std::set_union(sa.begin(), sa.end(), sb.begin(), sb.end(), std::inserter(uni, uni.begin()));
  double steps = uni.empty() ? 1.0 : double(inter.size()) / double(uni.size());
  return 0.3 * pattern + 0.3 * steps + 0.4 * prompt_sim;
}

inline std::vector<std::string> mmr_oracle(const std::vector<kgbench::Task>& pool,
                                           const std::map<std::string, double>& quality, double lambda,
                                           double alpha, std::size_t target) {
  using namespace kgbench;
  std::set<std::pair<std::string, std::string>> universe;
  for (const Task& t : pool)
    for (const auto& bucket : oracle_buckets(t)) universe.insert(bucket);

  std::vector<const Task*> remaining;
  for (const Task& t : pool) remaining.push_back(&t);
  std::vector<const Task*> picked;
  std::vector<std::string> out;
  std::set<std::pair<std::string, std::string>> covered;
  while (out.size() < target && !remaining.empty()) {
    const Task* winner = nullptr;
    double winner_score = 0.0;
    for (const Task* t : remaining) {
      double fresh = 0.0;
      for (const auto& bucket : oracle_buckets(*t))
        if (covered.count(bucket) == 0) fresh += 1.0;
      double gain = universe.empty() ? 0.0 : fresh / double(universe.size());
      double q = quality.count(t->task_id) ? quality.at(t->task_id) : 0.0;
      double sim = 0.0;
      for (const Task* s : picked)
        if (s->kind == t->kind) sim = std::max(sim, oracle_similarity(*t, *s));
      double score = lambda * (alpha * q + (1.0 - alpha) * gain) - (1.0 - lambda) * sim;
      if (winner == nullptr || score > winner_score ||
          (score == winner_score && t->task_id < winner->task_id))
        winner = t, winner_score = score;
    }
    out.push_back(winner->task_id);
    picked.push_back(winner);
    for (const auto& bucket : oracle_buckets(*winner)) covered.insert(bucket);
    remaining.erase(std::find(remaining.begin(), remaining.end(), winner));
  }
  return out;
}

// --- chunk packing --------------------------------------------------------------

inline std::vector<std::string> greedy_packing_oracle(const std::vector<std::string>& block_texts,
                                                      std::size_t budget) {
  std::vector<std::string> chunks;
  std::vector<std::string> bag;
  std::size_t count = 0;
  auto flush = [&]() {
    if (bag.empty()) return;
    std::string joined = bag[0];
    for (std::size_t i = 1; i < bag.size(); ++i) joined += " " + bag[i];
    chunks.push_back(joined);
    bag.clear();
    count = 0;
  };
  for (const std::string& text : block_texts) {
    std::size_t n = simple_tokens(text).size();
    if (n == 0) continue;
    if (count + n > budget) flush();
    bag.push_back(text);
    count += n;
  }
  flush();
  return chunks;
}

}  // namespace oracle
