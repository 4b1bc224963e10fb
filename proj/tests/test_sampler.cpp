#include <catch2/catch_amalgamated.hpp>

#include "kgbench/sampler.hpp"

#include "generators.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace kgbench;

namespace {

Graph four_node_fixture() {
  // Relevance against goal (1,0,0,0) by construction: 0.9, 0.2, 0.1, 0.4.
  Graph g(4);
  auto with_cos = [](double c) {
    return std::vector<double>{c, std::sqrt(1.0 - c * c), 0.0, 0.0};
  };
  g.add_node(testutil::make_node("n1", NodeKind::of(NodeCategory::Paragraph), "p1", with_cos(0.9)));
  g.add_node(testutil::make_node("n2", NodeKind::of(NodeCategory::Paragraph), "p2", with_cos(0.2)));
  auto n3 = testutil::make_node("n3", NodeKind::of(NodeCategory::Table), "t", with_cos(0.1));
  g.add_node(n3);
  g.add_node(testutil::make_node("n4", NodeKind::of(NodeCategory::Paragraph), "p4", with_cos(0.4)));
  g.add_edge("n1", "n2", EdgeKind::sequence);
  g.add_edge("n2", "n3", EdgeKind::sequence);
  g.add_edge("n1", "n3", EdgeKind::table_context);
  return g;
}

TaskObjective doc_objective(std::set<NodeCategory> kinds = {NodeCategory::Table}) {
  TaskObjective obj;
  obj.goal_text = "goal";
  obj.goal_embedding = {1, 0, 0, 0};
  obj.mode = SampleMode::document;
  obj.required_node_kinds = std::move(kinds);
  return obj;
}

}  // namespace

TEST_CASE("relevance is the cosine of node and goal embeddings") {
  Graph g = four_node_fixture();
  auto obj = doc_objective();
  REQUIRE(relevance(g.node("n1"), obj) == Catch::Approx(0.9).margin(1e-12));
  Node same = testutil::make_node("same", NodeKind::of(NodeCategory::Paragraph), "x", {1, 0, 0, 0});
  REQUIRE(relevance(same, obj) == Catch::Approx(1.0).margin(1e-12));
  Node orthogonal = testutil::make_node("o", NodeKind::of(NodeCategory::Paragraph), "x", {0, 1, 0, 0});
  REQUIRE(relevance(orthogonal, obj) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("struct_match kind and context clauses") {
  auto obj = doc_objective({NodeCategory::Table});
  Node table = testutil::make_node("t", NodeKind::of(NodeCategory::Table), "x", {1, 0, 0, 0});
  Node para = testutil::make_node("p", NodeKind::of(NodeCategory::Paragraph), "x", {1, 0, 0, 0});
  REQUIRE(struct_match(table, obj));
  REQUIRE_FALSE(struct_match(para, obj));

  obj.required_node_kinds = {NodeCategory::Heading};
  obj.required_context = "Methods";
  Node heading = testutil::make_node("h", NodeKind::of(NodeCategory::Heading), "x", {1, 0, 0, 0});
  heading.contextual_path = {"Doc", "2 Methods"};
  REQUIRE(struct_match(heading, obj));
  heading.contextual_path = {"Doc", "3 Results"};
  REQUIRE_FALSE(struct_match(heading, obj));
}

TEST_CASE("document sampling worked example") {
  Graph g = four_node_fixture();
  auto obj = doc_objective({NodeCategory::Table});  // n3 struct-matches
  SamplerConfig cfg;
  cfg.tau = 0.5;
  Subgraph sg = sample_document_subgraph(g, obj, cfg);
  REQUIRE(sg.node_ids == std::set<std::string>{"n1", "n3"});
  // induced edges: only n1->n3
  REQUIRE(sg.edges.size() == 1);
  REQUIRE(sg.edges[0].kind == EdgeKind::table_context);

  SECTION("tau 0.99 with no struct matches yields the empty subgraph") {
    auto strict = doc_objective({});
    SamplerConfig high;
    high.tau = 0.99;
    Subgraph empty = sample_document_subgraph(g, strict, high);
    REQUIRE(empty.empty());
    REQUIRE(empty.edges.empty());
  }
  SECTION("saturation: everything relevant selects all document-kind nodes") {
    Graph sat(2);
    for (int i = 0; i < 4; ++i)
      sat.add_node(testutil::make_node("s" + std::to_string(i), NodeKind::of(NodeCategory::Paragraph), "x",
                                       {1, 0}));
    sat.add_edge("s0", "s1", EdgeKind::sequence);
    TaskObjective all;
    all.goal_embedding = {1, 0};
    all.mode = SampleMode::document;
    Subgraph s = sample_document_subgraph(sat, all, SamplerConfig{});
    REQUIRE(s.node_ids.size() == 4);
    REQUIRE(s.edges.size() == 1);
  }
}

namespace {

Graph web_fixture() {
  Graph g(2);
  Node page = testutil::make_node("p:page", NodeKind::of(NodeCategory::WebPage), "Page", {1, 0}, "u");
  page.metadata["url"] = "https://x.org/";
  page.metadata["order"] = "0000";
  g.add_node(page);
  g.add_node(testutil::make_web_element("w:button", ElementKind::button, "Go", {1, 0}, "https://x.org/",
                                        "#go", "0001"));
  g.add_node(testutil::make_web_element("w:modal", ElementKind::modal, "Dialog", {0, 1}, "https://x.org/",
                                        "#dlg", "0002"));
  Node heading = testutil::make_node("w:heading", NodeKind::of(NodeCategory::Heading), "Hi", {0, 1},
                                     "https://x.org/");
  heading.metadata["url"] = "https://x.org/";
  heading.metadata["order"] = "0003";
  g.add_node(heading);
  g.add_edge("p:page", "w:button", EdgeKind::contains);
  g.add_edge("p:page", "w:modal", EdgeKind::contains);
  g.add_edge("p:page", "w:heading", EdgeKind::contains);
  g.add_edge("w:button", "w:modal", EdgeKind::click_trigger);
  return g;
}

}  // namespace

TEST_CASE("identify_seeds") {
  Graph g = web_fixture();
  TaskObjective obj;
  obj.mode = SampleMode::web;
  REQUIRE(identify_seeds(g, obj) == std::set<std::string>{"w:button"});

  SECTION("empty graph has no seeds") {
    Graph empty(2);
    REQUIRE(identify_seeds(empty, obj).empty());
  }
  SECTION("selector restricted to search boxes") {
    SeedSelector sel;
    sel.kinds = {ElementKind::search_box};
    obj.seed_selector = sel;
    REQUIRE(identify_seeds(g, obj).empty());
  }
}

TEST_CASE("web sampling worked examples") {
  Graph g = web_fixture();
  TaskObjective obj;
  obj.mode = SampleMode::web;
  SamplerConfig cfg;
  cfg.k = 1;
  Subgraph sg = sample_web_subgraph(g, obj, cfg);
  // button seed; 1 hop reaches page and modal; the heading is filtered out
  REQUIRE(sg.node_ids == std::set<std::string>{"w:button", "p:page", "w:modal"});
  REQUIRE(sg.seed_ids == std::set<std::string>{"w:button"});

  SECTION("k=2 grows monotonically") {
    SamplerConfig k2;
    k2.k = 2;
    Subgraph larger = sample_web_subgraph(g, obj, k2);
    for (const std::string& id : sg.node_ids) REQUIRE(larger.contains(id));
  }
  SECTION("document-kind nodes within reach stay excluded") {
    SamplerConfig k3;
    k3.k = 3;
    Subgraph wide = sample_web_subgraph(g, obj, k3);
    REQUIRE_FALSE(wide.contains("w:heading"));
  }
  SECTION("no seeds yields an empty subgraph with a diagnostic") {
    Graph empty(2);
    Diagnostics diags;
    Subgraph none = sample_web_subgraph(empty, obj, cfg, &diags);
    REQUIRE(none.empty());
    REQUIRE_FALSE(diags.warnings.empty());
  }
}

TEST_CASE("induced edges are exact") {
  gen::Rng rng(2024);
  for (int trial = 0; trial < 30; ++trial) {
    Graph g = gen::random_graph(rng, 18);
    std::set<std::string> ids;
    for (const auto& [id, node] : g.nodes()) {
      (void)node;
      if (gen::unit(rng) < 0.5) ids.insert(id);
    }
    Subgraph sg = make_subgraph(g, ids);
    std::multiset<std::tuple<std::string, std::string, int>> expected, got;
    for (const Edge& e : g.edges())
      if (ids.count(e.src) != 0 && ids.count(e.dst) != 0)
        expected.insert({e.src, e.dst, static_cast<int>(e.kind)});
    for (const Edge& e : sg.edges) {
      got.insert({e.src, e.dst, static_cast<int>(e.kind)});
      REQUIRE(ids.count(e.src) == 1);
      REQUIRE(ids.count(e.dst) == 1);
    }
    REQUIRE(got == expected);
  }
}

TEST_CASE("sampler equals the line-by-line transcription oracle") {
  gen::Rng rng(77);
  SamplerConfig cfg;
  for (int trial = 0; trial < 60; ++trial) {
    Graph g = gen::random_graph(rng, 30);
    cfg.tau = 0.2 + gen::unit(rng) * 0.6;
    cfg.k = gen::pick(rng, 1, 3);

    TaskObjective obj;
    obj.goal_embedding = gen::random_embedding(rng, g.dimension());
    obj.mode = trial % 2 == 0 ? SampleMode::document : SampleMode::web;
    if (obj.mode == SampleMode::document) {
      obj.required_node_kinds = {NodeCategory::Table, NodeCategory::Heading};
      if (gen::pick(rng, 0, 1) == 1) obj.required_context = "ctx1";
    }
    Subgraph got = sample_subgraph(g, obj, cfg);
    auto expected = oracle::sampling_oracle(g, obj, cfg.tau, cfg.k);
    REQUIRE(got.node_ids == expected.nodes);
    std::set<std::tuple<std::string, std::string, int>> got_edges;
    for (const Edge& e : got.edges) got_edges.insert({e.src, e.dst, static_cast<int>(e.kind)});
    REQUIRE(got_edges == expected.edges);
  }
}

TEST_CASE("document sampling is anti-monotone in tau; web monotone in k") {
  gen::Rng rng(31337);
  for (int trial = 0; trial < 20; ++trial) {
    Graph g = gen::random_graph(rng, 25);
    TaskObjective doc;
    doc.goal_embedding = gen::random_embedding(rng, g.dimension());
    doc.mode = SampleMode::document;
    std::set<std::string> previous;
    bool first = true;
    for (double tau : {0.1, 0.3, 0.5, 0.7, 0.9}) {
      SamplerConfig cfg;
      cfg.tau = tau;
      auto current = sample_document_subgraph(g, doc, cfg).node_ids;
      if (!first)
        for (const std::string& id : current) REQUIRE(previous.count(id) == 1);
      previous = std::move(current);
      first = false;
    }

    TaskObjective web;
    web.goal_embedding = gen::random_embedding(rng, g.dimension());
    web.mode = SampleMode::web;
    std::set<std::string> smaller;
    first = true;
    for (int k : {1, 2, 3, 4}) {
      SamplerConfig cfg;
      cfg.k = k;
      auto current = sample_web_subgraph(g, web, cfg).node_ids;
      if (!first)
        for (const std::string& id : smaller) REQUIRE(current.count(id) == 1);
      smaller = std::move(current);
      first = false;
    }
  }
}

TEST_CASE("sampling determinism") {
  gen::Rng rng(4);
  Graph g = gen::random_graph(rng, 30);
  TaskObjective obj;
  obj.goal_embedding = gen::random_embedding(rng, g.dimension());
  obj.mode = SampleMode::web;
  SamplerConfig cfg;
  Subgraph a = sample_web_subgraph(g, obj, cfg);
  Subgraph b = sample_web_subgraph(g, obj, cfg);
  REQUIRE(a.node_ids == b.node_ids);
  REQUIRE(a.edges.size() == b.edges.size());
}
