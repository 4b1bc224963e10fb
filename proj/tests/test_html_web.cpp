#include <catch2/catch_amalgamated.hpp>

#include "kgbench/html.hpp"
#include "kgbench/web_ingest.hpp"

#include "helpers.hpp"

using namespace kgbench;

namespace {

PageSnapshot snapshot(const std::string& url, const std::string& title, const std::string& html) {
  PageSnapshot s;
  s.url = url;
  s.title = title;
  s.html = html;
  s.fetched_at = "2025-11-02T10:00:00Z";
  s.website_type = "library";
  return s;
}

const char* kSearchPage = R"(<!DOCTYPE html>
<html><head><title>Search</title></head>
<body>
<nav id="main-nav"><a href="/">Home</a><a href="/about">About</a></nav>
<form id="search-form">
  <input type="search" name="q" id="q" placeholder="Search books">
  <button type="submit" id="go">Search</button>
</form>
<ul id="results">
  <li class="result"><a href="/about">Atlas</a></li>
  <li class="result"><a href="/about">Primer</a></li>
  <li class="result"><a href="/about">Manual</a></li>
</ul>
<button id="help" data-modal-target="#help-modal">Help</button>
<div id="help-modal" class="modal" role="dialog">Type a query.</div>
</body></html>)";

}  // namespace

TEST_CASE("html parser basics") {
  auto doc = parse_html("<div id=\"a\"><p>Hello &amp; goodbye</p><br><p>Two</p></div>");
  const HtmlNode* div = doc.resolve("#a");
  REQUIRE(div != nullptr);
  REQUIRE(div->children.size() == 3);
  REQUIRE(div->visible_text() == "Hello & goodbye Two");
}

TEST_CASE("html parser tolerates tag soup") {
  auto doc = parse_html("<ul><li>one<li>two</ul><p>tail");
  REQUIRE(doc.root().children.size() == 2);
  const HtmlNode* ul = doc.root().children[0].get();
  int items = 0;
  for (const auto& child : ul->children)
    if (!child->is_text && child->tag == "li") ++items;
  REQUIRE(items == 2);
}

TEST_CASE("html parser reports byte offsets for malformed input") {
  try {
    parse_html("text <button");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    REQUIRE(e.offset() == 5);
  }
  REQUIRE_THROWS_AS(parse_html("<div class=\"x></div>"), ParseError);
  REQUIRE_THROWS_AS(parse_html("<!-- never closed"), ParseError);
}

TEST_CASE("selectors prefer ids and round-trip") {
  auto doc = parse_html(kSearchPage);
  std::vector<const HtmlNode*> elements;
  doc.root().for_each_element([&](const HtmlNode& n) { elements.push_back(&n); });
  for (const HtmlNode* element : elements) {
    std::string selector = doc.selector_for(*element);
    const HtmlNode* resolved = doc.resolve(selector);
    REQUIRE(resolved == element);
  }
  const HtmlNode* q = doc.resolve("#q");
  REQUIRE(q != nullptr);
  REQUIRE(q->tag == "input");
}

TEST_CASE("parse_snapshot classification table") {
  auto parse = parse_snapshot(snapshot("https://x.org/search", "Search", kSearchPage));
  std::map<std::string, int> kinds;
  for (const WebElementRecord& rec : parse.elements) kinds[rec.kind.name()]++;
  REQUIRE(kinds["navigation"] == 1);
  REQUIRE(kinds["link"] == 5);        // 2 nav + 3 result links
  REQUIRE(kinds["form"] == 1);
  REQUIRE(kinds["search_box"] == 1);  // input[type=search]
  REQUIRE(kinds["button"] == 2);      // submit + help
  REQUIRE(kinds["business_data"] == 1);
  REQUIRE(kinds["result_item"] == 3);
  REQUIRE(kinds["modal"] == 1);
}

TEST_CASE("parse_snapshot worked examples") {
  SECTION("button and link") {
    auto parse =
        parse_snapshot(snapshot("https://x.org/", "T", "<body><button>Go</button><a href=\"/a\">A</a></body>"));
    REQUIRE(parse.elements.size() == 2);
    REQUIRE(parse.elements[0].kind.element_kind == ElementKind::button);
    REQUIRE(parse.elements[1].kind.element_kind == ElementKind::link);
  }
  SECTION("input[type=search] becomes search_box") {
    auto parse = parse_snapshot(snapshot("https://x.org/", "T", "<body><input type=\"search\"></body>"));
    REQUIRE(parse.elements.size() == 1);
    REQUIRE(parse.elements[0].kind.element_kind == ElementKind::search_box);
  }
  SECTION("page with no body yields no elements") {
    Diagnostics diags;
    auto parse = parse_snapshot(snapshot("https://x.org/", "T", "<html></html>"), &diags);
    REQUIRE(parse.elements.empty());
    REQUIRE_FALSE(diags.warnings.empty());
  }
  SECTION("headings come through as Heading nodes") {
    auto parse = parse_snapshot(snapshot("https://x.org/", "T", "<body><h1>Hi</h1></body>"));
    REQUIRE(parse.elements.size() == 1);
    REQUIRE(parse.elements[0].kind.category == NodeCategory::Heading);
  }
}

TEST_CASE("selector re-resolution round-trips for all records") {
  PageSnapshot snap = snapshot("https://x.org/search", "Search", kSearchPage);
  auto parse = parse_snapshot(snap);
  auto dom = parse_html(snap.html);
  for (const WebElementRecord& rec : parse.elements) {
    const HtmlNode* node = dom.resolve(rec.selector);
    REQUIRE(node != nullptr);
    REQUIRE(node->tag == rec.tag);
  }
}

TEST_CASE("build_web_graph edge construction") {
  HashingEmbedder embedder(16);
  std::vector<PageSnapshot> snaps = {
      snapshot("https://x.org/search", "Search", kSearchPage),
      snapshot("https://x.org/about", "About",
               "<body><nav id=\"n\"><a href=\"/search\">Search</a></nav><h1>About</h1>"
               "<button id=\"t\" data-toast-target=\"#note\">News</button>"
               "<div id=\"note\" class=\"toast\" aria-live=\"polite\">hi</div></body>"),
      snapshot("https://x.org/", "Home",
               "<body><a href=\"/search\">Search</a><a href=\"/about\">About</a></body>"),
  };
  Diagnostics diags;
  Graph g = build_web_graph(snaps, embedder, {}, &diags);

  auto count_kind = [&](EdgeKind kind) {
    int n = 0;
    for (const Edge& e : g.edges())
      if (e.kind == kind) ++n;
    return n;
  };

  SECTION("every element has exactly one incoming contains edge from its page") {
    for (const auto& [id, node] : g.nodes()) {
      if (node.kind.category == NodeCategory::WebPage) continue;
      int contains_from_page = 0;
      for (std::size_t idx : g.in_edges(id)) {
        const Edge& e = g.edges()[idx];
        if (e.kind == EdgeKind::contains && g.node(e.src).kind.category == NodeCategory::WebPage)
          ++contains_from_page;
      }
      REQUIRE(contains_from_page == 1);
    }
  }

  SECTION("nav_to edges only land on corpus pages") {
    REQUIRE(count_kind(EdgeKind::nav_to) > 0);
    for (const Edge& e : g.edges()) {
      if (e.kind != EdgeKind::nav_to) continue;
      REQUIRE(g.node(e.src).kind.element_kind == ElementKind::link);
      REQUIRE(g.node(e.dst).kind.category == NodeCategory::WebPage);
    }
  }

  SECTION("form_submit edges connect the field and submit to the form") {
    int form_edges = 0;
    for (const Edge& e : g.edges()) {
      if (e.kind != EdgeKind::form_submit) continue;
      ++form_edges;
      REQUIRE(g.node(e.dst).kind.element_kind == ElementKind::form);
    }
    REQUIRE(form_edges == 2);  // search box + submit button
  }

  SECTION("click_trigger from buttons to modal and toast") {
    int triggers = 0;
    for (const Edge& e : g.edges()) {
      if (e.kind != EdgeKind::click_trigger) continue;
      ++triggers;
      auto target = g.node(e.dst).kind.element_kind;
      REQUIRE((target == ElementKind::modal || target == ElementKind::toast));
    }
    REQUIRE(triggers == 2);
  }

  SECTION("search flow: fills and controls run through the data container") {
    REQUIRE(count_kind(EdgeKind::fills) == 1);
    REQUIRE(count_kind(EdgeKind::controls) >= 1);
    for (const Edge& e : g.edges()) {
      if (e.kind == EdgeKind::fills) {
        REQUIRE(g.node(e.src).kind.element_kind == ElementKind::search_box);
        REQUIRE(g.node(e.dst).kind.element_kind == ElementKind::business_data);
      }
      if (e.kind == EdgeKind::controls) {
        REQUIRE(g.node(e.src).kind.element_kind == ElementKind::business_data);
        REQUIRE(g.node(e.dst).kind.element_kind == ElementKind::button);
      }
    }
  }

  SECTION("layout edges connect adjacent extracted siblings") { REQUIRE(count_kind(EdgeKind::layout) > 0); }

  SECTION("deterministic given identical snapshot bytes") {
    Graph again = build_web_graph(snaps, embedder);
    REQUIRE(again.serialize() == g.serialize());
  }
}

TEST_CASE("dangling hrefs are logged, not fatal") {
  HashingEmbedder embedder(8);
  Diagnostics diags;
  Graph g = build_web_graph(
      {snapshot("https://x.org/", "Home", "<body><a href=\"/nowhere\">dead</a></body>")}, embedder, {},
      &diags);
  int nav = 0;
  for (const Edge& e : g.edges())
    if (e.kind == EdgeKind::nav_to) ++nav;
  REQUIRE(nav == 0);
  bool logged = false;
  for (const std::string& w : diags.warnings)
    if (w.find("dangling href") != std::string::npos) logged = true;
  REQUIRE(logged);
}

TEST_CASE("url helpers") {
  REQUIRE(url_host("https://a.example.org/x/y") == "a.example.org");
  REQUIRE(url_path("https://a.example.org") == "/");
  REQUIRE(url_depth("https://a.example.org/x/y") == 2);
  REQUIRE(normalize_url("https://a.org/x/#frag") == "https://a.org/x");
  REQUIRE(resolve_href("https://a.org/dir/page", "other") == "https://a.org/dir/other");
  REQUIRE(resolve_href("https://a.org/dir/page", "/root") == "https://a.org/root");
  REQUIRE(resolve_href("https://a.org/dir/page", "../up") == "https://a.org/up");
  REQUIRE(resolve_href("https://a.org/dir/page", "#frag").empty());
}

TEST_CASE("filter_links rule table") {
  auto rules = default_link_rules("example.org");
  SECTION("asset extensions are dropped") {
    auto kept = filter_links({"https://example.org/logo.png", "https://example.org/about"}, rules);
    REQUIRE(kept == std::vector<std::string>{"https://example.org/about"});
  }
  SECTION("duplicates deduplicate") {
    auto kept = filter_links({"https://example.org/a", "https://example.org/a"}, rules);
    REQUIRE(kept.size() == 1);
  }
  SECTION("off-domain urls are dropped") {
    auto kept = filter_links({"https://elsewhere.net/a", "https://example.org/a"}, rules);
    REQUIRE(kept == std::vector<std::string>{"https://example.org/a"});
  }
  SECTION("subdomains stay on-domain") {
    auto kept = filter_links({"https://docs.example.org/a"}, rules);
    REQUIRE(kept.size() == 1);
  }
  SECTION("depth limit applies") {
    auto kept = filter_links({"https://example.org/a/b/c"}, rules);
    REQUIRE(kept.empty());
  }
  SECTION("empty rule list is rejected") {
    REQUIRE_THROWS(filter_links({"https://example.org/a"}, {}));
  }
}

namespace {

class FixedJudge : public LinkJudge {
 public:
  explicit FixedJudge(std::map<std::string, double> scores, bool fail = false)
      : scores_(std::move(scores)), fail_(fail) {}
  std::optional<double> score(const std::string& url) override {
    if (fail_) return std::nullopt;
    auto it = scores_.find(url);
    return it == scores_.end() ? 0.0 : it->second;
  }

 private:
  std::map<std::string, double> scores_;
  bool fail_;
};

}  // namespace

TEST_CASE("filter_links with judge") {
  auto rules = default_link_rules("example.org");
  std::vector<std::string> urls = {"https://example.org/good", "https://example.org/bad"};
  SECTION("judge threshold applies to rule survivors") {
    FixedJudge judge({{"https://example.org/good", 0.9}, {"https://example.org/bad", 0.1}});
    auto kept = filter_links(urls, rules, &judge, 0.5);
    REQUIRE(kept == std::vector<std::string>{"https://example.org/good"});
  }
  SECTION("judge failure degrades to rule-only with a warning") {
    FixedJudge judge({}, true);
    Diagnostics diags;
    auto kept = filter_links(urls, rules, &judge, 0.5, &diags);
    REQUIRE(kept == urls);
    REQUIRE_FALSE(diags.warnings.empty());
  }
  SECTION("gateway judge parses a JSON score verdict") {
    MockPolicy policy;
    policy.responses[Purpose::quality] = R"({"score": 0.9})";
    auto gw = LlmGateway::make_mock(policy);
    GatewayLinkJudge judge(gw);
    auto kept = filter_links(urls, rules, &judge, 0.5);
    REQUIRE(kept == urls);

    MockPolicy broken;
    broken.responses[Purpose::quality] = "no verdict";
    auto gw2 = LlmGateway::make_mock(broken);
    GatewayLinkJudge failing(gw2);
    Diagnostics diags;
    REQUIRE(filter_links(urls, rules, &failing, 0.5, &diags) == urls);
    REQUIRE_FALSE(diags.warnings.empty());
  }
}

TEST_CASE("snapshot directory loads the bundled fixtures") {
  auto snaps = load_snapshots(testutil::fixtures_dir() / "corpus" / "snapshots");
  REQUIRE(snaps.size() == 3);
  for (const PageSnapshot& s : snaps) {
    REQUIRE_FALSE(s.url.empty());
    REQUIRE_FALSE(s.html.empty());
    REQUIRE(s.website_type == "library");
  }
}

TEST_CASE("every stored selector round-trips on every bundled snapshot") {
  for (const PageSnapshot& snap : load_snapshots(testutil::fixtures_dir() / "corpus" / "snapshots")) {
    auto parse = parse_snapshot(snap);
    auto dom = parse_html(snap.html);
    REQUIRE_FALSE(parse.elements.empty());
    for (const WebElementRecord& rec : parse.elements) {
      const HtmlNode* node = dom.resolve(rec.selector);
      INFO(snap.url << " selector " << rec.selector);
      REQUIRE(node != nullptr);
      REQUIRE(node->tag == rec.tag);
    }
  }
}
