#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
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
#include "kgbench/html.hpp"
#include "kgbench/parallel.hpp"
#include "kgbench/text.hpp"

namespace kgbench {

struct PageSnapshot {
  std::string url;
  std::string title;
  std::string html;
  std::string screenshot_ref;
  std::string fetched_at;
  std::string website_type;  // optional coverage tag from meta.json
};

struct WebElementRecord {
  std::string selector;
  std::string tag;
  NodeKind kind;  // WebElement with element_kind, or Heading for h1..h6
  std::string text;
  std::map<std::string, std::string> attrs;
  // Plumbing for edge construction, indices into the parse result.
  int dom_order = 0;
  int form_ancestor = -1;
};

struct SnapshotParse {
  Node page;  // embedding filled in by build_web_graph
  std::vector<WebElementRecord> elements;
  std::vector<std::pair<int, int>> layout_pairs;  // DOM-adjacent sibling records
};

// --- URL helpers -------------------------------------------------------------

inline std::string url_scheme(std::string_view url) {
  auto pos = url.find("://");
  return pos == std::string_view::npos ? "" : std::string(url.substr(0, pos));
}

inline std::string url_host(std::string_view url) {
  auto pos = url.find("://");
  if (pos == std::string_view::npos) return "";
  auto rest = url.substr(pos + 3);
  auto end = rest.find_first_of("/?#");
  return std::string(rest.substr(0, end));
}

inline std::string url_path(std::string_view url) {
  auto pos = url.find("://");
  auto rest = pos == std::string_view::npos ? url : url.substr(pos + 3);
  auto slash = rest.find('/');
  if (slash == std::string_view::npos) return "/";
  auto path = rest.substr(slash);
  auto end = path.find_first_of("?#");
  return std::string(path.substr(0, end));
}

inline std::string url_origin(std::string_view url) {
  std::string scheme = url_scheme(url);
  return scheme.empty() ? "" : scheme + "://" + url_host(url);
}

inline std::size_t url_depth(std::string_view url) {
  std::string path = url_path(url);
  std::size_t depth = 0;
  std::string segment;
  for (char c : path) {
    if (c == '/') {
      if (!segment.empty()) ++depth;
      segment.clear();
    } else {
      segment.push_back(c);
    }
  }
  if (!segment.empty()) ++depth;
  return depth;
}

// Drops the fragment and any trailing slash so snapshot urls compare stably.
inline std::string normalize_url(std::string_view url) {
  std::string out(url.substr(0, url.find('#')));
  while (out.size() > 1 && out.back() == '/' &&
         !(out.size() >= 3 && out.compare(out.size() - 3, 3, "://") == 0))
    out.pop_back();
  return out;
}

inline std::string resolve_href(const std::string& base, const std::string& href) {
  if (href.empty() || href[0] == '#') return "";
  if (starts_with(href, "http://") || starts_with(href, "https://")) return normalize_url(href);
  if (starts_with(href, "//")) return normalize_url(url_scheme(base) + ":" + href);
  if (starts_with(href, "/")) return normalize_url(url_origin(base) + href);
  std::string path = url_path(base);
  auto slash = path.rfind('/');
  std::string dir = slash == std::string::npos ? "/" : path.substr(0, slash + 1);
  std::string rel = href;
  while (starts_with(rel, "./")) rel = rel.substr(2);
  while (starts_with(rel, "../")) {
    rel = rel.substr(3);
    if (dir.size() > 1) {
      auto up = dir.rfind('/', dir.size() - 2);
      dir = up == std::string::npos ? "/" : dir.substr(0, up + 1);
    }
  }
  return normalize_url(url_origin(base) + dir + rel);
}

// --- element classification --------------------------------------------------

namespace webdetail {

inline bool class_contains(const HtmlNode& node, std::string_view token) {
  return contains_ci(node.attr_or("class"), token);
}

inline bool filter_labelled(const HtmlNode& node) {
  const HtmlNode* cursor = &node;
  for (int depth = 0; cursor != nullptr && depth < 4; ++depth) {
    if (class_contains(*cursor, "filter") || contains_ci(cursor->attr_or("aria-label"), "filter"))
      return true;
    cursor = cursor->parent;
  }
  return false;
}

// The rule table; first match wins. Repeated-sibling containers are handled
// in a structural pass afterwards.
inline std::optional<NodeKind> classify_element(const HtmlNode& node) {
  const std::string& tag = node.tag;
  std::string type = to_lower(node.attr_or("type"));
  std::string role = to_lower(node.attr_or("role"));
  if (tag == "button" || (tag == "input" && type == "submit") || role == "button")
    return NodeKind::element(ElementKind::button);
  if (tag == "input") {
    std::string name = to_lower(node.attr_or("name"));
    std::string id = to_lower(node.attr_or("id"));
    if (type == "search" || name == "q" || id == "q" || contains_ci(name, "search") ||
        contains_ci(id, "search"))
      return NodeKind::element(ElementKind::search_box);
    if ((type == "checkbox" || type == "radio") && filter_labelled(node))
      return NodeKind::element(ElementKind::filter);
    return NodeKind::element(ElementKind::input);
  }
  if (tag == "textarea") return NodeKind::element(ElementKind::input);
  if (tag == "select") return NodeKind::element(ElementKind::filter);
  if (tag == "form") return NodeKind::element(ElementKind::form);
  if (tag == "a" && node.has_attr("href")) return NodeKind::element(ElementKind::link);
  if (tag == "nav" || role == "navigation") return NodeKind::element(ElementKind::navigation);
  if (role == "dialog" || class_contains(node, "modal")) return NodeKind::element(ElementKind::modal);
  if (node.has_attr("aria-live") || class_contains(node, "toast"))
    return NodeKind::element(ElementKind::toast);
  if (tag.size() == 2 && tag[0] == 'h' && tag[1] >= '1' && tag[1] <= '6')
    return NodeKind::of(NodeCategory::Heading);
  return std::nullopt;
}

inline std::string sibling_signature(const HtmlNode& node) {
  auto classes = tokenize(node.attr_or("class"));
  std::sort(classes.begin(), classes.end());
  return node.tag + "|" + join(classes, ".");
}

inline bool container_tag(const std::string& tag) {
  static const std::set<std::string> kContainers = {"ul", "ol", "div", "section", "table", "tbody"};
  return kContainers.count(tag) != 0;
}

}  // namespace webdetail

// Parses one snapshot into a WebPage node plus records for every element of
// interest. The page node's embedding is left empty for the caller to fill.
inline SnapshotParse parse_snapshot(const PageSnapshot& snapshot, Diagnostics* diags = nullptr) {
  HtmlDocument dom = parse_html(snapshot.html);
  SnapshotParse out;

  out.page.id = "p:" + normalize_url(snapshot.url);
  out.page.kind = NodeKind::of(NodeCategory::WebPage);
  out.page.text = snapshot.title;
  out.page.metadata = {{"url", normalize_url(snapshot.url)},
                       {"title", snapshot.title},
                       {"fetched_at", snapshot.fetched_at},
                       {"order", "0000"}};
  if (!snapshot.website_type.empty()) out.page.metadata["website_type"] = snapshot.website_type;
  if (!snapshot.screenshot_ref.empty()) out.page.metadata["screenshot"] = snapshot.screenshot_ref;
  out.page.source_path = normalize_url(snapshot.url);

  // Document-order element list and classification.
  std::vector<const HtmlNode*> elements;
  std::map<const HtmlNode*, NodeKind> classified;
  dom.root().for_each_element([&](const HtmlNode& node) { elements.push_back(&node); });
  for (const HtmlNode* node : elements) {
    if (auto kind = webdetail::classify_element(*node)) classified.emplace(node, *kind);
  }
  // Structural pass: >= 3 structurally similar children mark a data
  // container with result items.
  for (const HtmlNode* node : elements) {
    if (classified.count(node) != 0 || !webdetail::container_tag(node->tag)) continue;
    std::map<std::string, std::vector<const HtmlNode*>> groups;
    for (const auto& child : node->children)
      if (!child->is_text) groups[webdetail::sibling_signature(*child)].push_back(child.get());
    for (auto& [sig, members] : groups) {
      (void)sig;
      if (members.size() < 3) continue;
      classified.emplace(node, NodeKind::element(ElementKind::business_data));
      for (const HtmlNode* member : members)
        classified.emplace(member, NodeKind::element(ElementKind::result_item));
      break;
    }
  }

  std::map<const HtmlNode*, int> record_index;
  for (const HtmlNode* node : elements) {
    auto it = classified.find(node);
    if (it == classified.end()) continue;
    WebElementRecord rec;
    rec.selector = dom.selector_for(*node);
    rec.tag = node->tag;
    rec.kind = it->second;
    rec.text = node->visible_text();
    if (rec.text.empty()) rec.text = node->attr_or("placeholder", node->attr_or("name"));
    for (const auto& [k, v] : node->attrs) rec.attrs[k] = v;
    rec.dom_order = static_cast<int>(out.elements.size());
    for (const HtmlNode* cursor = node->parent; cursor != nullptr; cursor = cursor->parent) {
      if (cursor->tag == "form") {
        auto fit = record_index.find(cursor);
        if (fit != record_index.end()) rec.form_ancestor = fit->second;
        break;
      }
    }
    record_index[node] = rec.dom_order;
    out.elements.push_back(std::move(rec));
  }
  if (out.elements.empty()) warn(diags, "page " + snapshot.url + " yielded no elements");

  // DOM-adjacent extracted siblings, for layout edges.
  for (const HtmlNode* node : elements) {
    const HtmlNode* previous = nullptr;
    for (const auto& child : node->children) {
      if (child->is_text) continue;
      if (previous != nullptr && record_index.count(previous) != 0 && record_index.count(child.get()) != 0)
        out.layout_pairs.emplace_back(record_index[previous], record_index[child.get()]);
      previous = child.get();
    }
  }
  return out;
}

struct WebIngestOptions {
  std::size_t jobs = 1;
};

namespace webdetail {

inline bool is_submit_button(const WebElementRecord& rec) {
  if (rec.kind.element_kind != ElementKind::button) return false;
  if (rec.tag == "input") return true;  // input[type=submit] is the only input classified button
  auto it = rec.attrs.find("type");
  bool submit_type = it == rec.attrs.end() || to_lower(it->second) == "submit";
  return rec.tag == "button" && submit_type;
}

inline std::optional<std::string> trigger_target(const WebElementRecord& rec) {
  static const char* kTriggerAttrs[] = {"data-target", "data-modal-target", "data-toast-target",
                                        "data-toggle-target", "aria-controls"};
  for (const char* attr : kTriggerAttrs) {
    auto it = rec.attrs.find(attr);
    if (it != rec.attrs.end() && !it->second.empty()) {
      std::string target = it->second;
      if (target[0] == '#') target = target.substr(1);
      return target;
    }
  }
  return std::nullopt;
}

}  // namespace webdetail

// Builds the web-side graph from parsed snapshots: page and element nodes,
// containment, navigation, form, trigger, layout, and the search-flow
// heuristics (fills / controls / data_flow).
inline Graph build_web_graph(const std::vector<PageSnapshot>& snapshots, const Embedder& embedder,
                             const WebIngestOptions& opt = {}, Diagnostics* diags = nullptr) {
  std::vector<const PageSnapshot*> ordered;
  for (const PageSnapshot& s : snapshots) ordered.push_back(&s);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const PageSnapshot* a, const PageSnapshot* b) { return a->url < b->url; });

  std::vector<SnapshotParse> parses(ordered.size());
  std::vector<Diagnostics> parse_diags(ordered.size());
  parallel_for(ordered.size(), opt.jobs, [&](std::size_t i) {
    parses[i] = parse_snapshot(*ordered[i], &parse_diags[i]);
  });
  for (Diagnostics& d : parse_diags)
    for (std::string& w : d.warnings) warn(diags, std::move(w));

  std::map<std::string, std::string> page_by_url;  // normalized url -> page node id
  for (const SnapshotParse& parse : parses) page_by_url[parse.page.metadata.at("url")] = parse.page.id;

  Graph graph(embedder.dimension());

  auto element_id = [](const Node& page, int order) {
    std::string s = std::to_string(order);
    return "w:" + page.metadata.at("url") + "#" + std::string(s.size() >= 4 ? 0 : 4 - s.size(), '0') + s;
  };

  // Page nodes first, so nav_to edges can land on any page in the corpus.
  for (SnapshotParse& parse : parses) {
    Node page = parse.page;
    page.embedding = embedder.embed(page.text);
    graph.add_node(std::move(page));
  }

  for (SnapshotParse& parse : parses) {
    const Node& page = graph.node(parse.page.id);

    std::vector<std::string> ids(parse.elements.size());
    for (std::size_t i = 0; i < parse.elements.size(); ++i) {
      const WebElementRecord& rec = parse.elements[i];
      Node n;
      n.id = element_id(page, rec.dom_order + 1);
      ids[i] = n.id;
      n.kind = rec.kind;
      n.text = rec.text;
      n.embedding = embedder.embed(n.text);
      n.metadata["url"] = page.metadata.at("url");
      n.metadata["selector"] = rec.selector;
      n.metadata["tag"] = rec.tag;
      {
        std::string s = std::to_string(rec.dom_order + 1);
        n.metadata["order"] = std::string(s.size() >= 4 ? 0 : 4 - s.size(), '0') + s;
      }
      for (const char* key : {"href", "type", "role", "id", "class"}) {
        auto it = rec.attrs.find(key);
        if (it != rec.attrs.end()) n.metadata[std::string("attr_") + key] = it->second;
      }
      n.source_path = page.metadata.at("url");
      n.contextual_path = {page.text.empty() ? page.metadata.at("url") : page.text, rec.tag};
      graph.add_node(std::move(n));
      graph.add_edge(page.id, ids[i], EdgeKind::contains);
    }

    // form_submit: inputs and submit controls point at their form.
    for (std::size_t i = 0; i < parse.elements.size(); ++i) {
      const WebElementRecord& rec = parse.elements[i];
      if (rec.form_ancestor < 0) continue;
      bool is_field = rec.kind.element_kind == ElementKind::input ||
                      rec.kind.element_kind == ElementKind::search_box ||
                      rec.kind.element_kind == ElementKind::filter;
      if (is_field || webdetail::is_submit_button(rec))
        graph.add_edge(ids[i], ids[static_cast<std::size_t>(rec.form_ancestor)], EdgeKind::form_submit);
    }

    // click_trigger: buttons referencing a modal/toast by id.
    std::map<std::string, std::size_t> by_dom_id;
    for (std::size_t i = 0; i < parse.elements.size(); ++i) {
      auto it = parse.elements[i].attrs.find("id");
      if (it != parse.elements[i].attrs.end()) by_dom_id[it->second] = i;
    }
    for (std::size_t i = 0; i < parse.elements.size(); ++i) {
      const WebElementRecord& rec = parse.elements[i];
      if (rec.kind.element_kind != ElementKind::button) continue;
      auto target = webdetail::trigger_target(rec);
      if (!target) continue;
      auto it = by_dom_id.find(*target);
      if (it == by_dom_id.end()) {
        warn(diags, "button trigger target #" + *target + " not found on " + page.metadata.at("url"));
        continue;
      }
      auto target_kind = parse.elements[it->second].kind.element_kind;
      if (target_kind == ElementKind::modal || target_kind == ElementKind::toast)
        graph.add_edge(ids[i], ids[it->second], EdgeKind::click_trigger);
    }

    for (const auto& [a, b] : parse.layout_pairs)
      graph.add_edge(ids[static_cast<std::size_t>(a)], ids[static_cast<std::size_t>(b)], EdgeKind::layout);

    // Search-flow heuristic: a data container between a search box and a
    // submit control carries the query (fills) and gates the action
    // (controls). data_flow between forms and data containers stays
    // experimental.
    std::vector<std::size_t> searches, containers, submits, forms;
    for (std::size_t i = 0; i < parse.elements.size(); ++i) {
      const WebElementRecord& rec = parse.elements[i];
      if (rec.kind.element_kind == ElementKind::search_box) searches.push_back(i);
      if (rec.kind.element_kind == ElementKind::business_data) containers.push_back(i);
      if (rec.kind.element_kind == ElementKind::form) forms.push_back(i);
      if (webdetail::is_submit_button(rec) ||
          (rec.kind.element_kind == ElementKind::button &&
           (contains_ci(rec.attrs.count("id") ? rec.attrs.at("id") : "", "search") ||
            contains_ci(rec.attrs.count("class") ? rec.attrs.at("class") : "", "search"))))
        submits.push_back(i);
    }
    if (!searches.empty() && !containers.empty() && !submits.empty()) {
      for (std::size_t s : searches)
        for (std::size_t b : containers) graph.add_edge(ids[s], ids[b], EdgeKind::fills);
      for (std::size_t b : containers)
        for (std::size_t t : submits) graph.add_edge(ids[b], ids[t], EdgeKind::controls);
    }
    for (std::size_t f : forms)
      for (std::size_t b : containers) graph.add_edge(ids[f], ids[b], EdgeKind::data_flow);

    // nav_to: links whose href resolves to another snapshot in the corpus.
    for (std::size_t i = 0; i < parse.elements.size(); ++i) {
      const WebElementRecord& rec = parse.elements[i];
      if (rec.kind.element_kind != ElementKind::link) continue;
      auto href = rec.attrs.find("href");
      if (href == parse.elements[i].attrs.end()) continue;
      std::string resolved = resolve_href(page.metadata.at("url"), href->second);
      if (resolved.empty() || resolved == page.metadata.at("url")) continue;
      auto target = page_by_url.find(resolved);
      if (target == page_by_url.end()) {
        warn(diags, "dangling href " + href->second + " on " + page.metadata.at("url"));
        continue;
      }
      graph.add_edge(ids[i], target->second, EdgeKind::nav_to);
    }
  }
  return graph;
}

// --- link filtering ----------------------------------------------------------

enum class LinkAction { keep, drop };
enum class LinkPredicate { asset_extension, off_domain, fragment_only, depth_over, contains_text };

struct LinkFilterRule {
  std::string id;
  LinkPredicate predicate = LinkPredicate::contains_text;
  std::string param;
  LinkAction action = LinkAction::drop;

  bool matches(const std::string& url) const {
    switch (predicate) {
      case LinkPredicate::asset_extension: {
        std::string path = to_lower(url_path(url));
        std::string csv = param;
        std::size_t pos = 0;
        while (pos <= csv.size()) {
          std::size_t comma = csv.find(',', pos);
          std::string ext = trim(csv.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
          if (!ext.empty() && ends_with(path, "." + ext)) return true;
          if (comma == std::string::npos) break;
          pos = comma + 1;
        }
        return false;
      }
      case LinkPredicate::off_domain: {
        std::string host = url_host(url);
        return !(host == param || ends_with(host, "." + param));
      }
      case LinkPredicate::fragment_only:
        return !url.empty() && url[0] == '#';
      case LinkPredicate::depth_over:
        return url_depth(url) > static_cast<std::size_t>(std::stoi(param));
      case LinkPredicate::contains_text:
        return url.find(param) != std::string::npos;
    }
    return false;
  }

  std::string description() const {
    switch (predicate) {
      case LinkPredicate::asset_extension: return "url path ends with an asset extension (" + param + ")";
      case LinkPredicate::off_domain: return "url host is outside domain " + param;
      case LinkPredicate::fragment_only: return "url is a bare fragment";
      case LinkPredicate::depth_over: return "url path depth exceeds " + param;
      case LinkPredicate::contains_text: return "url contains \"" + param + "\"";
    }
    return "";
  }
};

inline std::vector<LinkFilterRule> default_link_rules(const std::string& base_domain) {
  return {
      {"same-domain", LinkPredicate::off_domain, base_domain, LinkAction::drop},
      {"drop-assets", LinkPredicate::asset_extension, "png,jpg,jpeg,gif,css,js,svg,ico,pdf",
       LinkAction::drop},
      {"drop-fragment-only", LinkPredicate::fragment_only, "", LinkAction::drop},
      {"max-depth", LinkPredicate::depth_over, "2", LinkAction::drop},
  };
}

// Optional LLM scoring hook; nullopt signals judge failure.
class LinkJudge {
 public:
  virtual ~LinkJudge() = default;
  virtual std::optional<double> score(const std::string& url) = 0;
};

// Scores a link's likely content value through the gateway. Expects a JSON
// verdict {"score": x}; anything else counts as a judge failure.
class GatewayLinkJudge : public LinkJudge {
 public:
  explicit GatewayLinkJudge(LlmGateway& gateway) : gateway_(gateway) {}

  std::optional<double> score(const std::string& url) override {
    try {
      std::string prompt =
          "Rate how useful this hyperlink is as a source of page content for an interaction corpus "
          "(0.0 = asset or noise, 1.0 = content-rich page).\nURL: " + url +
          "\nRespond in JSON: {\"score\": <value>}";
      Completion completion = gateway_.complete(make_user_request("", prompt), Purpose::quality);
      json verdict = json::parse(completion.text, nullptr, false);
      if (verdict.is_discarded() || !verdict.contains("score") || !verdict["score"].is_number())
        return std::nullopt;
      return std::min(1.0, std::max(0.0, verdict["score"].get<double>()));
    } catch (const Error&) {
      return std::nullopt;
    }
  }

 private:
  LlmGateway& gateway_;
};

inline std::vector<std::string> filter_links(const std::vector<std::string>& candidate_urls,
                                             const std::vector<LinkFilterRule>& rules,
                                             LinkJudge* judge = nullptr, double judge_threshold = 0.5,
                                             Diagnostics* diags = nullptr) {
  if (rules.empty()) throw Error("filter_links: rules must be non-empty");
  std::vector<std::string> unique;
  std::set<std::string> seen;
  for (const std::string& url : candidate_urls)
    if (seen.insert(url).second) unique.push_back(url);

  std::vector<std::string> kept;
  for (const std::string& url : unique) {
    LinkAction action = LinkAction::keep;
    for (const LinkFilterRule& rule : rules) {
      if (rule.matches(url)) {
        action = rule.action;
        break;  // first match wins
      }
    }
    if (action == LinkAction::keep) kept.push_back(url);
  }
  if (judge == nullptr) return kept;

  std::vector<std::pair<std::string, double>> scored;
  for (const std::string& url : kept) {
    auto score = judge->score(url);
    if (!score) {
      warn(diags, "link judge failed; keeping rule-based result");
      return kept;
    }
    scored.emplace_back(url, *score);
  }
  std::vector<std::string> out;
  for (const auto& [url, score] : scored)
    if (score >= judge_threshold) out.push_back(url);
  return out;
}

// --- snapshot directory ------------------------------------------------------

// One subdirectory per page: page.html + meta.json {url, title, fetched_at,
// website_type?} + optional screenshot.png.
inline std::vector<PageSnapshot> load_snapshots(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ConfigError("snapshot directory not found: " + dir.string());
  std::vector<std::filesystem::path> pages;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_directory()) pages.push_back(entry.path());
  std::sort(pages.begin(), pages.end());
  std::vector<PageSnapshot> snapshots;
  for (const auto& page_dir : pages) {
    auto html_path = page_dir / "page.html";
    auto meta_path = page_dir / "meta.json";
    if (!std::filesystem::exists(html_path) || !std::filesystem::exists(meta_path))
      throw ConfigError("snapshot " + page_dir.string() + " must contain page.html and meta.json");
    std::ifstream html_in(html_path), meta_in(meta_path);
    std::stringstream html_buf, meta_buf;
    html_buf << html_in.rdbuf();
    meta_buf << meta_in.rdbuf();
    json meta = json::parse(meta_buf.str(), nullptr, false);
    if (meta.is_discarded()) throw Error("snapshot meta " + meta_path.string() + ": malformed JSON");
    Graph::check_keys(meta, {"url", "title", "fetched_at", "website_type"}, "snapshot meta");
    PageSnapshot snap;
    snap.url = meta.at("url").get<std::string>();
    snap.title = meta.value("title", "");
    snap.fetched_at = meta.value("fetched_at", "");
    snap.website_type = meta.value("website_type", "");
    snap.html = html_buf.str();
    auto shot = page_dir / "screenshot.png";
    if (std::filesystem::exists(shot)) snap.screenshot_ref = shot.string();
    snapshots.push_back(std::move(snap));
  }
  return snapshots;
}

}  // namespace kgbench
