#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "kgbench/diagnostics.hpp"
#include "kgbench/text.hpp"

namespace kgbench {

// Minimal DOM for saved page snapshots. The parser is tolerant of the usual
// tag-soup (unclosed elements, stray close tags) but reports genuinely
// malformed input (unterminated tags, comments, attribute quotes) with a
// byte offset.
struct HtmlNode {
  bool is_text = false;
  std::string tag;   // lowercased element name, empty for text nodes
  std::string text;  // decoded character data for text nodes
  std::vector<std::pair<std::string, std::string>> attrs;
  std::vector<std::unique_ptr<HtmlNode>> children;
  HtmlNode* parent = nullptr;

  std::optional<std::string> attr(std::string_view name) const {
    for (const auto& [k, v] : attrs)
      if (k == name) return v;
    return std::nullopt;
  }

  std::string attr_or(std::string_view name, std::string fallback = "") const {
    auto v = attr(name);
    return v ? *v : std::move(fallback);
  }

  bool has_attr(std::string_view name) const { return attr(name).has_value(); }

  // Concatenated descendant text with collapsed whitespace; script/style
  // content is excluded.
  std::string visible_text() const {
    std::string out;
    collect_text(out);
    return collapse_whitespace(out);
  }

  template <typename Fn>
  void for_each_element(Fn&& fn) const {
    for (const auto& child : children) {
      if (!child->is_text) {
        fn(*child);
        child->for_each_element(fn);
      }
    }
  }

 private:
  void collect_text(std::string& out) const {
    if (is_text) {
      out += text;
      return;
    }
    if (tag == "script" || tag == "style") return;
    for (const auto& child : children) {
      child->collect_text(out);
      out += ' ';
    }
  }
};

namespace htmldetail {

inline bool is_void_element(const std::string& tag) {
  static const std::set<std::string> kVoid = {"area", "base", "br",    "col",  "embed",  "hr",   "img",
                                              "input", "link", "meta", "param", "source", "track", "wbr"};
  return kVoid.count(tag) != 0;
}

inline bool is_raw_text_element(const std::string& tag) {
  return tag == "script" || tag == "style" || tag == "textarea" || tag == "title";
}

inline std::string decode_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    if (s[i] != '&') {
      out.push_back(s[i++]);
      continue;
    }
    std::size_t end = s.find(';', i);
    if (end == std::string_view::npos || end - i > 10) {
      out.push_back(s[i++]);
      continue;
    }
    std::string_view name = s.substr(i + 1, end - i - 1);
    if (name == "amp") out.push_back('&');
    else if (name == "lt") out.push_back('<');
    else if (name == "gt") out.push_back('>');
    else if (name == "quot") out.push_back('"');
    else if (name == "apos") out.push_back('\'');
    else if (name == "nbsp") out.push_back(' ');
    else if (!name.empty() && name[0] == '#') {
      long code = 0;
      bool ok = true;
      if (name.size() > 1 && (name[1] == 'x' || name[1] == 'X')) {
        for (char c : name.substr(2)) {
          if (!std::isxdigit(static_cast<unsigned char>(c))) { ok = false; break; }
          code = code * 16 + (std::isdigit(static_cast<unsigned char>(c)) ? c - '0'
                                                                          : std::tolower(c) - 'a' + 10);
        }
      } else {
        for (char c : name.substr(1)) {
          if (!std::isdigit(static_cast<unsigned char>(c))) { ok = false; break; }
          code = code * 10 + (c - '0');
        }
      }
      if (ok && code > 0 && code < 128) out.push_back(static_cast<char>(code));
      else out.append(s.substr(i, end - i + 1));
    } else {
      out.append(s.substr(i, end - i + 1));
    }
    i = end + 1;
  }
  return out;
}

inline bool implies_close(const std::string& open_tag, const std::string& new_tag) {
  static const std::set<std::string> kSiblingClosed = {"li", "p", "tr", "td", "th", "option", "dt", "dd"};
  return kSiblingClosed.count(new_tag) != 0 && open_tag == new_tag;
}

}  // namespace htmldetail

class HtmlDocument {
 public:
  HtmlDocument() : root_(std::make_unique<HtmlNode>()) { root_->tag = "#root"; }

  HtmlNode& root() { return *root_; }
  const HtmlNode& root() const { return *root_; }

  // Stable, id-preferring selector for an element of this document.
  std::string selector_for(const HtmlNode& target) const {
    auto id = target.attr("id");
    if (id && !id->empty() && id_count(*id) == 1) return "#" + *id;
    std::vector<std::string> segments;
    const HtmlNode* node = &target;
    while (node != nullptr && node->parent != nullptr) {
      segments.push_back(node->tag + ":nth-of-type(" + std::to_string(nth_of_type(*node)) + ")");
      const HtmlNode* parent = node->parent;
      auto pid = parent->parent != nullptr ? parent->attr("id") : std::nullopt;
      if (pid && !pid->empty() && id_count(*pid) == 1) {
        segments.push_back("#" + *pid);
        node = nullptr;
        break;
      }
      node = parent;
    }
    std::vector<std::string> ordered(segments.rbegin(), segments.rend());
    return join(ordered, " > ");
  }

  // Resolves a selector produced by selector_for. Returns nullptr when the
  // selector does not land on exactly one element.
  const HtmlNode* resolve(std::string_view selector) const {
    std::vector<std::string> segments;
    std::size_t pos = 0;
    while (pos <= selector.size()) {
      std::size_t next = selector.find(" > ", pos);
      if (next == std::string_view::npos) {
        segments.emplace_back(selector.substr(pos));
        break;
      }
      segments.emplace_back(selector.substr(pos, next - pos));
      pos = next + 3;
    }
    if (segments.empty()) return nullptr;
    const HtmlNode* context = root_.get();
    std::size_t start = 0;
    if (!segments[0].empty() && segments[0][0] == '#') {
      std::string id = segments[0].substr(1);
      if (id_count(id) != 1) return nullptr;
      context = find_by_id(*root_, id);
      start = 1;
      if (start == segments.size()) return context;
    }
    for (std::size_t i = start; i < segments.size(); ++i) {
      std::string tag = segments[i];
      int wanted = 1;
      auto colon = segments[i].find(":nth-of-type(");
      if (colon != std::string::npos) {
        tag = segments[i].substr(0, colon);
        std::size_t close = segments[i].find(')', colon);
        if (close == std::string::npos) return nullptr;
        wanted = std::stoi(segments[i].substr(colon + 13, close - colon - 13));
      }
      const HtmlNode* match = nullptr;
      int seen = 0;
      for (const auto& child : context->children) {
        if (child->is_text || child->tag != tag) continue;
        if (++seen == wanted) {
          match = child.get();
          break;
        }
      }
      if (match == nullptr) return nullptr;
      context = match;
    }
    return context == root_.get() ? nullptr : context;
  }

  static HtmlDocument parse(std::string_view markup);

 private:
  static int nth_of_type(const HtmlNode& node) {
    int index = 0;
    for (const auto& sibling : node.parent->children) {
      if (sibling->is_text || sibling->tag != node.tag) continue;
      ++index;
      if (sibling.get() == &node) return index;
    }
    return index;
  }

  std::size_t id_count(const std::string& id) const {
    std::size_t count = 0;
    root_->for_each_element([&](const HtmlNode& n) {
      if (n.attr_or("id") == id) ++count;
    });
    return count;
  }

  static const HtmlNode* find_by_id(const HtmlNode& scope, const std::string& id) {
    const HtmlNode* found = nullptr;
    scope.for_each_element([&](const HtmlNode& n) {
      if (found == nullptr && n.attr_or("id") == id) found = &n;
    });
    return found;
  }

  std::unique_ptr<HtmlNode> root_;
};

inline HtmlDocument HtmlDocument::parse(std::string_view markup) {
  HtmlDocument doc;
  std::vector<HtmlNode*> stack{doc.root_.get()};
  std::string pending_text;

  auto flush_text = [&]() {
    if (pending_text.empty()) return;
    auto node = std::make_unique<HtmlNode>();
    node->is_text = true;
    node->text = htmldetail::decode_entities(pending_text);
    node->parent = stack.back();
    stack.back()->children.push_back(std::move(node));
    pending_text.clear();
  };

  std::size_t pos = 0;
  const std::size_t n = markup.size();
  while (pos < n) {
    char c = markup[pos];
    if (c != '<') {
      pending_text.push_back(c);
      ++pos;
      continue;
    }
    if (markup.substr(pos, 4) == "<!--") {
      std::size_t end = markup.find("-->", pos + 4);
      if (end == std::string_view::npos) throw ParseError("unterminated comment", pos);
      pos = end + 3;
      continue;
    }
    if (pos + 1 < n && (markup[pos + 1] == '!' || markup[pos + 1] == '?')) {
      std::size_t end = markup.find('>', pos);
      if (end == std::string_view::npos) throw ParseError("unterminated declaration", pos);
      pos = end + 1;
      continue;
    }
    if (pos + 1 < n && markup[pos + 1] == '/') {
      std::size_t end = markup.find('>', pos);
      if (end == std::string_view::npos) throw ParseError("unterminated close tag", pos);
      std::string tag = to_lower(trim(markup.substr(pos + 2, end - pos - 2)));
      flush_text();
      for (std::size_t depth = stack.size(); depth > 1; --depth) {
        if (stack[depth - 1]->tag == tag) {
          stack.resize(depth - 1);
          break;
        }
      }
      pos = end + 1;
      continue;
    }
    if (pos + 1 >= n || !std::isalpha(static_cast<unsigned char>(markup[pos + 1]))) {
      pending_text.push_back(c);  // stray '<' treated as text
      ++pos;
      continue;
    }

    // Open tag.
    std::size_t tag_start = pos;
    std::size_t i = pos + 1;
    while (i < n && (std::isalnum(static_cast<unsigned char>(markup[i])) || markup[i] == '-')) ++i;
    std::string tag = to_lower(std::string(markup.substr(pos + 1, i - pos - 1)));
    std::vector<std::pair<std::string, std::string>> attrs;
    bool self_closing = false;
    while (true) {
      while (i < n && std::isspace(static_cast<unsigned char>(markup[i]))) ++i;
      if (i >= n) throw ParseError("unterminated tag <" + tag, tag_start);
      if (markup[i] == '>') {
        ++i;
        break;
      }
      if (markup[i] == '/') {
        ++i;
        if (i < n && markup[i] == '>') {
          self_closing = true;
          ++i;
          break;
        }
        continue;
      }
      std::size_t name_start = i;
      while (i < n && markup[i] != '=' && markup[i] != '>' && markup[i] != '/' &&
             !std::isspace(static_cast<unsigned char>(markup[i])))
        ++i;
      std::string name = to_lower(std::string(markup.substr(name_start, i - name_start)));
      std::string value;
      while (i < n && std::isspace(static_cast<unsigned char>(markup[i]))) ++i;
      if (i < n && markup[i] == '=') {
        ++i;
        while (i < n && std::isspace(static_cast<unsigned char>(markup[i]))) ++i;
        if (i < n && (markup[i] == '"' || markup[i] == '\'')) {
          char quote = markup[i];
          std::size_t value_start = ++i;
          std::size_t end = markup.find(quote, i);
          if (end == std::string_view::npos)
            throw ParseError("unterminated attribute value for '" + name + "'", value_start - 1);
          value = htmldetail::decode_entities(markup.substr(value_start, end - value_start));
          i = end + 1;
        } else {
          std::size_t value_start = i;
          while (i < n && markup[i] != '>' && !std::isspace(static_cast<unsigned char>(markup[i]))) ++i;
          value = std::string(markup.substr(value_start, i - value_start));
        }
      }
      if (!name.empty()) attrs.emplace_back(std::move(name), std::move(value));
    }

    flush_text();
    if (htmldetail::implies_close(stack.back()->tag, tag)) stack.pop_back();

    auto node = std::make_unique<HtmlNode>();
    node->tag = tag;
    node->attrs = std::move(attrs);
    node->parent = stack.back();
    HtmlNode* raw = node.get();
    stack.back()->children.push_back(std::move(node));

    if (self_closing || htmldetail::is_void_element(tag)) {
      pos = i;
      continue;
    }
    if (htmldetail::is_raw_text_element(tag)) {
      std::string close = "</" + tag;
      std::size_t end = to_lower(std::string(markup.substr(i))).find(close);
      if (end == std::string_view::npos) throw ParseError("unterminated <" + tag + "> content", i);
      auto text_node = std::make_unique<HtmlNode>();
      text_node->is_text = true;
      text_node->text = std::string(markup.substr(i, end));
      text_node->parent = raw;
      raw->children.push_back(std::move(text_node));
      std::size_t close_end = markup.find('>', i + end);
      if (close_end == std::string_view::npos) throw ParseError("unterminated close tag", i + end);
      pos = close_end + 1;
      continue;
    }
    stack.push_back(raw);
    pos = i;
  }
  flush_text();
  return doc;
}

inline HtmlDocument parse_html(std::string_view markup) { return HtmlDocument::parse(markup); }

}  // namespace kgbench
