#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kgbench/diagnostics.hpp"
#include "kgbench/gateway.hpp"
#include "kgbench/graph.hpp"
#include "kgbench/metapath.hpp"
#include "kgbench/sampler.hpp"
#include "kgbench/task.hpp"
#include "kgbench/templates.hpp"
#include "kgbench/text.hpp"

namespace kgbench {

// --- document tasks ----------------------------------------------------------

// Renders prompt and gold from the template. With a gateway the rendered
// draft goes out for refinement, but an invalid or empty response always
// falls back to the deterministic draft; the gold answer is never rewritten.
inline Task generate_doc_task(const TaskTemplate& tmpl, const Subgraph& subgraph, const Graph& graph,
                              LlmGateway* gateway = nullptr, Diagnostics* diags = nullptr) {
  if (!template_matches(tmpl, subgraph, graph))
    throw ValidationError("generate_doc_task: subgraph does not satisfy template " + tmpl.template_id);
  json variables = extract_variables(tmpl, subgraph, graph);
  std::string prompt = render(tmpl.prompt_template, variables);
  std::string gold = render(tmpl.gold_template, variables);

  Task task;
  task.kind = TaskKind::document;
  task.type = tmpl.task_type;
  task.difficulty = tmpl.difficulty;
  task.prompt = prompt;
  task.gold_answer = gold;
  task.provenance.source_id = tmpl.template_id;
  task.provenance.subgraph_nodes.assign(subgraph.node_ids.begin(), subgraph.node_ids.end());
  task.provenance.generator = "template";

  // Citations: every node whose content fed the variable map.
  std::set<std::string> cited;
  if (variables.contains("items"))
    for (const json& item : variables["items"]) cited.insert(item.at("node_id").get<std::string>());
  for (const json& edge : variables["edges"]) {
    cited.insert(edge.at("src_id").get<std::string>());
    cited.insert(edge.at("dst_id").get<std::string>());
  }
  task.citations.assign(cited.begin(), cited.end());

  std::vector<std::string> used;
  for (const auto& [key, value] : variables.items()) {
    (void)value;
    if (tmpl.prompt_template.find(key) != std::string::npos ||
        tmpl.gold_template.find(key) != std::string::npos)
      used.push_back(key);
  }
  std::sort(used.begin(), used.end());
  task.metadata["variables"] = join(used, "+");
  task.metadata["source_path"] = variables.value("source_path", "");

  if (gateway != nullptr) {
    try {
      ChatRequest request = make_user_request(
          "", "Rewrite the following benchmark task prompt so it reads naturally. Keep every quoted "
              "passage and requirement intact. Reply with the rewritten prompt only.\n\n" + prompt);
      Completion completion = gateway->complete(request, Purpose::doc_task);
      std::string refined = trim(completion.text);
      if (!refined.empty() && refined.find("{{") == std::string::npos) {
        task.prompt = refined;
        task.provenance.generator = "llm";
      } else if (!refined.empty()) {
        warn(diags, "doc task refinement left unresolved placeholders; using template draft");
      }
    } catch (const Error& e) {
      warn(diags, std::string("doc task refinement failed (") + e.what() + "); using template draft");
    }
  }
  task.task_id = compute_task_id(task);
  return task;
}

// --- web steps ---------------------------------------------------------------

// Deterministic input values: the bound business-data text when available,
// otherwise a small lexicon keyed by page topic and seed.
inline std::string pick_query_value(const MetapathInstance& instance, const Graph& graph,
                                    const std::string& page_url, std::uint64_t seed) {
  for (const std::string& node_id : instance.path_nodes) {
    const Node& node = graph.node(node_id);
    if (node.kind.element_kind == ElementKind::business_data && !node.text.empty()) {
      auto tokens = tokenize(node.text);
      if (tokens.size() > 3) tokens.resize(3);
      if (!tokens.empty()) return join(tokens, " ");
    }
  }
  static const char* kLexicon[] = {"guide", "atlas", "handbook", "primer", "manual"};
  return kLexicon[mix_seed(seed, page_url) % 5];
}

// Action table: page -> navigate, search box / input -> input, button and
// link -> click, filter -> select, modal and toast -> assert_visible,
// business data and result items -> a trailing extract. Form atoms submit
// via click. Waits follow navigations and clicks that trigger something.
inline std::vector<WebStep> synthesize_steps(const MetapathInstance& instance, const Subgraph& subgraph,
                                             const Graph& graph, std::uint64_t seed = 0) {
  if (instance.path_nodes.empty()) throw Error("synthesize_steps: empty instance");

  // Locate the owning page inside the subgraph, for the opening navigate.
  std::optional<std::string> page_id;
  std::string page_url;
  for (const Edge& e : subgraph.edges) {
    if (e.kind == EdgeKind::contains && e.dst == instance.path_nodes.front() &&
        graph.node(e.src).kind.category == NodeCategory::WebPage) {
      page_id = e.src;
      page_url = graph.node(e.src).metadata.at("url");
      break;
    }
  }
  auto has_trigger_out_edge = [&](const std::string& node_id) {
    for (const Edge& e : subgraph.edges)
      if (e.src == node_id && (e.kind == EdgeKind::nav_to || e.kind == EdgeKind::click_trigger)) return true;
    return false;
  };

  std::vector<WebStep> steps;
  std::vector<WebStep> extracts;
  auto push = [&](WebAction action, std::string target, std::string value = "") {
    WebStep step;
    step.action = action;
    step.target = std::move(target);
    step.value = std::move(value);
    steps.push_back(std::move(step));
  };

  if (page_id) {
    push(WebAction::navigate, page_url);
    push(WebAction::wait, "");
  }
  std::string query = pick_query_value(instance, graph, page_url, seed);
  for (const std::string& node_id : instance.path_nodes) {
    const Node& node = graph.node(node_id);
    std::string selector = node.metadata.count("selector") ? node.metadata.at("selector") : "";
    if (node.kind.category == NodeCategory::WebPage) {
      push(WebAction::navigate, node.metadata.at("url"));
      push(WebAction::wait, "");
      continue;
    }
    if (node.kind.category != NodeCategory::WebElement)
      throw Error(std::string("synthesize_steps: no action for node kind ") + node.kind.name());
    switch (*node.kind.element_kind) {
      case ElementKind::search_box:
      case ElementKind::input:
        push(WebAction::input, selector, query);
        break;
      case ElementKind::button:
      case ElementKind::link:
        push(WebAction::click, selector);
        if (has_trigger_out_edge(node_id)) push(WebAction::wait, "");
        break;
      case ElementKind::form:
        push(WebAction::click, selector);  // submit the form
        break;
      case ElementKind::filter:
        push(WebAction::select, selector, query);
        break;
      case ElementKind::modal:
      case ElementKind::toast:
        push(WebAction::assert_visible, selector);
        break;
      case ElementKind::business_data:
      case ElementKind::result_item: {
        WebStep step;
        step.action = WebAction::extract;
        step.target = selector;
        extracts.push_back(std::move(step));
        break;
      }
      case ElementKind::navigation:
        push(WebAction::click, selector);
        break;
    }
  }
  for (WebStep& step : extracts) steps.push_back(std::move(step));
  for (std::size_t i = 0; i < steps.size(); ++i) steps[i].index = static_cast<int>(i);
  return steps;
}

// --- task chains -------------------------------------------------------------

// Capability list joined in canonical order; instances with none of the
// named capabilities keep their pattern name instead of a chain.
inline std::optional<std::string> compose_chain(const std::vector<MetapathInstance>& instances_for_page,
                                                const Graph& graph) {
  bool search = false, filter = false, detail = false, navigate = false, form = false, modal = false,
       toast = false;
  for (const MetapathInstance& instance : instances_for_page) {
    for (const std::string& node_id : instance.path_nodes) {
      const Node& node = graph.node(node_id);
      if (!node.kind.element_kind) continue;
      switch (*node.kind.element_kind) {
        case ElementKind::search_box: search = true; break;
        case ElementKind::filter: filter = true; break;
        case ElementKind::business_data:
        case ElementKind::result_item: detail = true; break;
        case ElementKind::form: form = true; break;
        case ElementKind::modal: modal = true; break;
        case ElementKind::toast: toast = true; break;
        default: break;
      }
    }
  }
  std::vector<std::string> capabilities;
  if (search) capabilities.push_back("Search");
  if (filter) capabilities.push_back("Filter");
  if (detail) capabilities.push_back("Detail");
  if (navigate) capabilities.push_back("Navigate");
  if (form) capabilities.push_back("Form");
  if (modal) capabilities.push_back("Modal");
  if (toast) capabilities.push_back("Toast");
  if (capabilities.empty()) return std::nullopt;
  return join(capabilities, " + ");
}

inline std::optional<std::string> compose_chain(const std::vector<MetapathInstance>& instances_for_page,
                                                const Subgraph& subgraph, const Graph& graph) {
  auto chain = compose_chain(instances_for_page, graph);
  bool navigate = false;
  for (const MetapathInstance& instance : instances_for_page)
    for (std::size_t edge_idx : instance.path_edges)
      if (subgraph.edges[edge_idx].kind == EdgeKind::nav_to) navigate = true;
  if (!navigate) return chain;
  // Splice Navigate into canonical position [Search, Filter, Detail,
  // Navigate, Form, Modal, Toast].
  std::vector<std::string> capabilities;
  if (chain) {
    std::size_t pos = 0;
    std::string text = *chain;
    while (pos <= text.size()) {
      std::size_t next = text.find(" + ", pos);
      capabilities.push_back(text.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
      if (next == std::string::npos) break;
      pos = next + 3;
    }
  }
  static const std::vector<std::string> kOrder = {"Search", "Filter", "Detail", "Navigate",
                                                  "Form",   "Modal",  "Toast"};
  std::set<std::string> present(capabilities.begin(), capabilities.end());
  present.insert("Navigate");
  std::vector<std::string> ordered;
  for (const std::string& cap : kOrder)
    if (present.count(cap) != 0) ordered.push_back(cap);
  return join(ordered, " + ");
}

// --- web tasks ---------------------------------------------------------------

inline PageContext build_page_context(const Graph& graph, const std::string& page_id) {
  const Node& page = graph.node(page_id);
  if (page.kind.category != NodeCategory::WebPage) throw Error("build_page_context: not a page node");
  PageContext ctx;
  ctx.url = page.metadata.at("url");
  ctx.title = page.text;
  if (page.metadata.count("screenshot")) ctx.screenshot_ref = page.metadata.at("screenshot");
  std::vector<const Node*> elements;
  for (std::size_t idx : graph.out_edges(page_id)) {
    const Edge& e = graph.edges()[idx];
    if (e.kind != EdgeKind::contains) continue;
    const Node& el = graph.node(e.dst);
    if (el.kind.category == NodeCategory::WebElement || el.kind.category == NodeCategory::Heading)
      elements.push_back(&el);
  }
  std::sort(elements.begin(), elements.end(), [](const Node* a, const Node* b) {
    return a->metadata.at("order") < b->metadata.at("order");
  });
  for (std::size_t i = 0; i < elements.size(); ++i) {
    PageContext::Mark mark;
    mark.mark_id = "M" + std::to_string(i + 1);
    mark.selector = elements[i]->metadata.count("selector") ? elements[i]->metadata.at("selector") : "";
    mark.kind = elements[i]->kind.name();
    mark.text = elements[i]->text;
    ctx.marks.push_back(std::move(mark));
  }
  return ctx;
}

namespace taskgendetail {

inline Difficulty difficulty_from_step_count(std::size_t steps) {
  if (steps <= 2) return Difficulty::Easy;
  if (steps <= 4) return Difficulty::Medium;
  if (steps <= 6) return Difficulty::Hard;
  return Difficulty::Expert;
}

inline std::string element_text(const MetapathInstance& instance, const Graph& graph, ElementKind kind) {
  for (const std::string& node_id : instance.path_nodes) {
    const Node& node = graph.node(node_id);
    if (node.kind.element_kind == kind && !node.text.empty()) return node.text;
  }
  return "";
}

// Deterministic instruction table keyed by chain, falling back to the
// pattern id for basic interactions.
inline std::string phrase_for(const MetapathInstance& instance, const Graph& graph,
                              const std::optional<std::string>& chain, const PageContext& ctx,
                              const std::string& query) {
  std::string prefix = "On the page \"" + ctx.title + "\", ";
  std::string button = element_text(instance, graph, ElementKind::button);
  std::string link = element_text(instance, graph, ElementKind::link);
  if (chain) {
    const std::string& c = *chain;
    if (c == "Search + Detail")
      return prefix + "search for \"" + query + "\" and open the results list to inspect the first entry.";
    if (c == "Search + Filter + Detail")
      return prefix + "search for \"" + query +
             "\", narrow the results with the filter control, then inspect the first entry.";
    if (c == "Search")
      return prefix + "search for \"" + query + "\" using the search box.";
    if (c == "Modal")
      return prefix + "click the \"" + button + "\" button and confirm that the dialog appears.";
    if (c == "Toast")
      return prefix + "click the \"" + button + "\" button and confirm that a notification appears.";
    if (c == "Form" || c == "Form + Detail")
      return prefix + "fill in the form field with \"" + query + "\" and submit the form.";
    if (c.find("Navigate") != std::string::npos)
      return prefix + "follow the \"" + link + "\" link and confirm the destination page loads.";
    return prefix + "complete the interaction chain: " + c + ".";
  }
  if (instance.pattern_id == "basic.button")
    return prefix + "click the \"" + button + "\" button.";
  if (instance.pattern_id == "basic.link")
    return prefix + "open the \"" + link + "\" link.";
  return prefix + "interact with the highlighted elements in order.";
}

}  // namespace taskgendetail

// Builds one executable web task from a matched meta-path instance. The LLM
// may rewrite the instruction prose but the step list always comes from
// synthesize_steps.
inline Task generate_web_task(const MetapathInstance& instance, const Subgraph& subgraph, const Graph& graph,
                              const PageContext& page_context, LlmGateway* gateway = nullptr,
                              std::uint64_t seed = 0, Diagnostics* diags = nullptr) {
  if (page_context.marks.empty())
    throw ValidationError("generate_web_task: page context has no marked elements");
  std::vector<WebStep> steps = synthesize_steps(instance, subgraph, graph, seed);
  auto chain = compose_chain({instance}, subgraph, graph);
  std::string query = pick_query_value(instance, graph, page_context.url, seed);

  Task task;
  task.kind = TaskKind::web;
  task.type = TaskType::information_extraction;
  task.difficulty = taskgendetail::difficulty_from_step_count(steps.size());
  task.prompt = taskgendetail::phrase_for(instance, graph, chain, page_context, query);
  task.web_steps = std::move(steps);
  task.chain_name = chain;
  task.provenance.source_id = instance.pattern_id;
  // Provenance records the matched path, not the whole sampled neighbourhood;
  // the same interaction found from two sampling objectives stays one task.
  std::set<std::string> cited(instance.path_nodes.begin(), instance.path_nodes.end());
  task.provenance.subgraph_nodes.assign(cited.begin(), cited.end());
  task.provenance.generator = "template";
  task.citations.assign(cited.begin(), cited.end());
  task.metadata["page_url"] = page_context.url;
  task.metadata["page_title"] = page_context.title;
  task.metadata["pattern"] = instance.pattern_id;
  {
    std::set<std::string> node_types;
    for (const std::string& id : instance.path_nodes) node_types.insert(graph.node(id).kind.name());
    task.metadata["node_types"] = join(std::vector<std::string>(node_types.begin(), node_types.end()), "+");
    std::set<std::string> edge_types;
    for (std::size_t idx : instance.path_edges) edge_types.insert(to_string(subgraph.edges[idx].kind));
    task.metadata["edge_types"] = edge_types.empty()
                                      ? "none"
                                      : join(std::vector<std::string>(edge_types.begin(), edge_types.end()), "+");
  }
  if (graph.has_node("p:" + page_context.url)) {
    const Node& page = graph.node("p:" + page_context.url);
    if (page.metadata.count("website_type")) task.metadata["website_type"] = page.metadata.at("website_type");
  }

  if (gateway != nullptr) {
    try {
      std::string prompt_text =
          "Write a one-sentence instruction for a web agent.\nPage: " + page_context.title + " (" +
          page_context.url + ")\nInteraction pattern: " + instance.pattern_id +
          "\nMarked elements (id, kind, selector, text):\n" + page_context.marked_element_table() +
          "Planned steps:\n";
      for (const WebStep& s : task.web_steps)
        prompt_text += std::string("- ") + to_string(s.action) + " " + s.target +
                       (s.value.empty() ? "" : " = " + s.value) + "\n";
      prompt_text += "Mention only elements from the marked list. Reply with the instruction only.";
      Completion completion = gateway->complete(make_user_request("", prompt_text), Purpose::web_task);
      std::string refined = trim(completion.text);
      bool valid = !refined.empty();
      if (valid && refined.find('#') != std::string::npos) {
        // Any selector-looking token must come from the marked list.
        std::set<std::string> selectors;
        for (const auto& mark : page_context.marks) selectors.insert(mark.selector);
        std::size_t pos = 0;
        while ((pos = refined.find('#', pos)) != std::string::npos) {
          std::size_t end = pos;
          while (end < refined.size() && !std::isspace(static_cast<unsigned char>(refined[end]))) ++end;
          if (selectors.count(refined.substr(pos, end - pos)) == 0) {
            valid = false;
            break;
          }
          pos = end;
        }
      }
      if (valid) {
        task.prompt = refined;
        task.provenance.generator = "llm";
      } else if (!refined.empty()) {
        warn(diags, "web task instruction referenced unknown selectors; using phrase table");
      }
    } catch (const Error& e) {
      warn(diags, std::string("web task refinement failed (") + e.what() + "); using phrase table");
    }
  }
  task.task_id = compute_task_id(task);
  return task;
}

}  // namespace kgbench
