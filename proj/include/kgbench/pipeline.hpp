#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kgbench/config.hpp"
#include "kgbench/coverage.hpp"
#include "kgbench/diagnostics.hpp"
#include "kgbench/doc_ingest.hpp"
#include "kgbench/gateway.hpp"
#include "kgbench/graph.hpp"
#include "kgbench/http_transport.hpp"
#include "kgbench/metapath.hpp"
#include "kgbench/metrics.hpp"
#include "kgbench/sampler.hpp"
#include "kgbench/task.hpp"
#include "kgbench/taskgen.hpp"
#include "kgbench/templates.hpp"
#include "kgbench/web_ingest.hpp"

namespace kgbench {

class StageError : public Error {
 public:
  StageError(const std::string& stage, const std::string& cause)
      : Error("stage " + stage + " failed: " + cause), stage_(stage) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

namespace pipelinedetail {

inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  std::filesystem::path partial = path;
  partial += ".partial";
  {
    std::ofstream out(partial, std::ios::binary);
    if (!out) throw Error("cannot write " + partial.string());
    out << content;
    if (!out) throw Error("short write to " + partial.string());
  }
  std::filesystem::rename(partial, path);
}

inline std::string read_file(const std::filesystem::path& path, const std::string& produced_by) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("missing artifact " + path.string() + "; run `" + produced_by + "` first");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace pipelinedetail

// Tasks-per-source summary in the shape of the benchmark's dataset table:
// counts per document / website plus the two averages.
inline json tasks_per_source_summary(const std::vector<Task>& tasks) {
  std::map<std::string, std::size_t> doc_counts, web_counts;
  std::size_t doc_total = 0, web_total = 0;
  for (const Task& task : tasks) {
    if (task.kind == TaskKind::document) {
      ++doc_total;
      auto it = task.metadata.find("source_path");
      ++doc_counts[it != task.metadata.end() ? it->second : "unknown"];
    } else {
      ++web_total;
      auto it = task.metadata.find("page_url");
      ++web_counts[it != task.metadata.end() ? it->second : "unknown"];
    }
  }
  json per_document(doc_counts), per_website(web_counts);
  json out{{"documents", doc_counts.size()},
           {"websites", web_counts.size()},
           {"document_tasks", doc_total},
           {"web_tasks", web_total},
           {"per_document", std::move(per_document)},
           {"per_website", std::move(per_website)}};
  if (!doc_counts.empty())
    out["tasks_per_document"] = static_cast<double>(doc_total) / static_cast<double>(doc_counts.size());
  if (!web_counts.empty())
    out["tasks_per_website"] = static_cast<double>(web_total) / static_cast<double>(web_counts.size());
  return out;
}

// Five-stage pipeline plus evaluation and reporting. Every stage reads its
// inputs from and writes its outputs to the workspace directory, so stages
// are individually rerunnable and the whole run is resumable.
class Pipeline {
 public:
  Pipeline(PipelineConfig config, std::filesystem::path out_dir)
      : cfg_(std::move(config)), out_(std::move(out_dir)), embedder_(cfg_.graph.dimension) {
    std::filesystem::create_directories(out_);
  }

  Diagnostics& diagnostics() { return diags_; }

  // --- stages ---------------------------------------------------------------

  void ingest_docs() {
    run_stage("ingest-docs", [&]() {
      if (cfg_.corpus.docs_dir.empty()) {
        Graph empty(cfg_.graph.dimension);
        pipelinedetail::write_file_atomic(out_ / "docs.graph.json", empty.serialize());
        return;
      }
      auto docs = load_documents(cfg_.corpus.docs_dir);
      MetadataCaptioner captioner;
      DocIngestOptions opt;
      opt.theta_sim = cfg_.graph.theta_sim;
      opt.chunk_tokens = cfg_.graph.chunk_tokens;
      opt.jobs = cfg_.jobs;
      Graph graph = build_doc_graph(docs, embedder_, captioner, opt, &diags_);
      pipelinedetail::write_file_atomic(out_ / "docs.graph.json", graph.serialize());
    });
  }

  void ingest_web() {
    run_stage("ingest-web", [&]() {
      if (cfg_.corpus.snapshots_dir.empty()) {
        Graph empty(cfg_.graph.dimension);
        pipelinedetail::write_file_atomic(out_ / "web.graph.json", empty.serialize());
        return;
      }
      auto snapshots = load_snapshots(cfg_.corpus.snapshots_dir);
      WebIngestOptions opt;
      opt.jobs = cfg_.jobs;
      Graph graph = build_web_graph(snapshots, embedder_, opt, &diags_);
      pipelinedetail::write_file_atomic(out_ / "web.graph.json", graph.serialize());
    });
  }

  void build_graph() {
    run_stage("build-graph", [&]() {
      Graph docs = Graph::deserialize(pipelinedetail::read_file(out_ / "docs.graph.json", "ingest-docs"));
      Graph web = Graph::deserialize(pipelinedetail::read_file(out_ / "web.graph.json", "ingest-web"));
      Graph merged(cfg_.graph.dimension);
      for (const Graph* g : {&docs, &web}) {
        for (const auto& [id, node] : g->nodes()) {
          (void)id;
          merged.add_node(node);
        }
      }
      for (const Graph* g : {&docs, &web})
        for (const Edge& e : g->edges()) merged.add_edge(e.src, e.dst, e.kind, e.weight);
      pipelinedetail::write_file_atomic(out_ / "graph.json", merged.serialize());
    });
  }

  void sample() {
    run_stage("sample", [&]() {
      Graph graph = load_graph();
      graph.freeze();
      SamplerConfig sampler_cfg{cfg_.sampler.tau, cfg_.sampler.k};
      auto templates = load_templates();

      json subgraphs = json::array();
      auto record = [&](const char* kind, const std::string& source_id, const std::string& scope,
                        const Subgraph& sg) {
        if (sg.empty()) return;
        subgraphs.push_back(json{{"kind", kind},
                                 {"source_id", source_id},
                                 {"scope", scope},
                                 {"goal", sg.objective_ref},
                                 {"node_ids", std::vector<std::string>(sg.node_ids.begin(), sg.node_ids.end())},
                                 {"seed_ids", std::vector<std::string>(sg.seed_ids.begin(), sg.seed_ids.end())}});
      };

      // Document objectives: one per template. Templates that relate
      // documents sample corpus-wide; the rest sample per document.
      std::set<std::string> doc_paths;
      for (const auto& [id, node] : graph.nodes())
        if (node.kind.category == NodeCategory::Document) doc_paths.insert(node.source_path);
      for (const TaskTemplate& tmpl : templates) {
        TaskObjective objective;
        objective.goal_text = tmpl.name + ": " + tmpl.description;
        objective.goal_embedding = embedder_.embed(objective.goal_text);
        objective.mode = SampleMode::document;
        objective.required_node_kinds = tmpl.requirements.required_node_kinds;
        objective.required_edge_kinds = tmpl.requirements.required_edge_kinds;
        Subgraph whole = sample_document_subgraph(graph, objective, sampler_cfg);
        bool cross_document = tmpl.requirements.required_edge_kinds.count(EdgeKind::cross_doc_link) != 0;
        if (cross_document) {
          record("document", tmpl.template_id, "*", whole);
          continue;
        }
        for (const std::string& path : doc_paths) {
          std::set<std::string> scoped;
          for (const std::string& id : whole.node_ids)
            if (graph.node(id).source_path == path) scoped.insert(id);
          Subgraph sg = make_subgraph(graph, std::move(scoped), {}, objective.goal_text);
          record("document", tmpl.template_id, path, sg);
        }
      }

      // Web objectives: one per page, seeded by that page's elements.
      for (const auto& [id, node] : graph.nodes()) {
        if (node.kind.category != NodeCategory::WebPage) continue;
        TaskObjective objective;
        objective.goal_text = "interact with " + (node.text.empty() ? node.metadata.at("url") : node.text);
        objective.goal_embedding = embedder_.embed(objective.goal_text);
        objective.mode = SampleMode::web;
        SeedSelector selector;
        selector.page_url = node.metadata.at("url");
        objective.seed_selector = selector;
        Subgraph sg = sample_web_subgraph(graph, objective, sampler_cfg, &diags_);
        record("web", node.metadata.at("url"), node.metadata.at("url"), sg);
      }

      pipelinedetail::write_file_atomic(out_ / "subgraphs.json",
                                        json{{"version", 1}, {"subgraphs", std::move(subgraphs)}}.dump(2) +
                                            "\n");
    });
  }

  void generate() {
    run_stage("generate", [&]() {
      Graph graph = load_graph();
      graph.freeze();
      json manifest = json::parse(pipelinedetail::read_file(out_ / "subgraphs.json", "sample"));
      auto templates = load_templates();
      auto patterns = load_patterns();
      std::map<std::string, const TaskTemplate*> template_by_id;
      for (const TaskTemplate& t : templates) template_by_id[t.template_id] = &t;

      auto gateway = make_gateway();
      LlmGateway* refiner = cfg_.generation.refine ? gateway.get() : nullptr;

      std::vector<Task> tasks;
      std::set<std::string> task_ids;
      std::map<std::string, std::size_t> per_source;
      std::uint64_t stage_seed = mix_seed(cfg_.seed, "generate");

      for (const json& entry : manifest.at("subgraphs")) {
        std::string kind = entry.at("kind").get<std::string>();
        std::string source_id = entry.at("source_id").get<std::string>();
        std::string scope = entry.at("scope").get<std::string>();
        std::set<std::string> node_ids;
        for (const json& id : entry.at("node_ids")) node_ids.insert(id.get<std::string>());
        std::set<std::string> seed_ids;
        for (const json& id : entry.at("seed_ids")) seed_ids.insert(id.get<std::string>());
        Subgraph sg = make_subgraph(graph, std::move(node_ids), std::move(seed_ids),
                                    entry.value("goal", ""));

        if (kind == "document") {
          auto it = template_by_id.find(source_id);
          if (it == template_by_id.end()) {
            warn(&diags_, "subgraph references unknown template " + source_id);
            continue;
          }
          if (per_source[scope] >= cfg_.generation.per_source_cap) continue;
          if (!template_matches(*it->second, sg, graph)) continue;
          try {
            Task task = generate_doc_task(*it->second, sg, graph, refiner, &diags_);
            if (task_ids.insert(task.task_id).second) {
              tasks.push_back(std::move(task));
              ++per_source[scope];
            }
          } catch (const Error& e) {
            warn(&diags_, "doc task generation failed for " + source_id + " on " + scope + ": " + e.what());
          }
        } else {
          std::string page_id = "p:" + source_id;
          if (!graph.has_node(page_id)) continue;
          PageContext ctx = build_page_context(graph, page_id);
          if (ctx.marks.empty()) continue;
          // k-hop sampling reaches neighbouring pages; an instance belongs
          // to the page containing its first element, and only that page's
          // objective generates it.
          auto owning_page = [&](const MetapathInstance& instance) -> std::string {
            const std::string& head = instance.path_nodes.front();
            if (graph.node(head).kind.category == NodeCategory::WebPage) return head;
            for (const Edge& e : sg.edges)
              if (e.kind == EdgeKind::contains && e.dst == head &&
                  graph.node(e.src).kind.category == NodeCategory::WebPage)
                return e.src;
            return page_id;
          };
          for (const MetapathPattern* pattern : select_patterns(patterns, sg, graph)) {
            if (per_source[scope] >= cfg_.generation.per_source_cap) break;
            for (const MetapathInstance& instance : match_pattern(*pattern, sg, graph)) {
              if (per_source[scope] >= cfg_.generation.per_source_cap) break;
              if (owning_page(instance) != page_id) continue;
              try {
                Task task = generate_web_task(instance, sg, graph, ctx, refiner,
                                              mix_seed(stage_seed, source_id), &diags_);
                if (task_ids.insert(task.task_id).second) {
                  tasks.push_back(std::move(task));
                  ++per_source[scope];
                }
              } catch (const Error& e) {
                warn(&diags_, "web task generation failed on " + scope + ": " + e.what());
              }
            }
          }
        }
      }

      std::sort(tasks.begin(), tasks.end(),
                [](const Task& a, const Task& b) { return a.task_id < b.task_id; });
      std::ostringstream out;
      write_tasks_jsonl(tasks, out);
      pipelinedetail::write_file_atomic(out_ / "tasks.raw.jsonl", out.str());
      record_usage("generate", gateway->total_usage());
    });
  }

  void optimize() {
    run_stage("optimize", [&]() {
      Graph graph = load_graph();
      graph.freeze();
      std::istringstream raw(pipelinedetail::read_file(out_ / "tasks.raw.jsonl", "generate"));
      std::vector<Task> pool = read_tasks_jsonl(raw);

      auto gateway = make_gateway();
      LlmGateway* judge = cfg_.optimization.use_judge ? gateway.get() : nullptr;

      std::map<std::string, double> quality;
      std::vector<Task> candidates;
      std::size_t dropped_quality = 0, dropped_reachability = 0;
      for (const Task& task : pool) {
        QualityScore score = score_quality(task, graph, judge, &diags_);
        if (score.overall() < cfg_.optimization.quality_threshold) {
          ++dropped_quality;
          continue;
        }
        if (!reachability_check(task, graph)) {
          ++dropped_reachability;
          continue;
        }
        quality[task.task_id] = score.overall();
        candidates.push_back(task);
      }

      SelectionConfig selection;
      selection.lambda = cfg_.optimization.lambda;
      selection.alpha = cfg_.optimization.alpha;
      selection.quality_threshold = cfg_.optimization.quality_threshold;
      selection.target_size = cfg_.optimization.target_size;
      const Embedder* similarity_embedder = cfg_.gateway.mock ? nullptr : &embedder_;
      std::vector<std::string> selected_ids = mmr_select(candidates, quality, selection, similarity_embedder);

      std::set<std::string> chosen(selected_ids.begin(), selected_ids.end());
      std::vector<Task> selected;
      for (const Task& task : candidates)
        if (chosen.count(task.task_id) != 0) selected.push_back(task);
      std::sort(selected.begin(), selected.end(),
                [](const Task& a, const Task& b) { return a.task_id < b.task_id; });

      std::ostringstream out;
      write_tasks_jsonl(selected, out);
      pipelinedetail::write_file_atomic(out_ / "tasks.jsonl", out.str());
      json report = selection_report(pool.size(), dropped_quality, dropped_reachability, candidates,
                                     selected_ids);
      pipelinedetail::write_file_atomic(out_ / "selection_report.json", report.dump(2) + "\n");
      record_usage("optimize", gateway->total_usage());
    });
  }

  void evaluate() {
    run_stage("evaluate", [&]() {
      Graph graph = load_graph();
      graph.freeze();
      std::istringstream selected(pipelinedetail::read_file(out_ / "tasks.jsonl", "optimize"));
      std::vector<Task> tasks = read_tasks_jsonl(selected);

      std::map<std::string, Trajectory> trajectories;
      if (!cfg_.evaluation.trajectories_file.empty()) {
        std::ifstream in(cfg_.evaluation.trajectories_file);
        if (!in) throw ConfigError("cannot read trajectories file " + cfg_.evaluation.trajectories_file);
        trajectories = read_trajectories_jsonl(in);
      }

      auto gateway = make_gateway();
      EvalReport report;
      for (const Task& task : tasks) {
        EvalRow row;
        row.task_id = task.task_id;
        row.kind = task.kind;
        if (task.kind == TaskKind::document) {
          try {
            std::string pred = run_reference_agent(task, graph, embedder_, *gateway, cfg_.evaluation.top_k);
            row.f1 = token_f1(pred, *task.gold_answer);
            row.rouge_l = rouge_l(pred, *task.gold_answer);
            auto verdict = judge_answer(task, pred, *gateway, &diags_);
            if (verdict) {
              row.judge_aggregate = verdict->aggregate();
            } else {
              ++report.judge_missing;
            }
          } catch (const Error& e) {
            row.error = e.what();
          }
        } else {
          Trajectory trajectory;
          auto it = trajectories.find(task.task_id);
          if (it != trajectories.end()) {
            trajectory = it->second;
          } else {
            // Replay stub: judge the task's own plan as a recorded run.
            for (const WebStep& step : task.web_steps) trajectory.actions.push_back(to_string(step.action));
            trajectory.success = true;
            trajectory.final_url =
                task.metadata.count("page_url") ? task.metadata.at("page_url") : "";
            trajectory.final_title =
                task.metadata.count("page_title") ? task.metadata.at("page_title") : "";
          }
          auto verdict = judge_trajectory(task, trajectory, *gateway, &diags_);
          if (verdict) {
            row.task_completed = verdict->task_completed;
          } else {
            ++report.judge_missing;
            row.error = "judge verdict missing";
          }
        }
        report.rows.push_back(std::move(row));
      }
      report.usage = gateway->total_usage();
      pipelinedetail::write_file_atomic(out_ / "eval" / "report.json", report.to_json().dump(2) + "\n");
      pipelinedetail::write_file_atomic(out_ / "eval" / "report.csv", report.to_csv());
      record_usage("evaluate", report.usage);
    });
  }

  void report() {
    run_stage("report", [&]() {
      json run_report = json::object();
      Graph graph = load_graph();
      run_report["graph"] = json{{"nodes", graph.nodes().size()},
                                 {"edges", graph.edges().size()},
                                 {"relations", graph.relation_set().size()}};

      std::istringstream raw(pipelinedetail::read_file(out_ / "tasks.raw.jsonl", "generate"));
      std::vector<Task> raw_tasks = read_tasks_jsonl(raw);
      std::istringstream sel(pipelinedetail::read_file(out_ / "tasks.jsonl", "optimize"));
      std::vector<Task> selected = read_tasks_jsonl(sel);
      auto count_kinds = [](const std::vector<Task>& tasks) {
        std::size_t doc = 0, web = 0;
        for (const Task& t : tasks) (t.kind == TaskKind::document ? doc : web)++;
        return json{{"document", doc}, {"web", web}};
      };
      run_report["tasks"] = json{{"generated", count_kinds(raw_tasks)}, {"selected", count_kinds(selected)}};

      json selection = json::parse(pipelinedetail::read_file(out_ / "selection_report.json", "optimize"));
      run_report["tasks"]["filtered_out"] = selection.at("filtered_out");
      run_report["coverage"] = selection.at("per_dimension_coverage");
      run_report["tasks_per_source"] = tasks_per_source_summary(selected);

      auto stage_path = out_ / "stage_times.json";
      if (std::filesystem::exists(stage_path)) {
        run_report["stages"] = json::parse(pipelinedetail::read_file(stage_path, "any stage"));
      }
      auto eval_path = out_ / "eval" / "report.json";
      if (std::filesystem::exists(eval_path)) {
        json eval = json::parse(pipelinedetail::read_file(eval_path, "evaluate"));
        run_report["evaluation"] = eval.at("aggregates");
        run_report["usage"] = eval.at("usage");
      }
      pipelinedetail::write_file_atomic(out_ / "run_report.json", run_report.dump(2) + "\n");
    });
  }

  void run_all() {
    ingest_docs();
    ingest_web();
    build_graph();
    sample();
    generate();
    optimize();
    evaluate();
    report();
  }

 private:
  template <typename Fn>
  void run_stage(const std::string& name, Fn&& fn) {
    auto start = std::chrono::steady_clock::now();
    try {
      fn();
    } catch (const ConfigError&) {
      throw;
    } catch (const ValidationError&) {
      throw;
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(name, e.what());
    }
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    record_stage_time(name, seconds);
  }

  void record_stage_time(const std::string& name, double seconds) {
    auto path = out_ / "stage_times.json";
    json times = json::object();
    if (std::filesystem::exists(path)) {
      std::ifstream in(path);
      std::stringstream buffer;
      buffer << in.rdbuf();
      times = json::parse(buffer.str(), nullptr, false);
      if (times.is_discarded()) times = json::object();
    }
    if (!times.contains(name)) times[name] = json::object();
    times[name]["seconds"] = seconds;
    pipelinedetail::write_file_atomic(path, times.dump(2) + "\n");
  }

  void record_usage(const std::string& stage, Usage usage) {
    auto path = out_ / "stage_times.json";
    json times = json::object();
    if (std::filesystem::exists(path)) {
      std::ifstream in(path);
      std::stringstream buffer;
      buffer << in.rdbuf();
      times = json::parse(buffer.str(), nullptr, false);
      if (times.is_discarded()) times = json::object();
    }
    if (!times.contains(stage)) times[stage] = json::object();
    times[stage]["prompt_tokens"] = usage.prompt_tokens;
    times[stage]["completion_tokens"] = usage.completion_tokens;
    pipelinedetail::write_file_atomic(path, times.dump(2) + "\n");
  }

  Graph load_graph() {
    return Graph::deserialize(pipelinedetail::read_file(out_ / "graph.json", "build-graph"));
  }

  std::vector<TaskTemplate> load_templates() {
    if (cfg_.generation.templates_file.empty()) return builtin_template_library();
    json j = json::parse(pipelinedetail::read_file(cfg_.generation.templates_file, "—"));
    return load_template_library(j);
  }

  std::vector<MetapathPattern> load_patterns() {
    if (cfg_.generation.patterns_file.empty()) return builtin_pattern_library();
    json j = json::parse(pipelinedetail::read_file(cfg_.generation.patterns_file, "—"));
    return load_pattern_library(j);
  }

  std::unique_ptr<LlmGateway> make_gateway() {
    std::unique_ptr<LlmGateway> gateway;
    if (cfg_.gateway.mock) {
      MockPolicy policy;
      policy.seed = cfg_.gateway.seed != 0 ? cfg_.gateway.seed : cfg_.seed;
      gateway = std::make_unique<LlmGateway>(LlmGateway::make_mock(std::move(policy)));
    } else {
      ProviderConfig provider;
      provider.endpoint = cfg_.gateway.endpoint;
      provider.model = cfg_.gateway.model;
      provider.api_key_env = cfg_.gateway.api_key_env;
      provider.timeout_seconds = cfg_.gateway.timeout_seconds;
      provider.retries = cfg_.gateway.retries;
      provider.backoff_base_seconds = cfg_.gateway.backoff_base_seconds;
      gateway = std::make_unique<LlmGateway>(
          LlmGateway::make_http(provider, std::make_shared<HttplibTransport>(provider.timeout_seconds)));
    }
    gateway->set_max_in_flight(cfg_.gateway.max_in_flight);
    gateway->set_per_minute_budget(cfg_.gateway.per_minute_budget);
    return gateway;
  }

  PipelineConfig cfg_;
  std::filesystem::path out_;
  HashingEmbedder embedder_;
  Diagnostics diags_;
};

}  // namespace kgbench
