// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion is checked at its stated tolerance and runtime
// budget against independently coded oracles (see oracles.hpp).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "kgbench/coverage.hpp"
#include "kgbench/graph.hpp"
#include "kgbench/metapath.hpp"
#include "kgbench/metrics.hpp"
#include "kgbench/pipeline.hpp"
#include "kgbench/sampler.hpp"
#include "kgbench/task.hpp"

#include "generators.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace kgbench;

namespace {

struct Outcome {
  bool passed = true;
  std::string detail;

  void fail(const std::string& why) {
    passed = false;
    if (!detail.empty()) detail += "; ";
    detail += why;
  }

  void note(const std::string& what) {
    if (detail.empty()) detail = what;
  }
};

using Criterion = std::function<void(Outcome&)>;

bool close(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

// --- 1. metric exactness ------------------------------------------------------

void criterion_metrics(Outcome& out) {
  gen::Rng rng(1001);
  for (int trial = 0; trial < 100; ++trial) {
    std::string pred = gen::random_token_string(rng, 12);
    std::string gold = gen::random_token_string(rng, 12);
    double f1 = token_f1(pred, gold);
    double f1_ref = oracle::f1_bruteforce(pred, gold);
    if (!close(f1, f1_ref, 1e-9)) {
      out.fail("F1 mismatch on \"" + pred + "\" vs \"" + gold + "\"");
      return;
    }
    double rl = rouge_l(pred, gold);
    double rl_ref = oracle::rouge_l_bruteforce(pred, gold);
    if (!close(rl, rl_ref, 1e-9)) {
      out.fail("ROUGE-L mismatch on \"" + pred + "\" vs \"" + gold + "\"");
      return;
    }
  }
  if (token_f1("the cat sat", "the cat") != 0.8) out.fail("F1 worked case != 0.8");
  if (rouge_l("a b c d", "a c d e") != 0.75) out.fail("ROUGE-L worked case != 0.75");
  out.note("100 random pairs within 1e-9, worked cases exact");
}

// --- 2. sampling equivalence ----------------------------------------------------

void criterion_sampling(Outcome& out) {
  gen::Rng rng(2002);
  for (int trial = 0; trial < 200; ++trial) {
    Graph g = gen::random_graph(rng, 50);
    SamplerConfig cfg;
    cfg.tau = 0.15 + gen::unit(rng) * 0.7;
    cfg.k = gen::pick(rng, 1, 3);
    TaskObjective objective;
    objective.goal_embedding = gen::random_embedding(rng, g.dimension());
    objective.mode = trial % 2 == 0 ? SampleMode::document : SampleMode::web;
    if (objective.mode == SampleMode::document) {
      objective.required_node_kinds = {NodeCategory::Table, NodeCategory::Figure};
      if (gen::pick(rng, 0, 1) == 1) objective.required_context = "ctx2";
    }
    Subgraph got = sample_subgraph(g, objective, cfg);
    auto expected = oracle::sampling_oracle(g, objective, cfg.tau, cfg.k);
    if (got.node_ids != expected.nodes) {
      out.fail("node set diverged on trial " + std::to_string(trial));
      return;
    }
    std::set<std::tuple<std::string, std::string, int>> got_edges;
    for (const Edge& e : got.edges) got_edges.insert({e.src, e.dst, static_cast<int>(e.kind)});
    if (got_edges != expected.edges) {
      out.fail("induced edges diverged on trial " + std::to_string(trial));
      return;
    }
  }
  out.note("200 random graphs, both modes, exact set equality");
}

// --- 3. meta-path soundness / completeness --------------------------------------

void criterion_metapath(Outcome& out) {
  gen::Rng rng(3003);
  for (int trial = 0; trial < 500; ++trial) {
    Graph g = gen::random_web_graph(rng, 12, 16);
    Subgraph sg = gen::whole_graph_subgraph(g);
    MetapathPattern pattern = parse_pattern(gen::random_pattern_text(rng, 5), "p");
    auto got = match_pattern(pattern, sg, g);
    std::set<oracle::PathKey> got_paths;
    for (const MetapathInstance& m : got) got_paths.insert({m.path_nodes, m.path_edges});
    auto expected = oracle::metapath_oracle(pattern, sg, g);
    if (got_paths != expected) {
      out.fail("path sets diverged on trial " + std::to_string(trial) + " pattern \"" +
               pattern.source_text + "\"");
      return;
    }
  }
  // canonical fixture: the search pattern binds exactly once
  Graph g(2);
  g.add_node(testutil::make_web_element("s", ElementKind::search_box, "Search", {1, 0}, "u", "#q", "0001"));
  g.add_node(
      testutil::make_web_element("b", ElementKind::business_data, "rows", {0, 1}, "u", "#rows", "0002"));
  g.add_node(testutil::make_web_element("t", ElementKind::button, "Go", {1, 0}, "u", "#go", "0003"));
  g.add_edge("s", "b", EdgeKind::fills);
  g.add_edge("b", "t", EdgeKind::controls);
  Subgraph sg = gen::whole_graph_subgraph(g);
  auto instances = match_pattern(
      parse_pattern("SearchBox($search) -[Fills]-> BusinessData($query) -[Controls]-> Button($submit)",
                    "canonical"),
      sg, g);
  if (instances.size() != 1) {
    out.fail("canonical pattern produced " + std::to_string(instances.size()) + " instances");
    return;
  }
  const auto& bindings = instances[0].bindings;
  if (bindings.size() != 3 || bindings.at("search") != "s" || bindings.at("query") != "b" ||
      bindings.at("submit") != "t") {
    out.fail("canonical pattern bindings wrong");
    return;
  }
  out.note("500 random cases equal exhaustive enumeration; canonical fixture binds once");
}

// --- 4. MMR equivalence ----------------------------------------------------------

void criterion_mmr(Outcome& out) {
  gen::Rng rng(4004);
  for (int trial = 0; trial < 100; ++trial) {
    int n = gen::pick(rng, 1, 10);
    std::vector<Task> pool;
    std::map<std::string, double> quality;
    for (int i = 0; i < n; ++i) {
      Task t = gen::random_task(rng, trial * 100 + i);
      quality[t.task_id] = gen::unit(rng);
      pool.push_back(std::move(t));
    }
    SelectionConfig cfg;
    cfg.lambda = gen::unit(rng);
    cfg.alpha = gen::unit(rng);
    cfg.target_size = static_cast<std::size_t>(gen::pick(rng, 1, 10));
    auto got = mmr_select(pool, quality, cfg);
    auto expected = oracle::mmr_oracle(pool, quality, cfg.lambda, cfg.alpha, cfg.target_size);
    if (got != expected) {
      out.fail("selection order diverged on trial " + std::to_string(trial));
      return;
    }
  }
  // worked example: [t1, t3, t2]
  Task t1;
  t1.kind = TaskKind::document;
  t1.prompt = "alpha beta gamma";
  t1.gold_answer = "g";
  t1.citations = {"n"};
  t1.provenance.source_id = "tpl";
  t1.metadata["source_path"] = "doc";
  t1.task_id = "task_1";
  Task t2 = t1;
  t2.task_id = "task_2";
  Task t3 = t1;
  t3.prompt = "delta epsilon zeta";
  t3.task_id = "task_3";
  SelectionConfig cfg;
  cfg.lambda = 0.7;
  cfg.alpha = 1.0;
  cfg.target_size = 3;
  auto order = mmr_select({t3, t2, t1}, {{"task_1", 0.9}, {"task_2", 0.8}, {"task_3", 0.7}}, cfg);
  if (order != std::vector<std::string>{"task_1", "task_3", "task_2"}) {
    out.fail("worked example selected the wrong order");
    return;
  }
  out.note("100 random pools equal the greedy oracle; worked example = [t1, t3, t2]");
}

// --- 5. end-to-end determinism ----------------------------------------------------

void criterion_pipeline(Outcome& out) {
  auto base = std::filesystem::temp_directory_path() / "kgbench_acceptance";
  std::filesystem::remove_all(base);
  PipelineConfig cfg = PipelineConfig::from_file(testutil::fixtures_dir() / "config.toml");
  cfg.seed = 7;

  Pipeline first(cfg, base / "run1");
  first.run_all();
  Pipeline second(cfg, base / "run2");
  second.run_all();

  std::string tasks1 = testutil::read_file(base / "run1" / "tasks.jsonl");
  std::string tasks2 = testutil::read_file(base / "run2" / "tasks.jsonl");
  if (tasks1 != tasks2) {
    out.fail("tasks.jsonl differs between identical runs");
    return;
  }

  std::istringstream in(tasks1);
  std::vector<Task> tasks;
  try {
    tasks = read_tasks_jsonl(in);  // schema validation happens on read
  } catch (const Error& e) {
    out.fail(std::string("schema validation failed: ") + e.what());
    return;
  }
  std::size_t docs = 0, webs = 0;
  std::set<TaskType> types;
  for (const Task& t : tasks) {
    (t.kind == TaskKind::document ? docs : webs)++;
    types.insert(t.type);
  }
  if (docs == 0 || webs == 0) out.fail("missing a task kind (docs=" + std::to_string(docs) +
                                       ", web=" + std::to_string(webs) + ")");
  if (types.size() < 3) out.fail("fewer than 3 task types");

  Graph graph = Graph::deserialize(testutil::read_file(base / "run1" / "graph.json"));
  for (const Task& t : tasks) {
    if (score_quality(t, graph).overall() < 0.6) {
      out.fail("task " + t.task_id + " below quality threshold");
      break;
    }
    if (!reachability_check(t, graph)) {
      out.fail("task " + t.task_id + " fails reachability");
      break;
    }
  }
  if (out.passed)
    out.note("byte-identical reruns; " + std::to_string(docs) + " document + " + std::to_string(webs) +
             " web tasks across " + std::to_string(types.size()) + " types");
}

// --- 6. dataset-shape representability ----------------------------------------------

void criterion_dataset_shape(Outcome& out) {
  // The published benchmark splits 1319 tasks into 1002 document / 317 web
  // over 16 documents and 8 websites. The record schema and the report math
  // must express that shape (the values themselves are model-dependent).
  std::vector<Task> tasks;
  for (int s = 0; s < 16; ++s) {
    int count = s < 10 ? 63 : 62;  // 10*63 + 6*62 = 1002
    for (int i = 0; i < count; ++i) {
      Task t;
      t.kind = TaskKind::document;
      t.type = all_task_types()[static_cast<std::size_t>((s + i) % 12)];
      t.difficulty = static_cast<Difficulty>(i % 4);
      t.prompt = "prompt";
      t.gold_answer = "gold";
      t.citations = {"n"};
      t.provenance.source_id = "tpl";
      t.provenance.subgraph_nodes = {"n"};
      t.metadata["source_path"] = "doc" + std::to_string(s);
      t.task_id = "task_d" + std::to_string(s) + "_" + std::to_string(i);
      json j = task_to_json(t);
      tasks.push_back(task_from_json(j));  // schema round-trip
    }
  }
  for (int s = 0; s < 8; ++s) {
    int count = s < 5 ? 40 : 39;  // 5*40 + 3*39 = 317
    for (int i = 0; i < count; ++i) {
      Task t;
      t.kind = TaskKind::web;
      t.type = TaskType::information_extraction;
      t.difficulty = Difficulty::Medium;
      t.prompt = "do the thing";
      t.citations = {"w"};
      t.web_steps = {WebStep{0, WebAction::navigate, "https://site.example/", ""},
                     WebStep{1, WebAction::click, "#b", ""}};
      t.chain_name = "Search + Detail";
      t.provenance.source_id = "pattern";
      t.provenance.subgraph_nodes = {"w"};
      t.metadata["page_url"] = "https://site" + std::to_string(s) + ".example/";
      t.metadata["website_type"] = "library";
      t.task_id = "task_w" + std::to_string(s) + "_" + std::to_string(i);
      json j = task_to_json(t);
      tasks.push_back(task_from_json(j));
    }
  }
  json summary = tasks_per_source_summary(tasks);
  if (summary["document_tasks"] != 1002 || summary["web_tasks"] != 317)
    out.fail("1002/317 split not preserved");
  if (summary["documents"] != 16 || summary["websites"] != 8) out.fail("source counts wrong");
  double per_doc = summary["tasks_per_document"].get<double>();
  double per_site = summary["tasks_per_website"].get<double>();
  if (!close(per_doc, 1002.0 / 16.0, 1e-12) || !close(per_site, 317.0 / 8.0, 1e-12))
    out.fail("tasks-per-source averages wrong");
  out.note("1002/317 split representable; per-source averages computed");
}

// --- 7. judge prompt fidelity ---------------------------------------------------------

void criterion_prompts(Outcome& out) {
  std::string answer_prompt = build_answer_judge_prompt("What is the main finding?", "The reef recovered.",
                                                        "The reef did not recover.");
  std::string answer_golden = testutil::read_file(testutil::golden_dir() / "judge_answer_prompt.txt");
  if (answer_prompt + "\n" != answer_golden) out.fail("answer judge prompt diverges from golden file");
  if (answer_prompt.find("\"answer_quality\": <score>") == std::string::npos)
    out.fail("missing literal answer_quality line");

  Trajectory t;
  t.actions = {"navigate", "input", "click"};
  t.success = true;
  t.final_url = "https://books.example.org/search";
  t.final_title = "Book Search";
  std::string traj_prompt =
      build_trajectory_judge_prompt("Search for \"atlas\" using the site search.", "task_x", t);
  std::string traj_golden = testutil::read_file(testutil::golden_dir() / "judge_trajectory_prompt.txt");
  if (traj_prompt + "\n" != traj_golden) out.fail("trajectory judge prompt diverges from golden file");
  if (traj_prompt.find("\"task_completed\": true") == std::string::npos)
    out.fail("missing literal task_completed line");
  out.note("both prompts byte-identical to golden files");
}

// --- 8. monotonicity properties ---------------------------------------------------------

void criterion_monotonicity(Outcome& out) {
  gen::Rng rng(8008);
  for (int trial = 0; trial < 50; ++trial) {
    Graph g = gen::random_graph(rng, 30);
    TaskObjective doc;
    doc.goal_embedding = gen::random_embedding(rng, g.dimension());
    doc.mode = SampleMode::document;
    std::set<std::string> previous;
    bool first = true;
    for (double tau : {0.1, 0.25, 0.4, 0.55, 0.7, 0.85}) {
      SamplerConfig cfg;
      cfg.tau = tau;
      auto current = sample_document_subgraph(g, doc, cfg).node_ids;
      if (!first) {
        for (const std::string& id : current) {
          if (previous.count(id) == 0) {
            out.fail("document sampling gained a node as tau rose (trial " + std::to_string(trial) + ")");
            return;
          }
        }
      }
      previous = std::move(current);
      first = false;
    }
    TaskObjective web;
    web.goal_embedding = gen::random_embedding(rng, g.dimension());
    web.mode = SampleMode::web;
    std::set<std::string> smaller;
    first = true;
    for (int k = 1; k <= 4; ++k) {
      SamplerConfig cfg;
      cfg.k = k;
      auto current = sample_web_subgraph(g, web, cfg).node_ids;
      if (!first) {
        for (const std::string& id : smaller) {
          if (current.count(id) == 0) {
            out.fail("web sampling lost a node as k rose (trial " + std::to_string(trial) + ")");
            return;
          }
        }
      }
      smaller = std::move(current);
      first = false;
    }
  }
  out.note("50 random graphs, no monotonicity counterexample");
}

struct Entry {
  int number;
  std::string name;
  double budget_seconds;
  Criterion run;
};

}  // namespace

int main() {
  std::vector<Entry> criteria = {
      {1, "metric exactness vs brute-force oracles", 1.0, criterion_metrics},
      {2, "subgraph sampling equals the transcription oracle", 10.0, criterion_sampling},
      {3, "meta-path matching equals exhaustive enumeration", 30.0, criterion_metapath},
      {4, "MMR selection equals the exhaustive greedy oracle", 5.0, criterion_mmr},
      {5, "end-to-end determinism on the fixture corpus", 60.0, criterion_pipeline},
      {6, "dataset shape and tasks-per-source reporting", 0.0, criterion_dataset_shape},
      {7, "judge prompt fidelity to golden files", 0.0, criterion_prompts},
      {8, "sampling monotonicity in tau and k", 5.0, criterion_monotonicity},
  };

  int failures = 0;
  for (Entry& entry : criteria) {
    Outcome outcome;
    auto start = std::chrono::steady_clock::now();
    try {
      entry.run(outcome);
    } catch (const std::exception& e) {
      outcome.fail(std::string("exception: ") + e.what());
    }
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (entry.budget_seconds > 0.0 && seconds > entry.budget_seconds)
      outcome.fail("runtime " + std::to_string(seconds) + "s exceeds budget " +
                   std::to_string(entry.budget_seconds) + "s");
    std::printf("[%s] criterion %d: %s (%.2fs%s%s)\n", outcome.passed ? "PASS" : "FAIL", entry.number,
                entry.name.c_str(), seconds, outcome.detail.empty() ? "" : " — ",
                outcome.detail.c_str());
    if (!outcome.passed) ++failures;
  }
  if (failures > 0) {
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return 1;
  }
  std::printf("all %zu criteria passed\n", criteria.size());
  return 0;
}
