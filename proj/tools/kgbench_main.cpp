#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "kgbench/config.hpp"
#include "kgbench/pipeline.hpp"

namespace {

struct CliOptions {
  std::string config_path;
  std::string out_dir = "out";
  std::string docs_dir;
  std::string snapshots_dir;
  std::string templates_file;
  std::string patterns_file;
  std::string trajectories_file;
  std::int64_t seed = -1;
  std::int64_t jobs = -1;
  bool verbose = false;
};

kgbench::PipelineConfig resolve_config(const CliOptions& opt) {
  kgbench::PipelineConfig cfg;
  if (!opt.config_path.empty()) cfg = kgbench::PipelineConfig::from_file(opt.config_path);
  // Flags override the file, which overrides defaults.
  if (!opt.docs_dir.empty()) cfg.corpus.docs_dir = opt.docs_dir;
  if (!opt.snapshots_dir.empty()) cfg.corpus.snapshots_dir = opt.snapshots_dir;
  if (!opt.templates_file.empty()) cfg.generation.templates_file = opt.templates_file;
  if (!opt.patterns_file.empty()) cfg.generation.patterns_file = opt.patterns_file;
  if (!opt.trajectories_file.empty()) cfg.evaluation.trajectories_file = opt.trajectories_file;
  if (opt.seed >= 0) cfg.seed = static_cast<std::uint64_t>(opt.seed);
  if (opt.jobs >= 1) cfg.jobs = static_cast<std::size_t>(opt.jobs);
  cfg.validate();
  return cfg;
}

void print_warnings(const kgbench::Diagnostics& diags, bool verbose) {
  if (!verbose) return;
  for (const std::string& w : diags.warnings) std::cerr << "warning: " << w << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kgbench: turn document and web corpora into a knowledge graph and generate, filter, and "
               "evaluate agent benchmark tasks"};
  app.require_subcommand(1);

  CliOptions opt;
  app.add_option("--config", opt.config_path, "TOML config file");
  app.add_option("--out", opt.out_dir, "workspace directory for stage artifacts");
  app.add_option("--docs", opt.docs_dir, "document corpus directory (overrides config)");
  app.add_option("--snapshots", opt.snapshots_dir, "DOM snapshot directory (overrides config)");
  app.add_option("--templates", opt.templates_file, "task template library JSON (overrides built-in)");
  app.add_option("--patterns", opt.patterns_file, "meta-path pattern library JSON (overrides built-in)");
  app.add_option("--trajectories", opt.trajectories_file, "recorded web trajectories JSONL");
  app.add_option("--seed", opt.seed, "global determinism seed");
  app.add_option("--jobs", opt.jobs, "worker count cap");
  app.add_flag("--verbose", opt.verbose, "print diagnostics");

  std::string stage;
  for (const char* name : {"ingest-docs", "ingest-web", "build-graph", "sample", "generate", "optimize",
                           "evaluate", "report", "run-all"}) {
    auto* sub = app.add_subcommand(name);
    sub->fallthrough();  // global flags may follow the subcommand
    sub->callback([&stage, name]() { stage = name; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    kgbench::PipelineConfig cfg = resolve_config(opt);
    kgbench::Pipeline pipeline(cfg, opt.out_dir);
    if (stage == "ingest-docs") pipeline.ingest_docs();
    else if (stage == "ingest-web") pipeline.ingest_web();
    else if (stage == "build-graph") pipeline.build_graph();
    else if (stage == "sample") pipeline.sample();
    else if (stage == "generate") pipeline.generate();
    else if (stage == "optimize") pipeline.optimize();
    else if (stage == "evaluate") pipeline.evaluate();
    else if (stage == "report") pipeline.report();
    else if (stage == "run-all") pipeline.run_all();
    print_warnings(pipeline.diagnostics(), opt.verbose);
    if (stage == "report" || stage == "run-all") {
      auto report_path = std::filesystem::path(opt.out_dir) / "run_report.json";
      if (std::filesystem::exists(report_path)) std::cout << "wrote " << report_path.string() << "\n";
    }
    return 0;
  } catch (const kgbench::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const kgbench::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 4;
  } catch (const kgbench::StageError& e) {
    std::cerr << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
