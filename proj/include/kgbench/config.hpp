#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "kgbench/diagnostics.hpp"
#include "kgbench/graph.hpp"
#include "kgbench/toml.hpp"

namespace kgbench {

// Everything the pipeline needs, with documented defaults. Precedence is
// CLI flags > config file > defaults; unknown keys are rejected.
struct PipelineConfig {
  std::uint64_t seed = 7;
  std::size_t jobs = 1;

  struct Corpus {
    std::string docs_dir;
    std::string snapshots_dir;
  } corpus;

  struct GraphParams {
    std::size_t dimension = 384;
    double theta_sim = 0.75;
    std::size_t chunk_tokens = 64;
  } graph;

  struct Sampler {
    double tau = 0.5;
    int k = 2;
  } sampler;

  struct Generation {
    std::string templates_file;  // empty = built-in library
    std::string patterns_file;   // empty = built-in library
    std::size_t per_source_cap = 16;
    bool refine = false;  // route drafts through the gateway
  } generation;

  struct Optimization {
    double lambda = 0.7;
    double alpha = 0.5;
    double quality_threshold = 0.6;
    std::size_t target_size = 32;
    bool use_judge = false;
  } optimization;

  struct Evaluation {
    std::size_t top_k = 3;
    std::string trajectories_file;  // empty = replay stub from task steps
  } evaluation;

  struct Gateway {
    bool mock = true;
    std::uint64_t seed = 0;  // 0 = inherit the global seed
    std::string endpoint;
    std::string model = "gpt-4o";
    double temperature = 0.1;
    std::string api_key_env = "KGBENCH_API_KEY";
    double timeout_seconds = 30.0;
    int retries = 3;
    double backoff_base_seconds = 0.5;
    std::size_t max_in_flight = 4;
    std::size_t per_minute_budget = 0;
  } gateway;

  void validate() const {
    if (graph.dimension < 8) throw ConfigError("graph.dimension must be >= 8");
    if (graph.theta_sim < 0.0 || graph.theta_sim > 1.0) throw ConfigError("graph.theta_sim must lie in [0,1]");
    if (graph.chunk_tokens < 32) throw ConfigError("graph.chunk_tokens must be >= 32");
    if (!(sampler.tau > 0.0 && sampler.tau < 1.0)) throw ConfigError("sampler.tau must lie in (0,1)");
    if (sampler.k < 1) throw ConfigError("sampler.k must be >= 1");
    if (generation.per_source_cap < 1) throw ConfigError("generation.per_source_cap must be >= 1");
    if (optimization.lambda < 0.0 || optimization.lambda > 1.0)
      throw ConfigError("optimization.lambda must lie in [0,1]");
    if (optimization.alpha < 0.0 || optimization.alpha > 1.0)
      throw ConfigError("optimization.alpha must lie in [0,1]");
    if (optimization.quality_threshold < 0.0 || optimization.quality_threshold > 1.0)
      throw ConfigError("optimization.quality_threshold must lie in [0,1]");
    if (optimization.target_size < 1) throw ConfigError("optimization.target_size must be >= 1");
    if (evaluation.top_k < 1) throw ConfigError("evaluation.top_k must be >= 1");
    if (gateway.temperature < 0.0) throw ConfigError("gateway.temperature must be >= 0");
    if (gateway.retries < 0) throw ConfigError("gateway.retries must be >= 0");
    if (!gateway.mock && gateway.endpoint.empty())
      throw ConfigError("gateway.endpoint is required when gateway.mock = false");
  }

  static PipelineConfig from_toml_text(std::string_view text) {
    nlohmann::json j = parse_toml(text);
    PipelineConfig cfg;

    auto section = [&](const char* name) -> nlohmann::json {
      if (!j.contains(name)) return nlohmann::json::object();
      nlohmann::json s = j[name];
      j.erase(name);
      return s;
    };

    if (j.contains("seed")) {
      cfg.seed = j["seed"].get<std::uint64_t>();
      j.erase("seed");
    }
    if (j.contains("jobs")) {
      cfg.jobs = j["jobs"].get<std::size_t>();
      j.erase("jobs");
    }

    nlohmann::json corpus = section("corpus");
    Graph::check_keys(corpus, {"docs_dir", "snapshots_dir"}, "config [corpus]");
    cfg.corpus.docs_dir = corpus.value("docs_dir", "");
    cfg.corpus.snapshots_dir = corpus.value("snapshots_dir", "");

    nlohmann::json graph = section("graph");
    Graph::check_keys(graph, {"dimension", "theta_sim", "chunk_tokens"}, "config [graph]");
    cfg.graph.dimension = graph.value("dimension", cfg.graph.dimension);
    cfg.graph.theta_sim = graph.value("theta_sim", cfg.graph.theta_sim);
    cfg.graph.chunk_tokens = graph.value("chunk_tokens", cfg.graph.chunk_tokens);

    nlohmann::json sampler = section("sampler");
    Graph::check_keys(sampler, {"tau", "k"}, "config [sampler]");
    cfg.sampler.tau = sampler.value("tau", cfg.sampler.tau);
    cfg.sampler.k = sampler.value("k", cfg.sampler.k);

    nlohmann::json generation = section("generation");
    Graph::check_keys(generation, {"templates_file", "patterns_file", "per_source_cap", "refine"},
                      "config [generation]");
    cfg.generation.templates_file = generation.value("templates_file", "");
    cfg.generation.patterns_file = generation.value("patterns_file", "");
    cfg.generation.per_source_cap = generation.value("per_source_cap", cfg.generation.per_source_cap);
    cfg.generation.refine = generation.value("refine", cfg.generation.refine);

    nlohmann::json optimization = section("optimization");
    Graph::check_keys(optimization, {"lambda", "alpha", "quality_threshold", "target_size", "use_judge"},
                      "config [optimization]");
    cfg.optimization.lambda = optimization.value("lambda", cfg.optimization.lambda);
    cfg.optimization.alpha = optimization.value("alpha", cfg.optimization.alpha);
    cfg.optimization.quality_threshold =
        optimization.value("quality_threshold", cfg.optimization.quality_threshold);
    cfg.optimization.target_size = optimization.value("target_size", cfg.optimization.target_size);
    cfg.optimization.use_judge = optimization.value("use_judge", cfg.optimization.use_judge);

    nlohmann::json evaluation = section("evaluation");
    Graph::check_keys(evaluation, {"top_k", "trajectories_file"}, "config [evaluation]");
    cfg.evaluation.top_k = evaluation.value("top_k", cfg.evaluation.top_k);
    cfg.evaluation.trajectories_file = evaluation.value("trajectories_file", "");

    nlohmann::json gateway = section("gateway");
    Graph::check_keys(gateway,
                      {"mock", "seed", "endpoint", "model", "temperature", "api_key_env", "timeout_seconds",
                       "retries", "backoff_base_seconds", "max_in_flight", "per_minute_budget"},
                      "config [gateway]");
    cfg.gateway.mock = gateway.value("mock", cfg.gateway.mock);
    cfg.gateway.seed = gateway.value("seed", cfg.gateway.seed);
    cfg.gateway.endpoint = gateway.value("endpoint", "");
    cfg.gateway.model = gateway.value("model", cfg.gateway.model);
    cfg.gateway.temperature = gateway.value("temperature", cfg.gateway.temperature);
    cfg.gateway.api_key_env = gateway.value("api_key_env", cfg.gateway.api_key_env);
    cfg.gateway.timeout_seconds = gateway.value("timeout_seconds", cfg.gateway.timeout_seconds);
    cfg.gateway.retries = gateway.value("retries", cfg.gateway.retries);
    cfg.gateway.backoff_base_seconds = gateway.value("backoff_base_seconds", cfg.gateway.backoff_base_seconds);
    cfg.gateway.max_in_flight = gateway.value("max_in_flight", cfg.gateway.max_in_flight);
    cfg.gateway.per_minute_budget = gateway.value("per_minute_budget", cfg.gateway.per_minute_budget);

    for (auto it = j.begin(); it != j.end(); ++it)
      throw ConfigError("config: unknown key \"" + it.key() + "\"");
    cfg.validate();
    return cfg;
  }

  static PipelineConfig from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    PipelineConfig cfg = from_toml_text(buffer.str());
    // Relative corpus paths resolve against the config file location.
    auto resolve = [&](std::string& p) {
      if (!p.empty() && std::filesystem::path(p).is_relative())
        p = (path.parent_path() / p).string();
    };
    resolve(cfg.corpus.docs_dir);
    resolve(cfg.corpus.snapshots_dir);
    resolve(cfg.generation.templates_file);
    resolve(cfg.generation.patterns_file);
    resolve(cfg.evaluation.trajectories_file);
    return cfg;
  }
};

}  // namespace kgbench
