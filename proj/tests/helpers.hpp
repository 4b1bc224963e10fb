#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "kgbench/embedding.hpp"
#include "kgbench/graph.hpp"

namespace testutil {

inline std::filesystem::path source_dir() { return std::filesystem::path(KGBENCH_SOURCE_DIR); }
inline std::filesystem::path fixtures_dir() { return source_dir() / "fixtures"; }
inline std::filesystem::path golden_dir() { return source_dir() / "tests" / "golden"; }

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Tiny dimension keeps hand-built graphs readable; cosine/knn math is
// dimension-agnostic.
inline kgbench::Node make_node(std::string id, kgbench::NodeKind kind, std::string text,
                               std::vector<double> embedding, std::string source_path = "doc") {
  kgbench::Node n;
  n.id = std::move(id);
  n.kind = kind;
  n.text = std::move(text);
  n.embedding = std::move(embedding);
  n.source_path = std::move(source_path);
  n.contextual_path = {"root"};
  return n;
}

inline kgbench::Node make_web_element(std::string id, kgbench::ElementKind kind, std::string text,
                                      std::vector<double> embedding, std::string url,
                                      std::string selector, std::string order = "0001") {
  kgbench::Node n = make_node(std::move(id), kgbench::NodeKind::element(kind), std::move(text),
                              std::move(embedding), url);
  n.metadata["url"] = url;
  n.metadata["selector"] = std::move(selector);
  n.metadata["order"] = std::move(order);
  return n;
}

}  // namespace testutil
