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
#include "kgbench/graph.hpp"
#include "kgbench/parallel.hpp"
#include "kgbench/text.hpp"

namespace kgbench {

enum class BlockKind { paragraph, heading, table, figure };

inline const char* to_string(BlockKind k) {
  switch (k) {
    case BlockKind::paragraph: return "paragraph";
    case BlockKind::heading: return "heading";
    case BlockKind::table: return "table";
    case BlockKind::figure: return "figure";
  }
  return "?";
}

inline std::optional<BlockKind> block_kind_from_string(std::string_view s) {
  if (s == "paragraph") return BlockKind::paragraph;
  if (s == "heading") return BlockKind::heading;
  if (s == "table") return BlockKind::table;
  if (s == "figure") return BlockKind::figure;
  return std::nullopt;
}

struct Block {
  BlockKind kind = BlockKind::paragraph;
  std::string text;          // textual content c^T
  int heading_level = 0;     // headings only, >= 1
  std::string caption;       // figures
  std::string alt;           // figures
  std::string ocr_text;      // figures
  int order = 0;
};

struct RawDocument {
  std::string path;
  std::string title;
  std::string author;
  std::vector<Block> blocks;
};

// Converts a block's visual side into text. The default implementation works
// from metadata only (caption, alt text, OCR text); an LLM-backed captioner
// can be slotted in behind the same interface.
class Captioner {
 public:
  virtual ~Captioner() = default;
  virtual std::string describe(const Block& block) const = 0;
};

class MetadataCaptioner : public Captioner {
 public:
  std::string describe(const Block& block) const override {
    std::vector<std::string> parts;
    if (!block.caption.empty()) parts.push_back(block.caption);
    if (!block.alt.empty()) parts.push_back(block.alt);
    if (!block.ocr_text.empty()) parts.push_back(block.ocr_text);
    return join(parts, " | ");
  }
};

// Fused representation: textual content, plus the captioner's description of
// the visual content for figures. Empty pieces are skipped rather than
// padded with separators.
inline std::string fuse_text_visual(const Block& block, const Captioner& captioner,
                                    Diagnostics* diags = nullptr) {
  if (block.kind != BlockKind::figure) return block.text;
  std::string visual = captioner.describe(block);
  std::string fused;
  if (!block.text.empty()) fused = block.text;
  if (!visual.empty()) {
    if (!fused.empty()) fused += " ";
    fused += visual;
  }
  if (fused.empty()) warn(diags, "figure block " + std::to_string(block.order) + " has no textual or visual content");
  return fused;
}

namespace detail {

inline std::vector<std::string> hard_split_tokens(const std::string& text, std::size_t budget) {
  auto tokens = tokenize(text);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < tokens.size(); i += budget) {
    std::vector<std::string> piece(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                   tokens.begin() + static_cast<std::ptrdiff_t>(std::min(i + budget, tokens.size())));
    out.push_back(join(piece, " "));
  }
  return out;
}

// Packs one oversized block: sentence boundaries first, token split as a
// last resort.
inline std::vector<std::string> split_oversized_block(const std::string& text, std::size_t budget,
                                                      Diagnostics* diags) {
  warn(diags, "block exceeds chunk budget; splitting at sentence boundaries");
  std::vector<std::string> pieces;
  std::string current;
  std::size_t current_tokens = 0;
  auto flush = [&]() {
    if (!current.empty()) {
      pieces.push_back(current);
      current.clear();
      current_tokens = 0;
    }
  };
  for (const std::string& sentence : split_sentences(text)) {
    std::size_t n = token_count(sentence);
    if (n > budget) {
      flush();
      warn(diags, "sentence exceeds chunk budget; hard token split");
      for (auto& piece : hard_split_tokens(sentence, budget)) pieces.push_back(std::move(piece));
      continue;
    }
    if (current_tokens + n > budget) flush();
    if (!current.empty()) current += " ";
    current += sentence;
    current_tokens += n;
  }
  flush();
  return pieces;
}

}  // namespace detail

// Greedy packing of block texts into semantic chunks. Chunk boundaries never
// split a block unless a single block alone exceeds the budget.
inline std::vector<std::string> chunk_document(const RawDocument& doc, std::size_t max_chunk_tokens,
                                               Diagnostics* diags = nullptr) {
  if (max_chunk_tokens < 32) throw Error("chunk_document: max_chunk_tokens must be >= 32");
  std::vector<std::string> chunks;
  std::string current;
  std::size_t current_tokens = 0;
  auto flush = [&]() {
    if (!current.empty()) {
      chunks.push_back(current);
      current.clear();
      current_tokens = 0;
    }
  };
  for (const Block& block : doc.blocks) {
    std::size_t n = token_count(block.text);
    if (n == 0) continue;
    if (n > max_chunk_tokens) {
      flush();
      for (auto& piece : detail::split_oversized_block(block.text, max_chunk_tokens, diags))
        chunks.push_back(std::move(piece));
      continue;
    }
    if (current_tokens + n > max_chunk_tokens) flush();
    if (!current.empty()) current += " ";
    current += block.text;
    current_tokens += n;
  }
  flush();
  return chunks;
}

struct EntityMention {
  std::string text;        // canonical surface form (first occurrence)
  EntityClass entity_class = EntityClass::other;
  std::size_t block_index = 0;
};

class EntityExtractor {
 public:
  virtual ~EntityExtractor() = default;
  virtual std::vector<EntityMention> extract(const RawDocument& doc) const = 0;
};

// Heuristic extractor: contiguous capitalized-token spans of length <= 4,
// classified by a small gazetteer. Sentence-initial common words are trimmed
// via a stopword list; residual noise is accepted as part of the heuristic.
class GazetteerEntityExtractor : public EntityExtractor {
 public:
  std::vector<EntityMention> extract(const RawDocument& doc) const override {
    std::vector<EntityMention> mentions;
    for (std::size_t bi = 0; bi < doc.blocks.size(); ++bi) {
      const Block& block = doc.blocks[bi];
      if (block.kind == BlockKind::table) continue;  // table cells are not prose
      auto words = case_words(block.text);
      std::size_t i = 0;
      while (i < words.size()) {
        if (!is_cap(words[i])) {
          ++i;
          continue;
        }
        std::size_t j = i;
        while (j < words.size() && j - i < 4 && is_cap(words[j])) ++j;
        std::vector<std::string> span(words.begin() + static_cast<std::ptrdiff_t>(i),
                                      words.begin() + static_cast<std::ptrdiff_t>(j));
        while (!span.empty() && is_stopword(span.front())) span.erase(span.begin());
        if (!span.empty() && !(span.size() == 1 && span[0].size() < 3)) {
          std::string text = join(span, " ");
          mentions.push_back(EntityMention{text, classify(text), bi});
        }
        i = j;
      }
    }
    return mentions;
  }

  static EntityClass classify(const std::string& surface) {
    std::string lower = to_lower(surface);
    static const std::set<std::string> people = {
        "charles darwin", "darwin",      "marie curie",  "ada lovelace",
        "alan turing",    "grace hopper", "rachel carson", "jacques cousteau"};
    static const std::set<std::string> places = {
        "pacific ocean", "atlantic ocean", "indian ocean",      "coral triangle",
        "australia",     "japan",          "great barrier reef", "caribbean",
        "red sea",       "philippines",    "indonesia",          "hawaii"};
    static const std::set<std::string> orgs = {"unesco", "noaa", "marine institute", "reef alliance"};
    static const std::set<std::string> org_suffixes = {"institute",  "university", "laboratory", "foundation",
                                                       "corporation", "society",    "agency",     "alliance"};
    static const std::set<std::string> person_first = {"charles", "marie", "ada", "alan", "grace", "rachel",
                                                       "jacques"};
    if (people.count(lower) != 0) return EntityClass::person;
    if (places.count(lower) != 0) return EntityClass::location;
    if (orgs.count(lower) != 0) return EntityClass::organization;
    auto tokens = tokenize(lower);
    if (!tokens.empty() && org_suffixes.count(tokens.back()) != 0) return EntityClass::organization;
    if (tokens.size() == 2 && person_first.count(tokens.front()) != 0) return EntityClass::person;
    if (!tokens.empty() && ends_with(tokens.back(), "ocean")) return EntityClass::location;
    return EntityClass::other;
  }

 private:
  static std::vector<std::string> case_words(const std::string& text) {
    std::vector<std::string> words;
    std::string current;
    for (unsigned char c : text) {
      if (c >= 0x80 || std::isalnum(c)) {
        current.push_back(static_cast<char>(c));
      } else if (!current.empty()) {
        words.push_back(std::move(current));
        current.clear();
      }
    }
    if (!current.empty()) words.push_back(std::move(current));
    return words;
  }

  static bool is_cap(const std::string& word) {
    return !word.empty() && word[0] >= 'A' && word[0] <= 'Z';
  }

  static bool is_stopword(const std::string& word) {
    static const std::set<std::string> stop = {"The", "A",  "An", "In", "On", "At",   "It", "We",
                                               "This", "By", "Of", "To", "As", "From", "For"};
    return stop.count(word) != 0;
  }
};

struct DocIngestOptions {
  double theta_sim = 0.75;        // similarity-edge threshold
  std::size_t chunk_tokens = 64;  // semantic chunk budget
  std::size_t jobs = 1;
};

namespace detail {

inline std::string pad_order(std::size_t order) {
  std::string s = std::to_string(order);
  return std::string(s.size() >= 4 ? 0 : 4 - s.size(), '0') + s;
}

struct DocPieces {
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  std::vector<std::string> chunk_ids;  // parallel to chunk node order
};

inline DocPieces build_doc_pieces(const RawDocument& doc, const Embedder& embedder, const Captioner& captioner,
                                  const EntityExtractor& entities, const DocIngestOptions& opt,
                                  Diagnostics* diags) {
  DocPieces out;
  const std::string doc_id = "d:" + doc.path;

  Node doc_node;
  doc_node.id = doc_id;
  doc_node.kind = NodeKind::of(NodeCategory::Document);
  doc_node.text = doc.title;
  doc_node.embedding = embedder.embed(doc.title);
  doc_node.metadata = {{"file_path", doc.path}, {"title", doc.title}, {"author", doc.author},
                       {"order", pad_order(0)}};
  doc_node.source_path = doc.path;
  out.nodes.push_back(std::move(doc_node));

  // Element nodes, with heading scope tracked for containment.
  struct HeadingScope {
    int level;
    std::string id;
    std::string text;
  };
  std::vector<std::string> block_ids(doc.blocks.size());
  std::vector<HeadingScope> heading_stack;
  std::optional<std::string> last_paragraph_id;
  for (std::size_t i = 0; i < doc.blocks.size(); ++i) {
    const Block& block = doc.blocks[i];
    Node n;
    n.id = doc_id + "#b" + pad_order(static_cast<std::size_t>(block.order));
    block_ids[i] = n.id;
    switch (block.kind) {
      case BlockKind::paragraph: n.kind = NodeKind::of(NodeCategory::Paragraph); break;
      case BlockKind::heading: n.kind = NodeKind::of(NodeCategory::Heading); break;
      case BlockKind::table: n.kind = NodeKind::of(NodeCategory::Table); break;
      case BlockKind::figure: n.kind = NodeKind::of(NodeCategory::Figure); break;
    }
    n.text = fuse_text_visual(block, captioner, diags);
    n.embedding = embedder.embed(n.text);
    n.metadata["order"] = pad_order(static_cast<std::size_t>(block.order));
    if (block.kind == BlockKind::heading) n.metadata["heading_level"] = std::to_string(block.heading_level);
    if (block.kind == BlockKind::figure) {
      if (!block.caption.empty()) n.metadata["caption"] = block.caption;
      if (!block.alt.empty()) n.metadata["alt"] = block.alt;
      if (!block.ocr_text.empty()) n.metadata["ocr_text"] = block.ocr_text;
    }
    n.source_path = doc.path;
    n.contextual_path.push_back(doc.title.empty() ? doc.path : doc.title);
    if (block.kind == BlockKind::heading) {
      while (!heading_stack.empty() && heading_stack.back().level >= block.heading_level)
        heading_stack.pop_back();
    }
    for (const HeadingScope& scope : heading_stack) n.contextual_path.push_back(scope.text);
    // Containment: the document owns every element; headings own the blocks
    // in their scope (including sub-headings).
    out.edges.push_back(Edge{doc_id, n.id, EdgeKind::contains, 1.0});
    if (!heading_stack.empty())
      out.edges.push_back(Edge{heading_stack.back().id, n.id, EdgeKind::contains, 1.0});
    if (block.kind == BlockKind::heading)
      heading_stack.push_back(HeadingScope{block.heading_level, n.id, block.text});

    if (i > 0) out.edges.push_back(Edge{block_ids[i - 1], n.id, EdgeKind::sequence, 1.0});
    if (block.kind == BlockKind::figure && last_paragraph_id)
      out.edges.push_back(Edge{n.id, *last_paragraph_id, EdgeKind::figure_context, 1.0});
    if (block.kind == BlockKind::table && last_paragraph_id)
      out.edges.push_back(Edge{n.id, *last_paragraph_id, EdgeKind::table_context, 1.0});
    if (block.kind == BlockKind::paragraph) last_paragraph_id = n.id;
    out.nodes.push_back(std::move(n));
  }

  // Semantic chunks.
  auto chunks = chunk_document(doc, opt.chunk_tokens, diags);
  for (std::size_t c = 0; c < chunks.size(); ++c) {
    Node n;
    n.id = doc_id + "#c" + pad_order(c);
    n.kind = NodeKind::of(NodeCategory::SemanticChunk);
    n.text = chunks[c];
    n.embedding = embedder.embed(n.text);
    n.metadata["order"] = pad_order(c);
    n.source_path = doc.path;
    n.contextual_path.push_back(doc.title.empty() ? doc.path : doc.title);
    out.chunk_ids.push_back(n.id);
    out.edges.push_back(Edge{doc_id, n.id, EdgeKind::contains, 1.0});
    out.nodes.push_back(std::move(n));
  }

  // Entities: one node per distinct surface form per document.
  struct EntityInfo {
    std::string surface;
    EntityClass cls;
    std::vector<std::size_t> blocks;
  };
  std::map<std::string, EntityInfo> by_key;
  for (const EntityMention& m : entities.extract(doc)) {
    std::string key = to_lower(m.text);
    auto it = by_key.find(key);
    if (it == by_key.end()) {
      by_key.emplace(key, EntityInfo{m.text, m.entity_class, {m.block_index}});
    } else {
      it->second.blocks.push_back(m.block_index);
    }
  }
  std::map<std::string, std::string> entity_ids;  // key -> node id
  for (const auto& [key, info] : by_key) {
    Node n;
    std::string slug = key;
    std::replace(slug.begin(), slug.end(), ' ', '_');
    n.id = doc_id + "#e:" + slug;
    n.kind = NodeKind::entity(info.cls);
    n.text = info.surface;
    n.embedding = embedder.embed(n.text);
    n.metadata["order"] = pad_order(info.blocks.front());
    n.metadata["entity_class"] = to_string(info.cls);
    n.metadata["mentions"] = std::to_string(info.blocks.size());
    n.source_path = doc.path;
    n.contextual_path.push_back(doc.title.empty() ? doc.path : doc.title);
    entity_ids[key] = n.id;
    out.edges.push_back(Edge{doc_id, n.id, EdgeKind::contains, 1.0});
    out.nodes.push_back(std::move(n));
  }

  // entity_relation: entities co-mentioned in the same block.
  std::set<std::pair<std::string, std::string>> relation_pairs;
  std::map<std::size_t, std::vector<std::string>> entities_per_block;
  for (const auto& [key, info] : by_key) {
    std::set<std::size_t> blocks(info.blocks.begin(), info.blocks.end());
    for (std::size_t b : blocks) entities_per_block[b].push_back(entity_ids.at(key));
  }
  for (auto& [b, ids] : entities_per_block) {
    (void)b;
    std::sort(ids.begin(), ids.end());
    for (std::size_t i = 0; i < ids.size(); ++i)
      for (std::size_t j = i + 1; j < ids.size(); ++j)
        if (relation_pairs.insert({ids[i], ids[j]}).second)
          out.edges.push_back(Edge{ids[i], ids[j], EdgeKind::entity_relation, 1.0});
  }

  // co_reference: consecutive blocks that mention the same entity string.
  std::set<std::pair<std::string, std::string>> coref_pairs;
  for (const auto& [key, info] : by_key) {
    (void)key;
    std::set<std::size_t> blocks(info.blocks.begin(), info.blocks.end());
    std::vector<std::size_t> ordered(blocks.begin(), blocks.end());
    for (std::size_t i = 0; i + 1 < ordered.size(); ++i) {
      const std::string& a = block_ids[ordered[i]];
      const std::string& b = block_ids[ordered[i + 1]];
      if (coref_pairs.insert({a, b}).second) out.edges.push_back(Edge{a, b, EdgeKind::co_reference, 1.0});
    }
  }

  return out;
}

}  // namespace detail

// Builds the document-side graph: one Document node per input, element nodes
// for every block, semantic chunks, heuristic entities, and the text edge
// set (containment, sequence, context, similarity, references).
inline Graph build_doc_graph(const std::vector<RawDocument>& raw_docs, const Embedder& embedder,
                             const Captioner& captioner, const DocIngestOptions& opt = {},
                             Diagnostics* diags = nullptr,
                             const EntityExtractor* entity_extractor = nullptr) {
  GazetteerEntityExtractor default_extractor;
  const EntityExtractor& entities = entity_extractor != nullptr ? *entity_extractor : default_extractor;

  std::vector<const RawDocument*> docs;
  docs.reserve(raw_docs.size());
  for (const RawDocument& d : raw_docs) docs.push_back(&d);
  std::stable_sort(docs.begin(), docs.end(),
                   [](const RawDocument* a, const RawDocument* b) { return a->path < b->path; });
  for (std::size_t i = 0; i + 1 < docs.size(); ++i)
    if (docs[i]->path == docs[i + 1]->path) throw Error("duplicate document path " + docs[i]->path);

  std::vector<detail::DocPieces> pieces(docs.size());
  std::vector<Diagnostics> piece_diags(docs.size());
  parallel_for(docs.size(), opt.jobs, [&](std::size_t i) {
    pieces[i] = detail::build_doc_pieces(*docs[i], embedder, captioner, entities, opt, &piece_diags[i]);
  });
  for (Diagnostics& d : piece_diags)
    for (std::string& w : d.warnings) warn(diags, std::move(w));

  Graph graph(embedder.dimension());
  for (auto& piece : pieces)
    for (Node& n : piece.nodes) graph.add_node(std::move(n));
  for (auto& piece : pieces)
    for (const Edge& e : piece.edges) graph.add_edge(e.src, e.dst, e.kind, e.weight);

  // Similarity edges between chunks: same document -> semantic_similarity,
  // different documents -> cross_doc_link. One edge per pair, canonical
  // direction (lower id to higher id); traversal is undirected anyway.
  struct ChunkRef {
    std::string id;
    std::size_t doc;
  };
  std::vector<ChunkRef> all_chunks;
  for (std::size_t d = 0; d < pieces.size(); ++d)
    for (const std::string& id : pieces[d].chunk_ids) all_chunks.push_back({id, d});
  for (std::size_t i = 0; i < all_chunks.size(); ++i) {
    for (std::size_t j = i + 1; j < all_chunks.size(); ++j) {
      const Node& a = graph.node(all_chunks[i].id);
      const Node& b = graph.node(all_chunks[j].id);
      double sim = cosine_similarity(a.embedding, b.embedding);
      if (sim >= opt.theta_sim) {
        EdgeKind kind = all_chunks[i].doc == all_chunks[j].doc ? EdgeKind::semantic_similarity
                                                               : EdgeKind::cross_doc_link;
        const std::string& lo = a.id < b.id ? a.id : b.id;
        const std::string& hi = a.id < b.id ? b.id : a.id;
        graph.add_edge(lo, hi, kind, sim);
      }
    }
  }
  return graph;
}

// --- document sources -------------------------------------------------------

inline RawDocument parse_document_json(const json& j, const std::string& fallback_path) {
  Graph::check_keys(j, {"path", "title", "author", "blocks"}, "document");
  RawDocument doc;
  doc.path = j.value("path", fallback_path);
  doc.title = j.value("title", "");
  doc.author = j.value("author", "");
  if (!j.contains("blocks") || !j["blocks"].is_array()) throw Error("document " + doc.path + ": missing blocks");
  int order = 0;
  for (const json& b : j["blocks"]) {
    Graph::check_keys(b, {"kind", "text", "heading_level", "caption", "alt", "ocr_text"}, "block");
    auto kind = block_kind_from_string(b.at("kind").get<std::string>());
    if (!kind) throw Error("document " + doc.path + ": unknown block kind " + b.at("kind").dump());
    Block block;
    block.kind = *kind;
    block.text = b.value("text", "");
    block.heading_level = b.value("heading_level", block.kind == BlockKind::heading ? 1 : 0);
    block.caption = b.value("caption", "");
    block.alt = b.value("alt", "");
    block.ocr_text = b.value("ocr_text", "");
    block.order = order++;
    doc.blocks.push_back(std::move(block));
  }
  return doc;
}

// ATX headings, pipe tables, image lines; everything else groups into
// paragraphs on blank lines.
inline RawDocument parse_markdown(std::string_view text, const std::string& path) {
  RawDocument doc;
  doc.path = path;
  std::vector<std::string> lines;
  {
    std::string current;
    for (char c : text) {
      if (c == '\n') {
        lines.push_back(current);
        current.clear();
      } else if (c != '\r') {
        current.push_back(c);
      }
    }
    lines.push_back(current);
  }
  int order = 0;
  std::vector<std::string> paragraph;
  auto flush_paragraph = [&]() {
    if (paragraph.empty()) return;
    Block b;
    b.kind = BlockKind::paragraph;
    b.text = join(paragraph, " ");
    b.order = order++;
    doc.blocks.push_back(std::move(b));
    paragraph.clear();
  };
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string line = trim(lines[i]);
    if (line.empty()) {
      flush_paragraph();
      continue;
    }
    if (line[0] == '#') {
      std::size_t level = 0;
      while (level < line.size() && line[level] == '#') ++level;
      if (level <= 6 && level < line.size() && line[level] == ' ') {
        flush_paragraph();
        Block b;
        b.kind = BlockKind::heading;
        b.heading_level = static_cast<int>(level);
        b.text = trim(line.substr(level));
        b.order = order++;
        if (doc.title.empty() && b.heading_level == 1) doc.title = b.text;
        doc.blocks.push_back(std::move(b));
        continue;
      }
    }
    if (starts_with(line, "![")) {
      auto close = line.find("](");
      auto end = line.rfind(')');
      if (close != std::string::npos && end != std::string::npos && end > close) {
        flush_paragraph();
        Block b;
        b.kind = BlockKind::figure;
        b.alt = line.substr(2, close - 2);
        std::string target = line.substr(close + 2, end - close - 2);
        auto quote = target.find('"');
        if (quote != std::string::npos) {
          auto endq = target.rfind('"');
          if (endq > quote) b.caption = target.substr(quote + 1, endq - quote - 1);
        }
        b.order = order++;
        doc.blocks.push_back(std::move(b));
        continue;
      }
    }
    if (line[0] == '|') {
      flush_paragraph();
      std::vector<std::string> table_lines;
      while (i < lines.size() && starts_with(trim(lines[i]), "|")) {
        table_lines.push_back(trim(lines[i]));
        ++i;
      }
      --i;
      Block b;
      b.kind = BlockKind::table;
      b.text = join(table_lines, "\n");
      b.order = order++;
      doc.blocks.push_back(std::move(b));
      continue;
    }
    paragraph.push_back(line);
  }
  flush_paragraph();
  if (doc.title.empty()) {
    std::filesystem::path p(path);
    doc.title = p.stem().string();
  }
  return doc;
}

// Reads *.json and *.md documents from a directory, sorted by filename.
inline std::vector<RawDocument> load_documents(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ConfigError("document directory not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    if (ext == ".json" || ext == ".md") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<RawDocument> docs;
  for (const auto& file : files) {
    std::ifstream in(file);
    if (!in) throw Error("cannot read document " + file.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::string name = file.filename().string();
    if (file.extension() == ".json") {
      json j = json::parse(buffer.str(), nullptr, false);
      if (j.is_discarded()) throw Error("document " + name + ": malformed JSON");
      docs.push_back(parse_document_json(j, name));
    } else {
      docs.push_back(parse_markdown(buffer.str(), name));
    }
  }
  return docs;
}

}  // namespace kgbench
