#include "noderag/enrich/enrich.hpp"

#include <map>

#include <spdlog/spdlog.h>

#include "noderag/common/error.hpp"
#include "noderag/common/parallel.hpp"

namespace noderag::enrich {

using hgraph::EdgeKind;
using hgraph::HeteroGraph;
using hgraph::NodeType;

TextInsertReport insert_text_nodes(HeteroGraph& g,
                                   std::span<const decompose::ChunkRecord> chunks) {
  std::map<std::string, std::vector<hgraph::NodeIndex>, std::less<>> units;
  for (auto i : g.indices_of_type(NodeType::SemanticUnit)) {
    const auto& src = g.node(i).source_chunk;
    if (src) units[*src].push_back(i);
  }
  TextInsertReport report;
  for (const auto& chunk : chunks) {
    const auto t = g.add_node(hgraph::make_text(chunk.text, chunk.chunk_id));
    const auto ti = g.index(t);
    auto it = units.find(chunk.chunk_id);
    if (it == units.end()) {
      spdlog::warn("chunk {} has no semantic units; its text node stays isolated", chunk.chunk_id);
      report.isolated_chunks.push_back(chunk.chunk_id);
    } else {
      for (auto s : it->second) g.upsert_edge(ti, s, EdgeKind::Source);
    }
    report.text_ids.push_back(t);
  }
  return report;
}

void embed_retrievables(const HeteroGraph& g, llmio::Embedder& embedder, EmbeddingStore& store,
                        std::size_t parallelism) {
  if (store.model_tag() != embedder.model_tag() || store.dim() != embedder.dim()) {
    throw IndexingError("embedding store (" + store.model_tag() + ", dim " +
                        std::to_string(store.dim()) + ") does not match embedder (" +
                        embedder.model_tag() + ", dim " + std::to_string(embedder.dim()) + ")");
  }
  std::vector<hgraph::NodeIndex> todo;
  for (auto i : g.indices_of_types(hgraph::kEmbeddableTypes)) {
    if (!store.contains(g.node(i).id)) todo.push_back(i);
  }
  if (todo.empty()) return;

  const auto batch = std::max<std::size_t>(embedder.max_batch(), 1);
  const auto batches = (todo.size() + batch - 1) / batch;
  auto results = bounded_map<std::vector<llmio::Vector>>(batches, parallelism, [&](std::size_t b) {
    std::vector<std::string> texts;
    for (std::size_t j = b * batch; j < std::min(todo.size(), (b + 1) * batch); ++j) {
      texts.push_back(g.node(todo[j]).content);
    }
    auto vectors = embedder.embed(texts);
    if (vectors.size() != texts.size()) {
      throw Error("embedder returned " + std::to_string(vectors.size()) + " vectors for " +
                  std::to_string(texts.size()) + " inputs");
    }
    return vectors;
  });

  for (std::size_t b = 0; b < batches; ++b) {
    if (!results[b].ok()) {
      throw IndexingError("embedding batch " + std::to_string(b) + " failed: " + results[b].error);
    }
    auto& vectors = *results[b].value;
    for (std::size_t j = 0; j < vectors.size(); ++j) {
      store.put(g.node(todo[b * batch + j]).id, std::move(vectors[j]));
    }
  }
}

EmbeddingStore embed_retrievables(const HeteroGraph& g, llmio::Embedder& embedder,
                                  std::size_t parallelism) {
  EmbeddingStore store(embedder.model_tag(), embedder.dim());
  embed_retrievables(g, embedder, store, parallelism);
  return store;
}

MergeReport merge_base_layer(HeteroGraph& g, const HnswIndex& index) {
  if (g.edge_count(EdgeKind::Semantic) > 0) {
    throw Error("graph already holds hnsw edges; refusing to merge the base layer twice");
  }
  MergeReport r;
  r.structural = g.edge_count();
  for (const auto& [a, b] : index.base_layer_pairs()) {
    const auto ia = g.index(a);
    const auto ib = g.index(b);
    if (g.edge(ia, ib)) ++r.overlap;
    g.upsert_edge(ia, ib, EdgeKind::Semantic);
    ++r.inserted;
  }
  r.total = g.edge_count();
  return r;
}

}  // namespace noderag::enrich
