#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "noderag/decompose/corpus.hpp"
#include "noderag/enrich/hnsw.hpp"
#include "noderag/enrich/store.hpp"
#include "noderag/hgraph/graph.hpp"
#include "noderag/llmio/embed.hpp"

namespace noderag::enrich {

struct TextInsertReport {
  std::vector<std::string> text_ids;       // chunk order
  std::vector<std::string> isolated_chunks;  // chunks that produced no S node
};

/// One T node per chunk holding its raw text, with an e_s edge to every S
/// node whose source_chunk is that chunk.
TextInsertReport insert_text_nodes(hgraph::HeteroGraph& g,
                                   std::span<const decompose::ChunkRecord> chunks);

/// Embeds every T, S, A and H node not already in `store`, in hrid order and
/// batches of embedder.max_batch(). Batches run with bounded parallelism. A
/// failed batch throws IndexingError. `store` must match the embedder's
/// model tag and dim.
void embed_retrievables(const hgraph::HeteroGraph& g, llmio::Embedder& embedder,
                        EmbeddingStore& store, std::size_t parallelism = 4);

/// Fresh store holding exactly the embeddable nodes of `g`.
EmbeddingStore embed_retrievables(const hgraph::HeteroGraph& g, llmio::Embedder& embedder,
                                  std::size_t parallelism = 4);

struct MergeReport {
  std::size_t structural = 0;  // edges before the merge
  std::size_t inserted = 0;    // base-layer pairs merged (the hnsw edge count afterwards)
  std::size_t overlap = 0;     // of those, pairs that already had a structural edge
  std::size_t total = 0;       // edges after the merge

  static std::size_t expected_total(std::size_t structural, std::size_t inserted,
                                    std::size_t overlap) {
    return structural + inserted - overlap;
  }
};

/// Upserts every base-layer pair of `index` as an hnsw edge: new pairs get
/// weight 1, pairs already joined gain +1 and the hnsw kind. Throws Error if
/// the graph already has hnsw edges, since a second merge would inflate
/// weights.
MergeReport merge_base_layer(hgraph::HeteroGraph& g, const HnswIndex& index);

}  // namespace noderag::enrich
