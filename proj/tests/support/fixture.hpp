#pragma once

// The 10-chunk harbour corpus indexed in memory with the mock clients.
#include <fstream>
#include <sstream>

#include "noderag/app/pipeline.hpp"
#include "noderag/decompose/corpus.hpp"

namespace fixture {

inline std::string path(const std::string& name) {
  return std::string(NODERAG_FIXTURES_DIR) + "/" + name;
}

inline std::string read(const std::string& name) {
  std::ifstream in(path(name), std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<noderag::decompose::ChunkRecord> corpus() {
  return noderag::decompose::read_corpus(path("corpus10.jsonl"), {}, noderag::default_tokenizer());
}

inline noderag::app::Clients mock_clients() {
  return noderag::app::make_clients(noderag::app::PipelineConfig{});
}

struct Index {
  noderag::app::IndexResult built;
  std::unique_ptr<noderag::enrich::HnswIndex> hnsw;
  std::unique_ptr<noderag::retrieve::QueryEngine> engine;
};

/// Built once per process; the graph is frozen.
inline const Index& golden() {
  static const std::unique_ptr<Index> index = [] {
    auto ix = std::make_unique<Index>();
    const noderag::app::PipelineConfig config;
    ix->built = noderag::app::build_index(corpus(), config, mock_clients());
    ix->hnsw = std::make_unique<noderag::enrich::HnswIndex>(noderag::enrich::HnswIndex::build(
        ix->built.store, {config.hnsw_m, config.hnsw_ef_construction, config.hnsw_ef_search,
                          config.hnsw_seed}));
    ix->engine = std::make_unique<noderag::retrieve::QueryEngine>(ix->built.graph, *ix->hnsw);
    return ix;
  }();
  return *index;
}

}  // namespace fixture
