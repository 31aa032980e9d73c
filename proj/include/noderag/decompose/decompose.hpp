#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "noderag/decompose/corpus.hpp"
#include "noderag/hgraph/graph.hpp"
#include "noderag/llmio/chat.hpp"

namespace noderag::decompose {

struct Relationship {
  std::string source;
  std::string relation;  // the relationship phrase, e.g. "Hinton received Nobel Prize"
  std::string target;

  bool operator==(const Relationship&) const = default;
};

/// Structured decomposition of one chunk. Entity names are deduplicated by
/// normalized title, keeping the first surface form.
struct ExtractionResult {
  std::vector<std::string> semantic_units;
  std::vector<std::string> entities;
  std::vector<Relationship> relationships;
  /// Per unit: indices into `entities` (listed entities plus the endpoints of
  /// the unit's relationships).
  std::vector<std::vector<std::size_t>> unit_entity_map;
  /// Per unit: indices into `relationships`.
  std::vector<std::vector<std::size_t>> unit_relationship_map;
  /// Entities the model listed but no unit mentions.
  std::vector<std::string> orphan_entities;

  bool operator==(const ExtractionResult&) const = default;
};

/// Validates a model reply against the decomposition schema. Throws
/// ExtractionError on any violation.
ExtractionResult parse_extraction(const nlohmann::json& reply);
nlohmann::json to_json(const ExtractionResult& result);

/// One temperature-0 call with the decomposition template, plus one repair
/// round-trip on malformed output.
ExtractionResult decompose_chunk(const ChunkRecord& chunk, llmio::ChatClient& extractor);

struct ChunkFailure {
  std::string chunk_id;
  std::string error;
};

struct DecompositionReport {
  std::size_t chunks_total = 0;
  std::size_t chunks_ok = 0;
  std::size_t orphan_entities = 0;
  std::vector<ChunkFailure> failures;
};

/// Adds the S, N and R nodes of one chunk with their e_d / e_r edges.
void apply_extraction(hgraph::HeteroGraph& graph, const ChunkRecord& chunk,
                      const ExtractionResult& extraction);

struct InitialGraph {
  hgraph::HeteroGraph graph;
  DecompositionReport report;
};

/// Builds G1. Extraction runs with at most `parallelism` calls in flight;
/// results are applied to the graph in chunk_id order by a single writer.
/// Throws IndexingError on an empty corpus or when every chunk fails.
InitialGraph build_initial_graph(std::span<const ChunkRecord> corpus,
                                 llmio::ChatClient& extractor, std::size_t parallelism = 8);

/// JSON-lines failed-chunk report: {"chunk_id", "error"} per line.
std::string failures_jsonl(const DecompositionReport& report);

}  // namespace noderag::decompose
