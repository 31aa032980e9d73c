#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "noderag/app/config.hpp"
#include "noderag/augment/analytics.hpp"
#include "noderag/augment/kmeans.hpp"
#include "noderag/augment/summaries.hpp"
#include "noderag/common/error.hpp"
#include "noderag/decompose/decompose.hpp"
#include "noderag/enrich/enrich.hpp"
#include "noderag/retrieve/retrieve.hpp"

namespace noderag::app {

/// The index directory or one of its files is absent.
class MissingIndexError : public Error {
public:
  using Error::Error;
};

struct Clients {
  std::shared_ptr<llmio::ChatClient> chat;
  std::shared_ptr<llmio::Embedder> embedder;
};

/// Mock or OpenAI-compatible clients per config.provider. Also applies the
/// provider's global request ceiling.
Clients make_clients(const PipelineConfig& config);

/// Per-type census in the shape of the usual graph-statistics table.
struct GraphStats {
  std::size_t T = 0, S = 0, N = 0, R = 0, A = 0, O = 0, H = 0;
  std::size_t nodes = 0;
  std::size_t non_hnsw_edges = 0;  // edges carrying a structural kind
  std::size_t hnsw_edges = 0;      // edges carrying the hnsw kind
  std::size_t overlap = 0;         // edges carrying both
  std::size_t edges = 0;

  bool operator==(const GraphStats&) const = default;
};

GraphStats compute_stats(const hgraph::HeteroGraph& g);
nlohmann::json to_json(const GraphStats& s);
std::string render_stats_table(const GraphStats& s);

/// Names passed to the stage observer, in pipeline order.
namespace stages {
inline constexpr std::string_view kDecomposed = "G1";
inline constexpr std::string_view kAttributes = "G2";
inline constexpr std::string_view kHighLevel = "G3-high-level";
inline constexpr std::string_view kSemanticMatch = "G3";
inline constexpr std::string_view kText = "G4";
inline constexpr std::string_view kMerged = "G5";
}  // namespace stages

using StageObserver = std::function<void(std::string_view stage, const hgraph::HeteroGraph& g,
                                         const enrich::EmbeddingStore& store)>;

struct IndexReport {
  decompose::DecompositionReport decomposition;
  bool resumed_from_checkpoint = false;
  augment::ImportanceReport importance;
  augment::AttributeReport attributes;
  std::size_t communities = 0;
  augment::HighLevelReport high_level;
  std::size_t kmeans_k = 0;
  std::size_t kmeans_k_effective = 0;
  std::size_t semantic_edges = 0;
  enrich::TextInsertReport text;
  enrich::MergeReport merge;
  GraphStats stats;
};

nlohmann::json to_json(const IndexReport& r);

struct IndexResult {
  hgraph::HeteroGraph graph;
  enrich::EmbeddingStore store;
  IndexReport report;
};

/// decompose -> augment -> enrich over `chunks`. Pure: writes nothing.
/// `initial` skips decomposition when a checkpointed G1 is supplied.
IndexResult build_index(std::span<const decompose::ChunkRecord> chunks,
                        const PipelineConfig& config, const Clients& clients,
                        const StageObserver& observer = {},
                        std::optional<decompose::InitialGraph> initial = {});

/// File names inside an index directory.
namespace files {
inline constexpr const char* kConfig = "config.yaml";
inline constexpr const char* kStats = "stats.json";
inline constexpr const char* kReport = "index_report.json";
inline constexpr const char* kCheckpoint = "checkpoint.g1.hgraph";
inline constexpr const char* kCheckpointMeta = "checkpoint.json";
inline constexpr const char* kFailedChunks = "failed_chunks.jsonl";
}  // namespace files

/// Runs build_index and persists the result under `out_dir`. G1 is
/// checkpointed right after decomposition; a later run over the same corpus
/// and extraction settings resumes from it.
IndexReport index_corpus(std::span<const decompose::ChunkRecord> chunks,
                         const PipelineConfig& config, const Clients& clients,
                         const std::filesystem::path& out_dir,
                         const StageObserver& observer = {});

/// A persisted index brought back into memory. The HNSW index is rebuilt
/// from the stored vectors with the snapshot's parameters, which yields the
/// same layers as at indexing time.
struct LoadedIndex {
  PipelineConfig config;
  hgraph::HeteroGraph graph;
  enrich::EmbeddingStore store;
  std::unique_ptr<enrich::HnswIndex> hnsw;
  std::unique_ptr<retrieve::QueryEngine> engine;
};

/// Reads config.yaml (then NODERAG_* overrides unless `env` is given),
/// the graph and the vectors. Throws MissingIndexError if anything is absent.
std::unique_ptr<LoadedIndex> load_index(const std::filesystem::path& dir,
                                        std::optional<std::map<std::string, std::string>> env = {});

/// plan_query + QueryEngine::answer. Checks that the embedder matches the
/// stored vectors.
retrieve::RetrievalResult run_query(const LoadedIndex& index, const Clients& clients,
                                    const std::string& query,
                                    std::optional<std::size_t> budget = {});

struct BenchRow {
  std::string query;
  bool ok = false;
  std::string error;
  double seconds = 0.0;
  std::size_t tokens = 0;
};

struct BenchReport {
  std::string tokenizer;
  std::vector<BenchRow> rows;
  std::size_t failures = 0;
  double mean_seconds = 0.0;
  double median_seconds = 0.0;
  double mean_tokens = 0.0;
};

/// Reads {"query": "..."} lines; throws Error on a malformed line.
std::vector<std::string> read_queries(std::string_view jsonl);

/// Runs every query with up to `concurrency` in flight. Failed queries are
/// counted and excluded from the means.
BenchReport run_bench(const LoadedIndex& index, const Clients& clients,
                      std::span<const std::string> queries, std::size_t concurrency = 1);

std::string render_bench(const BenchReport& r);

}  // namespace noderag::app
