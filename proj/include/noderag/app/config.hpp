#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "noderag/augment/analytics.hpp"

namespace noderag::app {

struct ProviderConfig {
  std::string name = "mock";  // "mock" or "openai" (any OpenAI-compatible server)
  std::string base_url = "https://api.openai.com/v1";
  std::string chat_model = "gpt-4o-mini";
  std::string embedding_model = "text-embedding-3-small";
  std::size_t embedding_dim = 64;
  double requests_per_minute = 0.0;  // 0 = unlimited
  std::size_t max_concurrent_requests = 16;
  std::size_t timeout_seconds = 120;
  std::string api_key;  // from NODERAG_API_KEY only; never written out
};

struct PipelineConfig {
  std::size_t chunk_tokens = 1000;
  std::size_t chunk_overlap = 100;
  std::size_t extraction_parallelism = 8;

  std::size_t betweenness_pivots = 10;
  std::uint64_t betweenness_seed = 7;
  std::string core_log_base = "e";  // "e", "2" or "10"
  std::uint64_t leiden_seed = 42;
  double leiden_resolution = 1.0;
  std::uint64_t kmeans_seed = 13;
  std::size_t high_level_budget_tokens = 8000;

  std::size_t hnsw_m = 16;
  std::size_t hnsw_ef_construction = 200;
  std::size_t hnsw_ef_search = 64;
  std::uint64_t hnsw_seed = 99;

  double alpha = 0.5;
  int iterations = 2;
  std::size_t entry_k = 10;
  std::size_t k_per_type = 5;
  std::size_t budget_tokens = 8000;
  bool include_text_entries = false;

  ProviderConfig provider;

  std::string graph_file = "graph.hgraph";
  std::string vector_file = "vectors.hvec";

  /// Throws Error when a value is out of range.
  void validate() const;
  augment::LogBase log_base() const;
};

/// Defaults, then the YAML file (if given), then NODERAG_* environment
/// overrides. Keys are "section.name" in YAML; the environment form is
/// NODERAG_SECTION_NAME, e.g. NODERAG_RETRIEVAL_ALPHA.
PipelineConfig load_config(const std::optional<std::filesystem::path>& path);
PipelineConfig parse_config(const std::string& yaml);

/// Applies overrides from `env` (name -> value), as read from the process
/// environment by load_config.
void apply_env_overrides(PipelineConfig& config, const std::map<std::string, std::string>& env);
std::map<std::string, std::string> process_env();

/// YAML snapshot of every setting except the API key.
std::string to_yaml(const PipelineConfig& config);

}  // namespace noderag::app
