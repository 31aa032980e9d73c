#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "noderag/enrich/store.hpp"
#include "noderag/hgraph/graph.hpp"
#include "noderag/llmio/embed.hpp"

namespace noderag::augment {

/// max(1, floor(sqrt(n))).
std::size_t cluster_count(std::size_t n);

struct KMeansOptions {
  std::uint64_t seed = 13;
  int max_iterations = 100;
};

struct KMeansResult {
  std::vector<std::uint32_t> assignment;  // dense cluster ids, empty clusters dropped
  std::size_t k_requested = 0;
  std::size_t k_effective = 0;
  int iterations = 0;
};

/// Lloyd's algorithm with k-means++ seeding on Euclidean distance.
KMeansResult kmeans(std::span<const llmio::Vector> points, std::size_t k,
                    const KMeansOptions& options = {});

struct SemanticMatchResult {
  std::vector<std::pair<std::string, std::string>> edges;  // (S or A id, H id)
  std::unordered_map<std::string, std::uint32_t> cluster;
  std::size_t k_requested = 0;
  std::size_t k_effective = 0;
};

/// Clusters every S, A and H node by its embedding (K = max(1, floor(sqrt n)))
/// and links each S/A node to each H node sharing both its cluster and its
/// community with an e_h edge. Requires communities on those nodes and an
/// embedding for each.
SemanticMatchResult semantic_match_edges(hgraph::HeteroGraph& g,
                                         const enrich::EmbeddingStore& embeddings,
                                         const KMeansOptions& options = {});

}  // namespace noderag::augment
