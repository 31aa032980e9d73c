#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "noderag/augment/analytics.hpp"
#include "noderag/hgraph/graph.hpp"

namespace noderag::augment {

struct LeidenOptions {
  double resolution = 1.0;
  std::uint64_t seed = 42;
  /// Temperature of the randomized refinement merge. Small values make it
  /// close to greedy.
  double randomness = 0.01;
  int max_levels = 64;
};

/// Modularity-optimizing Leiden clustering. Returns a community id per node,
/// dense from 0 and numbered by first appearance in node order.
std::vector<std::uint32_t> leiden(const UGraph& g, const LeidenOptions& options = {});

/// Newman modularity of an assignment with resolution gamma.
double modularity(const UGraph& g, const std::vector<std::uint32_t>& community,
                  double resolution = 1.0);

struct CommunityPartition {
  std::vector<std::int32_t> by_index;  // indexed by hgraph node index
  std::unordered_map<std::string, std::int32_t> assignment;
  std::size_t community_count = 0;
};

/// Runs Leiden on the whole graph (every node type) and records each node's
/// community on the graph.
CommunityPartition detect_communities(hgraph::HeteroGraph& g, const LeidenOptions& options = {});

}  // namespace noderag::augment
