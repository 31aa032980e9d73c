#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "noderag/hgraph/graph.hpp"

namespace noderag::augment {

/// Undirected weighted simple graph used by the structural algorithms. Each
/// edge appears in both endpoint lists.
struct UGraph {
  std::vector<std::vector<std::pair<std::uint32_t, double>>> adj;

  std::size_t size() const noexcept { return adj.size(); }
  std::size_t edge_count() const noexcept;

  static UGraph from_edges(std::size_t n,
                           const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges);
};

/// Node i of the result is hgraph node i; weights are edge weights.
UGraph to_ugraph(const hgraph::HeteroGraph& g);

enum class LogBase { Natural, Two, Ten };

/// floor(log(n) * sqrt(mean_degree)), clamped to at least 1.
int core_threshold(std::size_t node_count, double mean_degree, LogBase base = LogBase::Natural);

/// Core threshold of a graph; throws NotApplicableError when |V| < 2 or the
/// graph has no edges.
int compute_core_threshold(const hgraph::HeteroGraph& g, LogBase base = LogBase::Natural);

/// Membership mask of the k-core (maximal subgraph with internal degree >= k),
/// computed by iterative peeling. Degree counts distinct neighbours.
std::vector<bool> k_core(const UGraph& g, int k);

/// Entity ids in the k-core of the heterograph. Other node types take part in
/// peeling but are never returned.
std::set<std::string> k_core_nodes(const hgraph::HeteroGraph& g, int k);

/// Brandes betweenness over unweighted shortest paths, undirected
/// convention (each unordered pair counted once). With pivots < n, sources
/// are a seeded sample and scores are scaled by n / pivots.
std::vector<double> betweenness(const UGraph& g, std::size_t pivots, std::uint64_t seed);

struct BetweennessSelection {
  std::map<std::string, double> scores;  // entity id -> score
  double mean = 0.0;                     // over all nodes
  int scale = 1;
  std::set<std::string> selected;
};

/// Entities whose score strictly exceeds mean * max(1, floor(log10 |V|)).
BetweennessSelection betweenness_select(const hgraph::HeteroGraph& g, std::size_t pivots = 10,
                                        std::uint64_t seed = 7);

struct ImportanceOptions {
  std::size_t pivots = 10;
  std::uint64_t seed = 7;
  LogBase log_base = LogBase::Natural;
};

struct ImportanceReport {
  int k_default = 0;
  std::set<std::string> kcore_set;
  std::map<std::string, double> betweenness_scores;
  double mean_betweenness = 0.0;
  int scale = 1;
  std::set<std::string> betweenness_set;
  std::set<std::string> important;
  std::vector<std::string> warnings;
};

/// N* = K-core entities united with high-betweenness entities. A graph on
/// which the core threshold is not applicable yields an empty report with a
/// warning.
ImportanceReport select_important_entities(const hgraph::HeteroGraph& g,
                                           const ImportanceOptions& options = {});

}  // namespace noderag::augment
