#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "noderag/hgraph/node.hpp"

namespace noderag::hgraph {

/// Dense node position; equal to the node's hrid.
using NodeIndex = std::uint32_t;

struct Edge {
  NodeIndex a;  // a < b
  NodeIndex b;
  std::uint32_t weight = 1;
  EdgeKindSet kinds;

  NodeIndex other(NodeIndex self) const noexcept { return self == a ? b : a; }
};

/// Weighted, undirected, simple heterograph. Mutable until freeze(); after
/// that every mutator throws and the graph may be shared by readers.
class HeteroGraph {
public:
  /// Upserts by id: re-adding a node whose id is present returns that id and
  /// keeps the stored node. An empty id is filled in from the content hash.
  std::string add_node(HeteroNode node);

  /// Creates the edge with weight 1, or adds 1 to an existing edge and merges
  /// `kind` into its kind set. Returns the resulting weight.
  std::uint32_t upsert_edge(std::string_view u, std::string_view v, EdgeKind kind);
  std::uint32_t upsert_edge(NodeIndex u, NodeIndex v, EdgeKind kind);

  void set_community(NodeIndex node, std::int32_t community);

  void freeze() noexcept { frozen_ = true; }
  bool frozen() const noexcept { return frozen_; }

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  std::size_t edge_count(EdgeKind kind) const noexcept;
  std::size_t count(NodeType type) const noexcept { return typed_[index_of(type)].size(); }

  bool contains(std::string_view id) const { return find(id).has_value(); }
  std::optional<NodeIndex> find(std::string_view id) const;
  NodeIndex index(std::string_view id) const;  // throws ValidationError if unknown
  const HeteroNode& node(NodeIndex i) const { return nodes_.at(i); }
  const HeteroNode& node(std::string_view id) const { return nodes_[index(id)]; }
  std::span<const HeteroNode> nodes() const noexcept { return nodes_; }

  std::optional<Edge> edge(NodeIndex u, NodeIndex v) const;
  std::optional<Edge> edge(std::string_view u, std::string_view v) const;
  std::span<const Edge> edges() const noexcept { return edges_; }

  /// Edge slots incident to `node`, in insertion order.
  std::span<const std::uint32_t> incident(NodeIndex node) const { return incident_.at(node); }
  std::size_t degree(NodeIndex node) const { return incident_.at(node).size(); }

  /// Indices of the given types, ascending (hrid order).
  std::vector<NodeIndex> indices_of_types(TypeSet types) const;
  std::set<std::string> nodes_of_types(TypeSet types) const;
  std::span<const NodeIndex> indices_of_type(NodeType type) const {
    return typed_[index_of(type)];
  }

  /// Restores a persisted edge verbatim; used by the loader only.
  void restore_edge(NodeIndex u, NodeIndex v, std::uint32_t weight, EdgeKindSet kinds);

  bool operator==(const HeteroGraph& other) const;

private:
  static std::size_t index_of(NodeType t) noexcept { return static_cast<std::size_t>(t); }
  static std::uint64_t key(NodeIndex u, NodeIndex v) noexcept {
    if (u > v) std::swap(u, v);
    return (std::uint64_t{u} << 32) | v;
  }
  void require_mutable() const;

  std::vector<HeteroNode> nodes_;
  std::unordered_map<std::string, NodeIndex> by_id_;
  std::array<std::vector<NodeIndex>, 7> typed_;
  std::vector<Edge> edges_;
  std::unordered_map<std::uint64_t, std::uint32_t> edge_slot_;
  std::vector<std::vector<std::uint32_t>> incident_;
  bool frozen_ = false;
};

/// Scans every edge; returns a description of the first illegal one.
std::optional<std::string> find_illegal_edge(const HeteroGraph& g);

/// Row-stochastic-ready adjacency: for each node, its neighbours sorted by
/// index with summed edge weights.
struct WeightedAdjacency {
  std::vector<std::size_t> offsets;  // size n+1
  std::vector<NodeIndex> targets;
  std::vector<double> weights;
  std::vector<double> out_weight;    // row sums

  std::size_t size() const noexcept { return out_weight.size(); }
};

WeightedAdjacency weighted_adjacency(const HeteroGraph& g);

}  // namespace noderag::hgraph
