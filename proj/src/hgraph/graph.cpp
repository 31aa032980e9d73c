#include "noderag/hgraph/graph.hpp"

#include <algorithm>

#include "noderag/common/error.hpp"

namespace noderag::hgraph {

void HeteroGraph::require_mutable() const {
  if (frozen_) throw ValidationError("graph is frozen; no mutation allowed");
}

std::string HeteroGraph::add_node(HeteroNode node) {
  require_mutable();
  validate(node);
  if (node.id.empty()) {
    node.id = make_node_id(node.type, node.title, node.content, node.source_chunk.value_or(""));
  }
  if (auto it = by_id_.find(node.id); it != by_id_.end()) {
    const auto& existing = nodes_[it->second];
    if (existing.type != node.type) {
      throw ValidationError("id collision between node types for " + node.id);
    }
    return node.id;
  }
  const auto idx = static_cast<NodeIndex>(nodes_.size());
  node.hrid = idx;
  by_id_.emplace(node.id, idx);
  typed_[index_of(node.type)].push_back(idx);
  incident_.emplace_back();
  std::string id = node.id;
  nodes_.push_back(std::move(node));
  return id;
}

std::optional<NodeIndex> HeteroGraph::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

NodeIndex HeteroGraph::index(std::string_view id) const {
  if (auto i = find(id)) return *i;
  throw ValidationError("unknown node id " + std::string(id));
}

std::uint32_t HeteroGraph::upsert_edge(std::string_view u, std::string_view v, EdgeKind kind) {
  return upsert_edge(index(u), index(v), kind);
}

std::uint32_t HeteroGraph::upsert_edge(NodeIndex u, NodeIndex v, EdgeKind kind) {
  require_mutable();
  if (u >= nodes_.size() || v >= nodes_.size()) {
    throw ValidationError("edge endpoint out of range");
  }
  if (u == v) throw ValidationError("self-loop on " + nodes_[u].id + " is not allowed");
  if (!endpoints_legal(kind, nodes_[u].type, nodes_[v].type)) {
    throw ValidationError(std::string("illegal endpoints for ") + std::string(kind_name(kind)) +
                          ": " + type_code(nodes_[u].type) + "-" + type_code(nodes_[v].type));
  }
  const auto k = key(u, v);
  if (auto it = edge_slot_.find(k); it != edge_slot_.end()) {
    auto& e = edges_[it->second];
    e.weight += 1;
    e.kinds.insert(kind);
    return e.weight;
  }
  const auto slot = static_cast<std::uint32_t>(edges_.size());
  edges_.push_back(Edge{std::min(u, v), std::max(u, v), 1, EdgeKindSet(kind)});
  edge_slot_.emplace(k, slot);
  incident_[u].push_back(slot);
  incident_[v].push_back(slot);
  return 1;
}

void HeteroGraph::restore_edge(NodeIndex u, NodeIndex v, std::uint32_t weight,
                               EdgeKindSet kinds) {
  require_mutable();
  if (u >= nodes_.size() || v >= nodes_.size() || u == v || weight == 0 || kinds.empty()) {
    throw ValidationError("invalid persisted edge");
  }
  for (auto kind : kAllEdgeKinds) {
    if (kinds.contains(kind) && !endpoints_legal(kind, nodes_[u].type, nodes_[v].type)) {
      throw ValidationError("persisted edge has illegal endpoints for " +
                            std::string(kind_name(kind)));
    }
  }
  const auto k = key(u, v);
  if (edge_slot_.contains(k)) throw ValidationError("duplicate persisted edge");
  const auto slot = static_cast<std::uint32_t>(edges_.size());
  edges_.push_back(Edge{std::min(u, v), std::max(u, v), weight, kinds});
  edge_slot_.emplace(k, slot);
  incident_[u].push_back(slot);
  incident_[v].push_back(slot);
}

void HeteroGraph::set_community(NodeIndex node, std::int32_t community) {
  require_mutable();
  nodes_.at(node).community = community;
}

std::size_t HeteroGraph::edge_count(EdgeKind kind) const noexcept {
  return static_cast<std::size_t>(std::count_if(
      edges_.begin(), edges_.end(), [&](const Edge& e) { return e.kinds.contains(kind); }));
}

std::optional<Edge> HeteroGraph::edge(NodeIndex u, NodeIndex v) const {
  auto it = edge_slot_.find(key(u, v));
  if (it == edge_slot_.end()) return std::nullopt;
  return edges_[it->second];
}

std::optional<Edge> HeteroGraph::edge(std::string_view u, std::string_view v) const {
  auto a = find(u);
  auto b = find(v);
  if (!a || !b) return std::nullopt;
  return edge(*a, *b);
}

std::vector<NodeIndex> HeteroGraph::indices_of_types(TypeSet types) const {
  std::vector<NodeIndex> out;
  for (auto t : kAllNodeTypes) {
    if (types.contains(t)) {
      const auto& v = typed_[index_of(t)];
      out.insert(out.end(), v.begin(), v.end());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::set<std::string> HeteroGraph::nodes_of_types(TypeSet types) const {
  std::set<std::string> out;
  for (auto i : indices_of_types(types)) out.insert(nodes_[i].id);
  return out;
}

bool HeteroGraph::operator==(const HeteroGraph& other) const {
  if (nodes_ != other.nodes_ || edges_.size() != other.edges_.size()) return false;
  for (const auto& e : edges_) {
    auto o = other.edge(e.a, e.b);
    if (!o || o->weight != e.weight || !(o->kinds == e.kinds)) return false;
  }
  return true;
}

std::optional<std::string> find_illegal_edge(const HeteroGraph& g) {
  for (const auto& e : g.edges()) {
    const auto ta = g.node(e.a).type;
    const auto tb = g.node(e.b).type;
    if (e.a == e.b) return "self-loop at " + g.node(e.a).id;
    if (e.weight < 1) return "zero weight edge";
    for (auto kind : kAllEdgeKinds) {
      if (e.kinds.contains(kind) && !endpoints_legal(kind, ta, tb)) {
        return std::string(kind_name(kind)) + " edge " + g.node(e.a).id + " - " + g.node(e.b).id;
      }
    }
  }
  return std::nullopt;
}

WeightedAdjacency weighted_adjacency(const HeteroGraph& g) {
  const auto n = g.node_count();
  WeightedAdjacency adj;
  adj.offsets.assign(n + 1, 0);
  adj.out_weight.assign(n, 0.0);
  for (NodeIndex i = 0; i < n; ++i) adj.offsets[i + 1] = adj.offsets[i] + g.degree(i);
  adj.targets.resize(adj.offsets[n]);
  adj.weights.resize(adj.offsets[n]);

  std::vector<std::pair<NodeIndex, double>> row;
  for (NodeIndex i = 0; i < n; ++i) {
    row.clear();
    for (auto slot : g.incident(i)) {
      const auto& e = g.edges()[slot];
      row.emplace_back(e.other(i), static_cast<double>(e.weight));
    }
    std::sort(row.begin(), row.end());
    auto pos = adj.offsets[i];
    for (const auto& [t, w] : row) {
      adj.targets[pos] = t;
      adj.weights[pos] = w;
      adj.out_weight[i] += w;
      ++pos;
    }
  }
  return adj;
}

}  // namespace noderag::hgraph
