#include "noderag/hgraph/node.hpp"

#include "noderag/common/error.hpp"
#include "noderag/common/hash.hpp"
#include "noderag/common/text.hpp"

namespace noderag::hgraph {

char type_code(NodeType type) noexcept {
  switch (type) {
    case NodeType::Entity: return 'N';
    case NodeType::Relationship: return 'R';
    case NodeType::SemanticUnit: return 'S';
    case NodeType::Attribute: return 'A';
    case NodeType::HighLevelElement: return 'H';
    case NodeType::HighLevelOverview: return 'O';
    case NodeType::Text: return 'T';
  }
  return '?';
}

std::string_view type_name(NodeType type) noexcept {
  switch (type) {
    case NodeType::Entity: return "entity";
    case NodeType::Relationship: return "relationship";
    case NodeType::SemanticUnit: return "semantic_unit";
    case NodeType::Attribute: return "attribute";
    case NodeType::HighLevelElement: return "high_level_element";
    case NodeType::HighLevelOverview: return "high_level_overview";
    case NodeType::Text: return "text";
  }
  return "unknown";
}

NodeType type_from_code(std::string_view code) {
  if (code.size() == 1) {
    for (auto t : kAllNodeTypes) {
      if (type_code(t) == code[0]) return t;
    }
  }
  throw ValidationError("unknown node type code '" + std::string(code) + "'");
}

std::string_view kind_name(EdgeKind kind) noexcept {
  switch (kind) {
    case EdgeKind::Decomposition: return "e_d";
    case EdgeKind::Relation: return "e_r";
    case EdgeKind::Attribute: return "e_a";
    case EdgeKind::HighLevel: return "e_h";
    case EdgeKind::Overview: return "e_o";
    case EdgeKind::Source: return "e_s";
    case EdgeKind::Semantic: return "hnsw";
  }
  return "?";
}

EdgeKind kind_from_name(std::string_view name) {
  for (auto k : kAllEdgeKinds) {
    if (kind_name(k) == name) return k;
  }
  throw ValidationError("unknown edge kind '" + std::string(name) + "'");
}

bool endpoints_legal(EdgeKind kind, NodeType a, NodeType b) noexcept {
  auto pair_is = [&](NodeType x, NodeType y) {
    return (a == x && b == y) || (a == y && b == x);
  };
  using T = NodeType;
  switch (kind) {
    case EdgeKind::Decomposition: return pair_is(T::SemanticUnit, T::Entity);
    case EdgeKind::Relation:
      return pair_is(T::Relationship, T::Entity) || pair_is(T::Relationship, T::SemanticUnit);
    case EdgeKind::Attribute: return pair_is(T::Attribute, T::Entity);
    case EdgeKind::HighLevel:
      return pair_is(T::HighLevelElement, T::SemanticUnit) ||
             pair_is(T::HighLevelElement, T::Attribute);
    case EdgeKind::Overview: return pair_is(T::HighLevelElement, T::HighLevelOverview);
    case EdgeKind::Source: return pair_is(T::Text, T::SemanticUnit);
    case EdgeKind::Semantic: return is_embeddable(a) && is_embeddable(b);
  }
  return false;
}

std::string make_node_id(NodeType type, std::string_view title, std::string_view content,
                         std::string_view provenance) {
  std::string key;
  key.reserve(title.size() + content.size() + provenance.size() + 8);
  key.push_back(type_code(type));
  key.push_back('\x1f');
  key += normalize_title(title);
  key.push_back('\x1f');
  key += content;
  key.push_back('\x1f');
  key += provenance;
  std::string id(1, type_code(type));
  id.push_back('-');
  id += sha256_hex(key).substr(0, 16);
  return id;
}

void validate(const HeteroNode& node) {
  auto fail = [&](const std::string& what) {
    throw ValidationError(std::string(1, type_code(node.type)) + " node " +
                          (node.id.empty() ? std::string("<no id>") : node.id) + ": " + what);
  };
  if (is_titled(node.type)) {
    if (trim(node.title).empty()) fail("title must be non-empty for N and O nodes");
    if (!node.content.empty()) fail("content must be empty for N and O nodes");
  } else if (trim(node.content).empty()) {
    fail("content must be non-empty for T, S, A, H and R nodes");
  }
}

HeteroNode make_entity(std::string_view name) {
  HeteroNode n;
  n.type = NodeType::Entity;
  n.title = std::string(trim(name));
  n.id = make_node_id(n.type, n.title, {});
  return n;
}

HeteroNode make_relationship(std::string_view phrase, std::string_view provenance) {
  HeteroNode n;
  n.type = NodeType::Relationship;
  n.content = std::string(trim(phrase));
  n.id = make_node_id(n.type, {}, n.content, provenance);
  return n;
}

HeteroNode make_semantic_unit(std::string_view text, std::string_view chunk_id,
                              std::size_t ordinal) {
  HeteroNode n;
  n.type = NodeType::SemanticUnit;
  n.content = std::string(trim(text));
  n.source_chunk = std::string(chunk_id);
  n.id = make_node_id(n.type, {}, n.content, std::string(chunk_id) + "#" + std::to_string(ordinal));
  return n;
}

HeteroNode make_attribute(std::string_view summary, std::string_view entity_id) {
  HeteroNode n;
  n.type = NodeType::Attribute;
  n.content = std::string(trim(summary));
  n.id = make_node_id(n.type, {}, n.content, entity_id);
  return n;
}

HeteroNode make_high_level(std::string_view content, std::int32_t community,
                           std::size_t ordinal) {
  HeteroNode n;
  n.type = NodeType::HighLevelElement;
  n.content = std::string(trim(content));
  n.community = community;
  n.id = make_node_id(n.type, {}, n.content,
                      "community:" + std::to_string(community) + "#" + std::to_string(ordinal));
  return n;
}

HeteroNode make_overview(std::string_view keyword, std::string_view high_level_id) {
  HeteroNode n;
  n.type = NodeType::HighLevelOverview;
  n.title = std::string(trim(keyword));
  n.id = make_node_id(n.type, n.title, {}, high_level_id);
  return n;
}

HeteroNode make_text(std::string_view raw, std::string_view chunk_id) {
  HeteroNode n;
  n.type = NodeType::Text;
  n.content = std::string(raw);
  n.source_chunk = std::string(chunk_id);
  n.id = make_node_id(n.type, {}, n.content, chunk_id);
  return n;
}

}  // namespace noderag::hgraph
