#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>

namespace noderag::hgraph {

enum class NodeType : std::uint8_t {
  Entity,             // N
  Relationship,       // R
  SemanticUnit,       // S
  Attribute,          // A
  HighLevelElement,   // H
  HighLevelOverview,  // O
  Text,               // T
};

inline constexpr std::array<NodeType, 7> kAllNodeTypes = {
    NodeType::Entity,           NodeType::Relationship,      NodeType::SemanticUnit,
    NodeType::Attribute,        NodeType::HighLevelElement,  NodeType::HighLevelOverview,
    NodeType::Text,
};

char type_code(NodeType type) noexcept;
std::string_view type_name(NodeType type) noexcept;
/// Inverse of type_code; throws ValidationError on an unknown code.
NodeType type_from_code(std::string_view code);

/// Small value set over the seven node types.
class TypeSet {
public:
  constexpr TypeSet() = default;
  constexpr TypeSet(std::initializer_list<NodeType> types) {
    for (auto t : types) bits_ |= bit(t);
  }

  constexpr bool contains(NodeType t) const noexcept { return (bits_ & bit(t)) != 0; }
  constexpr bool empty() const noexcept { return bits_ == 0; }
  constexpr TypeSet& insert(NodeType t) noexcept {
    bits_ |= bit(t);
    return *this;
  }
  constexpr bool operator==(const TypeSet&) const = default;

private:
  static constexpr std::uint8_t bit(NodeType t) noexcept {
    return static_cast<std::uint8_t>(1u << static_cast<unsigned>(t));
  }
  std::uint8_t bits_ = 0;
};

inline constexpr TypeSet kRetrievableTypes{NodeType::Text, NodeType::SemanticUnit,
                                           NodeType::Attribute, NodeType::HighLevelElement,
                                           NodeType::Relationship};
inline constexpr TypeSet kExactEntryTypes{NodeType::Entity, NodeType::HighLevelOverview};
inline constexpr TypeSet kVectorEntryTypes{NodeType::SemanticUnit, NodeType::Attribute,
                                           NodeType::HighLevelElement};
inline constexpr TypeSet kEmbeddableTypes{NodeType::Text, NodeType::SemanticUnit,
                                          NodeType::Attribute, NodeType::HighLevelElement};

constexpr bool is_retrievable(NodeType t) noexcept { return kRetrievableTypes.contains(t); }
constexpr bool is_exact_entry(NodeType t) noexcept { return kExactEntryTypes.contains(t); }
constexpr bool is_vector_entry(NodeType t) noexcept { return kVectorEntryTypes.contains(t); }
constexpr bool is_embeddable(NodeType t) noexcept { return kEmbeddableTypes.contains(t); }

/// Titled types carry a title and no content; all others carry content.
constexpr bool is_titled(NodeType t) noexcept { return is_exact_entry(t); }

enum class EdgeKind : std::uint8_t {
  Decomposition,  // e_d: S-N
  Relation,       // e_r: R-N, R-S
  Attribute,      // e_a: A-N
  HighLevel,      // e_h: H-S, H-A
  Overview,       // e_o: H-O
  Source,         // e_s: T-S
  Semantic,       // hnsw: embeddable-embeddable
};

inline constexpr std::array<EdgeKind, 7> kAllEdgeKinds = {
    EdgeKind::Decomposition, EdgeKind::Relation, EdgeKind::Attribute, EdgeKind::HighLevel,
    EdgeKind::Overview,      EdgeKind::Source,   EdgeKind::Semantic,
};

std::string_view kind_name(EdgeKind kind) noexcept;
EdgeKind kind_from_name(std::string_view name);

/// Whether an edge of `kind` may join nodes of types a and b (order-free).
bool endpoints_legal(EdgeKind kind, NodeType a, NodeType b) noexcept;

class EdgeKindSet {
public:
  constexpr EdgeKindSet() = default;
  constexpr explicit EdgeKindSet(EdgeKind k) : bits_(bit(k)) {}

  constexpr bool contains(EdgeKind k) const noexcept { return (bits_ & bit(k)) != 0; }
  constexpr void insert(EdgeKind k) noexcept { bits_ |= bit(k); }
  constexpr bool empty() const noexcept { return bits_ == 0; }
  constexpr bool structural() const noexcept { return (bits_ & ~bit(EdgeKind::Semantic)) != 0; }
  constexpr std::uint8_t bits() const noexcept { return bits_; }
  constexpr bool operator==(const EdgeKindSet&) const = default;

private:
  static constexpr std::uint8_t bit(EdgeKind k) noexcept {
    return static_cast<std::uint8_t>(1u << static_cast<unsigned>(k));
  }
  std::uint8_t bits_ = 0;
};

struct HeteroNode {
  std::string id;
  NodeType type = NodeType::Entity;
  std::string title;
  std::string content;
  std::optional<std::string> source_chunk;
  std::optional<std::int32_t> community;
  std::uint32_t hrid = 0;  // assigned by the graph on insertion

  bool operator==(const HeteroNode&) const = default;
};

/// Content-hash identifier. `provenance` distinguishes nodes that must never
/// dedup (semantic units, text chunks, ...) even when their text coincides.
std::string make_node_id(NodeType type, std::string_view title, std::string_view content,
                         std::string_view provenance = {});

/// Throws ValidationError naming the violated invariant.
void validate(const HeteroNode& node);

// Factories for each node role. Each computes the id with the provenance
// rule of its type.
HeteroNode make_entity(std::string_view name);
HeteroNode make_relationship(std::string_view phrase, std::string_view provenance);
HeteroNode make_semantic_unit(std::string_view text, std::string_view chunk_id,
                              std::size_t ordinal);
HeteroNode make_attribute(std::string_view summary, std::string_view entity_id);
HeteroNode make_high_level(std::string_view content, std::int32_t community,
                           std::size_t ordinal);
HeteroNode make_overview(std::string_view keyword, std::string_view high_level_id);
HeteroNode make_text(std::string_view raw, std::string_view chunk_id);

}  // namespace noderag::hgraph
