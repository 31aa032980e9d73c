#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "noderag/hgraph/graph.hpp"

namespace noderag::hgraph {

/// Text record format:
///
///   HGRAPH v1
///   {node record}          one per node, hrid order
///   {edge record}          one per edge, sorted by (u, v) with u < v
///   CHECKSUM <hex sha-256 of every preceding byte>
///
/// Records are single-line JSON objects with sorted keys.
inline constexpr std::string_view kGraphMagic = "HGRAPH";
inline constexpr int kGraphFormatVersion = 1;

std::string serialize(const HeteroGraph& g);
/// Throws FormatError (version mismatch, checksum failure, truncation) or
/// ValidationError when a record breaks a graph invariant.
HeteroGraph deserialize(std::string_view bytes);

void save(const HeteroGraph& g, const std::filesystem::path& path);
HeteroGraph load(const std::filesystem::path& path);

}  // namespace noderag::hgraph
