#include "noderag/decompose/decompose.hpp"

#include <algorithm>
#include <map>

#include <spdlog/spdlog.h>

#include "noderag/common/error.hpp"
#include "noderag/common/parallel.hpp"
#include "noderag/common/text.hpp"
#include "noderag/llmio/prompts.hpp"

namespace noderag::decompose {
namespace {

using nlohmann::json;

std::string require_string(const json& j, const char* what) {
  if (!j.is_string()) throw ExtractionError(std::string(what) + " must be a string");
  auto s = std::string(trim(j.get<std::string>()));
  if (s.empty()) throw ExtractionError(std::string(what) + " must be non-empty");
  return s;
}

class EntityTable {
public:
  std::size_t intern(const std::string& name, std::vector<std::string>& entities) {
    const auto key = normalize_title(name);
    if (auto it = index_.find(key); it != index_.end()) return it->second;
    const auto i = entities.size();
    entities.push_back(name);
    index_.emplace(key, i);
    return i;
  }

private:
  std::map<std::string, std::size_t> index_;
};

void push_unique(std::vector<std::size_t>& v, std::size_t x) {
  if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(x);
}

}  // namespace

ExtractionResult parse_extraction(const json& reply) {
  if (!reply.is_object() || !reply.contains("semantic_units") ||
      !reply["semantic_units"].is_array()) {
    throw ExtractionError("reply lacks a semantic_units array");
  }
  ExtractionResult out;
  EntityTable table;

  for (const auto& unit : reply["semantic_units"]) {
    if (!unit.is_object()) throw ExtractionError("semantic unit must be an object");
    out.semantic_units.push_back(require_string(unit.value("text", json()), "unit text"));
    auto& ents = out.unit_entity_map.emplace_back();
    auto& rels = out.unit_relationship_map.emplace_back();

    if (unit.contains("entities")) {
      if (!unit["entities"].is_array()) throw ExtractionError("unit entities must be an array");
      for (const auto& e : unit["entities"]) {
        push_unique(ents, table.intern(require_string(e, "entity"), out.entities));
      }
    }
    if (unit.contains("relationships")) {
      if (!unit["relationships"].is_array()) {
        throw ExtractionError("unit relationships must be an array");
      }
      for (const auto& r : unit["relationships"]) {
        if (!r.is_object()) throw ExtractionError("relationship must be an object");
        Relationship rel{require_string(r.value("source", json()), "relationship source"),
                         require_string(r.value("relation", json()), "relationship phrase"),
                         require_string(r.value("target", json()), "relationship target")};
        const auto s = table.intern(rel.source, out.entities);
        const auto t = table.intern(rel.target, out.entities);
        rel.source = out.entities[s];
        rel.target = out.entities[t];
        push_unique(ents, s);
        push_unique(ents, t);
        auto it = std::find(out.relationships.begin(), out.relationships.end(), rel);
        std::size_t ri = static_cast<std::size_t>(it - out.relationships.begin());
        if (it == out.relationships.end()) out.relationships.push_back(rel);
        push_unique(rels, ri);
      }
    }
  }

  if (reply.contains("entities") && reply["entities"].is_array()) {
    const auto mentioned = out.entities.size();
    for (const auto& e : reply["entities"]) {
      const auto i = table.intern(require_string(e, "entity"), out.entities);
      if (i >= mentioned && i == out.entities.size() - 1) {
        out.orphan_entities.push_back(out.entities[i]);
      }
    }
    // Orphans are flagged but stay out of the entity list proper.
    out.entities.resize(mentioned);
  }
  return out;
}

json to_json(const ExtractionResult& r) {
  json rels = json::array();
  for (const auto& x : r.relationships) {
    rels.push_back({{"source", x.source}, {"relation", x.relation}, {"target", x.target}});
  }
  return {{"semantic_units", r.semantic_units},
          {"entities", r.entities},
          {"relationships", rels},
          {"unit_entity_map", r.unit_entity_map},
          {"unit_relationship_map", r.unit_relationship_map},
          {"orphan_entities", r.orphan_entities}};
}

ExtractionResult decompose_chunk(const ChunkRecord& chunk, llmio::ChatClient& extractor) {
  if (trim(chunk.text).empty()) throw Error("chunk " + chunk.chunk_id + " has no text");
  auto request = llmio::make_request(llmio::templates::kDecompose, {{"text", chunk.text}});
  ExtractionResult result;
  llmio::chat_json(extractor, request, [&](const json& j) { result = parse_extraction(j); });
  return result;
}

void apply_extraction(hgraph::HeteroGraph& graph, const ChunkRecord& chunk,
                      const ExtractionResult& ex) {
  using hgraph::EdgeKind;
  std::vector<std::string> entity_ids;
  entity_ids.reserve(ex.entities.size());
  for (const auto& name : ex.entities) {
    entity_ids.push_back(graph.add_node(hgraph::make_entity(name)));
  }

  std::vector<std::string> unit_ids;
  for (std::size_t u = 0; u < ex.semantic_units.size(); ++u) {
    auto id = graph.add_node(hgraph::make_semantic_unit(ex.semantic_units[u], chunk.chunk_id, u));
    for (auto e : ex.unit_entity_map[u]) {
      graph.upsert_edge(id, entity_ids[e], EdgeKind::Decomposition);
    }
    unit_ids.push_back(std::move(id));
  }

  std::vector<std::string> rel_ids;
  for (std::size_t r = 0; r < ex.relationships.size(); ++r) {
    const auto& rel = ex.relationships[r];
    auto id = graph.add_node(
        hgraph::make_relationship(rel.relation, chunk.chunk_id + "/r" + std::to_string(r)));
    // Both endpoints get an e_r edge; a self-relationship lands on the same
    // pair twice and ends up with weight 2.
    graph.upsert_edge(id, hgraph::make_entity(rel.source).id, EdgeKind::Relation);
    graph.upsert_edge(id, hgraph::make_entity(rel.target).id, EdgeKind::Relation);
    rel_ids.push_back(std::move(id));
  }
  for (std::size_t u = 0; u < ex.unit_relationship_map.size(); ++u) {
    for (auto r : ex.unit_relationship_map[u]) {
      graph.upsert_edge(rel_ids[r], unit_ids[u], EdgeKind::Relation);
    }
  }
}

InitialGraph build_initial_graph(std::span<const ChunkRecord> corpus,
                                 llmio::ChatClient& extractor, std::size_t parallelism) {
  if (corpus.empty()) throw IndexingError("cannot index an empty corpus");

  std::vector<const ChunkRecord*> ordered;
  for (const auto& c : corpus) ordered.push_back(&c);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](auto* a, auto* b) { return a->chunk_id < b->chunk_id; });

  auto results = bounded_map<ExtractionResult>(
      ordered.size(), parallelism,
      [&](std::size_t i) { return decompose_chunk(*ordered[i], extractor); });

  InitialGraph out;
  out.report.chunks_total = ordered.size();
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    const auto& chunk = *ordered[i];
    if (!results[i].ok()) {
      spdlog::warn("decomposition failed for chunk {}: {}", chunk.chunk_id, results[i].error);
      out.report.failures.push_back({chunk.chunk_id, results[i].error});
      continue;
    }
    const auto& ex = *results[i].value;
    if (!ex.orphan_entities.empty()) {
      spdlog::debug("chunk {}: {} orphan entities", chunk.chunk_id, ex.orphan_entities.size());
      out.report.orphan_entities += ex.orphan_entities.size();
    }
    apply_extraction(out.graph, chunk, ex);
    ++out.report.chunks_ok;
  }
  if (out.report.chunks_ok == 0) {
    throw IndexingError("decomposition failed for all " + std::to_string(ordered.size()) +
                        " chunks; first error: " + out.report.failures.front().error);
  }
  return out;
}

std::string failures_jsonl(const DecompositionReport& report) {
  std::string out;
  for (const auto& f : report.failures) {
    out += json{{"chunk_id", f.chunk_id}, {"error", f.error}}.dump();
    out.push_back('\n');
  }
  return out;
}

}  // namespace noderag::decompose
