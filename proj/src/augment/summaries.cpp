#include "noderag/augment/summaries.hpp"

#include <algorithm>

#include <spdlog/spdlog.h>

#include "noderag/common/error.hpp"
#include "noderag/common/parallel.hpp"
#include "noderag/llmio/prompts.hpp"

namespace noderag::augment {

using hgraph::EdgeKind;
using hgraph::HeteroGraph;
using hgraph::NodeIndex;
using hgraph::NodeType;

std::vector<std::string> attribute_context(const HeteroGraph& g, NodeIndex entity) {
  std::vector<NodeIndex> neighbours;
  for (auto slot : g.incident(entity)) {
    const auto other = g.edges()[slot].other(entity);
    const auto t = g.node(other).type;
    if (t == NodeType::Relationship || t == NodeType::SemanticUnit) neighbours.push_back(other);
  }
  std::sort(neighbours.begin(), neighbours.end());
  neighbours.erase(std::unique(neighbours.begin(), neighbours.end()), neighbours.end());
  std::vector<std::string> out;
  out.reserve(neighbours.size());
  for (auto i : neighbours) out.push_back(g.node(i).content);
  return out;
}

AttributeReport attach_attributes(HeteroGraph& g, const std::set<std::string>& important,
                                  llmio::ChatClient& writer, std::size_t parallelism) {
  AttributeReport report;
  std::vector<NodeIndex> entities;
  for (const auto& id : important) {
    const auto i = g.index(id);
    if (g.node(i).type != NodeType::Entity) {
      throw ValidationError("important node " + id + " is not an entity");
    }
    entities.push_back(i);
  }
  std::sort(entities.begin(), entities.end());

  std::vector<llmio::ChatRequest> requests;
  for (auto e : entities) {
    std::string context;
    for (const auto& c : attribute_context(g, e)) {
      if (!context.empty()) context.push_back('\n');
      context += c;
    }
    requests.push_back(llmio::make_request(llmio::templates::kAttribute,
                                           {{"entity", g.node(e).title}, {"context", context}}));
  }

  auto replies = bounded_map<std::string>(requests.size(), parallelism, [&](std::size_t i) {
    auto text = std::string(trim(writer.chat(requests[i])));
    if (text.empty()) throw ExtractionError("empty attribute summary");
    return text;
  });

  for (std::size_t i = 0; i < entities.size(); ++i) {
    const std::string entity_id = g.node(entities[i]).id;
    if (!replies[i].ok()) {
      spdlog::warn("attribute generation failed for {}: {}", entity_id, replies[i].error);
      report.failures.push_back({entity_id, replies[i].error});
      continue;
    }
    auto a = g.add_node(hgraph::make_attribute(*replies[i].value, entity_id));
    g.upsert_edge(a, entity_id, EdgeKind::Attribute);
    report.created.emplace_back(entity_id, std::move(a));
  }
  return report;
}

std::string community_context(const HeteroGraph& g, std::int32_t community,
                              std::size_t budget_tokens, const Tokenizer& tokenizer) {
  std::string out;
  std::size_t used = 0;
  for (auto i : g.indices_of_types(
           {NodeType::SemanticUnit, NodeType::Attribute, NodeType::Relationship})) {
    const auto& node = g.node(i);
    if (node.community != community) continue;
    const auto spans = tokenizer.spans(node.content);
    if (used + spans.size() > budget_tokens) {
      const auto room = budget_tokens - used;
      if (room > 0) {
        if (!out.empty()) out.push_back('\n');
        out += node.content.substr(0, spans[room - 1].end);
      }
      break;
    }
    if (!out.empty()) out.push_back('\n');
    out += node.content;
    used += spans.size();
  }
  return out;
}

namespace {

struct Element {
  std::string title;
  std::string content;
};

std::vector<Element> parse_elements(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("elements") || !j["elements"].is_array()) {
    throw ExtractionError("reply lacks an elements array");
  }
  std::vector<Element> out;
  for (const auto& e : j["elements"]) {
    if (!e.is_object() || !e.contains("title") || !e.contains("content") ||
        !e["title"].is_string() || !e["content"].is_string()) {
      throw ExtractionError("element needs string title and content");
    }
    Element el{std::string(trim(e["title"].get<std::string>())),
               std::string(trim(e["content"].get<std::string>()))};
    if (el.title.empty() || el.content.empty()) {
      throw ExtractionError("element title and content must be non-empty");
    }
    out.push_back(std::move(el));
  }
  if (out.empty()) throw ExtractionError("no high-level elements returned");
  return out;
}

}  // namespace

HighLevelReport extract_high_level(HeteroGraph& g, const CommunityPartition& partition,
                                   llmio::ChatClient& writer, const HighLevelOptions& options) {
  const auto& tok = options.tokenizer ? *options.tokenizer : default_tokenizer();
  HighLevelReport report;
  std::vector<std::int32_t> communities;
  std::vector<llmio::ChatRequest> requests;
  for (std::size_t c = 0; c < partition.community_count; ++c) {
    const auto id = static_cast<std::int32_t>(c);
    auto context = community_context(g, id, options.budget_tokens, tok);
    if (trim(context).empty()) {
      ++report.communities_without_context;
      continue;
    }
    communities.push_back(id);
    requests.push_back(llmio::make_request(llmio::templates::kHighLevel, {{"context", context}}));
  }

  auto replies = bounded_map<std::vector<Element>>(
      requests.size(), options.parallelism, [&](std::size_t i) {
        std::vector<Element> out;
        llmio::chat_json(writer, requests[i],
                         [&](const nlohmann::json& j) { out = parse_elements(j); });
        return out;
      });

  for (std::size_t i = 0; i < communities.size(); ++i) {
    const auto c = communities[i];
    if (!replies[i].ok()) {
      spdlog::warn("high-level extraction failed for community {}: {}", c, replies[i].error);
      report.failures.push_back({std::to_string(c), replies[i].error});
      continue;
    }
    const auto& elements = *replies[i].value;
    for (std::size_t k = 0; k < elements.size(); ++k) {
      auto h = g.add_node(hgraph::make_high_level(elements[k].content, c, k));
      auto o = g.add_node(hgraph::make_overview(elements[k].title, h));
      g.set_community(g.index(o), c);
      g.upsert_edge(h, o, EdgeKind::Overview);
      report.elements.push_back({c, h, o, elements[k].content, elements[k].title});
    }
  }
  return report;
}

}  // namespace noderag::augment
