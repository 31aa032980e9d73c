#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "noderag/augment/leiden.hpp"
#include "noderag/common/text.hpp"
#include "noderag/hgraph/graph.hpp"
#include "noderag/llmio/chat.hpp"

namespace noderag::augment {

/// Contents of the R and S neighbours of an entity, in hrid order. Raw text
/// nodes are never part of it.
std::vector<std::string> attribute_context(const hgraph::HeteroGraph& g, hgraph::NodeIndex entity);

struct GenerationFailure {
  std::string subject;  // entity id, or community id as a string
  std::string error;
};

struct AttributeReport {
  std::vector<std::pair<std::string, std::string>> created;  // (entity id, A id)
  std::vector<GenerationFailure> failures;
};

/// One A node per important entity, summarizing attribute_context(), joined
/// to the entity by e_a. Entities are processed in hrid order; calls run with
/// bounded parallelism and are applied by a single writer.
AttributeReport attach_attributes(hgraph::HeteroGraph& g, const std::set<std::string>& important,
                                  llmio::ChatClient& writer, std::size_t parallelism = 8);

/// Contents of a community's S, A and R nodes in hrid order, one per line,
/// cut off once `budget_tokens` is reached.
std::string community_context(const hgraph::HeteroGraph& g, std::int32_t community,
                              std::size_t budget_tokens,
                              const Tokenizer& tokenizer = default_tokenizer());

struct HighLevelElement {
  std::int32_t community = 0;
  std::string h_id;
  std::string o_id;
  std::string content;
  std::string title;
};

struct HighLevelReport {
  std::vector<HighLevelElement> elements;
  std::vector<GenerationFailure> failures;
  std::size_t communities_without_context = 0;
};

struct HighLevelOptions {
  std::size_t budget_tokens = 8000;
  std::size_t parallelism = 8;
  const Tokenizer* tokenizer = nullptr;  // default_tokenizer() when null
};

/// Per community: asks the writer for high-level elements with keyword
/// titles and adds one H node and one O node per element, joined by e_o.
/// Both carry the community id.
HighLevelReport extract_high_level(hgraph::HeteroGraph& g, const CommunityPartition& partition,
                                   llmio::ChatClient& writer, const HighLevelOptions& options = {});

}  // namespace noderag::augment
