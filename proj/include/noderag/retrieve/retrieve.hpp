#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "noderag/common/text.hpp"
#include "noderag/enrich/hnsw.hpp"
#include "noderag/enrich/store.hpp"
#include "noderag/hgraph/graph.hpp"
#include "noderag/llmio/chat.hpp"
#include "noderag/llmio/embed.hpp"

namespace noderag::retrieve {

struct QueryPlan {
  std::string raw_query;
  std::vector<std::string> extracted_entities;
  llmio::Vector query_vector;
  std::vector<std::string> warnings;
};

/// Entity extraction (query_entities template, temperature 0) plus the query
/// embedding. An extraction failure leaves the entity list empty with a
/// warning; an embedding failure or an empty query throws QueryError.
QueryPlan plan_query(const std::string& query, llmio::ChatClient& extractor,
                     llmio::Embedder& embedder);

/// Normalized title -> N and O nodes carrying it (hrid order).
class TitleIndex {
public:
  explicit TitleIndex(const hgraph::HeteroGraph& g);
  std::span<const hgraph::NodeIndex> lookup(std::string_view name) const;

private:
  std::unordered_map<std::string, std::vector<hgraph::NodeIndex>> by_title_;
};

enum class MatchMode { Exact, Vector };
std::string_view mode_name(MatchMode m) noexcept;

struct Entry {
  std::string id;
  MatchMode mode;
  double similarity = 0.0;  // vector entries only
};

/// Exact title matches on N/O nodes (hrid order) followed by the top-k
/// vector hits among S, A and H nodes (plus T when include_text is set), in
/// rank order.
std::vector<Entry> dual_search(const hgraph::HeteroGraph& g, const TitleIndex& titles,
                               const enrich::HnswIndex& index, const QueryPlan& plan,
                               std::size_t k = 10, bool include_text = false);

/// Shallow personalized PageRank: pi(0) = p, pi(s) = alpha p + (1 - alpha) P^T pi(s-1),
/// exactly `iterations` steps. P is row-normalized by edge weight and rows
/// without edges send their mass back to p. Throws QueryError when `entries`
/// is empty.
std::vector<double> shallow_ppr(const hgraph::WeightedAdjacency& adj,
                                std::span<const hgraph::NodeIndex> entries, double alpha = 0.5,
                                int iterations = 2);

struct CrossNode {
  std::string id;
  double score;
};

/// Per node type, the k_per_type highest positive scores excluding entries;
/// ties go to the lower hrid. Returned by descending score, then hrid.
std::vector<CrossNode> select_cross_nodes(const hgraph::HeteroGraph& g,
                                          const std::vector<double>& scores,
                                          std::span<const Entry> entries, std::size_t k_per_type);

/// Retrievable entries and cross nodes as one list: vector entries in rank
/// order, then cross nodes in the given order. N and O nodes are dropped and
/// repeats keep their first position.
std::vector<std::string> filter_retrieval(const hgraph::HeteroGraph& g,
                                          std::span<const Entry> entries,
                                          std::span<const CrossNode> cross);

struct AssembledContext {
  std::string text;
  std::vector<std::string> included;
  std::size_t token_count = 0;
};

/// Type-labelled blocks in list order, stopping at the first node whose block
/// would push the total past `budget_tokens`.
AssembledContext assemble_context(const hgraph::HeteroGraph& g, std::span<const std::string> ids,
                                  std::size_t budget_tokens,
                                  const Tokenizer& tokenizer = default_tokenizer());

struct RetrievalOptions {
  double alpha = 0.5;
  int iterations = 2;
  std::size_t entry_k = 10;
  std::size_t k_per_type = 5;
  std::size_t budget_tokens = 8000;
  bool include_text_entries = false;
};

struct RetrievalResult {
  std::string query;
  std::vector<std::string> extracted_entities;
  std::vector<Entry> entries;
  std::vector<CrossNode> cross;
  std::vector<std::string> retrieved;  // filtered list before the budget cut
  AssembledContext context;
  std::size_t budget_tokens = 0;
  std::string tokenizer;
  std::optional<std::string> answer;
  llmio::Usage answer_usage;
  std::vector<std::string> notices;
};

nlohmann::json trace_json(const hgraph::HeteroGraph& g, const RetrievalResult& r);

/// Read-only query pipeline over a loaded index. Safe to share across
/// threads; the referenced graph, store and index must outlive it.
class QueryEngine {
public:
  QueryEngine(const hgraph::HeteroGraph& g, const enrich::HnswIndex& index,
              RetrievalOptions options = {}, const Tokenizer* tokenizer = nullptr);

  const RetrievalOptions& options() const noexcept { return options_; }
  const Tokenizer& tokenizer() const noexcept { return *tokenizer_; }

  /// Everything up to the assembled context; no model calls.
  RetrievalResult retrieve(const QueryPlan& plan, std::optional<std::size_t> budget = {}) const;

  /// retrieve() plus answer synthesis with the unified answer template.
  /// Throws SynthesisError carrying the context when the responder fails.
  RetrievalResult answer(const QueryPlan& plan, llmio::ChatClient& responder,
                         std::optional<std::size_t> budget = {}) const;

private:
  const hgraph::HeteroGraph* graph_;
  const enrich::HnswIndex* index_;
  RetrievalOptions options_;
  const Tokenizer* tokenizer_;
  TitleIndex titles_;
  hgraph::WeightedAdjacency adjacency_;
};

}  // namespace noderag::retrieve
