#include "noderag/retrieve/retrieve.hpp"

#include <algorithm>
#include <set>

#include <spdlog/spdlog.h>

#include "noderag/common/error.hpp"
#include "noderag/llmio/prompts.hpp"

namespace noderag::retrieve {

using hgraph::HeteroGraph;
using hgraph::NodeIndex;
using hgraph::NodeType;
using nlohmann::json;

QueryPlan plan_query(const std::string& query, llmio::ChatClient& extractor,
                     llmio::Embedder& embedder) {
  if (trim(query).empty()) throw QueryError("empty query");
  QueryPlan plan;
  plan.raw_query = query;
  try {
    auto request = llmio::make_request(llmio::templates::kQueryEntities, {{"query", query}});
    llmio::chat_json(extractor, request, [&](const json& j) {
      if (!j.is_object() || !j.contains("entities") || !j["entities"].is_array()) {
        throw ExtractionError("reply lacks an entities array");
      }
      std::vector<std::string> names;
      for (const auto& e : j["entities"]) {
        if (!e.is_string()) throw ExtractionError("entity must be a string");
        auto name = std::string(trim(e.get<std::string>()));
        if (!name.empty()) names.push_back(std::move(name));
      }
      plan.extracted_entities = std::move(names);
    });
  } catch (const std::exception& e) {
    plan.extracted_entities.clear();
    plan.warnings.push_back(std::string("entity extraction failed, using vector entries only: ") +
                            e.what());
    spdlog::warn("{}", plan.warnings.back());
  }
  try {
    const std::vector<std::string> text{query};
    auto vectors = embedder.embed(text);
    if (vectors.size() != 1) throw Error("embedder returned no vector");
    plan.query_vector = std::move(vectors[0]);
  } catch (const std::exception& e) {
    throw QueryError(std::string("query embedding failed: ") + e.what());
  }
  return plan;
}

TitleIndex::TitleIndex(const HeteroGraph& g) {
  for (auto i : g.indices_of_types(hgraph::kExactEntryTypes)) {
    by_title_[normalize_for_match(g.node(i).title)].push_back(i);
  }
}

std::span<const NodeIndex> TitleIndex::lookup(std::string_view name) const {
  auto it = by_title_.find(normalize_for_match(name));
  if (it == by_title_.end()) return {};
  return it->second;
}

std::string_view mode_name(MatchMode m) noexcept { return m == MatchMode::Exact ? "exact" : "vector"; }

std::vector<Entry> dual_search(const HeteroGraph& g, const TitleIndex& titles,
                               const enrich::HnswIndex& index, const QueryPlan& plan,
                               std::size_t k, bool include_text) {
  std::vector<Entry> out;
  std::set<NodeIndex> exact;
  for (const auto& name : plan.extracted_entities) {
    for (auto i : titles.lookup(name)) exact.insert(i);
  }
  for (auto i : exact) out.push_back({g.node(i).id, MatchMode::Exact, 0.0});

  auto types = hgraph::kVectorEntryTypes;
  if (include_text) types.insert(NodeType::Text);
  const auto hits = index.search(plan.query_vector, k, 0, [&](const std::string& id) {
    const auto i = g.find(id);
    return i && types.contains(g.node(*i).type);
  });
  for (const auto& h : hits) out.push_back({h.id, MatchMode::Vector, h.similarity});
  return out;
}

std::vector<double> shallow_ppr(const hgraph::WeightedAdjacency& adj,
                                std::span<const NodeIndex> entries, double alpha, int iterations) {
  if (entries.empty()) throw QueryError("no entry points");
  if (!(alpha > 0.0 && alpha < 1.0)) throw QueryError("alpha must lie in (0, 1)");
  const auto n = adj.size();
  std::vector<NodeIndex> unique(entries.begin(), entries.end());
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());

  std::vector<double> p(n, 0.0);
  for (auto e : unique) p.at(e) = 1.0 / static_cast<double>(unique.size());
  std::vector<double> pi = p;
  std::vector<double> next(n);
  for (int t = 0; t < iterations; ++t) {
    double dangling = 0.0;
    for (std::size_t v = 0; v < n; ++v) next[v] = 0.0;
    for (std::size_t u = 0; u < n; ++u) {
      if (pi[u] == 0.0) continue;
      if (adj.out_weight[u] <= 0.0) {
        dangling += pi[u];
        continue;
      }
      const double share = pi[u] / adj.out_weight[u];
      for (auto s = adj.offsets[u]; s < adj.offsets[u + 1]; ++s) {
        next[adj.targets[s]] += share * adj.weights[s];
      }
    }
    for (std::size_t v = 0; v < n; ++v) {
      next[v] = alpha * p[v] + (1.0 - alpha) * (next[v] + dangling * p[v]);
    }
    std::swap(pi, next);
  }
  return pi;
}

std::vector<CrossNode> select_cross_nodes(const HeteroGraph& g, const std::vector<double>& scores,
                                          std::span<const Entry> entries, std::size_t k_per_type) {
  std::vector<CrossNode> out;
  if (k_per_type == 0) return out;
  std::set<std::string> excluded;
  for (const auto& e : entries) excluded.insert(e.id);

  std::vector<std::pair<double, NodeIndex>> picked;
  for (auto type : hgraph::kAllNodeTypes) {
    std::vector<std::pair<double, NodeIndex>> cands;
    for (auto i : g.indices_of_type(type)) {
      if (scores[i] > 0.0 && !excluded.count(g.node(i).id)) cands.emplace_back(scores[i], i);
    }
    auto better = [](const auto& a, const auto& b) {
      return a.first > b.first || (a.first == b.first && a.second < b.second);
    };
    const auto take = std::min(k_per_type, cands.size());
    std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(take), cands.end(),
                      better);
    picked.insert(picked.end(), cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(take));
  }
  std::sort(picked.begin(), picked.end(), [](const auto& a, const auto& b) {
    return a.first > b.first || (a.first == b.first && a.second < b.second);
  });
  for (auto [score, i] : picked) out.push_back({g.node(i).id, score});
  return out;
}

std::vector<std::string> filter_retrieval(const HeteroGraph& g, std::span<const Entry> entries,
                                          std::span<const CrossNode> cross) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  auto keep = [&](const std::string& id) {
    if (hgraph::is_retrievable(g.node(id).type) && seen.insert(id).second) out.push_back(id);
  };
  for (const auto& e : entries) {
    if (e.mode == MatchMode::Vector) keep(e.id);
  }
  for (const auto& e : entries) {
    if (e.mode == MatchMode::Exact) keep(e.id);
  }
  for (const auto& c : cross) keep(c.id);
  return out;
}

AssembledContext assemble_context(const HeteroGraph& g, std::span<const std::string> ids,
                                  std::size_t budget_tokens, const Tokenizer& tokenizer) {
  AssembledContext out;
  for (const auto& id : ids) {
    const auto& node = g.node(id);
    std::string block = "[" + std::string(hgraph::type_name(node.type)) + "]\n" + node.content +
                        "\n\n";
    const auto cost = tokenizer.count(block);
    if (out.token_count + cost > budget_tokens) break;
    out.text += block;
    out.token_count += cost;
    out.included.push_back(id);
  }
  return out;
}

json trace_json(const HeteroGraph& g, const RetrievalResult& r) {
  auto type_of = [&](const std::string& id) {
    return std::string(1, hgraph::type_code(g.node(id).type));
  };
  json entries = json::array();
  for (const auto& e : r.entries) {
    json j = {{"id", e.id}, {"type", type_of(e.id)}, {"mode", mode_name(e.mode)}};
    if (e.mode == MatchMode::Vector) j["similarity"] = e.similarity;
    entries.push_back(std::move(j));
  }
  json cross = json::array();
  for (const auto& c : r.cross) {
    cross.push_back({{"id", c.id}, {"type", type_of(c.id)}, {"ppr", c.score}});
  }
  json out = {{"query", r.query},
              {"extracted_entities", r.extracted_entities},
              {"entries", entries},
              {"cross", cross},
              {"retrieved", r.retrieved},
              {"context_nodes", r.context.included},
              {"token_count", r.context.token_count},
              {"budget_tokens", r.budget_tokens},
              {"tokenizer", r.tokenizer},
              {"notices", r.notices}};
  if (r.answer) out["answer"] = *r.answer;
  return out;
}

QueryEngine::QueryEngine(const HeteroGraph& g, const enrich::HnswIndex& index,
                         RetrievalOptions options, const Tokenizer* tokenizer)
    : graph_(&g),
      index_(&index),
      options_(options),
      tokenizer_(tokenizer ? tokenizer : &default_tokenizer()),
      titles_(g),
      adjacency_(hgraph::weighted_adjacency(g)) {}

RetrievalResult QueryEngine::retrieve(const QueryPlan& plan,
                                      std::optional<std::size_t> budget) const {
  const auto& g = *graph_;
  RetrievalResult r;
  r.query = plan.raw_query;
  r.extracted_entities = plan.extracted_entities;
  r.notices = plan.warnings;
  r.budget_tokens = budget.value_or(options_.budget_tokens);
  r.tokenizer = tokenizer_->name();
  if (r.budget_tokens == 0) throw QueryError("context budget must be positive");

  r.entries = dual_search(g, titles_, *index_, plan, options_.entry_k,
                          options_.include_text_entries);
  if (r.entries.empty()) {
    r.notices.push_back("no entry points matched the query");
    return r;
  }
  std::vector<NodeIndex> entry_idx;
  for (const auto& e : r.entries) entry_idx.push_back(g.index(e.id));
  const auto scores = shallow_ppr(adjacency_, entry_idx, options_.alpha, options_.iterations);
  r.cross = select_cross_nodes(g, scores, r.entries, options_.k_per_type);
  r.retrieved = filter_retrieval(g, r.entries, r.cross);
  if (r.retrieved.empty()) r.notices.push_back("no retrievable nodes reached");
  r.context = assemble_context(g, r.retrieved, r.budget_tokens, *tokenizer_);
  if (r.context.included.empty() && !r.retrieved.empty()) {
    r.notices.push_back("no retrieved node fits in the context budget");
  }
  return r;
}

RetrievalResult QueryEngine::answer(const QueryPlan& plan, llmio::ChatClient& responder,
                                    std::optional<std::size_t> budget) const {
  auto r = retrieve(plan, budget);
  const auto context = r.context.text.empty() ? std::string("(no context available)")
                                              : r.context.text;
  try {
    auto request = llmio::make_request(llmio::templates::kUnifiedAnswer,
                                       {{"context", context}, {"query", plan.raw_query}});
    auto response = responder.complete(request);
    r.answer = std::move(response.text);
    r.answer_usage = response.usage;
  } catch (const std::exception& e) {
    throw SynthesisError(std::string("answer synthesis failed: ") + e.what(), r.context.text);
  }
  return r;
}

}  // namespace noderag::retrieve
