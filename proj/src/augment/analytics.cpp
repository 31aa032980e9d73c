#include "noderag/augment/analytics.hpp"

#include <cmath>
#include <deque>
#include <numeric>

#include <spdlog/spdlog.h>

#include "noderag/common/error.hpp"
#include "noderag/common/random.hpp"

namespace noderag::augment {

using hgraph::HeteroGraph;
using hgraph::NodeType;

std::size_t UGraph::edge_count() const noexcept {
  std::size_t twice = 0;
  for (const auto& row : adj) twice += row.size();
  return twice / 2;
}

UGraph UGraph::from_edges(std::size_t n,
                          const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges) {
  UGraph g;
  g.adj.resize(n);
  for (auto [u, v] : edges) {
    if (u == v) continue;
    g.adj[u].emplace_back(v, 1.0);
    g.adj[v].emplace_back(u, 1.0);
  }
  return g;
}

UGraph to_ugraph(const HeteroGraph& hg) {
  UGraph g;
  g.adj.resize(hg.node_count());
  for (const auto& e : hg.edges()) {
    g.adj[e.a].emplace_back(e.b, static_cast<double>(e.weight));
    g.adj[e.b].emplace_back(e.a, static_cast<double>(e.weight));
  }
  return g;
}

int core_threshold(std::size_t node_count, double mean_degree, LogBase base) {
  const auto n = static_cast<double>(node_count);
  const double lg = base == LogBase::Two   ? std::log2(n)
                    : base == LogBase::Ten ? std::log10(n)
                                           : std::log(n);
  const auto k = static_cast<int>(std::floor(lg * std::sqrt(mean_degree)));
  return std::max(k, 1);
}

int compute_core_threshold(const HeteroGraph& g, LogBase base) {
  if (g.node_count() < 2 || g.edge_count() == 0) {
    throw NotApplicableError("core threshold needs at least 2 nodes and 1 edge");
  }
  const double mean_degree =
      2.0 * static_cast<double>(g.edge_count()) / static_cast<double>(g.node_count());
  return core_threshold(g.node_count(), mean_degree, base);
}

std::vector<bool> k_core(const UGraph& g, int k) {
  const auto n = g.size();
  std::vector<std::size_t> degree(n);
  std::vector<bool> alive(n, true);
  std::deque<std::uint32_t> queue;
  for (std::uint32_t v = 0; v < n; ++v) {
    degree[v] = g.adj[v].size();
    if (degree[v] < static_cast<std::size_t>(std::max(k, 0))) {
      alive[v] = false;
      queue.push_back(v);
    }
  }
  while (!queue.empty()) {
    const auto v = queue.front();
    queue.pop_front();
    for (auto [u, w] : g.adj[v]) {
      if (!alive[u]) continue;
      if (--degree[u] < static_cast<std::size_t>(k)) {
        alive[u] = false;
        queue.push_back(u);
      }
    }
  }
  return alive;
}

std::set<std::string> k_core_nodes(const HeteroGraph& g, int k) {
  if (k < 1) throw Error("k-core requires k >= 1");
  const auto members = k_core(to_ugraph(g), k);
  std::set<std::string> out;
  for (auto i : g.indices_of_type(NodeType::Entity)) {
    if (members[i]) out.insert(g.node(i).id);
  }
  return out;
}

std::vector<double> betweenness(const UGraph& g, std::size_t pivots, std::uint64_t seed) {
  const auto n = g.size();
  std::vector<double> score(n, 0.0);
  if (n == 0) return score;

  std::vector<std::uint32_t> sources(n);
  std::iota(sources.begin(), sources.end(), 0u);
  const bool exact = pivots == 0 || pivots >= n;
  if (!exact) {
    Rng rng(seed);
    // Partial Fisher-Yates: the first `pivots` slots become the sample.
    for (std::size_t i = 0; i < pivots; ++i) {
      std::swap(sources[i], sources[i + uniform_index(rng, n - i)]);
    }
    sources.resize(pivots);
  }

  std::vector<std::vector<std::uint32_t>> preds(n);
  std::vector<double> sigma(n);
  std::vector<std::int64_t> dist(n);
  std::vector<double> delta(n);
  std::vector<std::uint32_t> order;
  order.reserve(n);
  std::deque<std::uint32_t> queue;

  for (auto s : sources) {
    for (std::size_t i = 0; i < n; ++i) {
      preds[i].clear();
      sigma[i] = 0.0;
      dist[i] = -1;
      delta[i] = 0.0;
    }
    order.clear();
    sigma[s] = 1.0;
    dist[s] = 0;
    queue.push_back(s);
    while (!queue.empty()) {
      const auto v = queue.front();
      queue.pop_front();
      order.push_back(v);
      for (auto [w, ignored] : g.adj[v]) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          queue.push_back(w);
        }
        if (dist[w] == dist[v] + 1) {
          sigma[w] += sigma[v];
          preds[w].push_back(v);
        }
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const auto w = *it;
      for (auto v : preds[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      if (w != s) score[w] += delta[w];
    }
  }

  const double scale = (exact ? 1.0 : static_cast<double>(n) / static_cast<double>(pivots)) * 0.5;
  for (auto& x : score) x *= scale;
  return score;
}

BetweennessSelection betweenness_select(const HeteroGraph& g, std::size_t pivots,
                                        std::uint64_t seed) {
  BetweennessSelection out;
  const auto n = g.node_count();
  if (n == 0) return out;
  const auto scores = betweenness(to_ugraph(g), pivots, seed);
  out.mean = std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(n);
  out.scale = std::max(1, static_cast<int>(std::floor(std::log10(static_cast<double>(n)))));
  const double threshold = out.mean * out.scale;
  for (auto i : g.indices_of_type(NodeType::Entity)) {
    out.scores.emplace(g.node(i).id, scores[i]);
    if (scores[i] > threshold) out.selected.insert(g.node(i).id);
  }
  return out;
}

ImportanceReport select_important_entities(const HeteroGraph& g, const ImportanceOptions& options) {
  ImportanceReport r;
  try {
    r.k_default = compute_core_threshold(g, options.log_base);
  } catch (const NotApplicableError& e) {
    r.warnings.push_back(std::string("importance selection skipped: ") + e.what());
    spdlog::warn("{}", r.warnings.back());
    return r;
  }
  r.kcore_set = k_core_nodes(g, r.k_default);
  auto b = betweenness_select(g, options.pivots, options.seed);
  r.betweenness_scores = std::move(b.scores);
  r.mean_betweenness = b.mean;
  r.scale = b.scale;
  r.betweenness_set = std::move(b.selected);
  r.important = r.kcore_set;
  r.important.insert(r.betweenness_set.begin(), r.betweenness_set.end());
  return r;
}

}  // namespace noderag::augment
