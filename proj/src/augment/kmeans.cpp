#include "noderag/augment/kmeans.hpp"

#include <cmath>
#include <limits>
#include <map>

#include "noderag/common/error.hpp"
#include "noderag/common/random.hpp"

namespace noderag::augment {
namespace {

double sq_dist(const llmio::Vector& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

std::vector<double> widen(const llmio::Vector& v) { return {v.begin(), v.end()}; }

}  // namespace

std::size_t cluster_count(std::size_t n) {
  auto k = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  while (k * k > n) --k;
  while ((k + 1) * (k + 1) <= n) ++k;
  return std::max<std::size_t>(k, 1);
}

KMeansResult kmeans(std::span<const llmio::Vector> points, std::size_t k,
                    const KMeansOptions& options) {
  KMeansResult out;
  out.k_requested = k;
  const auto n = points.size();
  if (n == 0) return out;
  if (k == 0) throw Error("k-means needs k >= 1");
  k = std::min(k, n);
  const auto dim = points[0].size();
  for (const auto& p : points) {
    if (p.size() != dim) throw Error("k-means points differ in dimension");
  }

  // k-means++ seeding.
  Rng rng(options.seed);
  std::vector<std::vector<double>> centers;
  centers.push_back(widen(points[uniform_index(rng, n)]));
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = sq_dist(points[i], centers[0]);
  while (centers.size() < k) {
    double total = 0.0;
    for (double x : d2) total += x;
    std::size_t pick = 0;
    if (total <= 0.0) {
      pick = uniform_index(rng, n);
    } else {
      const double draw = uniform01(rng) * total;
      double acc = 0.0;
      for (pick = 0; pick + 1 < n; ++pick) {
        acc += d2[pick];
        if (acc > draw) break;
      }
    }
    centers.push_back(widen(points[pick]));
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq_dist(points[i], centers.back()));
  }

  std::vector<std::uint32_t> assign(n, 0);
  for (int it = 0; it < options.max_iterations; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::uint32_t c = 0; c < centers.size(); ++c) {
        const double d = sq_dist(points[i], centers[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (it == 0 || assign[i] != best) changed = true;
      assign[i] = best;
    }
    out.iterations = it + 1;
    if (!changed) break;

    std::vector<std::vector<double>> sums(centers.size(), std::vector<double>(dim, 0.0));
    std::vector<std::size_t> sizes(centers.size(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++sizes[assign[i]];
      for (std::size_t d = 0; d < dim; ++d) sums[assign[i]][d] += points[i][d];
    }
    for (std::size_t c = 0; c < centers.size(); ++c) {
      if (sizes[c] == 0) continue;  // an empty cluster keeps its old center
      for (std::size_t d = 0; d < dim; ++d) centers[c][d] = sums[c][d] / sizes[c];
    }
  }

  std::vector<std::uint32_t> dense(centers.size(), UINT32_MAX);
  std::uint32_t next = 0;
  for (auto& a : assign) {
    if (dense[a] == UINT32_MAX) dense[a] = next++;
    a = dense[a];
  }
  out.assignment = std::move(assign);
  out.k_effective = next;
  return out;
}

SemanticMatchResult semantic_match_edges(hgraph::HeteroGraph& g,
                                         const enrich::EmbeddingStore& embeddings,
                                         const KMeansOptions& options) {
  using hgraph::NodeType;
  SemanticMatchResult out;
  const auto members =
      g.indices_of_types({NodeType::SemanticUnit, NodeType::Attribute, NodeType::HighLevelElement});
  if (members.empty()) return out;

  std::vector<llmio::Vector> points;
  points.reserve(members.size());
  for (auto i : members) {
    const auto& node = g.node(i);
    if (!node.community) throw Error("node " + node.id + " has no community");
    points.push_back(embeddings.get(node.id));
  }

  const auto km = kmeans(points, cluster_count(members.size()), options);
  out.k_requested = km.k_requested;
  out.k_effective = km.k_effective;

  // (community, cluster) -> (S/A members, H members), both in hrid order.
  std::map<std::pair<std::int32_t, std::uint32_t>,
           std::pair<std::vector<hgraph::NodeIndex>, std::vector<hgraph::NodeIndex>>>
      groups;
  for (std::size_t j = 0; j < members.size(); ++j) {
    const auto& node = g.node(members[j]);
    out.cluster.emplace(node.id, km.assignment[j]);
    auto& slot = groups[{*node.community, km.assignment[j]}];
    (node.type == NodeType::HighLevelElement ? slot.second : slot.first).push_back(members[j]);
  }
  for (const auto& [key, group] : groups) {
    for (auto v : group.first) {
      for (auto h : group.second) {
        g.upsert_edge(v, h, hgraph::EdgeKind::HighLevel);
        out.edges.emplace_back(g.node(v).id, g.node(h).id);
      }
    }
  }
  return out;
}

}  // namespace noderag::augment
