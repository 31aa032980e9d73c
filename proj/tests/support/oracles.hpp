#pragma once

// Reference implementations used only by tests. Each one takes the slow,
// obvious route so it shares no code path with the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

using EdgeList = std::vector<std::pair<std::uint32_t, std::uint32_t>>;

/// Erdos-Renyi style simple graph on n nodes with edge probability p.
inline EdgeList random_graph(std::uint32_t n, double p, std::mt19937_64& rng) {
  EdgeList edges;
  for (std::uint32_t u = 0; u < n; ++u) {
    for (std::uint32_t v = u + 1; v < n; ++v) {
      if (static_cast<double>(rng() >> 11) * 0x1.0p-53 < p) edges.emplace_back(u, v);
    }
  }
  return edges;
}

inline std::vector<std::set<std::uint32_t>> neighbour_sets(std::uint32_t n, const EdgeList& edges) {
  std::vector<std::set<std::uint32_t>> adj(n);
  for (auto [u, v] : edges) {
    if (u == v) continue;
    adj[u].insert(v);
    adj[v].insert(u);
  }
  return adj;
}

/// Sweeps the whole node set, dropping every node whose surviving degree is
/// below k, until a sweep removes nothing.
inline std::vector<bool> k_core(std::uint32_t n, const EdgeList& edges, int k) {
  const auto adj = neighbour_sets(n, edges);
  std::vector<bool> alive(n, true);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::uint32_t v = 0; v < n; ++v) {
      if (!alive[v]) continue;
      int deg = 0;
      for (auto u : adj[v]) deg += alive[u];
      if (deg < k) {
        alive[v] = false;
        changed = true;
      }
    }
  }
  return alive;
}

/// Betweenness from the pair definition: sum over s < t of
/// sigma_sv * sigma_vt / sigma_st for every v on a shortest s-t path.
inline std::vector<double> betweenness(std::uint32_t n, const EdgeList& edges) {
  const auto adj = neighbour_sets(n, edges);
  constexpr int kInf = std::numeric_limits<int>::max();
  std::vector<std::vector<int>> dist(n, std::vector<int>(n, kInf));
  std::vector<std::vector<double>> sigma(n, std::vector<double>(n, 0.0));
  for (std::uint32_t s = 0; s < n; ++s) {
    dist[s][s] = 0;
    sigma[s][s] = 1.0;
    std::deque<std::uint32_t> q{s};
    while (!q.empty()) {
      auto v = q.front();
      q.pop_front();
      for (auto w : adj[v]) {
        if (dist[s][w] == kInf) {
          dist[s][w] = dist[s][v] + 1;
          q.push_back(w);
        }
        if (dist[s][w] == dist[s][v] + 1) sigma[s][w] += sigma[s][v];
      }
    }
  }
  std::vector<double> b(n, 0.0);
  for (std::uint32_t s = 0; s < n; ++s) {
    for (std::uint32_t t = s + 1; t < n; ++t) {
      if (dist[s][t] == kInf) continue;
      for (std::uint32_t v = 0; v < n; ++v) {
        if (v == s || v == t || dist[s][v] == kInf || dist[v][t] == kInf) continue;
        if (dist[s][v] + dist[v][t] == dist[s][t]) {
          b[v] += sigma[s][v] * sigma[v][t] / sigma[s][t];
        }
      }
    }
  }
  return b;
}

/// Average ranks (ties share the mean rank).
inline std::vector<double> ranks(const std::vector<double>& x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double mean = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = mean;
    i = j + 1;
  }
  return r;
}

/// Spearman correlation as the Pearson correlation of average ranks.
inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double cov = 0, va = 0, vb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (ra[i] - ma) * (rb[i] - mb);
    va += (ra[i] - ma) * (ra[i] - ma);
    vb += (rb[i] - mb) * (rb[i] - mb);
  }
  return cov / std::sqrt(va * vb);
}

/// Dense personalized-PageRank recurrence over an explicit n x n transition
/// matrix. `weights[u][v]` is the symmetric edge weight. Rows without
/// outgoing weight send their mass back to the teleport vector.
inline std::vector<double> dense_ppr(const std::vector<std::vector<double>>& weights,
                                     const std::vector<double>& p, double alpha, int iterations) {
  const auto n = weights.size();
  std::vector<std::vector<double>> P(n, std::vector<double>(n, 0.0));
  for (std::size_t u = 0; u < n; ++u) {
    double row = 0.0;
    for (std::size_t v = 0; v < n; ++v) row += weights[u][v];
    for (std::size_t v = 0; v < n; ++v) P[u][v] = row > 0 ? weights[u][v] / row : p[v];
  }
  std::vector<double> pi = p;
  for (int t = 0; t < iterations; ++t) {
    std::vector<double> next(n, 0.0);
    for (std::size_t v = 0; v < n; ++v) {
      double s = 0.0;
      for (std::size_t u = 0; u < n; ++u) s += P[u][v] * pi[u];
      next[v] = alpha * p[v] + (1.0 - alpha) * s;
    }
    pi = std::move(next);
  }
  return pi;
}

/// Best modularity over every 2-way split of a small graph (n <= 20).
inline std::pair<double, std::vector<std::uint32_t>> best_bipartition(std::uint32_t n,
                                                                      const EdgeList& edges) {
  std::vector<double> deg(n, 0.0);
  for (auto [u, v] : edges) {
    deg[u] += 1;
    deg[v] += 1;
  }
  const double m2 = 2.0 * static_cast<double>(edges.size());
  double best = -1.0;
  std::vector<std::uint32_t> best_labels;
  for (std::uint32_t mask = 0; mask < (1u << (n - 1)); ++mask) {
    std::vector<std::uint32_t> label(n);
    for (std::uint32_t v = 0; v + 1 < n; ++v) label[v] = (mask >> v) & 1u;
    label[n - 1] = 0;
    double q = 0.0;
    for (auto [u, v] : edges) {
      if (label[u] == label[v]) q += 2.0;
    }
    double tot[2] = {0, 0};
    for (std::uint32_t v = 0; v < n; ++v) tot[label[v]] += deg[v];
    q = q / m2 - (tot[0] / m2) * (tot[0] / m2) - (tot[1] / m2) * (tot[1] / m2);
    if (q > best) {
      best = q;
      best_labels = label;
    }
  }
  return {best, best_labels};
}

/// Exact top-k by cosine similarity; ties go to the smaller id.
inline std::vector<std::string> knn(const std::vector<std::pair<std::string, std::vector<float>>>& items,
                                    const std::vector<float>& q, std::size_t k) {
  std::vector<std::pair<double, std::string>> scored;
  for (const auto& [id, v] : items) {
    double dot = 0, nv = 0, nq = 0;
    for (std::size_t i = 0; i < q.size(); ++i) {
      dot += static_cast<double>(v[i]) * q[i];
      nv += static_cast<double>(v[i]) * v[i];
      nq += static_cast<double>(q[i]) * q[i];
    }
    scored.emplace_back(-dot / std::sqrt(nv * nq), id);
  }
  std::sort(scored.begin(), scored.end());
  std::vector<std::string> out;
  for (std::size_t i = 0; i < std::min(k, scored.size()); ++i) out.push_back(scored[i].second);
  return out;
}

/// Random unit vector with i.i.d. normal components.
inline std::vector<float> random_unit(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::vector<double> x(dim);
  double norm = 0;
  for (auto& v : x) {
    v = normal(rng);
    norm += v * v;
  }
  norm = std::sqrt(norm);
  std::vector<float> out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(x[i] / norm);
  return out;
}

}  // namespace oracle
