#include "noderag/augment/leiden.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <tuple>

#include "noderag/common/random.hpp"

namespace noderag::augment {
namespace {

constexpr double kEps = 1e-12;

// One level of the aggregation hierarchy. Self-loop weight is not kept in
// the adjacency but is part of node_weight.
struct Level {
  std::vector<std::vector<std::pair<std::uint32_t, double>>> adj;
  std::vector<double> node_weight;

  std::uint32_t size() const { return static_cast<std::uint32_t>(adj.size()); }
};

std::uint32_t renumber(std::vector<std::uint32_t>& ids) {
  const auto top = ids.empty() ? 0u : *std::max_element(ids.begin(), ids.end());
  std::vector<std::uint32_t> map(std::size_t{top} + 1, UINT32_MAX);
  std::uint32_t next = 0;
  for (auto& c : ids) {
    if (map[c] == UINT32_MAX) map[c] = next++;
    c = map[c];
  }
  return next;
}

class Optimizer {
public:
  Optimizer(double gamma, double theta, double total, Rng& rng)
      : gamma_(gamma), theta_(theta), total_(total), rng_(rng) {}

  // Queue-based local moving. `comm` holds ids in [0, n).
  void move_nodes(const Level& g, std::vector<std::uint32_t>& comm) {
    const auto n = g.size();
    std::vector<double> comm_weight(n, 0.0);
    std::vector<std::uint32_t> comm_size(n, 0);
    for (std::uint32_t v = 0; v < n; ++v) {
      comm_weight[comm[v]] += g.node_weight[v];
      ++comm_size[comm[v]];
    }
    std::vector<std::uint32_t> empty;
    for (std::uint32_t c = n; c-- > 0;) {
      if (comm_size[c] == 0) empty.push_back(c);
    }

    std::vector<std::uint32_t> order(n);
    for (std::uint32_t v = 0; v < n; ++v) order[v] = v;
    shuffle(order, rng_);
    std::deque<std::uint32_t> queue(order.begin(), order.end());
    std::vector<bool> queued(n, true);

    std::vector<double> link(n, 0.0);
    std::vector<std::uint32_t> touched;
    while (!queue.empty()) {
      const auto v = queue.front();
      queue.pop_front();
      queued[v] = false;
      const double kv = g.node_weight[v];
      const auto own = comm[v];

      touched.clear();
      for (auto [u, w] : g.adj[v]) {
        const auto c = comm[u];
        if (link[c] == 0.0) touched.push_back(c);
        link[c] += w;
      }

      comm_weight[own] -= kv;
      --comm_size[own];
      auto best = own;
      double best_gain = link[own] - gamma_ * kv * comm_weight[own] / total_;
      for (auto c : touched) {
        const double gain = link[c] - gamma_ * kv * comm_weight[c] / total_;
        if (gain > best_gain + kEps) {
          best_gain = gain;
          best = c;
        }
      }
      if (best_gain < -kEps) {
        // Moving to an empty community is worth more than any option.
        if (comm_size[own] == 0) {
          best = own;
        } else if (!empty.empty()) {
          best = empty.back();
        }
      }
      for (auto c : touched) link[c] = 0.0;

      if (comm_size[own] == 0 && best != own) empty.push_back(own);
      if (comm_size[best] == 0 && best != own) {
        empty.erase(std::find(empty.begin(), empty.end(), best));
      }
      comm_weight[best] += kv;
      ++comm_size[best];
      comm[v] = best;
      if (best != own) {
        for (auto [u, w] : g.adj[v]) {
          if (!queued[u] && comm[u] != best) {
            queued[u] = true;
            queue.push_back(u);
          }
        }
      }
    }
  }

  // Refinement: within each community, singletons merge into well-connected
  // sub-communities chosen at random with probability growing with gain.
  std::vector<std::uint32_t> refine(const Level& g, const std::vector<std::uint32_t>& comm) {
    const auto n = g.size();
    std::vector<std::uint32_t> ref(n);
    std::vector<double> ref_weight(n);
    std::vector<std::uint32_t> ref_size(n, 1);
    std::vector<double> ext(n, 0.0);  // weight from sub-community to rest of its community
    std::vector<double> comm_weight(n, 0.0);
    std::vector<std::vector<std::uint32_t>> members(n);
    for (std::uint32_t v = 0; v < n; ++v) {
      ref[v] = v;
      ref_weight[v] = g.node_weight[v];
      comm_weight[comm[v]] += g.node_weight[v];
      members[comm[v]].push_back(v);
      for (auto [u, w] : g.adj[v]) {
        if (comm[u] == comm[v]) ext[v] += w;
      }
    }

    std::vector<double> link(n, 0.0);
    std::vector<std::uint32_t> touched;
    std::vector<std::uint32_t> cand;
    std::vector<double> cand_gain;
    for (auto& group : members) {
      if (group.size() < 2) continue;
      const double ks = comm_weight[comm[group.front()]];
      shuffle(group, rng_);
      for (auto v : group) {
        if (ref_size[ref[v]] != 1) continue;
        const double kv = g.node_weight[v];
        const double ext_v = ext[v];
        if (ext_v < gamma_ * kv * (ks - kv) / total_ - kEps) continue;

        touched.clear();
        for (auto [u, w] : g.adj[v]) {
          if (comm[u] != comm[v]) continue;
          const auto r = ref[u];
          if (link[r] == 0.0) touched.push_back(r);
          link[r] += w;
        }

        const auto own = ref[v];
        cand.assign(1, own);
        cand_gain.assign(1, 0.0);
        for (auto r : touched) {
          if (r == own) continue;
          const double wr = ref_weight[r];
          if (ext[r] < gamma_ * wr * (ks - wr) / total_ - kEps) continue;
          const double gain = link[r] - gamma_ * kv * wr / total_;
          if (gain < 0.0) continue;
          cand.push_back(r);
          cand_gain.push_back(gain);
        }

        std::uint32_t chosen = own;
        if (cand.size() > 1) {
          const double top = *std::max_element(cand_gain.begin(), cand_gain.end());
          std::vector<double> cumulative(cand.size());
          double sum = 0.0;
          for (std::size_t i = 0; i < cand.size(); ++i) {
            sum += std::exp((cand_gain[i] - top) / theta_);
            cumulative[i] = sum;
          }
          const double draw = uniform01(rng_) * sum;
          std::size_t pick = 0;
          while (pick + 1 < cand.size() && cumulative[pick] <= draw) ++pick;
          chosen = cand[pick];
        }
        if (chosen != own) {
          ext[chosen] = ext[chosen] + ext_v - 2.0 * link[chosen];
          ref_weight[chosen] += kv;
          ++ref_size[chosen];
          ref_size[own] = 0;
          ref_weight[own] = 0.0;
          ref[v] = chosen;
        }
        for (auto r : touched) link[r] = 0.0;
      }
    }
    return ref;
  }

private:
  double gamma_;
  double theta_;
  double total_;
  Rng& rng_;
};

Level aggregate(const Level& g, const std::vector<std::uint32_t>& group, std::uint32_t groups) {
  Level out;
  out.adj.resize(groups);
  out.node_weight.assign(groups, 0.0);
  std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> arcs;
  for (std::uint32_t v = 0; v < g.size(); ++v) {
    out.node_weight[group[v]] += g.node_weight[v];
    for (auto [u, w] : g.adj[v]) {
      if (group[u] != group[v]) arcs.emplace_back(group[v], group[u], w);
    }
  }
  std::sort(arcs.begin(), arcs.end());
  for (std::size_t i = 0; i < arcs.size();) {
    auto [a, b, w] = arcs[i];
    double sum = 0.0;
    for (; i < arcs.size() && std::get<0>(arcs[i]) == a && std::get<1>(arcs[i]) == b; ++i) {
      sum += std::get<2>(arcs[i]);
    }
    out.adj[a].emplace_back(b, sum);
  }
  return out;
}

}  // namespace

std::vector<std::uint32_t> leiden(const UGraph& ug, const LeidenOptions& options) {
  const auto n = static_cast<std::uint32_t>(ug.size());
  Level level;
  level.adj.resize(n);
  level.node_weight.assign(n, 0.0);
  for (std::uint32_t v = 0; v < n; ++v) {
    for (auto [u, w] : ug.adj[v]) {
      if (u == v) continue;
      level.adj[v].emplace_back(u, w);
      level.node_weight[v] += w;
    }
  }
  double total = 0.0;
  for (double w : level.node_weight) total += w;

  std::vector<std::uint32_t> node_of(n);  // original node -> node of current level
  for (std::uint32_t v = 0; v < n; ++v) node_of[v] = v;
  std::vector<std::uint32_t> comm = node_of;
  if (total <= 0.0) return comm;

  Rng rng(options.seed);
  Optimizer opt(options.resolution, options.randomness, total, rng);
  for (int depth = 0; depth < options.max_levels; ++depth) {
    opt.move_nodes(level, comm);
    auto communities = comm;
    if (renumber(communities) == level.size()) break;

    auto ref = opt.refine(level, comm);
    const auto groups = renumber(ref);
    if (groups == level.size()) break;

    std::vector<std::uint32_t> next_comm(groups);
    for (std::uint32_t v = 0; v < level.size(); ++v) next_comm[ref[v]] = comm[v];
    renumber(next_comm);
    for (auto& x : node_of) x = ref[x];
    level = aggregate(level, ref, groups);
    comm = std::move(next_comm);
  }

  std::vector<std::uint32_t> out(n);
  for (std::uint32_t v = 0; v < n; ++v) out[v] = comm[node_of[v]];
  renumber(out);
  return out;
}

double modularity(const UGraph& g, const std::vector<std::uint32_t>& community,
                  double resolution) {
  double total = 0.0;
  double internal = 0.0;
  std::vector<double> tot;
  for (std::uint32_t v = 0; v < g.size(); ++v) {
    const auto c = community[v];
    if (c >= tot.size()) tot.resize(c + 1, 0.0);
    for (auto [u, w] : g.adj[v]) {
      total += w;
      tot[c] += w;
      if (community[u] == c) internal += w;
    }
  }
  if (total <= 0.0) return 0.0;
  double expected = 0.0;
  for (double t : tot) expected += (t / total) * (t / total);
  return internal / total - resolution * expected;
}

CommunityPartition detect_communities(hgraph::HeteroGraph& g, const LeidenOptions& options) {
  const auto ids = leiden(to_ugraph(g), options);
  CommunityPartition out;
  out.by_index.resize(ids.size());
  for (std::uint32_t i = 0; i < ids.size(); ++i) {
    const auto c = static_cast<std::int32_t>(ids[i]);
    out.by_index[i] = c;
    out.assignment.emplace(g.node(i).id, c);
    out.community_count = std::max<std::size_t>(out.community_count, ids[i] + 1);
    g.set_community(i, c);
  }
  return out;
}

}  // namespace noderag::augment
