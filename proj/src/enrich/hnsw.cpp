#include "noderag/enrich/hnsw.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "noderag/common/error.hpp"
#include "noderag/common/random.hpp"

namespace noderag::enrich {
namespace {

// Per-thread visited marks; bumping the epoch clears them in O(1).
struct Visited {
  std::vector<std::uint32_t> tag;
  std::uint32_t epoch = 0;

  void reset(std::size_t n) {
    if (tag.size() < n) tag.resize(n, 0);
    if (++epoch == 0) {
      std::fill(tag.begin(), tag.end(), 0);
      epoch = 1;
    }
  }
  bool mark(std::uint32_t i) {
    if (tag[i] == epoch) return false;
    tag[i] = epoch;
    return true;
  }
};

thread_local Visited visited_marks;

}  // namespace

HnswIndex HnswIndex::build(const EmbeddingStore& store, const HnswParams& params) {
  if (params.M < 2) throw Error("HNSW needs M >= 2");
  if (params.ef_construction < 1 || params.ef_search < 1) throw Error("HNSW ef must be >= 1");
  HnswIndex idx;
  idx.params_ = params;
  idx.dim_ = store.dim();

  std::vector<std::string> ids(store.ids().begin(), store.ids().end());
  std::sort(ids.begin(), ids.end());
  idx.ids_ = ids;
  idx.data_.reserve(ids.size() * idx.dim_);
  for (const auto& id : ids) {
    const auto& v = store.get(id);
    if (v.size() != idx.dim_) throw Error("vector " + id + " does not match the store dim");
    idx.data_.insert(idx.data_.end(), v.begin(), v.end());
  }
  idx.links_.resize(ids.size());

  Rng rng(params.seed);
  const double inv_log_m = 1.0 / std::log(static_cast<double>(params.M));
  for (std::uint32_t i = 0; i < ids.size(); ++i) {
    const double u = 1.0 - uniform01(rng);  // (0, 1]
    const int level = static_cast<int>(std::floor(-std::log(u) * inv_log_m));
    idx.insert(i, level);
  }
  return idx;
}

double HnswIndex::distance(const float* a, std::uint32_t b) const {
  const float* v = vec(b);
  double dot = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) dot += static_cast<double>(a[i]) * v[i];
  return 1.0 - dot;
}

std::vector<HnswIndex::Candidate> HnswIndex::search_layer(const float* q,
                                                         std::vector<Candidate> entry,
                                                         std::size_t ef, int layer,
                                                         const std::vector<bool>* allowed) const {
  auto& visited = visited_marks;
  visited.reset(ids_.size());
  std::priority_queue<Candidate, std::vector<Candidate>, std::greater<>> candidates;
  std::priority_queue<Candidate> results;  // worst on top
  for (const auto& e : entry) {
    if (!visited.mark(e.node)) continue;
    candidates.push(e);
    if (!allowed || (*allowed)[e.node]) results.push(e);
  }
  while (results.size() > ef) results.pop();

  while (!candidates.empty()) {
    const auto c = candidates.top();
    if (results.size() >= ef && results.top() < c) break;
    candidates.pop();
    for (auto n : links_[c.node][static_cast<std::size_t>(layer)]) {
      if (!visited.mark(n)) continue;
      const Candidate cand{distance(q, n), n};
      if (results.size() < ef || cand < results.top()) {
        candidates.push(cand);
        if (!allowed || (*allowed)[n]) {
          results.push(cand);
          if (results.size() > ef) results.pop();
        }
      }
    }
  }

  std::vector<Candidate> out;
  out.reserve(results.size());
  while (!results.empty()) {
    out.push_back(results.top());
    results.pop();
  }
  std::reverse(out.begin(), out.end());
  return out;
}

// Keeps a candidate only if it is closer to the base point than to every
// neighbour already kept.
std::vector<std::uint32_t> HnswIndex::select_neighbors(std::vector<Candidate> candidates,
                                                       std::size_t m) const {
  std::sort(candidates.begin(), candidates.end());
  std::vector<std::uint32_t> out;
  for (const auto& c : candidates) {
    if (out.size() >= m) break;
    bool keep = true;
    for (auto r : out) {
      if (distance(vec(c.node), r) < c.dist) {
        keep = false;
        break;
      }
    }
    if (keep) out.push_back(c.node);
  }
  return out;
}

void HnswIndex::insert(std::uint32_t node, int level) {
  links_[node].resize(static_cast<std::size_t>(level) + 1);
  if (max_level_ < 0) {
    entry_ = node;
    max_level_ = level;
    return;
  }
  const float* q = vec(node);
  std::vector<Candidate> ep{{distance(q, entry_), entry_}};
  for (int lc = max_level_; lc > level; --lc) {
    ep = search_layer(q, ep, 1, lc, nullptr);
  }
  for (int lc = std::min(level, max_level_); lc >= 0; --lc) {
    auto found = search_layer(q, ep, params_.ef_construction, lc, nullptr);
    const auto layer = static_cast<std::size_t>(lc);
    links_[node][layer] = select_neighbors(found, params_.M);
    const std::size_t cap = lc == 0 ? 2 * params_.M : params_.M;
    for (auto e : links_[node][layer]) {
      auto& adj = links_[e][layer];
      adj.push_back(node);
      if (adj.size() > cap) {
        std::vector<Candidate> cands;
        cands.reserve(adj.size());
        for (auto x : adj) cands.push_back({distance(vec(e), x), x});
        adj = select_neighbors(std::move(cands), cap);
      }
    }
    ep = std::move(found);
  }
  if (level > max_level_) {
    max_level_ = level;
    entry_ = node;
  }
}

std::vector<SearchHit> HnswIndex::search(const llmio::Vector& query, std::size_t k,
                                         std::size_t ef, const Filter& filter) const {
  if (query.size() != dim_) {
    throw Error("query has dimension " + std::to_string(query.size()) + ", index expects " +
                std::to_string(dim_));
  }
  if (ids_.empty() || k == 0) return {};

  std::vector<bool> allowed;
  std::size_t allowed_count = ids_.size();
  if (filter) {
    allowed.resize(ids_.size());
    allowed_count = 0;
    for (std::size_t i = 0; i < ids_.size(); ++i) {
      allowed[i] = filter(ids_[i]);
      allowed_count += allowed[i];
    }
  }
  const auto want = std::min(k, allowed_count);
  if (want == 0) return {};

  std::vector<Candidate> found;
  if (want < allowed_count) {
    ef = std::max(ef == 0 ? params_.ef_search : ef, k);
    std::vector<Candidate> ep{{distance(query.data(), entry_), entry_}};
    for (int lc = max_level_; lc > 0; --lc) ep = search_layer(query.data(), ep, 1, lc, nullptr);
    found = search_layer(query.data(), ep, ef, 0, filter ? &allowed : nullptr);
  }
  if (found.size() < want) {
    // Exhaustive regime: k covers every allowed node, or the filter starved
    // the graph walk.
    found.clear();
    for (std::uint32_t i = 0; i < ids_.size(); ++i) {
      if (!filter || allowed[i]) found.push_back({distance(query.data(), i), i});
    }
    std::sort(found.begin(), found.end());
  }
  found.resize(want);

  std::vector<SearchHit> out;
  out.reserve(want);
  for (const auto& c : found) out.push_back({ids_[c.node], 1.0 - c.dist});
  return out;
}

std::vector<std::pair<std::string, std::string>> HnswIndex::base_layer_pairs() const {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  for (std::uint32_t i = 0; i < links_.size(); ++i) {
    for (auto j : links_[i][0]) pairs.emplace_back(std::min(i, j), std::max(i, j));
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  std::vector<std::pair<std::string, std::string>> out;
  out.reserve(pairs.size());
  for (auto [a, b] : pairs) out.emplace_back(ids_[a], ids_[b]);
  return out;
}

}  // namespace noderag::enrich
