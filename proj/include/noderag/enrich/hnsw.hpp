#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "noderag/enrich/store.hpp"

namespace noderag::enrich {

struct HnswParams {
  std::size_t M = 16;
  std::size_t ef_construction = 200;
  std::size_t ef_search = 64;
  std::uint64_t seed = 99;
};

struct SearchHit {
  std::string id;
  double similarity;  // cosine
};

/// Hierarchical navigable small-world graph over cosine similarity.
/// Construction is single-threaded and inserts ids in ascending order, so
/// the same store and params always give identical layers.
class HnswIndex {
public:
  using Filter = std::function<bool(const std::string& id)>;

  /// Throws Error on M < 2, ef < 1, or vectors not matching the store dim.
  static HnswIndex build(const EmbeddingStore& store, const HnswParams& params = {});

  std::size_t size() const noexcept { return ids_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  const HnswParams& params() const noexcept { return params_; }
  int max_level() const noexcept { return max_level_; }
  std::uint32_t entry_point() const noexcept { return entry_; }
  const std::string& id(std::uint32_t node) const { return ids_.at(node); }
  int level(std::uint32_t node) const { return static_cast<int>(links_.at(node).size()) - 1; }
  std::span<const std::uint32_t> neighbors(std::uint32_t node, int layer) const {
    return links_.at(node).at(static_cast<std::size_t>(layer));
  }

  /// Top-k by descending similarity; ties broken by ascending id. `ef` of 0
  /// means params().ef_search. With a filter only passing ids are returned;
  /// if graph search finds fewer than k of them the allowed set is scanned
  /// exhaustively instead.
  std::vector<SearchHit> search(const llmio::Vector& query, std::size_t k, std::size_t ef = 0,
                                const Filter& filter = {}) const;

  /// Every undirected base-layer adjacency pair once, as (smaller id, larger id), sorted.
  std::vector<std::pair<std::string, std::string>> base_layer_pairs() const;

private:
  struct Candidate {
    double dist;
    std::uint32_t node;
    bool operator<(const Candidate& o) const {
      return dist < o.dist || (dist == o.dist && node < o.node);
    }
    bool operator>(const Candidate& o) const { return o < *this; }
  };

  double distance(const float* a, std::uint32_t b) const;
  const float* vec(std::uint32_t node) const { return data_.data() + std::size_t{node} * dim_; }
  std::vector<Candidate> search_layer(const float* q, std::vector<Candidate> entry,
                                      std::size_t ef, int layer,
                                      const std::vector<bool>* allowed) const;
  std::vector<std::uint32_t> select_neighbors(std::vector<Candidate> candidates,
                                              std::size_t m) const;
  void insert(std::uint32_t node, int level);

  HnswParams params_;
  std::size_t dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<float> data_;
  std::vector<std::vector<std::vector<std::uint32_t>>> links_;  // [node][layer]
  std::uint32_t entry_ = 0;
  int max_level_ = -1;
};

}  // namespace noderag::enrich
