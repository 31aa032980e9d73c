#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "noderag/llmio/embed.hpp"

namespace noderag::enrich {

/// Embedding vectors keyed by node id.
///
/// File layout:
///   "HVEC v1 <dim> <count> <model_tag>\n"
///   per record, ids ascending: u32 LE id length, id bytes, dim x f32 LE
///   32 raw bytes: SHA-256 of everything before
class EmbeddingStore {
public:
  EmbeddingStore() = default;
  EmbeddingStore(std::string model_tag, std::size_t dim)
      : model_tag_(std::move(model_tag)), dim_(dim) {}

  const std::string& model_tag() const noexcept { return model_tag_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return ids_.size(); }

  /// Inserts or replaces; throws Error on a dimension mismatch.
  void put(const std::string& id, llmio::Vector v);
  bool contains(std::string_view id) const;
  const llmio::Vector& get(std::string_view id) const;  // throws Error if absent
  /// Ids in insertion order.
  std::span<const std::string> ids() const noexcept { return ids_; }

  std::string serialize() const;
  static EmbeddingStore deserialize(std::string_view bytes);
  void save(const std::filesystem::path& path) const;
  static EmbeddingStore load(const std::filesystem::path& path);

  bool operator==(const EmbeddingStore& other) const;

private:
  std::string model_tag_;
  std::size_t dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<llmio::Vector> vectors_;
  std::unordered_map<std::string, std::size_t> slot_;
};

}  // namespace noderag::enrich
