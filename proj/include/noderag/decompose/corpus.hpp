#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "noderag/common/text.hpp"

namespace noderag::decompose {

struct ChunkRecord {
  std::string doc_id;
  std::string chunk_id;
  std::string text;
  std::size_t token_count = 0;

  bool operator==(const ChunkRecord&) const = default;
};

struct ChunkingOptions {
  std::size_t window_tokens = 1000;
  std::size_t overlap_tokens = 100;
};

/// Fixed-size token windows; consecutive windows share `overlap_tokens`.
/// Chunk ids are "<doc_id>#<4-digit ordinal>".
std::vector<ChunkRecord> chunk_document(std::string_view doc_id, std::string_view text,
                                        const ChunkingOptions& options,
                                        const Tokenizer& tokenizer);

/// Reads JSON-lines: {"doc_id", "chunk_id", "text"} rows are taken as-is,
/// {"doc_id", "text"} rows are chunked. Output is sorted by chunk_id.
/// Throws Error on malformed rows, empty text or duplicate chunk ids.
std::vector<ChunkRecord> read_corpus(const std::filesystem::path& path,
                                     const ChunkingOptions& options,
                                     const Tokenizer& tokenizer);
std::vector<ChunkRecord> parse_corpus(std::string_view jsonl, const ChunkingOptions& options,
                                      const Tokenizer& tokenizer);

}  // namespace noderag::decompose
