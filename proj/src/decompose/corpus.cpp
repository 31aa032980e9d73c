#include "noderag/decompose/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "noderag/common/error.hpp"

namespace noderag::decompose {

std::vector<ChunkRecord> chunk_document(std::string_view doc_id, std::string_view text,
                                        const ChunkingOptions& options,
                                        const Tokenizer& tokenizer) {
  if (options.window_tokens == 0 || options.overlap_tokens >= options.window_tokens) {
    throw Error("chunking requires 0 <= overlap < window");
  }
  const auto spans = tokenizer.spans(text);
  std::vector<ChunkRecord> out;
  const std::size_t stride = options.window_tokens - options.overlap_tokens;
  for (std::size_t start = 0; start < spans.size(); start += stride) {
    const std::size_t end = std::min(spans.size(), start + options.window_tokens);
    char ordinal[16];
    std::snprintf(ordinal, sizeof ordinal, "%04zu", out.size());
    ChunkRecord c;
    c.doc_id = std::string(doc_id);
    c.chunk_id = std::string(doc_id) + "#" + ordinal;
    c.text = std::string(text.substr(spans[start].begin, spans[end - 1].end - spans[start].begin));
    c.token_count = end - start;
    out.push_back(std::move(c));
    if (end == spans.size()) break;
  }
  return out;
}

std::vector<ChunkRecord> parse_corpus(std::string_view jsonl, const ChunkingOptions& options,
                                      const Tokenizer& tokenizer) {
  std::vector<ChunkRecord> chunks;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    auto nl = jsonl.find('\n', pos);
    if (nl == std::string_view::npos) nl = jsonl.size();
    const auto line = trim(jsonl.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty()) continue;

    nlohmann::json row;
    try {
      row = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error("corpus line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!row.is_object() || !row.contains("text") || !row["text"].is_string()) {
      throw Error("corpus line " + std::to_string(line_no) + ": expected an object with text");
    }
    const auto text = row["text"].get<std::string>();
    if (trim(text).empty()) {
      throw Error("corpus line " + std::to_string(line_no) + ": empty text");
    }
    const auto doc_id = row.contains("doc_id") ? row["doc_id"].get<std::string>()
                                                : "doc" + std::to_string(line_no);
    if (row.contains("chunk_id")) {
      ChunkRecord c{doc_id, row["chunk_id"].get<std::string>(), text, tokenizer.count(text)};
      chunks.push_back(std::move(c));
    } else {
      auto doc_chunks = chunk_document(doc_id, text, options, tokenizer);
      chunks.insert(chunks.end(), std::make_move_iterator(doc_chunks.begin()),
                    std::make_move_iterator(doc_chunks.end()));
    }
  }

  std::sort(chunks.begin(), chunks.end(),
            [](const ChunkRecord& a, const ChunkRecord& b) { return a.chunk_id < b.chunk_id; });
  for (std::size_t i = 1; i < chunks.size(); ++i) {
    if (chunks[i].chunk_id == chunks[i - 1].chunk_id) {
      throw Error("duplicate chunk id " + chunks[i].chunk_id);
    }
  }
  return chunks;
}

std::vector<ChunkRecord> read_corpus(const std::filesystem::path& path,
                                     const ChunkingOptions& options,
                                     const Tokenizer& tokenizer) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open corpus " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_corpus(ss.str(), options, tokenizer);
}

}  // namespace noderag::decompose
