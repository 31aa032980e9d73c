#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace noderag {

/// Canonical form used for entity dedup: ASCII-lowercased, trimmed, inner
/// whitespace runs collapsed to a single space.
std::string normalize_title(std::string_view text);

/// Canonical form used for exact-match entry search: like normalize_title but
/// ASCII punctuation is removed as well.
std::string normalize_for_match(std::string_view text);

std::string_view trim(std::string_view text);

struct TokenSpan {
  std::size_t begin;
  std::size_t end;
};

/// Pluggable token counter. Chunk windows, context budgets and bench reports
/// are all measured in the units of whichever tokenizer is configured.
class Tokenizer {
public:
  virtual ~Tokenizer() = default;
  virtual std::string name() const = 0;
  virtual std::vector<TokenSpan> spans(std::string_view text) const = 0;
  virtual std::size_t count(std::string_view text) const { return spans(text).size(); }
};

/// Words (runs of alphanumerics and non-ASCII bytes) and single punctuation
/// characters are one token each; whitespace is free.
class WordTokenizer final : public Tokenizer {
public:
  std::string name() const override { return "word-punct-v1"; }
  std::vector<TokenSpan> spans(std::string_view text) const override;
  std::size_t count(std::string_view text) const override;
};

const Tokenizer& default_tokenizer();

}  // namespace noderag
