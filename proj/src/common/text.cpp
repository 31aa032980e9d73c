#include "noderag/common/text.hpp"

#include <cctype>

namespace noderag {
namespace {

bool is_space(unsigned char c) { return std::isspace(c) != 0; }
bool is_word(unsigned char c) { return c >= 0x80 || std::isalnum(c) != 0; }

std::string collapse(std::string_view text, bool strip_punct) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (unsigned char c : text) {
    if (strip_punct && c < 0x80 && std::ispunct(c)) continue;
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
  }
  return out;
}

}  // namespace

std::string_view trim(std::string_view text) {
  std::size_t b = 0;
  std::size_t e = text.size();
  while (b < e && is_space(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && is_space(static_cast<unsigned char>(text[e - 1]))) --e;
  return text.substr(b, e - b);
}

std::string normalize_title(std::string_view text) { return collapse(text, false); }

std::string normalize_for_match(std::string_view text) { return collapse(text, true); }

std::vector<TokenSpan> WordTokenizer::spans(std::string_view text) const {
  std::vector<TokenSpan> out;
  std::size_t i = 0;
  while (i < text.size()) {
    auto c = static_cast<unsigned char>(text[i]);
    if (is_space(c)) {
      ++i;
    } else if (is_word(c)) {
      std::size_t j = i;
      while (j < text.size() && is_word(static_cast<unsigned char>(text[j]))) ++j;
      out.push_back({i, j});
      i = j;
    } else {
      out.push_back({i, i + 1});
      ++i;
    }
  }
  return out;
}

std::size_t WordTokenizer::count(std::string_view text) const {
  std::size_t n = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    auto c = static_cast<unsigned char>(text[i]);
    if (is_space(c)) {
      ++i;
      continue;
    }
    ++n;
    if (is_word(c)) {
      while (i < text.size() && is_word(static_cast<unsigned char>(text[i]))) ++i;
    } else {
      ++i;
    }
  }
  return n;
}

const Tokenizer& default_tokenizer() {
  static const WordTokenizer tokenizer;
  return tokenizer;
}

}  // namespace noderag
