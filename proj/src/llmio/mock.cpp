#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "noderag/common/error.hpp"
#include "noderag/common/hash.hpp"
#include "noderag/common/random.hpp"
#include "noderag/common/text.hpp"
#include "noderag/llmio/chat.hpp"
#include "noderag/llmio/embed.hpp"
#include "noderag/llmio/prompts.hpp"

namespace noderag::llmio {
namespace {

using nlohmann::json;

const std::set<std::string>& sentence_stopwords() {
  static const std::set<std::string> words = {
      "a",    "an",   "and",   "as",  "at",    "but",  "by",   "during", "for",   "from",
      "he",   "her",  "his",   "how", "i",     "if",   "in",   "it",     "its",   "meanwhile",
      "on",   "our",  "she",   "so",  "that",  "the",  "their", "then",  "there", "these",
      "they", "this", "those", "to",  "we",    "what", "when", "where",  "which", "who",
      "why",  "with", "yet",   "you", "after", "before", "did", "does",  "do",    "is",
      "was",  "were", "are",   "has", "have",  "had",  "can",  "could",  "will",  "would",
  };
  return words;
}

struct Word {
  std::size_t begin;
  std::size_t end;
};

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    const bool terminal = c == '.' || c == '!' || c == '?';
    const bool boundary = i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1]));
    if (terminal && boundary) {
      auto s = trim(text.substr(start, i + 1 - start));
      if (!s.empty()) out.emplace_back(s);
      start = i + 1;
    }
  }
  auto tail = trim(text.substr(std::min(start, text.size())));
  if (!tail.empty()) out.emplace_back(tail);
  return out;
}

/// Runs of capitalized words, skipping a sentence-initial function word.
std::vector<Word> capitalized_runs(std::string_view s) {
  std::vector<Word> words;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    if (std::isalnum(c) || c == '-' || c == '\'') {
      std::size_t j = i;
      while (j < s.size()) {
        const auto d = static_cast<unsigned char>(s[j]);
        if (!(std::isalnum(d) || d == '-' || d == '\'')) break;
        ++j;
      }
      words.push_back({i, j});
      i = j;
    } else {
      ++i;
    }
  }

  std::vector<Word> runs;
  bool first_word = true;
  std::optional<Word> current;
  for (const auto& w : words) {
    const bool cap = std::isupper(static_cast<unsigned char>(s[w.begin])) != 0;
    std::string lower = normalize_title(s.substr(w.begin, w.end - w.begin));
    const bool skip = first_word && sentence_stopwords().contains(lower);
    first_word = false;
    // Words joined by anything other than a single space break a run.
    const bool adjacent = current && w.begin == current->end + 1 && s[current->end] == ' ';
    if (cap && !skip && w.end - w.begin > 1) {
      if (current && adjacent) {
        current->end = w.end;
      } else {
        if (current) runs.push_back(*current);
        current = w;
      }
    } else if (current) {
      runs.push_back(*current);
      current.reset();
    }
  }
  if (current) runs.push_back(*current);
  return runs;
}

json mock_decompose(const std::string& text) {
  json units = json::array();
  for (const auto& sentence : split_sentences(text)) {
    json entities = json::array();
    json relationships = json::array();
    std::vector<std::string> names;
    const auto runs = capitalized_runs(sentence);
    for (const auto& r : runs) {
      auto name = sentence.substr(r.begin, r.end - r.begin);
      if (std::find(names.begin(), names.end(), name) == names.end()) {
        names.push_back(name);
        entities.push_back(name);
      }
    }
    for (std::size_t k = 1; k < runs.size(); ++k) {
      auto src = sentence.substr(runs[k - 1].begin, runs[k - 1].end - runs[k - 1].begin);
      auto dst = sentence.substr(runs[k].begin, runs[k].end - runs[k].begin);
      if (normalize_title(src) == normalize_title(dst)) continue;
      auto phrase = sentence.substr(runs[k - 1].begin, runs[k].end - runs[k - 1].begin);
      relationships.push_back({{"source", src}, {"relation", phrase}, {"target", dst}});
    }
    units.push_back({{"text", sentence}, {"entities", entities}, {"relationships", relationships}});
  }
  return {{"semantic_units", units}};
}

json mock_high_level(const std::string& context) {
  std::map<std::string, int> freq;
  for (const auto& sentence : split_sentences(context)) {
    for (const auto& r : capitalized_runs(sentence)) {
      ++freq[sentence.substr(r.begin, r.end - r.begin)];
    }
  }
  std::string title = "General overview";
  int best = 0;
  for (const auto& [word, n] : freq) {
    if (n > best) {
      best = n;
      title = word;
    }
  }
  const auto& tok = default_tokenizer();
  const auto spans = tok.spans(context);
  const std::size_t take = std::min<std::size_t>(spans.size(), 40);
  std::string excerpt = take == 0 ? std::string() : context.substr(0, spans[take - 1].end);
  std::replace(excerpt.begin(), excerpt.end(), '\n', ' ');
  json element = {{"title", title},
                  {"content", "Key theme (" + title + "): " + std::string(trim(excerpt))}};
  return {{"elements", json::array({element})}};
}

json mock_query_entities(const std::string& query) {
  json entities = json::array();
  for (const auto& sentence : split_sentences(query)) {
    for (const auto& r : capitalized_runs(sentence)) {
      entities.push_back(sentence.substr(r.begin, r.end - r.begin));
    }
  }
  return {{"entities", entities}};
}

std::string field(const ChatRequest& req, const std::string& name) {
  auto it = req.fields.find(name);
  if (it == req.fields.end()) throw Error("mock chat: request lacks field '" + name + "'");
  return it->second;
}

}  // namespace

std::string flatten_prompt(const ChatRequest& request) {
  return request.system_prompt + "\n\n" + request.user_prompt;
}

ChatResponse MockChatClient::complete(const ChatRequest& request) {
  ChatResponse out;
  const auto& name = request.template_name;
  if (name == templates::kDecompose) {
    out.text = mock_decompose(field(request, "text")).dump();
  } else if (name == templates::kHighLevel) {
    out.text = mock_high_level(field(request, "context")).dump();
  } else if (name == templates::kQueryEntities) {
    out.text = mock_query_entities(field(request, "query")).dump();
  } else {
    out.text = "MOCK:" + sha256_hex(flatten_prompt(request)).substr(0, 8);
  }
  const auto& tok = default_tokenizer();
  out.usage.prompt_tokens = static_cast<std::int64_t>(tok.count(flatten_prompt(request)));
  out.usage.completion_tokens = static_cast<std::int64_t>(tok.count(out.text));
  return out;
}

ChatResponse AuditingChatClient::complete(const ChatRequest& request) {
  {
    std::lock_guard lock(mu_);
    log_.push_back(request);
  }
  return inner_->complete(request);
}

std::vector<ChatRequest> AuditingChatClient::requests() const {
  std::lock_guard lock(mu_);
  return log_;
}

void normalize(Vector& v) {
  double sq = 0.0;
  for (float x : v) sq += static_cast<double>(x) * x;
  if (sq <= 0.0 || !std::isfinite(sq)) throw Error("cannot normalize a zero or non-finite vector");
  const double inv = 1.0 / std::sqrt(sq);
  for (auto& x : v) x = static_cast<float>(x * inv);
}

Vector MockEmbedder::embed_one(const std::string& text) const {
  const auto digest = sha256(text);
  std::seed_seq seq(digest.begin(), digest.end());
  Rng rng(seq);
  Vector v(dim_);
  for (std::size_t i = 0; i < dim_; i += 2) {
    const double u1 = 1.0 - uniform01(rng);  // (0, 1]
    const double u2 = uniform01(rng);
    const double r = std::sqrt(-2.0 * std::log(u1));
    v[i] = static_cast<float>(r * std::cos(2.0 * M_PI * u2));
    if (i + 1 < dim_) v[i + 1] = static_cast<float>(r * std::sin(2.0 * M_PI * u2));
  }
  normalize(v);
  return v;
}

std::vector<Vector> MockEmbedder::embed(std::span<const std::string> texts) {
  std::vector<Vector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    if (t.empty()) throw Error("mock embed: empty text");
    out.push_back(embed_one(t));
  }
  return out;
}

}  // namespace noderag::llmio
