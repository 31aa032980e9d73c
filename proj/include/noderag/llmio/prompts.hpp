#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "noderag/common/error.hpp"
#include "noderag/llmio/chat.hpp"

namespace noderag::llmio {

namespace templates {
inline constexpr std::string_view kDecompose = "decompose";
inline constexpr std::string_view kAttribute = "attribute";
inline constexpr std::string_view kHighLevel = "high_level";
inline constexpr std::string_view kQueryEntities = "query_entities";
inline constexpr std::string_view kUnifiedAnswer = "unified_answer";
}  // namespace templates

/// Prompt text with `{name}` placeholders. Structured templates also carry a
/// description of the JSON object the model must return.
struct PromptTemplate {
  std::string name;
  std::string system;
  std::string user;
  std::string output_schema;  // empty for free-text answers
  std::vector<std::string> placeholders;
};

const PromptTemplate& prompt_template(std::string_view name);
std::vector<std::string> template_names();

/// Substitutes every placeholder; throws Error if one is missing from
/// `fields` or if `fields` names an unknown placeholder.
std::string render(std::string_view text, const std::map<std::string, std::string>& fields,
                   const std::vector<std::string>& placeholders);

/// Renders a template into a temperature-0 request.
ChatRequest make_request(std::string_view name, std::map<std::string, std::string> fields,
                         int max_output_tokens = 2048);

/// Extracts the first balanced top-level JSON object from model text
/// (tolerating code fences and surrounding prose). Throws ExtractionError.
nlohmann::json parse_json_object(std::string_view text);

/// Sends `request`, parses its JSON reply and hands it to `check`, which
/// throws ExtractionError on schema violations. On a parse or schema failure
/// one repair round-trip is made; a second failure throws ExtractionError.
template <typename Check>
nlohmann::json chat_json(ChatClient& client, const ChatRequest& request, Check&& check);

ChatRequest make_repair_request(const ChatRequest& original, std::string_view bad_reply,
                                std::string_view problem);

template <typename Check>
nlohmann::json chat_json(ChatClient& client, const ChatRequest& request, Check&& check) {
  const auto first = client.chat(request);
  std::string problem;
  try {
    auto j = parse_json_object(first);
    check(j);
    return j;
  } catch (const std::exception& e) {
    problem = e.what();
  }
  const auto second = client.chat(make_repair_request(request, first, problem));
  try {
    auto j = parse_json_object(second);
    check(j);
    return j;
  } catch (const ExtractionError&) {
    throw;
  } catch (const std::exception& e) {
    throw ExtractionError(std::string("unusable model output after repair: ") + e.what());
  }
}

}  // namespace noderag::llmio
