#include "noderag/llmio/prompts.hpp"

#include <algorithm>
#include <set>

#include "noderag/common/error.hpp"

namespace noderag::llmio {
namespace {

// Adapted prompt set. Wording is our own; each structured template demands a
// single JSON object so replies parse the same way across providers.
std::vector<PromptTemplate> build_registry() {
  std::vector<PromptTemplate> r;

  r.push_back(PromptTemplate{
      std::string(templates::kDecompose),
      "You are an information extraction engine. Split the passage into semantic units: "
      "short, self-contained paraphrases that each describe one event or fact. For each unit "
      "list the named entities it mentions (people, places, organizations, concepts, objects) "
      "and the relationships it asserts between those entities. A relationship is written as a "
      "short sentence naming both entities, for example \"Hinton received Nobel Prize\". Use "
      "the entities' surface names exactly as they appear. Do not invent facts.",
      "Passage:\n{text}\n\nReturn only a JSON object of the form\n{schema}",
      R"({"semantic_units": [{"text": "<paraphrased unit>", "entities": ["<name>", ...], )"
      R"("relationships": [{"source": "<entity>", "relation": "<short sentence>", )"
      R"("target": "<entity>"}, ...]}, ...]})",
      {"text", "schema"}});

  r.push_back(PromptTemplate{
      std::string(templates::kAttribute),
      "You write concise entity profiles. Using only the statements provided, summarize what "
      "is known about the entity: who or what it is, its key properties, and how it relates to "
      "other entities. Do not add outside knowledge. Answer in one paragraph.",
      "Entity: {entity}\n\nStatements:\n{context}\n\nProfile:",
      "",
      {"entity", "context"}});

  r.push_back(PromptTemplate{
      std::string(templates::kHighLevel),
      "You analyse a cluster of closely related statements and extract high-level elements: "
      "summaries of the main themes, notable trends, sentiment, or other insights that span "
      "several statements. Give each element a keyword title of at most five words.",
      "Statements:\n{context}\n\nReturn only a JSON object of the form\n{schema}",
      R"({"elements": [{"title": "<keyword title>", "content": "<high-level insight>"}, ...]})",
      {"context", "schema"}});

  r.push_back(PromptTemplate{
      std::string(templates::kQueryEntities),
      "Extract the named entities from the question: people, places, organizations, concepts "
      "and objects that an index could contain as titles. Keep surface forms. Return an empty "
      "list when there are none.",
      "Question: {query}\n\nReturn only a JSON object of the form\n{schema}",
      R"({"entities": ["<name>", ...]})",
      {"query", "schema"}});

  r.push_back(PromptTemplate{
      std::string(templates::kUnifiedAnswer),
      "You are a helpful assistant answering questions from retrieved context. Base the answer "
      "on the context; if it is insufficient, say what is missing. Be direct and concise.",
      "Context:\n{context}\n\nQuestion: {query}\n\nAnswer:",
      "",
      {"context", "query"}});

  return r;
}

const std::vector<PromptTemplate>& registry() {
  static const std::vector<PromptTemplate> r = build_registry();
  return r;
}

}  // namespace

const PromptTemplate& prompt_template(std::string_view name) {
  for (const auto& t : registry()) {
    if (t.name == name) return t;
  }
  throw Error("unknown prompt template '" + std::string(name) + "'");
}

std::vector<std::string> template_names() {
  std::vector<std::string> out;
  for (const auto& t : registry()) out.push_back(t.name);
  return out;
}

std::string render(std::string_view text, const std::map<std::string, std::string>& fields,
                   const std::vector<std::string>& placeholders) {
  for (const auto& [k, v] : fields) {
    if (std::find(placeholders.begin(), placeholders.end(), k) == placeholders.end()) {
      throw Error("prompt field '" + k + "' has no placeholder");
    }
  }
  std::string out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '{') {
      const auto close = text.find('}', i);
      if (close != std::string_view::npos) {
        const std::string name(text.substr(i + 1, close - i - 1));
        if (std::find(placeholders.begin(), placeholders.end(), name) != placeholders.end()) {
          auto it = fields.find(name);
          if (it == fields.end()) throw Error("prompt placeholder '{" + name + "}' not filled");
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(text[i]);
    ++i;
  }
  return out;
}

ChatRequest make_request(std::string_view name, std::map<std::string, std::string> fields,
                         int max_output_tokens) {
  const auto& t = prompt_template(name);
  if (!t.output_schema.empty()) fields.emplace("schema", t.output_schema);
  ChatRequest req;
  req.template_name = t.name;
  req.system_prompt = render(t.system, fields, t.placeholders);
  req.user_prompt = render(t.user, fields, t.placeholders);
  req.fields = std::move(fields);
  req.temperature = 0.0;
  req.max_output_tokens = max_output_tokens;
  return req;
}

ChatRequest make_repair_request(const ChatRequest& original, std::string_view bad_reply,
                                std::string_view problem) {
  ChatRequest req = original;
  req.user_prompt += "\n\nYour previous reply could not be used (" + std::string(problem) +
                     "). Previous reply:\n" + std::string(bad_reply) +
                     "\n\nReply again with only the JSON object.";
  return req;
}

nlohmann::json parse_json_object(std::string_view text) {
  const auto start = text.find('{');
  if (start == std::string_view::npos) throw ExtractionError("no JSON object in model output");
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}' && --depth == 0) {
      try {
        return nlohmann::json::parse(text.substr(start, i - start + 1));
      } catch (const nlohmann::json::exception& e) {
        throw ExtractionError(std::string("malformed JSON in model output: ") + e.what());
      }
    }
  }
  throw ExtractionError("unterminated JSON object in model output");
}

}  // namespace noderag::llmio
