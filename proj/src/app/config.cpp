#include "noderag/app/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "noderag/common/error.hpp"

extern char** environ;

namespace noderag::app {
namespace {

// Every persisted setting, keyed "section.name". The API key is absent on
// purpose.
template <typename Config, typename F>
void visit_fields(Config& c, F&& f) {
  f("chunking.chunk_tokens", c.chunk_tokens);
  f("chunking.overlap", c.chunk_overlap);
  f("extraction.parallelism", c.extraction_parallelism);
  f("augment.betweenness_pivots", c.betweenness_pivots);
  f("augment.betweenness_seed", c.betweenness_seed);
  f("augment.core_log_base", c.core_log_base);
  f("augment.leiden_seed", c.leiden_seed);
  f("augment.leiden_resolution", c.leiden_resolution);
  f("augment.kmeans_seed", c.kmeans_seed);
  f("augment.high_level_budget_tokens", c.high_level_budget_tokens);
  f("hnsw.m", c.hnsw_m);
  f("hnsw.ef_construction", c.hnsw_ef_construction);
  f("hnsw.ef_search", c.hnsw_ef_search);
  f("hnsw.seed", c.hnsw_seed);
  f("retrieval.alpha", c.alpha);
  f("retrieval.iterations", c.iterations);
  f("retrieval.entry_k", c.entry_k);
  f("retrieval.k_per_type", c.k_per_type);
  f("retrieval.budget_tokens", c.budget_tokens);
  f("retrieval.include_text_entries", c.include_text_entries);
  f("provider.name", c.provider.name);
  f("provider.base_url", c.provider.base_url);
  f("provider.chat_model", c.provider.chat_model);
  f("provider.embedding_model", c.provider.embedding_model);
  f("provider.embedding_dim", c.provider.embedding_dim);
  f("provider.requests_per_minute", c.provider.requests_per_minute);
  f("provider.max_concurrent_requests", c.provider.max_concurrent_requests);
  f("provider.timeout_seconds", c.provider.timeout_seconds);
  f("paths.graph", c.graph_file);
  f("paths.vectors", c.vector_file);
}

std::pair<std::string, std::string> split_key(const std::string& key) {
  const auto dot = key.find('.');
  return {key.substr(0, dot), key.substr(dot + 1)};
}

std::string env_name(const std::string& key) {
  std::string out = "NODERAG_";
  for (char c : key) {
    out.push_back(c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  return out;
}

template <typename T>
void assign(const std::string& key, const YAML::Node& node, T& field) {
  try {
    field = node.as<T>();
  } catch (const YAML::Exception& e) {
    throw Error("config " + key + ": " + e.what());
  }
}

std::string scalar(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  std::string s(buf, end);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}
std::string scalar(bool x) { return x ? "true" : "false"; }
std::string scalar(const std::string& x) { return x; }
template <typename T>
std::string scalar(T x) {
  return std::to_string(x);
}

}  // namespace

void PipelineConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error("invalid config: " + what); };
  if (chunk_tokens == 0 || chunk_overlap >= chunk_tokens) fail("need 0 <= overlap < chunk_tokens");
  if (extraction_parallelism == 0) fail("extraction.parallelism must be >= 1");
  if (betweenness_pivots == 0) fail("augment.betweenness_pivots must be >= 1");
  log_base();
  if (!(leiden_resolution > 0.0)) fail("augment.leiden_resolution must be positive");
  if (high_level_budget_tokens == 0) fail("augment.high_level_budget_tokens must be positive");
  if (hnsw_m < 2) fail("hnsw.m must be >= 2");
  if (hnsw_ef_construction == 0 || hnsw_ef_search == 0) fail("hnsw ef values must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) fail("retrieval.alpha must lie in (0, 1)");
  if (iterations < 1) fail("retrieval.iterations must be >= 1");
  if (entry_k == 0) fail("retrieval.entry_k must be >= 1");
  if (budget_tokens == 0) fail("retrieval.budget_tokens must be positive");
  if (provider.name != "mock" && provider.name != "openai") {
    fail("provider.name must be mock or openai");
  }
  if (provider.embedding_dim == 0) fail("provider.embedding_dim must be positive");
  if (provider.embedding_model.find_first_of(" \t\n") != std::string::npos) {
    fail("provider.embedding_model must not contain whitespace");
  }
  if (provider.max_concurrent_requests == 0) fail("provider.max_concurrent_requests must be >= 1");
}

augment::LogBase PipelineConfig::log_base() const {
  if (core_log_base == "e") return augment::LogBase::Natural;
  if (core_log_base == "2") return augment::LogBase::Two;
  if (core_log_base == "10") return augment::LogBase::Ten;
  throw Error("invalid config: augment.core_log_base must be e, 2 or 10");
}

PipelineConfig parse_config(const std::string& yaml) {
  PipelineConfig config;
  YAML::Node root;
  try {
    root = YAML::Load(yaml);
  } catch (const YAML::Exception& e) {
    throw Error(std::string("config is not valid YAML: ") + e.what());
  }
  if (!root || root.IsNull()) return config;
  if (!root.IsMap()) throw Error("config must be a mapping of sections");

  std::set<std::string> known;
  visit_fields(config, [&](const std::string& key, auto& field) {
    known.insert(key);
    const auto [section, name] = split_key(key);
    const auto node = root[section];
    if (node && node.IsMap() && node[name]) assign(key, node[name], field);
  });
  for (const auto& section : root) {
    const auto s = section.first.as<std::string>();
    if (!section.second.IsMap()) throw Error("config section " + s + " must be a mapping");
    for (const auto& entry : section.second) {
      const auto key = s + "." + entry.first.as<std::string>();
      if (!known.count(key)) throw Error("unknown config key " + key);
    }
  }
  return config;
}

void apply_env_overrides(PipelineConfig& config, const std::map<std::string, std::string>& env) {
  visit_fields(config, [&](const std::string& key, auto& field) {
    auto it = env.find(env_name(key));
    if (it == env.end()) return;
    YAML::Node node;
    try {
      node = YAML::Load(it->second);
    } catch (const YAML::Exception& e) {
      throw Error(it->first + ": " + e.what());
    }
    assign(it->first, node, field);
  });
  if (auto it = env.find("NODERAG_API_KEY"); it != env.end()) config.provider.api_key = it->second;
}

std::map<std::string, std::string> process_env() {
  std::map<std::string, std::string> out;
  for (char** e = environ; e && *e; ++e) {
    std::string_view kv(*e);
    if (kv.rfind("NODERAG_", 0) != 0) continue;
    const auto eq = kv.find('=');
    if (eq == std::string_view::npos) continue;
    out.emplace(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return out;
}

PipelineConfig load_config(const std::optional<std::filesystem::path>& path) {
  PipelineConfig config;
  if (path) {
    std::ifstream in(*path);
    if (!in) throw Error("cannot read config " + path->string());
    std::ostringstream ss;
    ss << in.rdbuf();
    config = parse_config(ss.str());
  }
  apply_env_overrides(config, process_env());
  config.validate();
  return config;
}

std::string to_yaml(const PipelineConfig& config) {
  std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>> sections;
  visit_fields(config, [&](const std::string& key, const auto& field) {
    const auto [section, name] = split_key(key);
    if (sections.empty() || sections.back().first != section) sections.push_back({section, {}});
    sections.back().second.emplace_back(name, scalar(field));
  });
  YAML::Emitter out;
  out << YAML::BeginMap;
  for (const auto& [section, fields] : sections) {
    out << YAML::Key << section << YAML::Value << YAML::BeginMap;
    for (const auto& [name, value] : fields) out << YAML::Key << name << YAML::Value << value;
    out << YAML::EndMap;
  }
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace noderag::app
