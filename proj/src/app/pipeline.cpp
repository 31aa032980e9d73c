#include "noderag/app/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "noderag/augment/leiden.hpp"
#include "noderag/common/hash.hpp"
#include "noderag/common/parallel.hpp"
#include "noderag/hgraph/persistence.hpp"
#include "noderag/llmio/http.hpp"

namespace noderag::app {

using hgraph::EdgeKind;
using hgraph::HeteroGraph;
using hgraph::NodeType;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, std::string_view bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + p.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed for " + p.string());
}

// Identifies a corpus together with everything that shapes its G1.
std::string corpus_fingerprint(std::span<const decompose::ChunkRecord> chunks,
                               const PipelineConfig& config) {
  Sha256 h;
  h.update(config.provider.name);
  h.update("\x1e");
  h.update(config.provider.chat_model);
  h.update("\x1e");
  for (const auto& c : chunks) {
    h.update(c.chunk_id);
    h.update("\x1f");
    h.update(c.text);
    h.update("\x1e");
  }
  return to_hex(h.finish());
}

std::vector<decompose::ChunkRecord> sorted_chunks(std::span<const decompose::ChunkRecord> chunks) {
  std::vector<decompose::ChunkRecord> out(chunks.begin(), chunks.end());
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.chunk_id < b.chunk_id; });
  return out;
}

json to_json(const decompose::DecompositionReport& r) {
  json failures = json::array();
  for (const auto& f : r.failures) failures.push_back({{"chunk_id", f.chunk_id}, {"error", f.error}});
  return {{"chunks_total", r.chunks_total},
          {"chunks_ok", r.chunks_ok},
          {"orphan_entities", r.orphan_entities},
          {"failures", failures}};
}

decompose::DecompositionReport decomposition_from_json(const json& j) {
  decompose::DecompositionReport r;
  r.chunks_total = j.at("chunks_total").get<std::size_t>();
  r.chunks_ok = j.at("chunks_ok").get<std::size_t>();
  r.orphan_entities = j.at("orphan_entities").get<std::size_t>();
  for (const auto& f : j.at("failures")) {
    r.failures.push_back({f.at("chunk_id").get<std::string>(), f.at("error").get<std::string>()});
  }
  return r;
}

}  // namespace

Clients make_clients(const PipelineConfig& config) {
  const auto& p = config.provider;
  llmio::set_global_request_ceiling(p.max_concurrent_requests);
  Clients c;
  if (p.name == "mock") {
    c.chat = std::make_shared<llmio::MockChatClient>();
    c.embedder = std::make_shared<llmio::MockEmbedder>(p.embedding_dim);
    return c;
  }
  if (p.api_key.empty()) throw AuthError("NODERAG_API_KEY is not set");
  llmio::EndpointConfig chat{p.base_url, p.chat_model, p.api_key, {}, p.requests_per_minute,
                             std::chrono::seconds(p.timeout_seconds)};
  auto embed = chat;
  embed.model = p.embedding_model;
  c.chat = std::make_shared<llmio::OpenAiChatClient>(chat);
  c.embedder = std::make_shared<llmio::OpenAiEmbedder>(embed, p.embedding_dim);
  return c;
}

GraphStats compute_stats(const HeteroGraph& g) {
  GraphStats s;
  s.T = g.count(NodeType::Text);
  s.S = g.count(NodeType::SemanticUnit);
  s.N = g.count(NodeType::Entity);
  s.R = g.count(NodeType::Relationship);
  s.A = g.count(NodeType::Attribute);
  s.O = g.count(NodeType::HighLevelOverview);
  s.H = g.count(NodeType::HighLevelElement);
  s.nodes = g.node_count();
  for (const auto& e : g.edges()) {
    const bool structural = e.kinds.structural();
    const bool semantic = e.kinds.contains(EdgeKind::Semantic);
    s.non_hnsw_edges += structural;
    s.hnsw_edges += semantic;
    s.overlap += structural && semantic;
  }
  s.edges = g.edge_count();
  return s;
}

json to_json(const GraphStats& s) {
  return {{"T", s.T},
          {"S", s.S},
          {"N", s.N},
          {"R", s.R},
          {"A", s.A},
          {"O", s.O},
          {"H", s.H},
          {"nodes", s.nodes},
          {"non_hnsw_edges", s.non_hnsw_edges},
          {"hnsw_edges", s.hnsw_edges},
          {"overlap", s.overlap},
          {"edges", s.edges}};
}

std::string render_stats_table(const GraphStats& s) {
  const std::vector<std::pair<std::string, std::size_t>> cols = {
      {"T", s.T},         {"S", s.S},
      {"N", s.N},         {"R", s.R},
      {"A", s.A},         {"O", s.O},
      {"H", s.H},         {"nodes", s.nodes},
      {"non-HNSW edges", s.non_hnsw_edges}, {"HNSW edges", s.hnsw_edges},
      {"edges", s.edges}};
  std::string head, row;
  for (const auto& [name, value] : cols) {
    const auto v = std::to_string(value);
    const auto w = std::max(name.size(), v.size()) + 2;
    head += std::string(w - name.size(), ' ') + name;
    row += std::string(w - v.size(), ' ') + v;
  }
  return head + "\n" + row + "\n";
}

json to_json(const IndexReport& r) {
  json attrs = json::array();
  for (const auto& [entity, a] : r.attributes.created) attrs.push_back({{"entity", entity}, {"attribute", a}});
  json gen_failures = json::array();
  for (const auto& f : r.attributes.failures) {
    gen_failures.push_back({{"stage", "attribute"}, {"subject", f.subject}, {"error", f.error}});
  }
  for (const auto& f : r.high_level.failures) {
    gen_failures.push_back({{"stage", "high_level"}, {"subject", f.subject}, {"error", f.error}});
  }
  return {
      {"decomposition", to_json(r.decomposition)},
      {"resumed_from_checkpoint", r.resumed_from_checkpoint},
      {"importance",
       {{"k_default", r.importance.k_default},
        {"kcore_set", r.importance.kcore_set},
        {"betweenness_set", r.importance.betweenness_set},
        {"mean_betweenness", r.importance.mean_betweenness},
        {"scale", r.importance.scale},
        {"important", r.importance.important},
        {"warnings", r.importance.warnings}}},
      {"attributes", attrs},
      {"communities", r.communities},
      {"high_level_elements", r.high_level.elements.size()},
      {"communities_without_context", r.high_level.communities_without_context},
      {"generation_failures", gen_failures},
      {"kmeans", {{"k", r.kmeans_k}, {"k_effective", r.kmeans_k_effective}}},
      {"semantic_edges", r.semantic_edges},
      {"isolated_text_chunks", r.text.isolated_chunks},
      {"merge",
       {{"structural", r.merge.structural},
        {"inserted", r.merge.inserted},
        {"overlap", r.merge.overlap},
        {"total", r.merge.total}}},
      {"stats", to_json(r.stats)},
  };
}

IndexResult build_index(std::span<const decompose::ChunkRecord> input, const PipelineConfig& config,
                        const Clients& clients, const StageObserver& observer,
                        std::optional<decompose::InitialGraph> initial) {
  config.validate();
  const auto chunks = sorted_chunks(input);
  auto& chat = *clients.chat;
  auto& embedder = *clients.embedder;

  IndexResult out;
  auto& report = out.report;
  out.store = enrich::EmbeddingStore(embedder.model_tag(), embedder.dim());
  auto notify = [&](std::string_view stage) {
    spdlog::info("stage {}: {} nodes, {} edges", stage, out.graph.node_count(),
                 out.graph.edge_count());
    if (observer) observer(stage, out.graph, out.store);
  };

  if (!initial) {
    initial = decompose::build_initial_graph(chunks, chat, config.extraction_parallelism);
  }
  // A reload stores edges sorted by endpoint, which reorders incidence lists.
  // Canonicalize here so fresh and resumed runs agree downstream.
  out.graph = hgraph::deserialize(hgraph::serialize(initial->graph));
  report.decomposition = std::move(initial->report);
  notify(stages::kDecomposed);

  report.importance = augment::select_important_entities(
      out.graph, {config.betweenness_pivots, config.betweenness_seed, config.log_base()});
  report.attributes = augment::attach_attributes(out.graph, report.importance.important, chat,
                                                 config.extraction_parallelism);
  notify(stages::kAttributes);

  const auto partition = augment::detect_communities(
      out.graph, {.resolution = config.leiden_resolution, .seed = config.leiden_seed});
  report.communities = partition.community_count;
  report.high_level = augment::extract_high_level(
      out.graph, partition, chat,
      {config.high_level_budget_tokens, config.extraction_parallelism, nullptr});
  notify(stages::kHighLevel);

  enrich::embed_retrievables(out.graph, embedder, out.store);
  const auto match = augment::semantic_match_edges(out.graph, out.store, {config.kmeans_seed, 100});
  report.kmeans_k = match.k_requested;
  report.kmeans_k_effective = match.k_effective;
  report.semantic_edges = match.edges.size();
  notify(stages::kSemanticMatch);

  report.text = enrich::insert_text_nodes(out.graph, chunks);
  enrich::embed_retrievables(out.graph, embedder, out.store);
  notify(stages::kText);

  const auto index = enrich::HnswIndex::build(
      out.store, {config.hnsw_m, config.hnsw_ef_construction, config.hnsw_ef_search,
                  config.hnsw_seed});
  report.merge = enrich::merge_base_layer(out.graph, index);
  out.graph.freeze();
  report.stats = compute_stats(out.graph);
  notify(stages::kMerged);
  return out;
}

IndexReport index_corpus(std::span<const decompose::ChunkRecord> input,
                         const PipelineConfig& config, const Clients& clients,
                         const fs::path& out_dir, const StageObserver& observer) {
  config.validate();
  const auto chunks = sorted_chunks(input);
  if (chunks.empty()) throw IndexingError("cannot index an empty corpus");
  fs::create_directories(out_dir);

  const auto fingerprint = corpus_fingerprint(chunks, config);
  const auto checkpoint = out_dir / files::kCheckpoint;
  const auto meta_path = out_dir / files::kCheckpointMeta;
  std::optional<decompose::InitialGraph> g1;
  if (fs::exists(checkpoint) && fs::exists(meta_path)) {
    try {
      const auto meta = json::parse(read_file(meta_path));
      if (meta.at("fingerprint").get<std::string>() == fingerprint) {
        g1 = decompose::InitialGraph{hgraph::load(checkpoint),
                                     decomposition_from_json(meta.at("decomposition"))};
        spdlog::info("resuming from checkpoint {}", checkpoint.string());
      }
    } catch (const std::exception& e) {
      spdlog::warn("ignoring unusable checkpoint: {}", e.what());
      g1.reset();
    }
  }
  const bool resumed = g1.has_value();
  if (!g1) {
    g1 = decompose::build_initial_graph(chunks, *clients.chat, config.extraction_parallelism);
    hgraph::save(g1->graph, checkpoint);
    write_file(meta_path, json{{"fingerprint", fingerprint},
                               {"decomposition", to_json(g1->report)}}
                                  .dump(2) +
                              "\n");
  }
  write_file(out_dir / files::kFailedChunks, decompose::failures_jsonl(g1->report));

  auto result = build_index(chunks, config, clients, observer, std::move(g1));
  result.report.resumed_from_checkpoint = resumed;

  hgraph::save(result.graph, out_dir / config.graph_file);
  result.store.save(out_dir / config.vector_file);
  write_file(out_dir / files::kConfig, to_yaml(config));
  write_file(out_dir / files::kStats, to_json(result.report.stats).dump(2) + "\n");
  write_file(out_dir / files::kReport, to_json(result.report).dump(2) + "\n");
  return result.report;
}

std::unique_ptr<LoadedIndex> load_index(const fs::path& dir,
                                        std::optional<std::map<std::string, std::string>> env) {
  if (!fs::is_directory(dir)) throw MissingIndexError("no index directory at " + dir.string());
  const auto config_path = dir / files::kConfig;
  if (!fs::exists(config_path)) throw MissingIndexError("index lacks " + config_path.string());

  auto out = std::make_unique<LoadedIndex>();
  out->config = parse_config(read_file(config_path));
  apply_env_overrides(out->config, env ? *env : process_env());
  out->config.validate();
  const auto& c = out->config;

  const auto graph_path = dir / c.graph_file;
  const auto vector_path = dir / c.vector_file;
  if (!fs::exists(graph_path)) throw MissingIndexError("index lacks " + graph_path.string());
  if (!fs::exists(vector_path)) throw MissingIndexError("index lacks " + vector_path.string());
  out->graph = hgraph::load(graph_path);
  out->graph.freeze();
  out->store = enrich::EmbeddingStore::load(vector_path);
  out->hnsw = std::make_unique<enrich::HnswIndex>(enrich::HnswIndex::build(
      out->store, {c.hnsw_m, c.hnsw_ef_construction, c.hnsw_ef_search, c.hnsw_seed}));
  retrieve::RetrievalOptions options;
  options.alpha = c.alpha;
  options.iterations = c.iterations;
  options.entry_k = c.entry_k;
  options.k_per_type = c.k_per_type;
  options.budget_tokens = c.budget_tokens;
  options.include_text_entries = c.include_text_entries;
  out->engine = std::make_unique<retrieve::QueryEngine>(out->graph, *out->hnsw, options);
  return out;
}

retrieve::RetrievalResult run_query(const LoadedIndex& index, const Clients& clients,
                                    const std::string& query, std::optional<std::size_t> budget) {
  auto& embedder = *clients.embedder;
  if (embedder.model_tag() != index.store.model_tag() || embedder.dim() != index.store.dim()) {
    throw Error("embedder " + embedder.model_tag() + " (dim " + std::to_string(embedder.dim()) +
                ") does not match the index vectors " + index.store.model_tag() + " (dim " +
                std::to_string(index.store.dim()) + ")");
  }
  const auto plan = retrieve::plan_query(query, *clients.chat, embedder);
  return index.engine->answer(plan, *clients.chat, budget);
}

std::vector<std::string> read_queries(std::string_view jsonl) {
  std::vector<std::string> out;
  std::size_t pos = 0, line_no = 0;
  while (pos < jsonl.size()) {
    auto nl = jsonl.find('\n', pos);
    if (nl == std::string_view::npos) nl = jsonl.size();
    const auto line = trim(jsonl.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = json::parse(line);
      out.push_back(j.at("query").get<std::string>());
    } catch (const json::exception& e) {
      throw Error("query file line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

BenchReport run_bench(const LoadedIndex& index, const Clients& clients,
                      std::span<const std::string> queries, std::size_t concurrency) {
  BenchReport report;
  report.tokenizer = index.engine->tokenizer().name();
  auto rows = bounded_map<BenchRow>(queries.size(), concurrency, [&](std::size_t i) {
    BenchRow row;
    row.query = queries[i];
    const auto start = std::chrono::steady_clock::now();
    try {
      const auto r = run_query(index, clients, queries[i]);
      row.ok = true;
      row.tokens = r.context.token_count;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return row;
  });

  std::vector<double> seconds;
  double tokens = 0.0;
  for (auto& r : rows) {
    auto row = std::move(*r.value);
    if (row.ok) {
      seconds.push_back(row.seconds);
      tokens += static_cast<double>(row.tokens);
    } else {
      ++report.failures;
    }
    report.rows.push_back(std::move(row));
  }
  if (!seconds.empty()) {
    const auto n = static_cast<double>(seconds.size());
    for (double s : seconds) report.mean_seconds += s / n;
    report.mean_tokens = tokens / n;
    std::sort(seconds.begin(), seconds.end());
    const auto mid = seconds.size() / 2;
    report.median_seconds =
        seconds.size() % 2 ? seconds[mid] : (seconds[mid - 1] + seconds[mid]) / 2.0;
  }
  return report;
}

std::string render_bench(const BenchReport& r) {
  std::ostringstream out;
  out << "# retrieval tokens counted with tokenizer " << r.tokenizer << "\n";
  char line[256];
  std::snprintf(line, sizeof line, "%5s  %12s  %16s  %s\n", "#", "query_time_s", "retrieval_tokens",
                "query");
  out << line;
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const auto& row = r.rows[i];
    if (row.ok) {
      std::snprintf(line, sizeof line, "%5zu  %12.4f  %16zu  ", i + 1, row.seconds, row.tokens);
      out << line << row.query << "\n";
    } else {
      std::snprintf(line, sizeof line, "%5zu  %12.4f  %16s  ", i + 1, row.seconds, "FAILED");
      out << line << row.query << "  (" << row.error << ")\n";
    }
  }
  std::snprintf(line, sizeof line,
                "queries %zu  failures %zu  mean_query_time_s %.4f  median_query_time_s %.4f  "
                "mean_retrieval_tokens %.1f\n",
                r.rows.size(), r.failures, r.mean_seconds, r.median_seconds, r.mean_tokens);
  out << line;
  return out.str();
}

}  // namespace noderag::app
