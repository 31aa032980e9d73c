// noderag: index / query / stats / bench over a persisted heterograph index.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "noderag/app/pipeline.hpp"
#include "noderag/decompose/corpus.hpp"

namespace {

using namespace noderag;
namespace fs = std::filesystem;

enum Exit : int { kOk = 0, kFailure = 1, kUsage = 2, kMissingIndex = 3, kProvider = 4 };

struct UsageError : Error {
  using Error::Error;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw UsageError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool is_provider_failure(const std::exception& e) {
  return dynamic_cast<const TransportError*>(&e) || dynamic_cast<const AuthError*>(&e) ||
         dynamic_cast<const RetriesExhaustedError*>(&e) ||
         dynamic_cast<const ContextLengthError*>(&e) || dynamic_cast<const SynthesisError*>(&e) ||
         dynamic_cast<const QueryError*>(&e);
}

int cmd_index(const fs::path& corpus, const fs::path& out, const std::optional<fs::path>& cfg) {
  const auto config = app::load_config(cfg);
  const decompose::ChunkingOptions chunking{config.chunk_tokens, config.chunk_overlap};
  if (!fs::exists(corpus)) throw UsageError("corpus file not found: " + corpus.string());
  const auto chunks = decompose::read_corpus(corpus, chunking, default_tokenizer());
  if (chunks.empty()) throw UsageError("corpus " + corpus.string() + " is empty");
  const auto clients = app::make_clients(config);
  const auto report = app::index_corpus(chunks, config, clients, out);
  std::cout << app::render_stats_table(report.stats);
  const auto& m = report.merge;
  std::cout << "edges: " << m.structural << " structural + " << m.inserted << " hnsw - "
            << m.overlap << " overlap = " << m.total << "\n";
  if (!report.decomposition.failures.empty()) {
    std::cout << report.decomposition.failures.size() << " chunk(s) failed extraction, see "
              << (out / app::files::kFailedChunks).string() << "\n";
  }
  return kOk;
}

int cmd_query(const fs::path& dir, const std::string& query, std::optional<std::size_t> budget,
              const std::optional<fs::path>& trace) {
  const auto index = app::load_index(dir);
  const auto clients = app::make_clients(index->config);
  try {
    const auto r = app::run_query(*index, clients, query, budget);
    for (const auto& n : r.notices) std::cerr << "notice: " << n << "\n";
    std::cout << r.answer.value_or("") << "\n";
    if (trace) {
      std::ofstream out(*trace);
      if (!out) throw Error("cannot write trace " + trace->string());
      out << retrieve::trace_json(index->graph, r).dump(2) << "\n";
    }
  } catch (const SynthesisError& e) {
    std::cerr << "error: " << e.what() << "\n--- retrieved context ---\n" << e.context();
    return kProvider;
  }
  return kOk;
}

int cmd_stats(const fs::path& dir) {
  const auto index = app::load_index(dir);
  std::cout << app::render_stats_table(app::compute_stats(index->graph));
  return kOk;
}

int cmd_bench(const fs::path& dir, const fs::path& queries_file, std::size_t concurrency) {
  const auto queries = app::read_queries(slurp(queries_file));
  if (queries.empty()) throw UsageError("query file " + queries_file.string() + " is empty");
  const auto index = app::load_index(dir);
  const auto clients = app::make_clients(index->config);
  std::cout << app::render_bench(app::run_bench(*index, clients, queries, concurrency));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"graph-structured retrieval over a heterograph index"};
  cli.require_subcommand(1);
  bool verbose = false;
  cli.add_flag("-v,--verbose", verbose, "log pipeline progress to stderr");

  fs::path corpus, out_dir, index_dir, queries_file;
  std::optional<fs::path> config_path, trace_path;
  std::optional<std::size_t> budget;
  std::string query;
  std::size_t concurrency = 1;

  auto* index = cli.add_subcommand("index", "build an index from a JSONL corpus");
  index->add_option("--corpus", corpus, "JSONL corpus")->required();
  index->add_option("--out", out_dir, "index directory")->required();
  index->add_option("--config", config_path, "YAML config");

  auto* q = cli.add_subcommand("query", "answer one query");
  q->add_option("--index", index_dir)->required();
  q->add_option("query", query)->required();
  q->add_option("--budget", budget, "context budget in tokens")->check(CLI::PositiveNumber);
  q->add_option("--trace", trace_path, "write the retrieval trace as JSON");

  auto* stats = cli.add_subcommand("stats", "print the per-type census");
  stats->add_option("--index", index_dir)->required();

  auto* bench = cli.add_subcommand("bench", "time a JSONL query file");
  bench->add_option("--index", index_dir)->required();
  bench->add_option("--queries", queries_file)->required();
  bench->add_option("--concurrency", concurrency)->check(CLI::PositiveNumber);

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  spdlog::set_default_logger(spdlog::default_logger()->clone("noderag"));
  spdlog::set_level(verbose ? spdlog::level::info : spdlog::level::warn);

  try {
    if (*index) return cmd_index(corpus, out_dir, config_path);
    if (*q) return cmd_query(index_dir, query, budget, trace_path);
    if (*stats) return cmd_stats(index_dir);
    return cmd_bench(index_dir, queries_file, concurrency);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const app::MissingIndexError& e) {
    std::cerr << "missing index: " << e.what() << "\n";
    return kMissingIndex;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_provider_failure(e) ? kProvider : kFailure;
  }
}
