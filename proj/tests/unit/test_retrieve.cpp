#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "noderag/common/error.hpp"
#include "noderag/llmio/prompts.hpp"
#include "noderag/retrieve/retrieve.hpp"
#include "support/fixture.hpp"
#include "support/oracles.hpp"

using namespace noderag;
using namespace noderag::retrieve;
using hgraph::EdgeKind;
using hgraph::HeteroGraph;
using hgraph::NodeIndex;
using hgraph::NodeType;

namespace {

class Fixed final : public llmio::ChatClient {
public:
  explicit Fixed(std::string reply) : reply_(std::move(reply)) {}
  llmio::ChatResponse complete(const llmio::ChatRequest&) override { return {reply_, {}}; }

private:
  std::string reply_;
};

class Broken final : public llmio::ChatClient {
public:
  llmio::ChatResponse complete(const llmio::ChatRequest&) override {
    throw TransportError("connection reset");
  }
};

class BrokenEmbedder final : public llmio::Embedder {
public:
  std::string model_tag() const override { return "mock-sha256-64"; }
  std::size_t dim() const override { return 64; }
  std::vector<llmio::Vector> embed(std::span<const std::string>) override {
    throw TransportError("down");
  }
};

// n S nodes joined by semantic edges; repeated pairs raise the weight.
HeteroGraph weighted_units(std::uint32_t n, std::size_t edges, std::uint64_t seed,
                           std::vector<std::vector<double>>* dense = nullptr) {
  std::mt19937_64 rng(seed);
  HeteroGraph g;
  for (std::uint32_t i = 0; i < n; ++i) {
    g.add_node(hgraph::make_semantic_unit("unit " + std::to_string(i), "c", i));
  }
  if (dense) dense->assign(n, std::vector<double>(n, 0.0));
  for (std::size_t t = 0; t < edges; ++t) {
    const auto u = static_cast<NodeIndex>(rng() % n), v = static_cast<NodeIndex>(rng() % n);
    if (u == v) continue;
    g.upsert_edge(u, v, EdgeKind::Semantic);
    if (dense) {
      (*dense)[u][v] += 1;
      (*dense)[v][u] += 1;
    }
  }
  return g;
}

// One node of every type, plus entries/cross built by hand.
struct Mixed {
  HeteroGraph g;
  std::string n, s1, s2, t1, o1, r1, h1;
};

Mixed mixed() {
  Mixed m;
  m.n = m.g.add_node(hgraph::make_entity("Hinton"));
  m.s1 = m.g.add_node(hgraph::make_semantic_unit("Hinton won a prize", "c#1", 0));
  m.s2 = m.g.add_node(hgraph::make_semantic_unit("The prize is old", "c#1", 1));
  m.t1 = m.g.add_node(hgraph::make_text("Hinton won a prize. The prize is old.", "c#1"));
  m.h1 = m.g.add_node(hgraph::make_high_level("prizes and winners", 0, 0));
  m.o1 = m.g.add_node(hgraph::make_overview("Prizes", m.h1));
  m.r1 = m.g.add_node(hgraph::make_relationship("Hinton won prize", "c#1/0"));
  return m;
}

QueryPlan plan(std::vector<std::string> entities, llmio::Vector v) {
  QueryPlan p;
  p.raw_query = "q";
  p.extracted_entities = std::move(entities);
  p.query_vector = std::move(v);
  return p;
}

}  // namespace

TEST(Plan, EntitiesFromExtractor) {
  Fixed ex(R"({"entities": ["Harry", "Neville", "three-headed dog"]})");
  llmio::MockEmbedder emb;
  const auto p = plan_query("Why did Harry and Neville fear the three-headed dog?", ex, emb);
  EXPECT_EQ(p.extracted_entities, (std::vector<std::string>{"Harry", "Neville", "three-headed dog"}));
  EXPECT_EQ(p.query_vector.size(), 64u);
  EXPECT_TRUE(p.warnings.empty());
}

TEST(Plan, NoEntitiesIsVectorOnly) {
  Fixed ex(R"({"entities": []})");
  llmio::MockEmbedder emb;
  const auto p = plan_query("what happened later?", ex, emb);
  EXPECT_TRUE(p.extracted_entities.empty());
  EXPECT_FALSE(p.query_vector.empty());
}

TEST(Plan, ExtractorFailureDegrades) {
  Broken ex;
  llmio::MockEmbedder emb;
  const auto p = plan_query("anything", ex, emb);
  EXPECT_TRUE(p.extracted_entities.empty());
  EXPECT_EQ(p.warnings.size(), 1u);
}

TEST(Plan, EmbedderFailureIsQueryError) {
  llmio::MockChatClient ex;
  BrokenEmbedder emb;
  EXPECT_THROW(plan_query("anything", ex, emb), QueryError);
  llmio::MockEmbedder ok;
  EXPECT_THROW(plan_query("   ", ex, ok), QueryError);
}

TEST(Plan, MockPlanIsDeterministic) {
  llmio::MockChatClient ex;
  llmio::MockEmbedder emb;
  const auto a = plan_query("Who runs the Aldren Boatyard?", ex, emb);
  const auto b = plan_query("Who runs the Aldren Boatyard?", ex, emb);
  EXPECT_EQ(a.extracted_entities, b.extracted_entities);
  EXPECT_EQ(a.query_vector, b.query_vector);
}

TEST(Titles, NormalizedExactMatch) {
  const auto m = mixed();
  const TitleIndex titles(m.g);
  EXPECT_EQ(titles.lookup("Hinton").size(), 1u);
  EXPECT_EQ(titles.lookup("hinton").size(), 1u);
  EXPECT_EQ(titles.lookup("  HINTON! ").size(), 1u);
  EXPECT_EQ(titles.lookup("prizes").size(), 1u);
  EXPECT_TRUE(titles.lookup("Zorblax").empty());
  EXPECT_TRUE(titles.lookup("Hinton won prize").empty());  // R nodes are not title entries
}

TEST(DualSearch, UnmatchedEntityChangesNothing) {
  const auto& ix = fixture::golden();
  llmio::MockEmbedder emb;
  const auto q = emb.embed_one("Who runs the Aldren Boatyard?");
  const TitleIndex titles(ix.built.graph);
  const auto base = dual_search(ix.built.graph, titles, *ix.hnsw, plan({"Ilse Varga"}, q));
  const auto more = dual_search(ix.built.graph, titles, *ix.hnsw, plan({"Ilse Varga", "Zorblax"}, q));
  ASSERT_EQ(base.size(), more.size());
  for (std::size_t i = 0; i < base.size(); ++i) EXPECT_EQ(base[i].id, more[i].id);
  EXPECT_EQ(base.front().mode, MatchMode::Exact);
}

TEST(DualSearch, VectorArmStaysInSAH) {
  const auto& ix = fixture::golden();
  const auto& g = ix.built.graph;
  llmio::MockEmbedder emb;
  const TitleIndex titles(g);
  const auto entries = dual_search(g, titles, *ix.hnsw, plan({}, emb.embed_one("salt barges")), 10);
  EXPECT_EQ(entries.size(), 10u);
  for (const auto& e : entries) {
    EXPECT_EQ(e.mode, MatchMode::Vector);
    EXPECT_TRUE(hgraph::is_vector_entry(g.node(e.id).type));
  }
  const auto with_text =
      dual_search(g, titles, *ix.hnsw, plan({}, emb.embed_one("salt barges")), 200, true);
  bool saw_text = false;
  for (const auto& e : with_text) saw_text |= g.node(e.id).type == NodeType::Text;
  EXPECT_TRUE(saw_text);
}

TEST(Ppr, IsolatedEntryKeepsAllMass) {
  HeteroGraph g;
  g.add_node(hgraph::make_semantic_unit("alone", "c", 0));
  const std::vector<NodeIndex> entries{0};
  const auto pi = shallow_ppr(hgraph::weighted_adjacency(g), entries);
  ASSERT_EQ(pi.size(), 1u);
  EXPECT_DOUBLE_EQ(pi[0], 1.0);
}

TEST(Ppr, TwoNodeHandIteration) {
  auto g = weighted_units(2, 0, 1);
  g.upsert_edge(0u, 1u, EdgeKind::Semantic);
  const auto adj = hgraph::weighted_adjacency(g);
  const std::vector<NodeIndex> entries{0};
  const auto one = shallow_ppr(adj, entries, 0.5, 1);
  EXPECT_DOUBLE_EQ(one[0], 0.5);
  EXPECT_DOUBLE_EQ(one[1], 0.5);
  const auto two = shallow_ppr(adj, entries, 0.5, 2);
  EXPECT_DOUBLE_EQ(two[0], 0.75);
  EXPECT_DOUBLE_EQ(two[1], 0.25);
}

TEST(Ppr, MatchesDenseOracle) {
  std::mt19937_64 rng(77);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::vector<std::vector<double>> dense;
    const auto g = weighted_units(200, 600, seed, &dense);
    std::vector<NodeIndex> entries{3, 17, 17, 150};
    std::vector<double> p(200, 0.0);
    for (auto e : {3, 17, 150}) p[e] = 1.0 / 3.0;
    for (int t : {1, 2, 5}) {
      const auto got = shallow_ppr(hgraph::weighted_adjacency(g), entries, 0.5, t);
      const auto want = oracle::dense_ppr(dense, p, 0.5, t);
      double worst = 0;
      for (std::size_t i = 0; i < got.size(); ++i) worst = std::max(worst, std::abs(got[i] - want[i]));
      EXPECT_LE(worst, 1e-10);
    }
  }
}

TEST(Ppr, MassConserved) {
  const auto g = weighted_units(120, 400, 9);
  std::vector<NodeIndex> entries{0, 5, 9};
  const auto pi = shallow_ppr(hgraph::weighted_adjacency(g), entries, 0.3, 4);
  EXPECT_NEAR(std::accumulate(pi.begin(), pi.end(), 0.0), 1.0, 1e-9);
  for (double x : pi) EXPECT_GE(x, 0.0);
}

TEST(Ppr, EmptyEntriesRejected) {
  const auto g = weighted_units(3, 3, 1);
  EXPECT_THROW(shallow_ppr(hgraph::weighted_adjacency(g), {}), QueryError);
}

TEST(Cross, ZeroPerTypeIsEmpty) {
  const auto m = mixed();
  const std::vector<double> scores(m.g.node_count(), 0.1);
  EXPECT_TRUE(select_cross_nodes(m.g, scores, {}, 0).empty());
}

TEST(Cross, TopTwoUnitsByScore) {
  HeteroGraph g;
  for (int i = 0; i < 3; ++i) g.add_node(hgraph::make_semantic_unit("u" + std::to_string(i), "c", i));
  const std::vector<double> scores{0.2, 0.1, 0.3};
  const auto cross = select_cross_nodes(g, scores, {}, 2);
  ASSERT_EQ(cross.size(), 2u);
  EXPECT_EQ(cross[0].id, g.node(2).id);
  EXPECT_EQ(cross[1].id, g.node(0).id);
}

TEST(Cross, TiesGoToLowerHrid) {
  HeteroGraph g;
  for (int i = 0; i < 4; ++i) g.add_node(hgraph::make_semantic_unit("u" + std::to_string(i), "c", i));
  const std::vector<double> scores{0.1, 0.25, 0.25, 0.25};
  for (int run = 0; run < 3; ++run) {
    const auto cross = select_cross_nodes(g, scores, {}, 2);
    ASSERT_EQ(cross.size(), 2u);
    EXPECT_EQ(cross[0].id, g.node(1).id);
    EXPECT_EQ(cross[1].id, g.node(2).id);
  }
}

TEST(Cross, EntriesExcludedAndBounded) {
  const auto& ix = fixture::golden();
  const auto& g = ix.built.graph;
  std::vector<double> scores(g.node_count());
  for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = 1.0 / double(i + 1);
  const std::vector<Entry> entries{{g.node(0).id, MatchMode::Exact, 0.0}};
  for (std::size_t k : {1, 3, 5, 50}) {
    const auto cross = select_cross_nodes(g, scores, entries, k);
    EXPECT_LE(cross.size(), 7 * k);
    for (const auto& c : cross) EXPECT_NE(c.id, g.node(0).id);
  }
}

TEST(Filter, DropsEntitiesAndOverviews) {
  const auto m = mixed();
  const std::vector<Entry> entries{{m.n, MatchMode::Exact, 0}, {m.s1, MatchMode::Vector, 0.9}};
  const std::vector<CrossNode> cross{{m.t1, 0.4}, {m.o1, 0.3}};
  EXPECT_EQ(filter_retrieval(m.g, entries, cross), (std::vector<std::string>{m.s1, m.t1}));
}

TEST(Filter, OnlyEntitiesGivesNothing) {
  const auto m = mixed();
  const std::vector<Entry> entries{{m.n, MatchMode::Exact, 0}};
  EXPECT_TRUE(filter_retrieval(m.g, entries, {}).empty());
}

TEST(Filter, DuplicatesKeepFirstPosition) {
  const auto m = mixed();
  const std::vector<Entry> entries{{m.s1, MatchMode::Vector, 0.9}, {m.h1, MatchMode::Vector, 0.8}};
  const std::vector<CrossNode> cross{{m.r1, 0.5}, {m.s1, 0.4}, {m.s2, 0.1}};
  EXPECT_EQ(filter_retrieval(m.g, entries, cross),
            (std::vector<std::string>{m.s1, m.h1, m.r1, m.s2}));
}

TEST(Assemble, BudgetSmallerThanFirstBlock) {
  const auto m = mixed();
  const std::vector<std::string> ids{m.t1, m.s1};
  const auto ctx = assemble_context(m.g, ids, 3);
  EXPECT_TRUE(ctx.included.empty());
  EXPECT_EQ(ctx.token_count, 0u);
}

TEST(Assemble, StopsAtFirstOverflow) {
  const auto m = mixed();
  const std::vector<std::string> ids{m.s1, m.t1, m.s2};
  const auto& tok = default_tokenizer();
  const auto first = tok.count("[semantic_unit]\nHinton won a prize\n\n");
  const auto ctx = assemble_context(m.g, ids, first + 1);
  EXPECT_EQ(ctx.included, (std::vector<std::string>{m.s1}));
  EXPECT_EQ(ctx.token_count, tok.count(ctx.text));
  EXPECT_EQ(ctx.token_count, first);
}

TEST(Assemble, FixtureBudgetsRespected) {
  const auto& ix = fixture::golden();
  llmio::MockChatClient chat;
  llmio::MockEmbedder emb;
  const auto p = plan_query("What does the Northwind Cooperative sell at Calder Market?", chat, emb);
  for (std::size_t budget : {50, 200, 1000, 4000, 8000}) {
    const auto r = ix.engine->retrieve(p, budget);
    EXPECT_LE(r.context.token_count, budget);
    EXPECT_EQ(r.context.token_count, default_tokenizer().count(r.context.text));
  }
}

TEST(Engine, AnswerIsDigestOfPrompt) {
  const auto& ix = fixture::golden();
  llmio::MockChatClient chat;
  llmio::MockEmbedder emb;
  const auto p = plan_query("Who runs the Aldren Boatyard?", chat, emb);
  const auto r = ix.engine->answer(p, chat);
  const auto req = llmio::make_request(llmio::templates::kUnifiedAnswer,
                                       {{"context", r.context.text}, {"query", p.raw_query}});
  EXPECT_EQ(*r.answer, chat.chat(req));
  const auto again = ix.engine->answer(p, chat);
  EXPECT_EQ(trace_json(ix.built.graph, r).dump(), trace_json(ix.built.graph, again).dump());
}

TEST(Engine, SynthesisFailureKeepsContext) {
  const auto& ix = fixture::golden();
  llmio::MockChatClient chat;
  llmio::MockEmbedder emb;
  Broken responder;
  const auto p = plan_query("Who runs the Aldren Boatyard?", chat, emb);
  const auto expected = ix.engine->retrieve(p).context.text;
  try {
    ix.engine->answer(p, responder);
    FAIL() << "expected synthesis failure";
  } catch (const SynthesisError& e) {
    EXPECT_FALSE(e.context().empty());
    EXPECT_EQ(e.context(), expected);
  }
}

TEST(Engine, TinyBudgetGivesNotice) {
  const auto& ix = fixture::golden();
  llmio::MockChatClient chat;
  llmio::MockEmbedder emb;
  const auto r = ix.engine->answer(plan_query("Who runs the Aldren Boatyard?", chat, emb), chat, 1);
  EXPECT_TRUE(r.context.included.empty());
  EXPECT_FALSE(r.notices.empty());
  EXPECT_TRUE(r.answer.has_value());
}

TEST(Engine, TraceShape) {
  const auto& ix = fixture::golden();
  llmio::MockChatClient chat;
  llmio::MockEmbedder emb;
  const auto r = ix.engine->retrieve(plan_query("Tell me about Mara Quint", chat, emb));
  const auto j = trace_json(ix.built.graph, r);
  for (const char* key : {"entries", "cross", "retrieved", "context_nodes", "token_count", "tokenizer"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  for (const auto& e : j["entries"]) {
    EXPECT_TRUE(e["mode"] == "exact" || e["mode"] == "vector");
  }
  for (const auto& id : r.retrieved) {
    EXPECT_TRUE(hgraph::is_retrievable(ix.built.graph.node(id).type));
  }
}
