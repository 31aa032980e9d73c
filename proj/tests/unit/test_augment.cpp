#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "noderag/augment/analytics.hpp"
#include "noderag/augment/kmeans.hpp"
#include "noderag/augment/leiden.hpp"
#include "noderag/augment/summaries.hpp"
#include "noderag/common/error.hpp"
#include "noderag/llmio/prompts.hpp"
#include "support/oracles.hpp"

using namespace noderag;
using namespace noderag::augment;
using hgraph::EdgeKind;
using hgraph::HeteroGraph;
using hgraph::NodeType;

namespace {

UGraph ugraph(std::uint32_t n, const oracle::EdgeList& edges) { return UGraph::from_edges(n, edges); }

// Entities e0..e{n-1} and units s0..s{m-1}; each listed pair becomes e_d.
HeteroGraph bipartite(std::size_t entities, std::size_t units,
                      const std::vector<std::pair<int, int>>& links) {
  HeteroGraph g;
  for (std::size_t i = 0; i < entities; ++i) g.add_node(hgraph::make_entity("e" + std::to_string(i)));
  for (std::size_t i = 0; i < units; ++i) {
    g.add_node(hgraph::make_semantic_unit("unit " + std::to_string(i), "c#0000", i));
  }
  for (auto [e, s] : links) {
    g.upsert_edge(static_cast<hgraph::NodeIndex>(e),
                  static_cast<hgraph::NodeIndex>(entities + static_cast<std::size_t>(s)),
                  EdgeKind::Decomposition);
  }
  return g;
}

}  // namespace

TEST(CoreThreshold, ThousandNodesMeanDegreeSix) { EXPECT_EQ(core_threshold(1000, 6.0), 16); }

TEST(CoreThreshold, ClampsToOne) { EXPECT_EQ(core_threshold(2, 1.0), 1); }

TEST(CoreThreshold, OtherLogBases) {
  EXPECT_EQ(core_threshold(1000, 4.0, LogBase::Ten), 6);
  EXPECT_EQ(core_threshold(1024, 1.0, LogBase::Two), 10);
}

TEST(CoreThreshold, EdgelessGraphIsNotApplicable) {
  HeteroGraph g;
  g.add_node(hgraph::make_entity("a"));
  g.add_node(hgraph::make_entity("b"));
  EXPECT_THROW(compute_core_threshold(g), NotApplicableError);
}

TEST(KCore, TriangleWithPendant) {
  const auto core = k_core(ugraph(4, {{0, 1}, {1, 2}, {2, 0}, {3, 0}}), 2);
  EXPECT_EQ(core, (std::vector<bool>{true, true, true, false}));
}

TEST(KCore, StarHasNoTwoCore) {
  const auto core = k_core(ugraph(6, {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}}), 2);
  EXPECT_EQ(std::count(core.begin(), core.end(), true), 0);
}

TEST(KCore, OneCoreIsNonIsolatedNodes) {
  const auto core = k_core(ugraph(5, {{0, 1}, {2, 3}}), 1);
  EXPECT_EQ(core, (std::vector<bool>{true, true, true, true, false}));
}

TEST(KCore, MatchesSweepOracleOnRandomGraphs) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const auto n = static_cast<std::uint32_t>(2 + rng() % 60);
    const auto edges = oracle::random_graph(n, 0.05 + 0.2 * (trial % 5), rng);
    for (int k = 1; k <= 5; ++k) {
      ASSERT_EQ(k_core(ugraph(n, edges), k), oracle::k_core(n, edges, k)) << trial << " k=" << k;
    }
  }
}

TEST(KCore, HeterographReturnsEntitiesOnly) {
  // e0,e1 with s0,s1 form a 4-cycle; e2 hangs off s0.
  const auto g = bipartite(3, 2, {{0, 0}, {0, 1}, {1, 0}, {1, 1}, {2, 0}});
  const auto core = k_core_nodes(g, 2);
  EXPECT_EQ(core, (std::set<std::string>{g.node(0).id, g.node(1).id}));
}

TEST(Betweenness, PathExact) {
  const auto b = betweenness(ugraph(3, {{0, 1}, {1, 2}}), 3, 1);
  EXPECT_DOUBLE_EQ(b[0], 0.0);
  EXPECT_DOUBLE_EQ(b[1], 1.0);
  EXPECT_DOUBLE_EQ(b[2], 0.0);
}

TEST(Betweenness, StarCentre) {
  // K_{1,4}: the centre lies on all C(4,2) = 6 leaf pairs.
  const auto b = betweenness(ugraph(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}}), 0, 1);
  EXPECT_DOUBLE_EQ(b[0], 6.0);
  for (int i = 1; i < 5; ++i) EXPECT_DOUBLE_EQ(b[i], 0.0);
}

TEST(Betweenness, CompleteGraphIsZero) {
  const auto b = betweenness(ugraph(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}), 0, 1);
  for (double x : b) EXPECT_DOUBLE_EQ(x, 0.0);
}

TEST(Betweenness, ExactModeMatchesPairOracle) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const auto n = static_cast<std::uint32_t>(3 + rng() % 40);
    const auto edges = oracle::random_graph(n, 0.15, rng);
    const auto got = betweenness(ugraph(n, edges), n, 3);
    const auto want = oracle::betweenness(n, edges);
    for (std::uint32_t v = 0; v < n; ++v) ASSERT_NEAR(got[v], want[v], 1e-9) << trial;
  }
}

TEST(Betweenness, SampledIsDeterministic) {
  std::mt19937_64 rng(2);
  const auto edges = oracle::random_graph(80, 0.06, rng);
  EXPECT_EQ(betweenness(ugraph(80, edges), 10, 4), betweenness(ugraph(80, edges), 10, 4));
}

TEST(BetweennessSelect, PathSelectsMiddle) {
  // e0 - s0 - e1: the unit is the middle, so no entity beats the mean.
  auto g = bipartite(2, 1, {{0, 0}, {1, 0}});
  auto sel = betweenness_select(g, 10, 1);
  EXPECT_TRUE(sel.selected.empty());
  EXPECT_NEAR(sel.mean, 1.0 / 3.0, 1e-12);
  EXPECT_EQ(sel.scale, 1);

  // s0 - e0 - s1: the entity is the middle.
  auto h = bipartite(1, 2, {{0, 0}, {0, 1}});
  auto sel2 = betweenness_select(h, 10, 1);
  EXPECT_EQ(sel2.selected, (std::set<std::string>{h.node(0).id}));
}

TEST(Importance, UnionOfBothSets) {
  auto g = bipartite(4, 3, {{0, 0}, {0, 1}, {1, 0}, {1, 1}, {2, 1}, {2, 2}, {3, 2}});
  const auto r = select_important_entities(g);
  std::set<std::string> both = r.kcore_set;
  both.insert(r.betweenness_set.begin(), r.betweenness_set.end());
  EXPECT_EQ(r.important, both);
  EXPECT_GE(r.k_default, 1);
}

TEST(Importance, EdgelessGraphGivesEmptyReportWithWarning) {
  HeteroGraph g;
  g.add_node(hgraph::make_entity("solo"));
  const auto r = select_important_entities(g);
  EXPECT_TRUE(r.important.empty());
  EXPECT_EQ(r.warnings.size(), 1u);
}

TEST(Leiden, TwoCliquesWithBridge) {
  oracle::EdgeList edges;
  for (std::uint32_t base : {0u, 5u}) {
    for (std::uint32_t i = 0; i < 5; ++i) {
      for (std::uint32_t j = i + 1; j < 5; ++j) edges.emplace_back(base + i, base + j);
    }
  }
  edges.emplace_back(4, 5);
  const auto comm = leiden(ugraph(10, edges));
  const auto [best_q, best_labels] = oracle::best_bipartition(10, edges);
  for (std::uint32_t v = 0; v < 10; ++v) {
    EXPECT_EQ(comm[v] == comm[0], best_labels[v] == best_labels[0]) << v;
  }
  EXPECT_EQ(*std::max_element(comm.begin(), comm.end()), 1u);
  EXPECT_NEAR(modularity(ugraph(10, edges), comm), best_q, 1e-12);
}

TEST(Leiden, SingleNode) { EXPECT_EQ(leiden(ugraph(1, {})), (std::vector<std::uint32_t>{0})); }

TEST(Leiden, DisconnectedComponentsNeverShare) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const auto n = static_cast<std::uint32_t>(4 + rng() % 50);
    auto edges = oracle::random_graph(n, 0.08, rng);
    const auto g = ugraph(n, edges);
    const auto comm = leiden(g, {.seed = static_cast<std::uint64_t>(trial)});
    // Component labels by BFS.
    std::vector<int> comp(n, -1);
    int next = 0;
    for (std::uint32_t s = 0; s < n; ++s) {
      if (comp[s] >= 0) continue;
      std::vector<std::uint32_t> stack{s};
      comp[s] = next;
      while (!stack.empty()) {
        auto v = stack.back();
        stack.pop_back();
        for (auto [u, w] : g.adj[v]) {
          if (comp[u] < 0) {
            comp[u] = next;
            stack.push_back(u);
          }
        }
      }
      ++next;
    }
    for (std::uint32_t u = 0; u < n; ++u) {
      for (std::uint32_t v = 0; v < n; ++v) {
        if (comm[u] == comm[v]) ASSERT_EQ(comp[u], comp[v]) << trial;
      }
    }
  }
}

TEST(Leiden, DenseIdsAndDeterminism) {
  std::mt19937_64 rng(23);
  const auto edges = oracle::random_graph(120, 0.04, rng);
  const auto a = leiden(ugraph(120, edges), {.seed = 3});
  const auto b = leiden(ugraph(120, edges), {.seed = 3});
  EXPECT_EQ(a, b);
  const auto k = *std::max_element(a.begin(), a.end()) + 1;
  std::set<std::uint32_t> seen(a.begin(), a.end());
  EXPECT_EQ(seen.size(), k);
  EXPECT_EQ(a[0], 0u);
}

TEST(Leiden, BeatsSingletonsOnPlantedPartition) {
  // Four dense blocks with sparse noise; the found partition should be at
  // least as good as the planted one.
  std::mt19937_64 rng(31);
  oracle::EdgeList edges;
  std::vector<std::uint32_t> planted(80);
  for (std::uint32_t u = 0; u < 80; ++u) {
    planted[u] = u / 20;
    for (std::uint32_t v = u + 1; v < 80; ++v) {
      const double p = (u / 20 == v / 20) ? 0.4 : 0.01;
      if (static_cast<double>(rng() >> 11) * 0x1.0p-53 < p) edges.emplace_back(u, v);
    }
  }
  const auto g = ugraph(80, edges);
  const auto comm = leiden(g);
  EXPECT_GE(modularity(g, comm) + 1e-9, modularity(g, planted));
}

TEST(DetectCommunities, AssignsEveryNodeAndStoresIt) {
  auto g = bipartite(4, 3, {{0, 0}, {1, 0}, {2, 1}, {3, 1}, {3, 2}});
  const auto p = detect_communities(g);
  EXPECT_EQ(p.assignment.size(), g.node_count());
  for (const auto& n : g.nodes()) {
    ASSERT_TRUE(n.community.has_value());
    EXPECT_EQ(*n.community, p.assignment.at(n.id));
    EXPECT_LT(static_cast<std::size_t>(*n.community), p.community_count);
  }
}

TEST(KMeans, ClusterCount) {
  EXPECT_EQ(cluster_count(0), 1u);
  EXPECT_EQ(cluster_count(1), 1u);
  EXPECT_EQ(cluster_count(4), 2u);
  EXPECT_EQ(cluster_count(8), 2u);
  EXPECT_EQ(cluster_count(9), 3u);
  EXPECT_EQ(cluster_count(100), 10u);
}

TEST(KMeans, SeparatesObviousClusters) {
  std::vector<llmio::Vector> pts = {{0, 0}, {0.1f, 0}, {0, 0.1f}, {10, 10}, {10.1f, 10}, {10, 9.9f}};
  const auto r = kmeans(pts, 2);
  EXPECT_EQ(r.k_effective, 2u);
  EXPECT_EQ(r.assignment[0], r.assignment[1]);
  EXPECT_EQ(r.assignment[0], r.assignment[2]);
  EXPECT_EQ(r.assignment[3], r.assignment[4]);
  EXPECT_NE(r.assignment[0], r.assignment[3]);
}

TEST(KMeans, IdenticalPointsCollapseToOneCluster) {
  std::vector<llmio::Vector> pts(9, llmio::Vector{1, 0, 0});
  const auto r = kmeans(pts, 3);
  EXPECT_EQ(r.k_requested, 3u);
  EXPECT_EQ(r.k_effective, 1u);
}

TEST(KMeans, IterationCapRespected) {
  std::mt19937_64 rng(4);
  std::vector<llmio::Vector> pts;
  for (int i = 0; i < 200; ++i) pts.push_back(oracle::random_unit(8, rng));
  const auto r = kmeans(pts, 14, {.seed = 1, .max_iterations = 3});
  EXPECT_LE(r.iterations, 3);
}

namespace {

struct MatchFixture {
  HeteroGraph g;
  enrich::EmbeddingStore store{"test", 2};
};

// Two communities; within each, two tight groups of vectors far apart.
MatchFixture two_by_two() {
  MatchFixture f;
  auto add = [&](hgraph::HeteroNode n, std::int32_t community, llmio::Vector v) {
    const auto id = f.g.add_node(std::move(n));
    f.g.set_community(f.g.index(id), community);
    f.store.put(id, v);
  };
  const llmio::Vector east{1, 0}, north{0, 1};
  int ordinal = 0;
  for (std::int32_t c = 0; c < 2; ++c) {
    for (auto dir : {east, north}) {
      for (int k = 0; k < 2; ++k) {
        add(hgraph::make_semantic_unit("unit " + std::to_string(ordinal), "c#0000",
                                       static_cast<std::size_t>(ordinal)),
            c, dir);
        ++ordinal;
      }
    }
    // One H per community, pointing east only.
    add(hgraph::make_high_level("summary " + std::to_string(c), c, 0), c, east);
  }
  return f;
}

}  // namespace

TEST(SemanticMatch, EdgesEqualDoubleLoopOracle) {
  auto f = two_by_two();
  const auto r = semantic_match_edges(f.g, f.store);
  std::set<std::pair<std::string, std::string>> got(r.edges.begin(), r.edges.end());
  std::set<std::pair<std::string, std::string>> want;
  for (const auto& v : f.g.nodes()) {
    if (v.type != NodeType::SemanticUnit && v.type != NodeType::Attribute) continue;
    for (const auto& h : f.g.nodes()) {
      if (h.type != NodeType::HighLevelElement) continue;
      if (v.community == h.community && r.cluster.at(v.id) == r.cluster.at(h.id)) {
        want.emplace(v.id, h.id);
      }
    }
  }
  EXPECT_EQ(got, want);
  EXPECT_EQ(r.k_requested, 3u);  // floor(sqrt(10))
  // East-pointing units share a cluster with the H of their community: 2 per community.
  EXPECT_EQ(want.size(), 4u);
  for (const auto& [v, h] : got) {
    const auto e = f.g.edge(v, h);
    ASSERT_TRUE(e);
    EXPECT_TRUE(e->kinds.contains(EdgeKind::HighLevel));
  }
}

TEST(SemanticMatch, LoneHighLevelNodeGetsNoEdge) {
  HeteroGraph g;
  enrich::EmbeddingStore store("t", 2);
  const auto h = g.add_node(hgraph::make_high_level("alone", 0, 0));
  g.set_community(0, 0);
  store.put(h, {1, 0});
  EXPECT_TRUE(semantic_match_edges(g, store).edges.empty());
}

TEST(SemanticMatch, NoEligibleNodesIsNoOp) {
  HeteroGraph g;
  g.add_node(hgraph::make_entity("x"));
  enrich::EmbeddingStore store("t", 2);
  const auto r = semantic_match_edges(g, store);
  EXPECT_TRUE(r.edges.empty());
  EXPECT_EQ(g.edge_count(), 0u);
}

namespace {

// Scripted client: returns canned text per template.
class ScriptedClient : public llmio::ChatClient {
public:
  std::function<std::string(const llmio::ChatRequest&)> reply;
  llmio::ChatResponse complete(const llmio::ChatRequest& r) override { return {reply(r), {}}; }
};

}  // namespace

TEST(Attributes, ContextIsAdjacentRelationshipsAndUnitsInHridOrder) {
  HeteroGraph g;
  const auto hinton = g.add_node(hgraph::make_entity("Hinton"));
  const auto s1 = g.add_node(hgraph::make_semantic_unit("Hinton won the prize.", "c#0000", 0));
  const auto r1 = g.add_node(hgraph::make_relationship("Hinton received Nobel Prize", "c#0000/r0"));
  const auto s2 = g.add_node(hgraph::make_semantic_unit("Hinton studied networks.", "c#0001", 0));
  const auto t = g.add_node(hgraph::make_text("raw chunk text", "c#0000"));
  g.upsert_edge(s2, hinton, EdgeKind::Decomposition);
  g.upsert_edge(r1, hinton, EdgeKind::Relation);
  g.upsert_edge(s1, hinton, EdgeKind::Decomposition);
  g.upsert_edge(t, s1, EdgeKind::Source);
  EXPECT_EQ(attribute_context(g, g.index(hinton)),
            (std::vector<std::string>{"Hinton won the prize.", "Hinton received Nobel Prize",
                                      "Hinton studied networks."}));
}

TEST(Attributes, OneNodePerImportantEntity) {
  auto g = bipartite(3, 2, {{0, 0}, {1, 0}, {1, 1}, {2, 1}});
  llmio::MockChatClient mock;
  const std::set<std::string> important{g.node(1).id, g.node(2).id};
  const auto r = attach_attributes(g, important, mock);
  ASSERT_EQ(r.created.size(), 2u);
  EXPECT_TRUE(r.failures.empty());
  EXPECT_EQ(g.count(NodeType::Attribute), 2u);
  for (auto a : g.indices_of_type(NodeType::Attribute)) {
    ASSERT_EQ(g.degree(a), 1u);
    const auto& e = g.edges()[g.incident(a)[0]];
    EXPECT_TRUE(e.kinds.contains(EdgeKind::Attribute));
    EXPECT_TRUE(important.count(g.node(e.other(a)).id));
    EXPECT_EQ(g.node(a).content.rfind("MOCK:", 0), 0u);
  }
}

TEST(Attributes, EmptySetIsNoOp) {
  auto g = bipartite(2, 1, {{0, 0}, {1, 0}});
  const auto before = g;
  llmio::MockChatClient mock;
  attach_attributes(g, {}, mock);
  EXPECT_EQ(g, before);
}

TEST(Attributes, FailureIsReportedAndSkipped) {
  auto g = bipartite(2, 1, {{0, 0}, {1, 0}});
  ScriptedClient client;
  client.reply = [&](const llmio::ChatRequest& r) -> std::string {
    if (r.fields.at("entity") == "e0") throw TransportError("down", 503);
    return "summary";
  };
  const auto r = attach_attributes(g, {g.node(0).id, g.node(1).id}, client);
  EXPECT_EQ(r.created.size(), 1u);
  ASSERT_EQ(r.failures.size(), 1u);
  EXPECT_EQ(r.failures[0].subject, g.node(0).id);
}

TEST(HighLevel, CommunityContextRespectsBudgetAndOrder) {
  HeteroGraph g;
  g.add_node(hgraph::make_semantic_unit("one two three", "c#0000", 0));
  g.add_node(hgraph::make_relationship("four five", "c#0000/r0"));
  g.add_node(hgraph::make_semantic_unit("six seven eight", "c#0000", 1));
  for (hgraph::NodeIndex i = 0; i < 3; ++i) g.set_community(i, 0);
  EXPECT_EQ(community_context(g, 0, 100), "one two three\nfour five\nsix seven eight");
  EXPECT_EQ(community_context(g, 0, 6), "one two three\nfour five\nsix");
  EXPECT_EQ(community_context(g, 0, 5), "one two three\nfour five");
  EXPECT_EQ(community_context(g, 1, 100), "");
}

TEST(HighLevel, OnePairPerElementWithOverviewEdge) {
  auto g = bipartite(1, 1, {{0, 0}});
  const auto p = detect_communities(g);
  llmio::MockChatClient mock;
  const auto r = extract_high_level(g, p, mock);
  ASSERT_EQ(r.elements.size(), 1u);
  EXPECT_FALSE(r.elements[0].title.empty());
  const auto h = g.index(r.elements[0].h_id);
  const auto o = g.index(r.elements[0].o_id);
  EXPECT_EQ(g.degree(o), 1u);
  EXPECT_TRUE(g.edge(h, o)->kinds.contains(EdgeKind::Overview));
  EXPECT_EQ(g.node(h).community, g.node(o).community);
}

TEST(HighLevel, MultipleElementsAndFailures) {
  // Two isolated units: two communities.
  HeteroGraph g;
  g.add_node(hgraph::make_semantic_unit("alpha text", "c#0000", 0));
  g.add_node(hgraph::make_semantic_unit("beta text", "c#0001", 0));
  const auto p = detect_communities(g);
  ASSERT_EQ(p.community_count, 2u);
  ScriptedClient client;
  client.reply = [](const llmio::ChatRequest& r) -> std::string {
    if (r.fields.count("context") && r.fields.at("context").find("beta") != std::string::npos) {
      return "not json at all";
    }
    return R"({"elements":[{"title":"A","content":"first"},{"title":"B","content":"second"}]})";
  };
  const auto r = extract_high_level(g, p, client);
  EXPECT_EQ(r.elements.size(), 2u);
  EXPECT_EQ(r.failures.size(), 1u);
  EXPECT_EQ(g.count(NodeType::HighLevelElement), 2u);
  EXPECT_EQ(g.count(NodeType::HighLevelOverview), 2u);
}
