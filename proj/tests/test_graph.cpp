#include "causalsem/graph.hpp"
#include "causalsem/simulate.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace causalsem;

namespace {

MixedGraph chain3() {
    MixedGraph g({"A", "B", "C"});
    g.add_directed("A", "B");
    g.add_directed("B", "C");
    return g;
}

MixedGraph collider3() {
    MixedGraph g({"A", "B", "C"});
    g.add_directed("A", "B");
    g.add_directed("C", "B");
    return g;
}

std::vector<std::size_t> random_subset(std::size_t p, std::size_t x, std::size_t y, std::mt19937_64& rng) {
    std::vector<std::size_t> z;
    std::bernoulli_distribution coin(0.4);
    for (std::size_t v = 0; v < p; ++v)
        if (v != x && v != y && coin(rng)) z.push_back(v);
    return z;
}

}  // namespace

TEST_CASE("edge marks follow the endpoint convention") {
    MixedGraph g({"A", "B", "C"}, GraphKind::pag);
    g.set_edge(0, 1, Mark::circle, Mark::arrow);
    CHECK(g.mark(0, 1) == Mark::circle);
    CHECK(g.mark(1, 0) == Mark::arrow);
    g.add_directed(1, 2);
    CHECK(g.directed(1, 2));
    CHECK_FALSE(g.directed(2, 1));
    CHECK(g.parents(2) == std::vector<std::size_t>{1});
    CHECK(g.children(1) == std::vector<std::size_t>{2});
    g.set_mark(0, 1, Mark::arrow);
    CHECK(g.bidirected(0, 1));
    g.remove_edge(1, 0);
    CHECK_FALSE(g.adjacent(0, 1));
    CHECK(g.edge_count() == 1);
}

TEST_CASE("weights attach to directed edges only") {
    MixedGraph g({"A", "B"});
    g.add_undirected(0, 1);
    CHECK_THROWS_AS(g.set_weight(0, 1, 0.5), GraphError);
    g.add_directed(0, 1);
    g.set_weight(0, 1, 0.5);
    CHECK(g.weight(0, 1).value() == doctest::Approx(0.5));
}

TEST_CASE("unknown node names raise") {
    MixedGraph g({"A"});
    CHECK_THROWS_AS(g.index_of("Z"), GraphError);
    CHECK_FALSE(g.find("Z").has_value());
}

TEST_CASE("d-separation on the three canonical triples") {
    const auto chain = chain3();
    CHECK_FALSE(d_separated(chain, "A", "C", {}));
    CHECK(d_separated(chain, "A", "C", {"B"}));
    const auto coll = collider3();
    CHECK(d_separated(coll, "A", "C", {}));
    CHECK_FALSE(d_separated(coll, "A", "C", {"B"}));
    MixedGraph desc({"A", "B", "C", "D"});
    desc.add_directed("A", "B");
    desc.add_directed("C", "B");
    desc.add_directed("B", "D");
    CHECK_FALSE(d_separated(desc, "A", "C", {"D"}));
}

TEST_CASE("d-separation agrees with path enumeration on random DAGs") {
    std::mt19937_64 rng(7);
    std::size_t mismatches = 0;
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        const std::size_t p = 3 + seed % 5;
        const auto g = random_dag(p, 0.4, seed);
        for (std::size_t x = 0; x < p; ++x)
            for (std::size_t y = x + 1; y < p; ++y) {
                const auto z = random_subset(p, x, y, rng);
                if (d_separated(g, x, y, z) != oracle::d_separated_by_paths(g, x, y, z)) ++mismatches;
            }
    }
    CHECK(mismatches == 0);
}

TEST_CASE("acyclicity matches a colour DFS") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        auto g = random_dag(5, 0.5, seed);
        CHECK(is_dag(g));
        CHECK_FALSE(oracle::has_cycle(g));
        const auto order = topological_order(g);
        REQUIRE(order.size() == g.size());
        std::vector<std::size_t> pos(g.size());
        for (std::size_t k = 0; k < order.size(); ++k) pos[order[k]] = k;
        for (const auto& e : g.edges()) {
            const bool forward = g.directed(e.a, e.b);
            CHECK(pos[forward ? e.a : e.b] < pos[forward ? e.b : e.a]);
        }
        for (std::size_t u = 0; u < g.size(); ++u)
            for (auto v : descendants(g, u))
                if (v != u && !g.adjacent(u, v)) {
                    auto cyc = g;
                    cyc.add_directed(v, u);
                    CHECK_FALSE(is_dag(cyc));
                    CHECK(oracle::has_cycle(cyc));
                }
    }
}

TEST_CASE("cpdag of a chain is fully undirected, a collider keeps its arrows") {
    const auto c = cpdag_of(chain3());
    CHECK(c.undirected(0, 1));
    CHECK(c.undirected(1, 2));
    const auto v = cpdag_of(collider3());
    CHECK(v.directed(0, 1));
    CHECK(v.directed(2, 1));
}

TEST_CASE("Meek rule 1 propagates below a v-structure") {
    MixedGraph g({"A", "B", "C", "D"});
    g.add_directed("A", "C");
    g.add_directed("B", "C");
    g.add_directed("C", "D");
    const auto c = cpdag_of(g);
    CHECK(c.directed(2, 3));
}

TEST_CASE("Meek rules respect forbidden orientations from knowledge") {
    MixedGraph g({"A", "B"}, GraphKind::cpdag);
    g.add_undirected(0, 1);
    BackgroundKnowledge bk;
    bk.forbidden.insert({"B", "A"});
    const auto r = apply_meek_rules(g, KnowledgeIndex(bk, g.nodes()));
    CHECK(r.graph.directed(0, 1));
    CHECK(r.conflicts.empty());
}

TEST_CASE("consistent extension stays in the Markov equivalence class") {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        const auto dag = random_dag(6, 0.4, seed);
        const auto cp = cpdag_of(dag);
        const auto ext = consistent_extension(cp);
        REQUIRE(is_dag(ext));
        CHECK(cpdag_of(ext) == cp);
    }
}

TEST_CASE("structural hamming distance counts differing pairs") {
    const auto a = chain3();
    auto b = chain3();
    CHECK(structural_hamming_distance(a, b) == 0);
    b.add_directed(2, 1);
    b.add_directed(0, 2);
    CHECK(structural_hamming_distance(a, b) == 2);
}

TEST_CASE("knowledge tiers forbid backward edges and required edges forbid their reverse") {
    BackgroundKnowledge bk;
    bk.tiers = {{"A"}, {"B", "C"}};
    bk.required.insert({"B", "C"});
    CHECK(bk.is_forbidden("B", "A"));
    CHECK_FALSE(bk.is_forbidden("A", "B"));
    const KnowledgeIndex k(bk, {"A", "B", "C", "D"});
    CHECK(k.forbidden(1, 0));
    CHECK(k.forbidden(2, 1));
    CHECK(k.required(1, 2));
    CHECK(k.tier(3) == -1);
    CHECK_FALSE(k.forbidden(3, 0));
    CHECK_NOTHROW(bk.validate());
    bk.forbidden.insert({"B", "C"});
    CHECK_THROWS_AS(bk.validate(), GraphError);
}

TEST_CASE("required edges forming a cycle are rejected") {
    BackgroundKnowledge bk;
    bk.required = {{"A", "B"}, {"B", "C"}, {"C", "A"}};
    CHECK_THROWS_AS(bk.validate(), GraphError);
}

TEST_CASE("knowledge digest is stable and content sensitive") {
    BackgroundKnowledge a, b;
    a.tiers = {{"A"}, {"B"}};
    b.tiers = {{"A"}, {"B"}};
    CHECK(a.digest() == b.digest());
    b.forbidden.insert({"A", "B"});
    CHECK(a.digest() != b.digest());
}

TEST_CASE("knowledge violations flag forbidden orientations") {
    MixedGraph g({"A", "B"});
    g.add_directed("B", "A");
    BackgroundKnowledge bk;
    bk.tiers = {{"A"}, {"B"}};
    CHECK(knowledge_violations(g, bk).size() == 1);
    MixedGraph ok({"A", "B"});
    ok.add_directed("A", "B");
    CHECK(knowledge_violations(ok, bk).empty());
}

TEST_CASE("simplify by weight keeps edges strictly above the threshold") {
    MixedGraph g({"A", "B", "C"}, GraphKind::weighted_dag);
    g.add_directed(0, 1);
    g.set_weight(0, 1, 0.25);
    g.add_directed(1, 2);
    g.set_weight(1, 2, -0.4);
    const auto s = simplify_by_weight(g, 0.25);
    CHECK_FALSE(s.adjacent(0, 1));
    CHECK(s.directed(1, 2));
    CHECK(s.weight(1, 2).value() == doctest::Approx(-0.4));
}

TEST_CASE("graph JSON round trip preserves marks and weights") {
    MixedGraph g({"A", "B", "C", "D"}, GraphKind::pag);
    g.set_edge(0, 1, Mark::circle, Mark::arrow);
    g.add_bidirected(1, 2);
    g.add_directed(3, 2);
    g.set_weight(3, 2, 0.125);
    const auto back = graph_from_json(graph_to_json(g));
    CHECK(back == g);
    CHECK(back.kind() == GraphKind::pag);
    CHECK_THROWS_AS(graph_from_json("{not json"), GraphError);
}

TEST_CASE("DOT export encodes edge types and weights") {
    MixedGraph g({"A", "B", "C"});
    g.add_directed(1, 0);
    g.set_weight(1, 0, -0.5);
    g.add_undirected(1, 2);
    const auto dot = graph_to_dot(g, "t");
    CHECK(dot.find("\"B\" -> \"A\" [label=\"-0.500\"") != std::string::npos);
    CHECK(dot.find("color=red") != std::string::npos);
    CHECK(dot.find("\"B\" -> \"C\" [dir=none]") != std::string::npos);
    CHECK(dot.rfind("}\n") == dot.size() - 2);
}
