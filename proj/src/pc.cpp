#include "causalsem/discovery.hpp"

#include "discovery_internal.hpp"

#include <json.hpp>

#include <stdexcept>

namespace causalsem {

void DiscoveryConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
    if (!(penalty_discount > 0.0)) throw std::invalid_argument("penalty_discount must be positive");
    if (!(prune_threshold >= 0.0)) throw std::invalid_argument("prune_threshold must be non-negative");
}

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::pc: return "pc";
        case Algorithm::fci: return "fci";
        case Algorithm::fges: return "fges";
        case Algorithm::lingam: return "lingam";
    }
    return "pc";
}

Algorithm algorithm_from_string(const std::string& s) {
    if (s == "pc") return Algorithm::pc;
    if (s == "fci") return Algorithm::fci;
    if (s == "fges") return Algorithm::fges;
    if (s == "lingam" || s == "direct-lingam" || s == "directlingam") return Algorithm::lingam;
    throw std::invalid_argument("unknown algorithm '" + s + "' (expected pc, fci, fges or lingam)");
}

std::string run_record_to_json(const RunRecord& r, bool include_timing) {
    nlohmann::ordered_json j;
    j["algorithm"] = r.algorithm;
    nlohmann::ordered_json cfg;
    cfg["alpha"] = r.config.alpha;
    if (r.config.max_cond_size) cfg["max_cond_size"] = *r.config.max_cond_size;
    else cfg["max_cond_size"] = nullptr;
    cfg["penalty_discount"] = r.config.penalty_discount;
    cfg["prune_threshold"] = r.config.prune_threshold;
    cfg["seed"] = r.config.seed;
    j["config"] = cfg;
    j["knowledge_digest"] = r.knowledge_digest;
    j["ci_test"] = r.ci_test;
    j["ci_tests"] = r.ci_tests;
    j["score_evaluations"] = r.score_evaluations;
    if (r.score) j["score"] = *r.score;
    if (!r.score_trace.empty()) j["score_trace"] = r.score_trace;
    if (!r.causal_order.empty()) j["causal_order"] = r.causal_order;
    j["notes"] = r.notes;
    if (include_timing) j["wall_time_ms"] = r.wall_time_ms;
    return j.dump(2);
}

SkeletonResult pc_stable_skeleton(const IndependenceTest& test, const DiscoveryConfig& cfg,
                                  const KnowledgeIndex& knowledge) {
    const std::size_t p = test.size();
    const auto order = detail::name_order(test.names());
    const auto rank = detail::rank_of(order);

    SkeletonResult out;
    out.graph = MixedGraph(test.names(), GraphKind::cpdag);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i + 1; j < p; ++j)
            if (!knowledge.forbidden_both(i, j)) out.graph.add_undirected(i, j);

    for (std::size_t depth = 0;; ++depth) {
        if (cfg.max_cond_size && depth > *cfg.max_cond_size) break;
        // Adjacency sets frozen at the start of the level.
        std::vector<std::vector<std::size_t>> adj(p);
        for (std::size_t v = 0; v < p; ++v) {
            adj[v] = out.graph.adjacent_nodes(v);
            detail::sort_by_rank(adj[v], rank);
        }
        bool any_candidate = false;
        for (std::size_t a = 0; a < p; ++a) {
            for (std::size_t b = a + 1; b < p; ++b) {
                const std::size_t x = order[a], y = order[b];
                if (!out.graph.adjacent(x, y)) continue;
                if (knowledge.required(x, y) || knowledge.required(y, x)) continue;
                for (const auto& [from, to] : {std::pair{x, y}, std::pair{y, x}}) {
                    std::vector<std::size_t> candidates;
                    for (auto v : adj[from])
                        if (v != to) candidates.push_back(v);
                    if (candidates.size() < depth) continue;
                    any_candidate = true;
                    const bool removed = detail::for_each_subset(candidates, depth, [&](const std::vector<std::size_t>& z) {
                        ++out.tests;
                        const CiTestResult r = test(x, y, z);
                        if (!r.independent) return false;
                        out.graph.remove_edge(x, y);
                        std::vector<std::size_t> sep(z);
                        std::sort(sep.begin(), sep.end());
                        out.sepsets[detail::pair_key(x, y)] = std::move(sep);
                        return true;
                    });
                    if (removed) break;
                }
            }
        }
        if (!any_candidate) break;
    }
    return out;
}

namespace {

bool in_sepset(const SepsetMap& s, std::size_t a, std::size_t b, std::size_t v) {
    auto it = s.find(detail::pair_key(a, b));
    return std::find(it->second.begin(), it->second.end(), v) != it->second.end();
}

}  // namespace

DiscoveryResult pc(const IndependenceTest& test, const DiscoveryConfig& cfg, const BackgroundKnowledge& bk) {
    cfg.validate();
    bk.validate();
    detail::Stopwatch watch;
    const KnowledgeIndex knowledge(bk, test.names());
    const std::size_t p = test.size();
    const auto order = detail::name_order(test.names());

    DiscoveryResult res;
    res.record.algorithm = "pc";
    res.record.config = cfg;
    res.record.knowledge_digest = bk.digest();
    res.record.ci_test = test.method();

    SkeletonResult skel = pc_stable_skeleton(test, cfg, knowledge);
    res.record.ci_tests = skel.tests;
    MixedGraph g = std::move(skel.graph);

    // Colliders x -> z <- y for unshielded triples with z outside sepset(x, y).
    for (std::size_t iz = 0; iz < p; ++iz) {
        const std::size_t z = order[iz];
        for (std::size_t ix = 0; ix < p; ++ix) {
            const std::size_t x = order[ix];
            if (x == z || !g.adjacent(x, z)) continue;
            for (std::size_t iy = ix + 1; iy < p; ++iy) {
                const std::size_t y = order[iy];
                if (y == z || !g.adjacent(y, z) || g.adjacent(x, y)) continue;
                if (!skel.sepsets.count(detail::pair_key(x, y))) continue;
                if (in_sepset(skel.sepsets, x, y, z)) continue;
                for (auto from : {x, y}) {
                    if (g.directed(from, z)) continue;
                    if (g.directed(z, from) || knowledge.forbidden(from, z) || has_directed_path(g, z, from)) {
                        res.record.notes.push_back("collider " + g.name(x) + " -> " + g.name(z) + " <- " + g.name(y) +
                                                   ": arrow from " + g.name(from) + " skipped");
                        continue;
                    }
                    g.add_directed(from, z);
                }
            }
        }
    }

    auto closed = apply_meek_rules(std::move(g), knowledge);
    for (auto& c : closed.conflicts) res.record.notes.push_back("meek: " + c);
    res.graph = std::move(closed.graph);
    res.graph.set_kind(GraphKind::cpdag);
    res.record.wall_time_ms = watch.elapsed_ms();
    return res;
}

DiscoveryResult pc(const CorrelationMatrix& c, const DiscoveryConfig& cfg, const BackgroundKnowledge& bk) {
    FisherZTest test(c, cfg.alpha);
    return pc(test, cfg, bk);
}

}  // namespace causalsem
