#include "causalsem/discovery.hpp"

#include "discovery_internal.hpp"

#include <deque>
#include <set>

namespace causalsem {

namespace {

bool in_sepset(const SepsetMap& s, std::size_t a, std::size_t b, std::size_t v) {
    auto it = s.find(detail::pair_key(a, b));
    if (it == s.end()) return false;
    return std::find(it->second.begin(), it->second.end(), v) != it->second.end();
}

void reset_circles(MixedGraph& g) {
    for (const auto& e : g.edges()) g.set_edge(e.a, e.b, Mark::circle, Mark::circle);
}

void orient_colliders(MixedGraph& g, const SepsetMap& sepsets, const std::vector<std::size_t>& order) {
    const std::size_t p = g.size();
    for (std::size_t iz = 0; iz < p; ++iz) {
        const std::size_t z = order[iz];
        for (std::size_t ix = 0; ix < p; ++ix) {
            const std::size_t x = order[ix];
            if (x == z || !g.adjacent(x, z)) continue;
            for (std::size_t iy = ix + 1; iy < p; ++iy) {
                const std::size_t y = order[iy];
                if (y == z || !g.adjacent(y, z) || g.adjacent(x, y)) continue;
                if (!sepsets.count(detail::pair_key(x, y)) || in_sepset(sepsets, x, y, z)) continue;
                g.set_mark(z, x, Mark::arrow);
                g.set_mark(z, y, Mark::arrow);
            }
        }
    }
}

/// Nodes w reachable from x along paths whose every inner triple is a collider
/// or a triangle.
std::vector<std::size_t> possible_dsep(const MixedGraph& g, std::size_t x) {
    const std::size_t p = g.size();
    std::set<std::pair<std::size_t, std::size_t>> seen;
    std::deque<std::pair<std::size_t, std::size_t>> queue;
    std::vector<bool> member(p, false);
    for (auto v : g.adjacent_nodes(x)) {
        queue.emplace_back(x, v);
        seen.insert({x, v});
        member[v] = true;
    }
    while (!queue.empty()) {
        auto [prev, cur] = queue.front();
        queue.pop_front();
        for (auto next : g.adjacent_nodes(cur)) {
            if (next == prev || next == x) continue;
            const bool collider = g.mark(cur, prev) == Mark::arrow && g.mark(cur, next) == Mark::arrow;
            const bool triangle = g.adjacent(prev, next);
            if (!collider && !triangle) continue;
            if (seen.insert({cur, next}).second) {
                member[next] = true;
                queue.emplace_back(cur, next);
            }
        }
    }
    std::vector<std::size_t> out;
    for (std::size_t v = 0; v < p; ++v)
        if (member[v] && v != x) out.push_back(v);
    return out;
}

struct Orienter {
    MixedGraph& g;
    const SepsetMap& sepsets;
    const std::vector<std::size_t>& order;

    // a *-> b o-* c, a and c nonadjacent  =>  b -> c
    bool rule1() {
        bool changed = false;
        for (auto b : order)
            for (auto a : order) {
                if (a == b || !g.adjacent(a, b) || g.mark(b, a) != Mark::arrow) continue;
                for (auto c : order) {
                    if (c == a || c == b || !g.adjacent(b, c) || g.adjacent(a, c)) continue;
                    if (g.mark(b, c) != Mark::circle) continue;
                    g.set_edge(b, c, Mark::tail, Mark::arrow);
                    changed = true;
                }
            }
        return changed;
    }

    // a -> b *-> c or a *-> b -> c, with a *-o c  =>  a *-> c
    bool rule2() {
        bool changed = false;
        for (auto a : order)
            for (auto c : order) {
                if (a == c || !g.adjacent(a, c) || g.mark(c, a) != Mark::circle) continue;
                for (auto b : order) {
                    if (b == a || b == c || !g.adjacent(a, b) || !g.adjacent(b, c)) continue;
                    const bool first = g.directed(a, b) && g.mark(c, b) == Mark::arrow;
                    const bool second = g.mark(b, a) == Mark::arrow && g.directed(b, c);
                    if (first || second) {
                        g.set_mark(c, a, Mark::arrow);
                        changed = true;
                        break;
                    }
                }
            }
        return changed;
    }

    // a *-> b <-* c, a *-o d o-* c, a and c nonadjacent, d *-o b  =>  d *-> b
    bool rule3() {
        bool changed = false;
        for (auto d : order)
            for (auto b : order) {
                if (d == b || !g.adjacent(d, b) || g.mark(b, d) != Mark::circle) continue;
                bool done = false;
                for (auto a : order) {
                    if (done) break;
                    if (a == d || a == b || !g.adjacent(a, b) || g.mark(b, a) != Mark::arrow) continue;
                    if (!g.adjacent(a, d) || g.mark(d, a) != Mark::circle) continue;
                    for (auto c : order) {
                        if (c == a || c == d || c == b || !g.adjacent(c, b) || g.mark(b, c) != Mark::arrow) continue;
                        if (!g.adjacent(c, d) || g.mark(d, c) != Mark::circle || g.adjacent(a, c)) continue;
                        g.set_mark(b, d, Mark::arrow);
                        changed = true;
                        done = true;
                        break;
                    }
                }
            }
        return changed;
    }

    // Discriminating path <d, ..., a, b, c> with b o-* c.
    bool rule4() {
        bool changed = false;
        for (auto b : order)
            for (auto c : order) {
                if (b == c || !g.adjacent(b, c) || g.mark(b, c) != Mark::circle) continue;
                for (auto a : order) {
                    if (a == b || a == c || !g.adjacent(a, b) || !g.directed(a, c)) continue;
                    if (g.mark(a, b) != Mark::arrow) continue;
                    if (auto d = find_discriminating_start(a, b, c)) {
                        if (in_sepset(sepsets, *d, c, b)) {
                            g.set_edge(b, c, Mark::tail, Mark::arrow);
                        } else {
                            g.set_mark(b, a, Mark::arrow);
                            g.set_mark(b, c, Mark::arrow);
                            g.set_mark(c, b, Mark::arrow);
                        }
                        changed = true;
                        break;
                    }
                }
            }
        return changed;
    }

    std::optional<std::size_t> find_discriminating_start(std::size_t a, std::size_t b, std::size_t c) const {
        // Walk back from a through colliders that are parents of c.
        std::vector<bool> visited(g.size(), false);
        visited[a] = visited[b] = visited[c] = true;
        std::deque<std::pair<std::size_t, std::size_t>> queue{{a, b}};
        while (!queue.empty()) {
            auto [v, from] = queue.front();
            queue.pop_front();
            (void)from;
            for (auto u : order) {
                if (visited[u] || !g.adjacent(u, v) || g.mark(v, u) != Mark::arrow) continue;
                if (!g.adjacent(u, c)) {
                    if (sepsets.count(detail::pair_key(u, c))) return u;
                    continue;
                }
                // u must itself be a collider on the path.
                if (g.directed(u, c) && g.mark(u, v) == Mark::arrow) {
                    visited[u] = true;
                    queue.emplace_back(u, v);
                }
            }
        }
        return std::nullopt;
    }

    void run() {
        bool changed = true;
        while (changed) {
            changed = false;
            changed |= rule1();
            changed |= rule2();
            changed |= rule3();
            changed |= rule4();
        }
    }
};

}  // namespace

DiscoveryResult fci(const IndependenceTest& test, const DiscoveryConfig& cfg, const BackgroundKnowledge& bk) {
    cfg.validate();
    bk.validate();
    detail::Stopwatch watch;
    const KnowledgeIndex knowledge(bk, test.names());
    const std::size_t p = test.size();
    const auto order = detail::name_order(test.names());
    const auto rank = detail::rank_of(order);

    DiscoveryResult res;
    res.record.algorithm = "fci";
    res.record.config = cfg;
    res.record.knowledge_digest = bk.digest();
    res.record.ci_test = test.method();
    res.record.notes.push_back("orientation rules R0-R4 (no completeness augmentation)");

    SkeletonResult skel = pc_stable_skeleton(test, cfg, knowledge);
    res.record.ci_tests = skel.tests;
    MixedGraph g = std::move(skel.graph);
    g.set_kind(GraphKind::pag);
    reset_circles(g);
    orient_colliders(g, skel.sepsets, order);

    // Possible-d-sep pruning against the collider-oriented graph.
    std::vector<std::vector<std::size_t>> pds(p);
    for (std::size_t v = 0; v < p; ++v) {
        pds[v] = possible_dsep(g, v);
        detail::sort_by_rank(pds[v], rank);
    }
    MixedGraph pruned = g;
    for (std::size_t ia = 0; ia < p; ++ia) {
        for (std::size_t ib = ia + 1; ib < p; ++ib) {
            const std::size_t x = order[ia], y = order[ib];
            if (!pruned.adjacent(x, y)) continue;
            if (knowledge.required(x, y) || knowledge.required(y, x)) continue;
            bool removed = false;
            for (const auto& [from, to] : {std::pair{x, y}, std::pair{y, x}}) {
                std::vector<std::size_t> candidates;
                for (auto v : pds[from])
                    if (v != to) candidates.push_back(v);
                std::size_t max_depth = candidates.size();
                if (cfg.max_cond_size) max_depth = std::min(max_depth, *cfg.max_cond_size);
                for (std::size_t depth = 0; depth <= max_depth && !removed; ++depth) {
                    removed = detail::for_each_subset(candidates, depth, [&](const std::vector<std::size_t>& z) {
                        ++res.record.ci_tests;
                        if (!test(x, y, z).independent) return false;
                        pruned.remove_edge(x, y);
                        std::vector<std::size_t> sep(z);
                        std::sort(sep.begin(), sep.end());
                        skel.sepsets[detail::pair_key(x, y)] = std::move(sep);
                        return true;
                    });
                }
                if (removed) break;
            }
        }
    }
    g = std::move(pruned);
    reset_circles(g);
    orient_colliders(g, skel.sepsets, order);

    // Knowledge: a forbidden cause gets an arrowhead; required edges are fully oriented.
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = 0; b < p; ++b) {
            if (a == b || !g.adjacent(a, b)) continue;
            if (knowledge.required(a, b)) g.set_edge(a, b, Mark::tail, Mark::arrow);
            else if (knowledge.forbidden(a, b)) g.set_mark(a, b, Mark::arrow);
        }

    Orienter{g, skel.sepsets, order}.run();
    res.graph = std::move(g);
    res.record.wall_time_ms = watch.elapsed_ms();
    return res;
}

DiscoveryResult fci(const CorrelationMatrix& c, const DiscoveryConfig& cfg, const BackgroundKnowledge& bk) {
    FisherZTest test(c, cfg.alpha);
    return fci(test, cfg, bk);
}

}  // namespace causalsem
