#include "causalsem/graph.hpp"

#include "causalsem/detail/numeric.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <map>
#include <sstream>

namespace causalsem {

using json = nlohmann::ordered_json;

std::string to_string(Mark m) {
    switch (m) {
        case Mark::none: return "none";
        case Mark::tail: return "tail";
        case Mark::arrow: return "arrow";
        case Mark::circle: return "circle";
    }
    return "none";
}

std::string to_string(GraphKind k) {
    switch (k) {
        case GraphKind::dag: return "dag";
        case GraphKind::cpdag: return "cpdag";
        case GraphKind::pag: return "pag";
        case GraphKind::weighted_dag: return "weighted-dag";
    }
    return "dag";
}

Mark mark_from_string(const std::string& s) {
    if (s == "tail") return Mark::tail;
    if (s == "arrow") return Mark::arrow;
    if (s == "circle") return Mark::circle;
    throw GraphError("unknown endpoint mark '" + s + "'");
}

GraphKind graph_kind_from_string(const std::string& s) {
    if (s == "dag") return GraphKind::dag;
    if (s == "cpdag") return GraphKind::cpdag;
    if (s == "pag") return GraphKind::pag;
    if (s == "weighted-dag") return GraphKind::weighted_dag;
    throw GraphError("unknown graph kind '" + s + "'");
}

MixedGraph::MixedGraph(std::vector<std::string> nodes, GraphKind kind)
    : nodes_(std::move(nodes)),
      kind_(kind),
      marks_(nodes_.size() * nodes_.size(), Mark::none),
      weights_(nodes_.size() * nodes_.size(), std::numeric_limits<double>::quiet_NaN()) {
    std::set<std::string> seen;
    for (const auto& n : nodes_)
        if (!seen.insert(n).second) throw GraphError("duplicate node name '" + n + "'");
}

std::optional<std::size_t> MixedGraph::find(const std::string& name) const {
    auto it = std::find(nodes_.begin(), nodes_.end(), name);
    if (it == nodes_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - nodes_.begin());
}

std::size_t MixedGraph::index_of(const std::string& name) const {
    auto i = find(name);
    if (!i) throw GraphError("unknown node '" + name + "'");
    return *i;
}

void MixedGraph::set_edge(std::size_t i, std::size_t j, Mark at_i, Mark at_j) {
    if (i >= size() || j >= size()) throw GraphError("node index out of range");
    if (i == j) throw GraphError("self-loop on '" + nodes_[i] + "'");
    if (at_i == Mark::none || at_j == Mark::none) throw GraphError("edge endpoints need a mark");
    marks_[i * size() + j] = at_j;
    marks_[j * size() + i] = at_i;
}

void MixedGraph::remove_edge(std::size_t i, std::size_t j) {
    marks_[i * size() + j] = Mark::none;
    marks_[j * size() + i] = Mark::none;
    weights_[i * size() + j] = std::numeric_limits<double>::quiet_NaN();
    weights_[j * size() + i] = std::numeric_limits<double>::quiet_NaN();
}

void MixedGraph::set_mark(std::size_t at, std::size_t other, Mark m) {
    if (!adjacent(at, other)) throw GraphError("set_mark on non-adjacent pair");
    if (m == Mark::none) throw GraphError("set_mark with none; use remove_edge");
    marks_[other * size() + at] = m;
}

std::optional<double> MixedGraph::weight(std::size_t from, std::size_t to) const {
    const double w = weights_[from * size() + to];
    if (std::isnan(w)) return std::nullopt;
    return w;
}

void MixedGraph::set_weight(std::size_t from, std::size_t to, double w) {
    if (!directed(from, to)) throw GraphError("weights attach to directed edges only");
    weights_[from * size() + to] = w;
}

std::vector<std::size_t> MixedGraph::adjacent_nodes(std::size_t i) const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < size(); ++j)
        if (adjacent(i, j)) out.push_back(j);
    return out;
}

std::vector<std::size_t> MixedGraph::parents(std::size_t i) const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < size(); ++j)
        if (directed(j, i)) out.push_back(j);
    return out;
}

std::vector<std::size_t> MixedGraph::children(std::size_t i) const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < size(); ++j)
        if (directed(i, j)) out.push_back(j);
    return out;
}

std::vector<std::size_t> MixedGraph::undirected_neighbors(std::size_t i) const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < size(); ++j)
        if (undirected(i, j)) out.push_back(j);
    return out;
}

std::vector<Edge> MixedGraph::edges() const {
    std::vector<Edge> out;
    for (std::size_t i = 0; i < size(); ++i) {
        for (std::size_t j = i + 1; j < size(); ++j) {
            if (!adjacent(i, j)) continue;
            Edge e{i, j, mark(i, j), mark(j, i), std::nullopt};
            if (directed(i, j)) e.weight = weight(i, j);
            else if (directed(j, i)) e.weight = weight(j, i);
            out.push_back(e);
        }
    }
    return out;
}

std::size_t MixedGraph::edge_count() const {
    std::size_t c = 0;
    for (std::size_t i = 0; i < size(); ++i)
        for (std::size_t j = i + 1; j < size(); ++j)
            if (adjacent(i, j)) ++c;
    return c;
}

bool MixedGraph::operator==(const MixedGraph& other) const {
    if (nodes_ != other.nodes_ || kind_ != other.kind_ || marks_ != other.marks_) return false;
    for (std::size_t k = 0; k < weights_.size(); ++k) {
        const bool a = std::isnan(weights_[k]), b = std::isnan(other.weights_[k]);
        if (a != b || (!a && weights_[k] != other.weights_[k])) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Knowledge

void BackgroundKnowledge::validate() const {
    for (const auto& r : required)
        if (forbidden.count(r) || is_forbidden(r.first, r.second))
            throw GraphError("edge " + r.first + " -> " + r.second + " is both required and forbidden");
    std::set<std::string> names;
    for (const auto& [a, b] : required) {
        names.insert(a);
        names.insert(b);
    }
    MixedGraph g(std::vector<std::string>(names.begin(), names.end()));
    for (const auto& [a, b] : required) {
        if (g.adjacent(g.index_of(a), g.index_of(b)))
            throw GraphError("required edges " + a + " -> " + b + " and " + b + " -> " + a + " form a cycle");
        g.add_directed(a, b);
    }
    if (!is_dag(g)) throw GraphError("required edges form a directed cycle");
}

bool BackgroundKnowledge::is_forbidden(const std::string& cause, const std::string& effect) const {
    if (forbidden.count({cause, effect})) return true;
    int tc = -1, te = -1;
    for (std::size_t t = 0; t < tiers.size(); ++t) {
        for (const auto& n : tiers[t]) {
            if (n == cause) tc = static_cast<int>(t);
            if (n == effect) te = static_cast<int>(t);
        }
    }
    return tc >= 0 && te >= 0 && tc > te;
}

bool BackgroundKnowledge::is_required(const std::string& cause, const std::string& effect) const {
    return required.count({cause, effect}) > 0;
}

std::string BackgroundKnowledge::digest() const {
    std::ostringstream text;
    for (const auto& tier : tiers) {
        text << "tier:";
        for (const auto& n : tier) text << n << ',';
        text << ';';
    }
    for (const auto& [a, b] : forbidden) text << "forbid:" << a << "->" << b << ';';
    for (const auto& [a, b] : required) text << "require:" << a << "->" << b << ';';
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text.str()) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

KnowledgeIndex::KnowledgeIndex(const BackgroundKnowledge& bk, const std::vector<std::string>& nodes)
    : empty_(bk.empty()), p_(nodes.size()), forbidden_(p_ * p_, false), required_(p_ * p_, false), tiers_(p_, -1) {
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < nodes.size(); ++i) index[nodes[i]] = i;
    for (std::size_t t = 0; t < bk.tiers.size(); ++t)
        for (const auto& n : bk.tiers[t])
            if (auto it = index.find(n); it != index.end()) tiers_[it->second] = static_cast<int>(t);
    for (std::size_t i = 0; i < p_; ++i) {
        for (std::size_t j = 0; j < p_; ++j) {
            if (i == j) continue;
            if (tiers_[i] >= 0 && tiers_[j] >= 0 && tiers_[i] > tiers_[j]) forbidden_[i * p_ + j] = true;
        }
    }
    for (const auto& [a, b] : bk.forbidden) {
        auto ia = index.find(a), ib = index.find(b);
        if (ia != index.end() && ib != index.end()) forbidden_[ia->second * p_ + ib->second] = true;
    }
    for (const auto& [a, b] : bk.required) {
        auto ia = index.find(a), ib = index.find(b);
        if (ia != index.end() && ib != index.end()) {
            required_[ia->second * p_ + ib->second] = true;
            forbidden_[ib->second * p_ + ia->second] = true;
        }
    }
}

std::vector<std::string> knowledge_violations(const MixedGraph& g, const BackgroundKnowledge& bk) {
    std::vector<std::string> out;
    const KnowledgeIndex k(bk, g.nodes());
    if (k.empty()) return out;
    for (std::size_t a = 0; a < g.size(); ++a) {
        for (std::size_t b = 0; b < g.size(); ++b) {
            if (a == b) continue;
            if (k.forbidden(a, b) && g.adjacent(a, b) && g.mark(a, b) != Mark::arrow)
                out.push_back("forbidden " + g.name(a) + " -> " + g.name(b) + " not excluded (" +
                              to_string(g.mark(a, b)) + " at " + g.name(a) + ")");
            if (k.required(a, b) && !(g.adjacent(a, b) && g.mark(b, a) == Mark::arrow && g.mark(a, b) != Mark::arrow))
                out.push_back("required " + g.name(a) + " -> " + g.name(b) + " missing");
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Directed structure

bool is_dag(const MixedGraph& g) {
    for (const auto& e : g.edges())
        if (!((e.mark_a == Mark::tail && e.mark_b == Mark::arrow) || (e.mark_a == Mark::arrow && e.mark_b == Mark::tail)))
            return false;
    try {
        topological_order(g);
    } catch (const GraphError&) {
        return false;
    }
    return true;
}

bool has_directed_path(const MixedGraph& g, std::size_t from, std::size_t to) {
    std::vector<bool> seen(g.size(), false);
    std::vector<std::size_t> stack{from};
    seen[from] = true;
    while (!stack.empty()) {
        const auto v = stack.back();
        stack.pop_back();
        for (std::size_t c = 0; c < g.size(); ++c) {
            if (!g.directed(v, c)) continue;
            if (c == to) return true;
            if (!seen[c]) {
                seen[c] = true;
                stack.push_back(c);
            }
        }
    }
    return false;
}

std::vector<std::size_t> topological_order(const MixedGraph& g) {
    const std::size_t p = g.size();
    std::vector<std::size_t> indegree(p, 0);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j)
            if (g.directed(i, j)) ++indegree[j];
    std::set<std::size_t> ready;
    for (std::size_t i = 0; i < p; ++i)
        if (indegree[i] == 0) ready.insert(i);
    std::vector<std::size_t> order;
    while (!ready.empty()) {
        const auto v = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(v);
        for (std::size_t c = 0; c < p; ++c)
            if (g.directed(v, c) && --indegree[c] == 0) ready.insert(c);
    }
    if (order.size() != p) throw GraphError("directed cycle in graph");
    return order;
}

namespace {

std::vector<std::size_t> reach(const MixedGraph& g, std::size_t v, bool forward) {
    std::vector<bool> seen(g.size(), false);
    std::vector<std::size_t> stack{v};
    while (!stack.empty()) {
        const auto u = stack.back();
        stack.pop_back();
        for (std::size_t w = 0; w < g.size(); ++w) {
            const bool step = forward ? g.directed(u, w) : g.directed(w, u);
            if (step && !seen[w]) {
                seen[w] = true;
                stack.push_back(w);
            }
        }
    }
    std::vector<std::size_t> out;
    for (std::size_t w = 0; w < g.size(); ++w)
        if (seen[w] && w != v) out.push_back(w);
    return out;
}

}  // namespace

std::vector<std::size_t> descendants(const MixedGraph& g, std::size_t v) { return reach(g, v, true); }
std::vector<std::size_t> ancestors(const MixedGraph& g, std::size_t v) { return reach(g, v, false); }

bool d_separated(const MixedGraph& dag, std::size_t x, std::size_t y, const std::vector<std::size_t>& z) {
    const std::size_t p = dag.size();
    if (x >= p || y >= p) throw GraphError("d_separated: node index out of range");
    if (x == y) throw GraphError("d_separated: x and y must differ");
    std::vector<bool> in_z(p, false);
    for (auto v : z) {
        if (v >= p) throw GraphError("d_separated: node index out of range");
        if (v == x || v == y) throw GraphError("d_separated: x and y must not be in the conditioning set");
        in_z[v] = true;
    }
    // Nodes that are in Z or have a descendant in Z: colliders there are open.
    std::vector<bool> opens_collider(in_z);
    std::vector<std::size_t> stack(z.begin(), z.end());
    while (!stack.empty()) {
        const auto v = stack.back();
        stack.pop_back();
        for (std::size_t u = 0; u < p; ++u) {
            if (dag.directed(u, v) && !opens_collider[u]) {
                opens_collider[u] = true;
                stack.push_back(u);
            }
        }
    }
    // Reachability over (node, arrived-from-child?) states.
    std::vector<bool> visited_up(p, false), visited_down(p, false);
    std::deque<std::pair<std::size_t, bool>> queue;
    queue.emplace_back(x, true);
    while (!queue.empty()) {
        auto [v, up] = queue.front();
        queue.pop_front();
        if (up ? visited_up[v] : visited_down[v]) continue;
        (up ? visited_up : visited_down)[v] = true;
        if (v == y) return false;
        if (up) {
            if (in_z[v]) continue;
            for (std::size_t u = 0; u < p; ++u) {
                if (dag.directed(u, v)) queue.emplace_back(u, true);
                if (dag.directed(v, u)) queue.emplace_back(u, false);
            }
        } else {
            if (!in_z[v])
                for (std::size_t u = 0; u < p; ++u)
                    if (dag.directed(v, u)) queue.emplace_back(u, false);
            if (opens_collider[v])
                for (std::size_t u = 0; u < p; ++u)
                    if (dag.directed(u, v)) queue.emplace_back(u, true);
        }
    }
    return true;
}

bool d_separated(const MixedGraph& dag, const std::string& x, const std::string& y,
                 const std::vector<std::string>& z) {
    std::vector<std::size_t> zi;
    for (const auto& n : z) zi.push_back(dag.index_of(n));
    return d_separated(dag, dag.index_of(x), dag.index_of(y), zi);
}

// ---------------------------------------------------------------------------
// Meek closure

namespace {

bool orient(MixedGraph& g, std::size_t from, std::size_t to, const KnowledgeIndex& k, const char* rule,
            std::vector<std::string>& conflicts) {
    if (k.forbidden(from, to)) {
        conflicts.push_back(std::string(rule) + " wants " + g.name(from) + " -> " + g.name(to) +
                            ", forbidden by knowledge");
        return false;
    }
    if (has_directed_path(g, to, from)) {
        conflicts.push_back(std::string(rule) + " wants " + g.name(from) + " -> " + g.name(to) +
                            ", would create a directed cycle");
        return false;
    }
    g.add_directed(from, to);
    return true;
}

// Each returns true when it oriented at least one edge.
bool meek_rule1(MixedGraph& g, const KnowledgeIndex& k, std::vector<std::string>& c) {
    bool changed = false;
    const auto p = g.size();
    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t kk = 0; kk < p; ++kk) {
            if (!g.undirected(j, kk)) continue;
            for (std::size_t i = 0; i < p; ++i) {
                if (i == kk || !g.directed(i, j) || g.adjacent(i, kk)) continue;
                if (orient(g, j, kk, k, "rule 1", c)) {
                    changed = true;
                    break;
                }
            }
        }
    return changed;
}

bool meek_rule2(MixedGraph& g, const KnowledgeIndex& k, std::vector<std::string>& c) {
    bool changed = false;
    const auto p = g.size();
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) {
            if (!g.undirected(i, j)) continue;
            for (std::size_t m = 0; m < p; ++m) {
                if (g.directed(i, m) && g.directed(m, j)) {
                    if (orient(g, i, j, k, "rule 2", c)) {
                        changed = true;
                        break;
                    }
                }
            }
        }
    return changed;
}

bool meek_rule3(MixedGraph& g, const KnowledgeIndex& k, std::vector<std::string>& c) {
    bool changed = false;
    const auto p = g.size();
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) {
            if (!g.undirected(i, j)) continue;
            bool done = false;
            for (std::size_t a = 0; a < p && !done; ++a) {
                if (!g.undirected(i, a) || !g.directed(a, j)) continue;
                for (std::size_t b = a + 1; b < p && !done; ++b) {
                    if (!g.undirected(i, b) || !g.directed(b, j) || g.adjacent(a, b)) continue;
                    if (orient(g, i, j, k, "rule 3", c)) {
                        changed = true;
                        done = true;
                    }
                }
            }
        }
    return changed;
}

bool meek_rule4(MixedGraph& g, const KnowledgeIndex& k, std::vector<std::string>& c) {
    bool changed = false;
    const auto p = g.size();
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) {
            if (!g.undirected(i, j)) continue;
            bool done = false;
            for (std::size_t a = 0; a < p && !done; ++a) {
                if (!g.undirected(i, a) || g.adjacent(a, j)) continue;
                for (std::size_t l = 0; l < p && !done; ++l) {
                    if (!g.directed(a, l) || !g.directed(l, j) || !g.adjacent(i, l)) continue;
                    if (orient(g, i, j, k, "rule 4", c)) {
                        changed = true;
                        done = true;
                    }
                }
            }
        }
    return changed;
}

}  // namespace

MeekResult apply_meek_rules(MixedGraph g, const KnowledgeIndex& knowledge) {
    MeekResult result;
    for (const auto& e : g.edges())
        if (e.mark_a == Mark::circle || e.mark_b == Mark::circle || (e.mark_a == Mark::arrow && e.mark_b == Mark::arrow))
            throw GraphError("Meek rules need a partially directed graph (tail/arrow marks only)");
    if (!knowledge.empty()) {
        const auto p = g.size();
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = 0; j < p; ++j) {
                if (!g.undirected(i, j)) continue;
                if (knowledge.required(i, j) || (knowledge.forbidden(j, i) && !knowledge.forbidden(i, j)))
                    orient(g, i, j, knowledge, "knowledge", result.conflicts);
            }
    }
    bool changed = true;
    while (changed) {
        changed = false;
        changed |= meek_rule1(g, knowledge, result.conflicts);
        changed |= meek_rule2(g, knowledge, result.conflicts);
        changed |= meek_rule3(g, knowledge, result.conflicts);
        changed |= meek_rule4(g, knowledge, result.conflicts);
    }
    result.graph = std::move(g);
    return result;
}

MixedGraph cpdag_of(const MixedGraph& dag) {
    if (!is_dag(dag)) throw GraphError("cpdag_of needs a DAG");
    const auto p = dag.size();
    MixedGraph out(dag.nodes(), GraphKind::cpdag);
    for (const auto& e : dag.edges()) out.add_undirected(e.a, e.b);
    for (std::size_t b = 0; b < p; ++b) {
        const auto pa = dag.parents(b);
        for (std::size_t x = 0; x < pa.size(); ++x)
            for (std::size_t y = x + 1; y < pa.size(); ++y)
                if (!dag.adjacent(pa[x], pa[y])) {
                    out.add_directed(pa[x], b);
                    out.add_directed(pa[y], b);
                }
    }
    auto closed = apply_meek_rules(std::move(out));
    closed.graph.set_kind(GraphKind::cpdag);
    return closed.graph;
}

MixedGraph consistent_extension(const MixedGraph& cpdag) {
    const auto p = cpdag.size();
    for (const auto& e : cpdag.edges())
        if (e.mark_a == Mark::circle || e.mark_b == Mark::circle || (e.mark_a == Mark::arrow && e.mark_b == Mark::arrow))
            throw GraphError("consistent_extension needs tail/arrow marks only");
    MixedGraph work = cpdag;
    MixedGraph out(cpdag.nodes(), GraphKind::dag);
    for (const auto& e : cpdag.edges()) {
        if (e.mark_a == Mark::tail && e.mark_b == Mark::arrow) out.add_directed(e.a, e.b);
        else if (e.mark_a == Mark::arrow && e.mark_b == Mark::tail) out.add_directed(e.b, e.a);
    }
    std::vector<bool> removed(p, false);
    for (std::size_t step = 0; step < p; ++step) {
        std::optional<std::size_t> sink;
        // Peel the last eligible node in index order so that earlier nodes become causes.
        for (std::size_t v = p; v-- > 0;) {
            if (removed[v]) continue;
            bool has_child = false;
            for (std::size_t c = 0; c < p && !has_child; ++c)
                if (!removed[c] && work.directed(v, c)) has_child = true;
            if (has_child) continue;
            const auto und = work.undirected_neighbors(v);
            const auto adj = work.adjacent_nodes(v);
            bool ok = true;
            for (auto u : und) {
                if (removed[u]) continue;
                for (auto w : adj) {
                    if (removed[w] || w == u) continue;
                    if (!work.adjacent(u, w)) {
                        ok = false;
                        break;
                    }
                }
                if (!ok) break;
            }
            if (ok) {
                sink = v;
                break;
            }
        }
        if (!sink) {
            std::size_t blocker = 0;
            for (std::size_t v = 0; v < p; ++v)
                if (!removed[v]) {
                    blocker = v;
                    break;
                }
            throw GraphError("graph admits no consistent DAG extension (obstructed at node '" + cpdag.name(blocker) +
                             "')");
        }
        const auto v = *sink;
        for (auto u : work.undirected_neighbors(v))
            if (!removed[u]) out.add_directed(u, v);
        for (std::size_t u = 0; u < p; ++u)
            if (work.adjacent(u, v)) work.remove_edge(u, v);
        removed[v] = true;
    }
    return out;
}

std::size_t structural_hamming_distance(const MixedGraph& g1, const MixedGraph& g2) {
    if (g1.nodes() != g2.nodes()) throw GraphError("structural_hamming_distance: node sets differ");
    std::size_t d = 0;
    for (std::size_t i = 0; i < g1.size(); ++i)
        for (std::size_t j = i + 1; j < g1.size(); ++j)
            if (g1.mark(i, j) != g2.mark(i, j) || g1.mark(j, i) != g2.mark(j, i)) ++d;
    return d;
}

MixedGraph simplify_by_weight(const MixedGraph& g, double threshold) {
    if (threshold < 0.0) throw GraphError("simplify_by_weight: threshold must be non-negative");
    MixedGraph out(g.nodes(), g.kind());
    for (const auto& e : g.edges()) {
        if (!e.weight || std::abs(*e.weight) <= threshold) continue;
        out.set_edge(e.a, e.b, e.mark_a, e.mark_b);
        if (e.mark_a == Mark::tail) out.set_weight(e.a, e.b, *e.weight);
        else out.set_weight(e.b, e.a, *e.weight);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

std::string graph_to_json(const MixedGraph& g) {
    json doc;
    doc["kind"] = to_string(g.kind());
    doc["nodes"] = g.nodes();
    json edges = json::array();
    for (const auto& e : g.edges()) {
        // Directed edges are written cause first.
        const bool flip = e.mark_a == Mark::arrow && e.mark_b != Mark::arrow;
        json je;
        je["source"] = g.name(flip ? e.b : e.a);
        je["target"] = g.name(flip ? e.a : e.b);
        je["source_mark"] = to_string(flip ? e.mark_b : e.mark_a);
        je["target_mark"] = to_string(flip ? e.mark_a : e.mark_b);
        if (e.weight) je["weight"] = *e.weight;
        edges.push_back(std::move(je));
    }
    doc["edges"] = std::move(edges);
    return doc.dump(2);
}

MixedGraph graph_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw GraphError(std::string("invalid graph JSON: ") + e.what());
    }
    MixedGraph g(doc.at("nodes").get<std::vector<std::string>>(),
                 graph_kind_from_string(doc.value("kind", std::string("dag"))));
    for (const auto& je : doc.at("edges")) {
        const auto a = g.index_of(je.at("source").get<std::string>());
        const auto b = g.index_of(je.at("target").get<std::string>());
        if (g.adjacent(a, b)) throw GraphError("duplicate edge between '" + g.name(a) + "' and '" + g.name(b) + "'");
        g.set_edge(a, b, mark_from_string(je.value("source_mark", std::string("tail"))),
                   mark_from_string(je.value("target_mark", std::string("arrow"))));
        if (je.contains("weight")) g.set_weight(a, b, je.at("weight").get<double>());
    }
    return g;
}

namespace {

std::string dot_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string dot_arrow(Mark m) {
    switch (m) {
        case Mark::arrow: return "normal";
        case Mark::circle: return "odot";
        default: return "none";
    }
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

}  // namespace

std::string graph_to_dot(const MixedGraph& g, const std::string& title) {
    std::ostringstream out;
    out << "digraph " << dot_quote(title) << " {\n";
    out << "  // kind: " << to_string(g.kind()) << "\n";
    for (const auto& n : g.nodes()) out << "  " << dot_quote(n) << ";\n";
    for (const auto& e : g.edges()) {
        const bool flip = e.mark_a == Mark::arrow && e.mark_b != Mark::arrow;
        const auto u = flip ? e.b : e.a;
        const auto v = flip ? e.a : e.b;
        const Mark mu = flip ? e.mark_b : e.mark_a;
        const Mark mv = flip ? e.mark_a : e.mark_b;
        std::vector<std::string> attrs;
        if (mu == Mark::tail && mv == Mark::arrow) {
        } else if (mu == Mark::tail && mv == Mark::tail) {
            attrs.push_back("dir=none");
        } else if (mu == Mark::arrow && mv == Mark::arrow) {
            attrs.push_back("dir=both");
        } else {
            attrs.push_back("dir=both");
            attrs.push_back("arrowtail=" + dot_arrow(mu));
            attrs.push_back("arrowhead=" + dot_arrow(mv));
        }
        if (e.weight) {
            const double w = *e.weight;
            attrs.push_back("label=\"" + fixed(w, 3) + "\"");
            attrs.push_back("penwidth=" + fixed(4.0 * std::abs(w), 3));
            attrs.push_back(std::string("color=") + (w >= 0.0 ? "blue" : "red"));
        }
        out << "  " << dot_quote(g.name(u)) << " -> " << dot_quote(g.name(v));
        if (!attrs.empty()) {
            out << " [";
            for (std::size_t k = 0; k < attrs.size(); ++k) out << (k ? ", " : "") << attrs[k];
            out << "]";
        }
        out << ";\n";
    }
    out << "}\n";
    return out.str();
}

std::string knowledge_to_json(const BackgroundKnowledge& bk) {
    json doc;
    doc["tiers"] = bk.tiers;
    json f = json::array(), r = json::array();
    for (const auto& [a, b] : bk.forbidden) f.push_back({a, b});
    for (const auto& [a, b] : bk.required) r.push_back({a, b});
    doc["forbidden"] = std::move(f);
    doc["required"] = std::move(r);
    doc["digest"] = bk.digest();
    return doc.dump(2);
}

}  // namespace causalsem
