#include "causalsem/discovery.hpp"

#include "discovery_internal.hpp"

#include <cmath>
#include <deque>
#include <optional>

namespace causalsem {

BicScore::BicScore(CorrelationMatrix c, double penalty_discount) : corr_(std::move(c)), penalty_(penalty_discount) {
    if (!(penalty_ > 0.0)) throw std::invalid_argument("penalty_discount must be positive");
    if (corr_.n < 2) throw std::invalid_argument("BIC score needs n >= 2");
}

double BicScore::local(std::size_t node, std::vector<std::size_t> parents) const {
    std::sort(parents.begin(), parents.end());
    auto key = std::make_pair(node, parents);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    const double v = compute(node, parents);
    cache_.emplace(std::move(key), v);
    return v;
}

double BicScore::compute(std::size_t node, const std::vector<std::size_t>& parents) const {
    ++evaluations_;
    const auto& S = corr_.values;
    const auto y = static_cast<Eigen::Index>(node);
    double resid = S(y, y);
    if (!parents.empty()) {
        const auto k = static_cast<Eigen::Index>(parents.size());
        Eigen::MatrixXd spp(k, k);
        Eigen::VectorXd spy(k);
        for (Eigen::Index i = 0; i < k; ++i) {
            const auto pi = static_cast<Eigen::Index>(parents[static_cast<std::size_t>(i)]);
            spy[i] = S(pi, y);
            for (Eigen::Index j = 0; j < k; ++j) spp(i, j) = S(pi, static_cast<Eigen::Index>(parents[static_cast<std::size_t>(j)]));
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(spp, Eigen::EigenvaluesOnly);
        const double lo = eig.eigenvalues().minCoeff(), hi = eig.eigenvalues().maxCoeff();
        if (!(lo > 0.0) || hi / lo > 1e10) throw SingularConditioningError("singular parent block in local score", parents);
        resid -= spy.dot(spp.llt().solve(spy));
    }
    if (!(resid > 0.0)) throw SingularConditioningError("non-positive residual variance in local score", parents);
    const double n = static_cast<double>(corr_.n);
    return -n * std::log(resid) - penalty_ * static_cast<double>(parents.size() + 1) * std::log(n);
}

double BicScore::total(const MixedGraph& dag) const {
    double s = 0.0;
    for (std::size_t v = 0; v < dag.size(); ++v) s += local(v, dag.parents(v));
    return s;
}

namespace {

struct Operator {
    bool insert = true;
    std::size_t x = 0, y = 0;
    std::vector<std::size_t> set;  // T for insert, H for delete
    double delta = 0.0;
};

bool is_clique(const MixedGraph& g, const std::vector<std::size_t>& nodes) {
    for (std::size_t i = 0; i < nodes.size(); ++i)
        for (std::size_t j = i + 1; j < nodes.size(); ++j)
            if (!g.adjacent(nodes[i], nodes[j])) return false;
    return true;
}

/// True when some semi-directed path from `from` to `to` avoids `blocked`.
bool semi_directed_path_avoiding(const MixedGraph& g, std::size_t from, std::size_t to,
                                 const std::vector<std::size_t>& blocked) {
    std::vector<bool> seen(g.size(), false);
    for (auto b : blocked) seen[b] = true;
    seen[from] = true;
    std::deque<std::size_t> queue{from};
    while (!queue.empty()) {
        const auto u = queue.front();
        queue.pop_front();
        for (std::size_t w = 0; w < g.size(); ++w) {
            if (!(g.undirected(u, w) || g.directed(u, w))) continue;
            if (w == to) return true;
            if (!seen[w]) {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    return false;
}

std::vector<std::size_t> set_union(std::vector<std::size_t> a, const std::vector<std::size_t>& b) {
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    return a;
}

std::vector<std::size_t> without(std::vector<std::size_t> a, std::size_t v) {
    a.erase(std::remove(a.begin(), a.end(), v), a.end());
    return a;
}

/// Enumerates subsets of `pool` (in order) that keep `base` + subset a clique.
template <typename Fn>
void for_each_clique_extension(const MixedGraph& g, const std::vector<std::size_t>& base,
                               const std::vector<std::size_t>& pool, Fn&& fn) {
    std::vector<std::size_t> current;
    auto recurse = [&](auto&& self, std::size_t start) -> void {
        fn(current);
        for (std::size_t i = start; i < pool.size(); ++i) {
            const auto v = pool[i];
            bool ok = true;
            for (auto b : base)
                if (!g.adjacent(v, b)) ok = false;
            for (auto c : current)
                if (!g.adjacent(v, c)) ok = false;
            if (!ok) continue;
            current.push_back(v);
            self(self, i + 1);
            current.pop_back();
        }
    };
    recurse(recurse, 0);
}

class GreedySearch {
public:
    GreedySearch(const BicScore& score, const KnowledgeIndex& knowledge, const std::vector<std::string>& names,
                 RunRecord& record)
        : score_(score), knowledge_(knowledge), order_(detail::name_order(names)), record_(record) {}

    std::optional<double> local(std::size_t y, const std::vector<std::size_t>& parents) {
        try {
            return score_.local(y, parents);
        } catch (const SingularConditioningError& e) {
            if (record_.notes.size() < 50) record_.notes.push_back(std::string("skipped operator: ") + e.what());
            return std::nullopt;
        }
    }

    std::vector<Operator> insert_candidates(const MixedGraph& g) {
        std::vector<Operator> out;
        for (auto x : order_)
            for (auto y : order_) {
                if (x == y || g.adjacent(x, y) || knowledge_.forbidden(x, y)) continue;
                std::vector<std::size_t> t0, na;
                for (auto v : order_) {
                    if (!g.undirected(y, v)) continue;
                    (g.adjacent(v, x) ? na : t0).push_back(v);
                }
                if (!is_clique(g, na)) continue;
                const auto pa = g.parents(y);
                for_each_clique_extension(g, na, t0, [&](const std::vector<std::size_t>& t) {
                    for (auto v : t)
                        if (knowledge_.forbidden(v, y)) return;
                    const auto s = set_union(na, t);
                    if (semi_directed_path_avoiding(g, y, x, s)) return;
                    const auto base = set_union(pa, s);
                    const auto with = set_union(base, {x});
                    auto a = local(y, with);
                    auto b = local(y, base);
                    if (!a || !b) return;
                    const double delta = *a - *b;
                    if (delta > 0.0) out.push_back({true, x, y, t, delta});
                });
            }
        return out;
    }

    std::vector<Operator> delete_candidates(const MixedGraph& g) {
        std::vector<Operator> out;
        for (auto x : order_)
            for (auto y : order_) {
                if (x == y || !(g.undirected(x, y) || g.directed(x, y))) continue;
                if (knowledge_.required(x, y) || knowledge_.required(y, x)) continue;
                std::vector<std::size_t> na;
                for (auto v : order_)
                    if (g.undirected(y, v) && g.adjacent(v, x)) na.push_back(v);
                const auto pa = g.parents(y);
                // Enumerate H as the complement of the retained clique.
                const std::size_t m = na.size();
                for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
                    std::vector<std::size_t> h, rest;
                    for (std::size_t i = 0; i < m; ++i) ((mask >> i) & 1 ? h : rest).push_back(na[i]);
                    if (!is_clique(g, rest)) continue;
                    const auto base = without(set_union(pa, rest), x);
                    const auto with = set_union(base, {x});
                    auto a = local(y, base);
                    auto b = local(y, with);
                    if (!a || !b) continue;
                    const double delta = *a - *b;
                    if (delta > 0.0) out.push_back({false, x, y, h, delta});
                }
            }
        return out;
    }

    /// Applies the operator and re-derives the equivalence class; nullopt when
    /// the result cannot honor the knowledge.
    std::optional<MixedGraph> apply(const MixedGraph& g, const Operator& op) const {
        MixedGraph next = g;
        if (op.insert) {
            next.add_directed(op.x, op.y);
            for (auto t : op.set) next.add_directed(t, op.y);
        } else {
            next.remove_edge(op.x, op.y);
            for (auto h : op.set) {
                next.add_directed(op.y, h);
                if (next.undirected(op.x, h)) next.add_directed(op.x, h);
            }
        }
        MixedGraph cpdag;
        try {
            cpdag = cpdag_of(consistent_extension(next));
        } catch (const GraphError&) {
            return std::nullopt;
        }
        if (!knowledge_.empty()) {
            auto oriented = apply_meek_rules(cpdag, knowledge_);
            if (!oriented.conflicts.empty()) return std::nullopt;
            for (std::size_t a = 0; a < cpdag.size(); ++a)
                for (std::size_t b = 0; b < cpdag.size(); ++b)
                    if (a != b && knowledge_.forbidden(a, b) && oriented.graph.adjacent(a, b) &&
                        oriented.graph.mark(a, b) != Mark::arrow)
                        return std::nullopt;
        }
        return cpdag;
    }

    double total(const MixedGraph& cpdag) const { return score_.total(consistent_extension(cpdag)); }

    bool step(MixedGraph& g, bool insert_phase) {
        auto cands = insert_phase ? insert_candidates(g) : delete_candidates(g);
        std::stable_sort(cands.begin(), cands.end(),
                         [](const Operator& a, const Operator& b) { return a.delta > b.delta; });
        for (const auto& op : cands) {
            if (auto next = apply(g, op)) {
                g = std::move(*next);
                return true;
            }
        }
        return false;
    }

private:
    const BicScore& score_;
    const KnowledgeIndex& knowledge_;
    std::vector<std::size_t> order_;
    RunRecord& record_;
};

}  // namespace

DiscoveryResult fges(const CorrelationMatrix& c, const DiscoveryConfig& cfg, const BackgroundKnowledge& bk) {
    cfg.validate();
    bk.validate();
    detail::Stopwatch watch;
    const KnowledgeIndex knowledge(bk, c.names);
    BicScore score(c, cfg.penalty_discount);

    DiscoveryResult res;
    res.record.algorithm = "fges";
    res.record.config = cfg;
    res.record.knowledge_digest = bk.digest();
    res.record.ci_test = "none (linear-Gaussian BIC)";

    // Start from the equivalence class of the required edges.
    MixedGraph required_dag(c.names, GraphKind::dag);
    for (std::size_t a = 0; a < c.size(); ++a)
        for (std::size_t b = 0; b < c.size(); ++b)
            if (knowledge.required(a, b)) required_dag.add_directed(a, b);
    MixedGraph g = cpdag_of(required_dag);

    GreedySearch search(score, knowledge, c.names, res.record);
    while (search.step(g, true)) res.record.score_trace.push_back(search.total(g));
    res.record.notes.push_back("forward phase: " + std::to_string(res.record.score_trace.size()) + " inserts");
    std::size_t deletes = 0;
    while (search.step(g, false)) {
        ++deletes;
        res.record.score_trace.push_back(search.total(g));
    }
    res.record.notes.push_back("backward phase: " + std::to_string(deletes) + " deletes");

    res.record.score = search.total(g);
    auto oriented = apply_meek_rules(g, knowledge);
    for (auto& conflict : oriented.conflicts) res.record.notes.push_back("meek: " + conflict);
    res.graph = std::move(oriented.graph);
    res.graph.set_kind(GraphKind::cpdag);
    res.record.score_evaluations = score.evaluations();
    res.record.wall_time_ms = watch.elapsed_ms();
    return res;
}

}  // namespace causalsem
