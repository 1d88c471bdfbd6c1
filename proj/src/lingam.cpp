#include "causalsem/discovery.hpp"

#include "causalsem/detail/numeric.hpp"
#include "discovery_internal.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace causalsem {

double lingam_entropy(const Eigen::Ref<const Eigen::VectorXd>& u) {
    constexpr double k1 = 79.047, k2 = 7.4129, gamma = 0.37457;
    const double n = static_cast<double>(u.size());
    double logcosh = 0.0, gauss = 0.0;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        const double v = u[i];
        // log cosh computed stably for large |v|
        const double a = std::abs(v);
        logcosh += a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
        gauss += v * std::exp(-0.5 * v * v);
    }
    logcosh /= n;
    gauss /= n;
    return (1.0 + std::log(2.0 * std::numbers::pi)) / 2.0 - k1 * (logcosh - gamma) * (logcosh - gamma) -
           k2 * gauss * gauss;
}

namespace {

Eigen::VectorXd standardize(const Eigen::VectorXd& x) {
    const double mean = x.mean();
    Eigen::VectorXd c = x.array() - mean;
    const double sd = std::sqrt(c.squaredNorm() / static_cast<double>(c.size()));
    if (!(sd > 0.0)) return c;
    return c / sd;
}

Eigen::VectorXd residual(const Eigen::VectorXd& xi, const Eigen::VectorXd& xj) {
    const double n = static_cast<double>(xi.size());
    const double mi = xi.mean(), mj = xj.mean();
    const double cov = ((xi.array() - mi) * (xj.array() - mj)).sum() / n;
    const double var = (xj.array() - mj).square().sum() / n;
    if (!(var > 0.0)) return xi;
    return xi - (cov / var) * xj;
}

double pair_measure(const Eigen::VectorXd& xi, const Eigen::VectorXd& xj) {
    const Eigen::VectorXd ri = standardize(residual(xi, xj));
    const Eigen::VectorXd rj = standardize(residual(xj, xi));
    const double diff = (lingam_entropy(xj) + lingam_entropy(ri)) - (lingam_entropy(xi) + lingam_entropy(rj));
    return std::min(0.0, diff) * std::min(0.0, diff);
}

}  // namespace

DiscoveryResult direct_lingam(const Dataset& d, const DiscoveryConfig& cfg, const BackgroundKnowledge& bk) {
    cfg.validate();
    bk.validate();
    detail::Stopwatch watch;
    const auto names = d.names();
    const std::size_t p = d.cols();
    const std::size_t n = d.rows();
    const KnowledgeIndex knowledge(bk, names);

    DiscoveryResult res;
    res.record.algorithm = "lingam";
    res.record.config = cfg;
    res.record.knowledge_digest = bk.digest();
    res.record.ci_test = "none (entropy-approximation pairwise measure)";
    res.record.notes.push_back("weights by least squares over the causal order; |b| < " +
                               detail::format_double(cfg.prune_threshold) + " pruned");
    res.graph = MixedGraph(names, GraphKind::weighted_dag);
    if (p == 0) return res;
    if (!d.values.allFinite()) throw DataError("direct_lingam: data contains missing values");
    if (p == 1) {
        res.record.causal_order = names;
        res.record.wall_time_ms = watch.elapsed_ms();
        return res;
    }
    if (n <= p) throw DataError("direct_lingam needs more rows than columns");

    Eigen::MatrixXd x = d.values;
    x.rowwise() -= x.colwise().mean();
    const Eigen::MatrixXd centered = x;

    const auto by_name = detail::name_order(names);
    std::vector<bool> placed(p, false);
    std::vector<std::size_t> order;

    // Required ancestors: transitive closure of the required edges.
    MixedGraph required(names, GraphKind::dag);
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = 0; b < p; ++b)
            if (knowledge.required(a, b)) required.add_directed(a, b);

    while (order.size() < p) {
        std::vector<std::size_t> remaining;
        for (auto v : by_name)
            if (!placed[v]) remaining.push_back(v);

        std::vector<std::size_t> candidates;
        int earliest = std::numeric_limits<int>::max();
        for (auto v : remaining)
            if (knowledge.tier(v) >= 0) earliest = std::min(earliest, knowledge.tier(v));
        for (auto v : remaining) {
            if (knowledge.tier(v) >= 0 && knowledge.tier(v) != earliest) continue;
            bool blocked = false;
            for (auto a : ancestors(required, v))
                if (!placed[a]) blocked = true;
            if (!blocked) candidates.push_back(v);
        }
        if (candidates.empty()) throw GraphError("direct_lingam: required edges admit no causal order");
        // Variables that no remaining variable may cause go first.
        std::vector<std::size_t> sources;
        for (auto v : candidates) {
            bool source = true;
            for (auto u : remaining)
                if (u != v && !knowledge.forbidden(u, v)) source = false;
            if (source) sources.push_back(v);
        }
        if (!sources.empty()) candidates = sources;

        std::size_t best = candidates.front();
        if (candidates.size() > 1) {
            std::vector<Eigen::VectorXd> std_cols(p);
            for (auto v : remaining) std_cols[v] = standardize(x.col(static_cast<Eigen::Index>(v)));
            double best_score = std::numeric_limits<double>::infinity();
            for (auto i : candidates) {
                double m = 0.0;
                for (auto j : remaining)
                    if (j != i) m += pair_measure(std_cols[i], std_cols[j]);
                if (m < best_score) {
                    best_score = m;
                    best = i;
                }
            }
        }
        placed[best] = true;
        order.push_back(best);
        const Eigen::VectorXd xm = x.col(static_cast<Eigen::Index>(best));
        for (auto v : remaining)
            if (v != best) x.col(static_cast<Eigen::Index>(v)) = residual(x.col(static_cast<Eigen::Index>(v)), xm);
    }
    for (auto v : order) res.record.causal_order.push_back(names[v]);

    // Least-squares weights on allowed predecessors.
    for (std::size_t k = 1; k < p; ++k) {
        const std::size_t child = order[k];
        std::vector<std::size_t> preds;
        for (std::size_t j = 0; j < k; ++j)
            if (!knowledge.forbidden(order[j], child)) preds.push_back(order[j]);
        if (preds.empty()) continue;
        Eigen::MatrixXd design(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(preds.size()));
        for (std::size_t j = 0; j < preds.size(); ++j)
            design.col(static_cast<Eigen::Index>(j)) = centered.col(static_cast<Eigen::Index>(preds[j]));
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
        if (qr.rank() < static_cast<Eigen::Index>(preds.size()))
            throw DataError("direct_lingam: rank-deficient regression for '" + names[child] + "'");
        const Eigen::VectorXd b = qr.solve(Eigen::VectorXd(centered.col(static_cast<Eigen::Index>(child))));
        for (std::size_t j = 0; j < preds.size(); ++j) {
            const double w = b[static_cast<Eigen::Index>(j)];
            if (std::abs(w) < cfg.prune_threshold && !knowledge.required(preds[j], child)) continue;
            res.graph.add_directed(preds[j], child);
            res.graph.set_weight(preds[j], child, w);
        }
    }
    if (!is_dag(res.graph)) throw GraphError("direct_lingam: output is not acyclic");
    res.record.wall_time_ms = watch.elapsed_ms();
    return res;
}

}  // namespace causalsem
