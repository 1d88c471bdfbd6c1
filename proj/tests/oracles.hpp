#pragma once

// Independent reference implementations used as test oracles. None of these
// call into the library's algorithms beyond plain graph accessors.

#include "causalsem/graph.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

using causalsem::MixedGraph;

/// Descendant sets by repeated DFS over the parent -> child lists.
inline std::vector<std::vector<bool>> descendant_table(const MixedGraph& g) {
    const std::size_t p = g.size();
    std::vector<std::vector<bool>> desc(p, std::vector<bool>(p, false));
    for (std::size_t s = 0; s < p; ++s) {
        std::vector<std::size_t> stack{s};
        desc[s][s] = true;
        while (!stack.empty()) {
            auto u = stack.back();
            stack.pop_back();
            for (std::size_t w = 0; w < p; ++w)
                if (g.directed(u, w) && !desc[s][w]) {
                    desc[s][w] = true;
                    stack.push_back(w);
                }
        }
    }
    return desc;
}

/// Cycle check by three-colour DFS.
inline bool has_cycle(const MixedGraph& g) {
    const std::size_t p = g.size();
    std::vector<int> colour(p, 0);
    std::function<bool(std::size_t)> visit = [&](std::size_t u) {
        colour[u] = 1;
        for (std::size_t w = 0; w < p; ++w) {
            if (!g.directed(u, w)) continue;
            if (colour[w] == 1) return true;
            if (colour[w] == 0 && visit(w)) return true;
        }
        colour[u] = 2;
        return false;
    };
    for (std::size_t v = 0; v < p; ++v)
        if (colour[v] == 0 && visit(v)) return true;
    return false;
}

/// d-separation by enumerating every simple path between x and y.
inline bool d_separated_by_paths(const MixedGraph& g, std::size_t x, std::size_t y, const std::vector<std::size_t>& z) {
    const std::size_t p = g.size();
    const auto desc = descendant_table(g);
    std::vector<bool> in_z(p, false);
    for (auto v : z) in_z[v] = true;
    auto activates = [&](std::size_t c) {
        for (std::size_t d = 0; d < p; ++d)
            if (desc[c][d] && in_z[d]) return true;
        return false;
    };
    std::vector<std::size_t> path{x};
    std::vector<bool> on_path(p, false);
    on_path[x] = true;
    std::function<bool(std::size_t)> open_path_exists = [&](std::size_t u) -> bool {
        if (u == y) {
            for (std::size_t k = 1; k + 1 < path.size(); ++k) {
                const auto a = path[k - 1], b = path[k], c = path[k + 1];
                const bool collider = g.directed(a, b) && g.directed(c, b);
                if (collider ? !activates(b) : in_z[b]) return false;
            }
            return true;
        }
        for (std::size_t w = 0; w < p; ++w) {
            if (on_path[w] || !g.adjacent(u, w)) continue;
            on_path[w] = true;
            path.push_back(w);
            const bool open = open_path_exists(w);
            path.pop_back();
            on_path[w] = false;
            if (open) return true;
        }
        return false;
    };
    return !open_path_exists(x);
}

/// Number of labelled DAGs on n nodes (Robinson's recurrence).
inline double dag_count(int n) {
    std::vector<double> a(static_cast<std::size_t>(n) + 1, 0.0);
    a[0] = 1.0;
    for (int m = 1; m <= n; ++m) {
        double s = 0.0;
        for (int k = 1; k <= m; ++k) {
            double binom = 1.0;
            for (int i = 0; i < k; ++i) binom = binom * (m - i) / (i + 1);
            s += ((k % 2) ? 1.0 : -1.0) * binom * std::pow(2.0, k * (m - k)) * a[static_cast<std::size_t>(m - k)];
        }
        a[static_cast<std::size_t>(m)] = s;
    }
    return a[static_cast<std::size_t>(n)];
}

inline double phi(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }
inline double big_phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// P(X <= h, Y <= k) by composite Simpson on int phi(x) Phi((k - rho x)/sqrt(1-rho^2)) dx.
inline double bvn_cdf_quadrature(double h, double k, double rho, int intervals = 20000) {
    const double lo = -12.0;
    if (h <= lo) return 0.0;
    const double s = std::sqrt(1.0 - rho * rho);
    auto f = [&](double x) { return phi(x) * big_phi((k - rho * x) / s); };
    const double step = (h - lo) / intervals;
    double sum = f(lo) + f(h);
    for (int i = 1; i < intervals; ++i) sum += f(lo + i * step) * ((i % 2) ? 4.0 : 2.0);
    return sum * step / 3.0;
}

/// Partial correlation by the first-order recursion, one conditioning variable at a time.
inline double recursive_partial_correlation(const Eigen::MatrixXd& r, std::size_t x, std::size_t y,
                                            std::vector<std::size_t> z) {
    if (z.empty()) return r(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y));
    const auto last = z.back();
    z.pop_back();
    const double rxy = recursive_partial_correlation(r, x, y, z);
    const double rxz = recursive_partial_correlation(r, x, last, z);
    const double ryz = recursive_partial_correlation(r, y, last, z);
    return (rxy - rxz * ryz) / std::sqrt((1.0 - rxz * rxz) * (1.0 - ryz * ryz));
}

/// Residuals of least-squares regression of column y on columns xs (with intercept).
inline Eigen::VectorXd regression_residuals(const Eigen::MatrixXd& data, Eigen::Index y, const std::vector<Eigen::Index>& xs) {
    Eigen::MatrixXd design(data.rows(), static_cast<Eigen::Index>(xs.size()) + 1);
    design.col(0).setOnes();
    for (std::size_t j = 0; j < xs.size(); ++j) design.col(static_cast<Eigen::Index>(j) + 1) = data.col(xs[j]);
    const Eigen::VectorXd beta = (design.transpose() * design).ldlt().solve(design.transpose() * data.col(y));
    return data.col(y) - design * beta;
}

inline double sample_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const Eigen::VectorXd ca = a.array() - a.mean();
    const Eigen::VectorXd cb = b.array() - b.mean();
    return ca.dot(cb) / std::sqrt(ca.squaredNorm() * cb.squaredNorm());
}

/// Central finite-difference gradient.
inline Eigen::VectorXd numeric_gradient(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                                        double h = 1e-6) {
    Eigen::VectorXd g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Eigen::VectorXd a = x, b = x;
        a[i] += h;
        b[i] -= h;
        g[i] = (f(a) - f(b)) / (2.0 * h);
    }
    return g;
}

/// Ancestral relation read off the true DAG: true when a is an ancestor of b.
inline bool is_ancestor(const MixedGraph& dag, std::size_t a, std::size_t b) { return descendant_table(dag)[a][b]; }

}  // namespace oracle
