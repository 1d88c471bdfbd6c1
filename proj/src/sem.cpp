#include "causalsem/sem.hpp"

#include "causalsem/detail/numeric.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <sstream>

namespace causalsem {

namespace {

constexpr double nan_v = std::numeric_limits<double>::quiet_NaN();

std::vector<std::vector<std::size_t>> parents_of(const MixedGraph& dag) {
    std::vector<std::vector<std::size_t>> out(dag.size());
    for (std::size_t v = 0; v < dag.size(); ++v) out[v] = dag.parents(v);
    return out;
}

}  // namespace

std::size_t SemModel::coefficient_count() const {
    std::size_t k = 0;
    for (const auto& pa : parents) k += pa.size();
    return k;
}

std::size_t SemModel::parameter_count() const { return coefficient_count() + size() + covariances.size(); }

long SemModel::dof() const {
    const auto p = static_cast<long>(size());
    return p * (p + 1) / 2 - static_cast<long>(parameter_count());
}

std::vector<std::size_t> SemModel::exogenous() const {
    std::vector<std::size_t> out;
    for (std::size_t v = 0; v < size(); ++v)
        if (parents[v].empty()) out.push_back(v);
    return out;
}

std::string SemModel::digest() const {
    std::ostringstream text;
    for (std::size_t v = 0; v < size(); ++v) {
        text << names[v] << "<-";
        for (auto p : parents[v]) text << names[p] << ",";
        text << ";";
    }
    for (const auto& [a, b] : covariances) text << names[a] << "<->" << names[b] << ";";
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : text.str()) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << h;
    return out.str();
}

SemModel model_from_graph(const MixedGraph& g) {
    SemModel m;
    m.names = g.nodes();
    switch (g.kind()) {
        case GraphKind::dag:
        case GraphKind::weighted_dag: {
            if (!is_dag(g)) throw GraphError("model_from_graph: graph is not a DAG");
            m.parents = parents_of(g);
            break;
        }
        case GraphKind::cpdag: {
            m.parents = parents_of(consistent_extension(g));
            break;
        }
        case GraphKind::pag: {
            MixedGraph pdag(g.nodes(), GraphKind::cpdag);
            for (const auto& e : g.edges()) {
                const Mark at_a = e.mark_a, at_b = e.mark_b;
                if (at_a == Mark::arrow && at_b == Mark::arrow) {
                    m.covariances.emplace_back(std::min(e.a, e.b), std::max(e.a, e.b));
                } else if (at_b == Mark::arrow) {
                    pdag.add_directed(e.a, e.b);
                } else if (at_a == Mark::arrow) {
                    pdag.add_directed(e.b, e.a);
                } else if (at_a == Mark::tail && at_b == Mark::circle) {
                    pdag.add_directed(e.a, e.b);
                } else if (at_b == Mark::tail && at_a == Mark::circle) {
                    pdag.add_directed(e.b, e.a);
                } else {
                    pdag.add_undirected(e.a, e.b);
                }
            }
            try {
                m.parents = parents_of(consistent_extension(pdag));
            } catch (const GraphError&) {
                // Orient the remaining edges along a topological order of the directed part.
                MixedGraph directed(g.nodes(), GraphKind::dag);
                for (std::size_t a = 0; a < pdag.size(); ++a)
                    for (std::size_t b = 0; b < pdag.size(); ++b)
                        if (pdag.directed(a, b)) directed.add_directed(a, b);
                const auto order = topological_order(directed);
                std::vector<std::size_t> pos(order.size());
                for (std::size_t k = 0; k < order.size(); ++k) pos[order[k]] = k;
                for (std::size_t a = 0; a < pdag.size(); ++a)
                    for (std::size_t b = a + 1; b < pdag.size(); ++b)
                        if (pdag.undirected(a, b)) {
                            if (pos[a] < pos[b]) directed.add_directed(a, b);
                            else directed.add_directed(b, a);
                        }
                m.parents = parents_of(directed);
                m.notes.push_back("circle marks oriented along a topological order (no consistent extension)");
            }
            std::sort(m.covariances.begin(), m.covariances.end());
            break;
        }
    }
    return m;
}

SemParameters unpack_parameters(const SemModel& m, const Eigen::VectorXd& theta) {
    const auto p = static_cast<Eigen::Index>(m.size());
    if (static_cast<std::size_t>(theta.size()) != m.parameter_count())
        throw std::invalid_argument("parameter vector has the wrong length");
    SemParameters out{Eigen::MatrixXd::Zero(p, p), Eigen::MatrixXd::Zero(p, p)};
    Eigen::Index k = 0;
    for (std::size_t v = 0; v < m.size(); ++v)
        for (auto pa : m.parents[v]) out.B(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(pa)) = theta[k++];
    for (Eigen::Index v = 0; v < p; ++v) out.Psi(v, v) = theta[k++];
    for (const auto& [a, b] : m.covariances) {
        out.Psi(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = theta[k];
        out.Psi(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = theta[k];
        ++k;
    }
    return out;
}

Eigen::VectorXd pack_parameters(const SemModel& m, const SemParameters& params) {
    Eigen::VectorXd theta(static_cast<Eigen::Index>(m.parameter_count()));
    Eigen::Index k = 0;
    for (std::size_t v = 0; v < m.size(); ++v)
        for (auto pa : m.parents[v]) theta[k++] = params.B(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(pa));
    for (Eigen::Index v = 0; v < static_cast<Eigen::Index>(m.size()); ++v) theta[k++] = params.Psi(v, v);
    for (const auto& [a, b] : m.covariances) theta[k++] = params.Psi(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    return theta;
}

namespace {

struct Evaluation {
    Eigen::MatrixXd A;
    Eigen::MatrixXd Sigma;
    bool ok = false;
};

Evaluation evaluate(const SemModel& m, const Eigen::VectorXd& theta) {
    const auto p = static_cast<Eigen::Index>(m.size());
    const auto params = unpack_parameters(m, theta);
    Evaluation ev;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(Eigen::MatrixXd::Identity(p, p) - params.B);
    const double det = lu.determinant();
    if (!std::isfinite(det) || std::abs(det) < 1e-12) return ev;
    ev.A = lu.inverse();
    ev.Sigma = ev.A * params.Psi * ev.A.transpose();
    ev.Sigma = 0.5 * (ev.Sigma + ev.Sigma.transpose());
    ev.ok = ev.Sigma.allFinite();
    return ev;
}

}  // namespace

Eigen::MatrixXd implied_matrix(const SemModel& m, const Eigen::VectorXd& theta) {
    auto ev = evaluate(m, theta);
    if (!ev.ok) throw std::runtime_error("implied matrix undefined: I - B is singular");
    return ev.Sigma;
}

double uls_objective(const SemModel& m, const Eigen::MatrixXd& s, const Eigen::VectorXd& theta) {
    auto ev = evaluate(m, theta);
    if (!ev.ok) return std::numeric_limits<double>::infinity();
    return 0.5 * (s - ev.Sigma).squaredNorm();
}

Eigen::VectorXd uls_gradient(const SemModel& m, const Eigen::MatrixXd& s, const Eigen::VectorXd& theta) {
    auto ev = evaluate(m, theta);
    if (!ev.ok) throw std::runtime_error("gradient undefined: I - B is singular");
    const Eigen::MatrixXd e = s - ev.Sigma;
    const Eigen::MatrixXd seA = ev.Sigma * e * ev.A;
    const Eigen::MatrixXd aea = ev.A.transpose() * e * ev.A;
    Eigen::VectorXd g(theta.size());
    Eigen::Index k = 0;
    for (std::size_t v = 0; v < m.size(); ++v)
        for (auto pa : m.parents[v]) g[k++] = -2.0 * seA(static_cast<Eigen::Index>(pa), static_cast<Eigen::Index>(v));
    for (Eigen::Index v = 0; v < static_cast<Eigen::Index>(m.size()); ++v) g[k++] = -aea(v, v);
    for (const auto& [a, b] : m.covariances) g[k++] = -2.0 * aea(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    return g;
}

Eigen::VectorXd initial_parameters(const SemModel& m, const Eigen::MatrixXd& s) {
    const auto p = static_cast<Eigen::Index>(m.size());
    SemParameters params{Eigen::MatrixXd::Zero(p, p), Eigen::MatrixXd::Zero(p, p)};
    for (std::size_t v = 0; v < m.size(); ++v) {
        const auto y = static_cast<Eigen::Index>(v);
        const auto& pa = m.parents[v];
        double resid = s(y, y);
        if (!pa.empty()) {
            const auto k = static_cast<Eigen::Index>(pa.size());
            Eigen::MatrixXd spp(k, k);
            Eigen::VectorXd spy(k);
            for (Eigen::Index i = 0; i < k; ++i) {
                spy[i] = s(static_cast<Eigen::Index>(pa[static_cast<std::size_t>(i)]), y);
                for (Eigen::Index j = 0; j < k; ++j)
                    spp(i, j) = s(static_cast<Eigen::Index>(pa[static_cast<std::size_t>(i)]),
                                  static_cast<Eigen::Index>(pa[static_cast<std::size_t>(j)]));
            }
            const Eigen::VectorXd b = spp.colPivHouseholderQr().solve(spy);
            for (Eigen::Index i = 0; i < k; ++i) params.B(y, static_cast<Eigen::Index>(pa[static_cast<std::size_t>(i)])) = b[i];
            resid -= b.dot(spy);
        }
        params.Psi(y, y) = std::max(resid, 1e-3 * s(y, y));
    }
    return pack_parameters(m, params);
}

FittedSem fit_uls(const SemModel& m, const CorrelationMatrix& c, std::size_t n, const FitOptions& opt) {
    if (c.size() != m.size()) throw std::invalid_argument("correlation matrix and model sizes differ");
    for (std::size_t v = 0; v < m.size(); ++v)
        if (c.names.size() == m.size() && c.names[v] != m.names[v])
            throw std::invalid_argument("correlation matrix variable order differs from the model ('" + c.names[v] +
                                        "' vs '" + m.names[v] + "')");
    if (m.dof() < 0) throw std::invalid_argument("model has negative degrees of freedom");
    const Eigen::MatrixXd& s = c.values;

    FittedSem f;
    f.n = n ? n : c.n;
    Eigen::VectorXd x = initial_parameters(m, s);
    double fx = uls_objective(m, s, x);
    Eigen::VectorXd g = uls_gradient(m, s, x);
    const auto dim = x.size();
    Eigen::MatrixXd h = Eigen::MatrixXd::Identity(dim, dim);

    std::size_t it = 0;
    bool converged = dim == 0 || g.lpNorm<Eigen::Infinity>() < opt.gradient_tolerance;
    while (!converged && it < opt.max_iterations) {
        ++it;
        Eigen::VectorXd d = -h * g;
        if (g.dot(d) >= 0.0) {
            h.setIdentity();
            d = -g;
        }
        double step = 1.0, fn = fx;
        Eigen::VectorXd xn;
        bool accepted = false;
        for (int k = 0; k < 60; ++k) {
            xn = x + step * d;
            fn = uls_objective(m, s, xn);
            if (std::isfinite(fn) && fn <= fx + 1e-4 * step * g.dot(d)) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            if (h.isIdentity()) break;
            h.setIdentity();
            continue;
        }
        const Eigen::VectorXd gn = uls_gradient(m, s, xn);
        const Eigen::VectorXd sv = xn - x, yv = gn - g;
        const double sy = sv.dot(yv);
        if (sy > 1e-300) {
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd i_rsy = Eigen::MatrixXd::Identity(dim, dim) - rho * sv * yv.transpose();
            h = i_rsy * h * i_rsy.transpose() + rho * sv * sv.transpose();
        }
        const double rel = std::abs(fx - fn) / std::max(std::abs(fx), std::numeric_limits<double>::min());
        x = xn;
        fx = fn;
        g = gn;
        if (g.lpNorm<Eigen::Infinity>() < opt.gradient_tolerance || rel < opt.relative_tolerance) converged = true;
    }
    if (!converged && g.lpNorm<Eigen::Infinity>() < opt.gradient_tolerance) converged = true;

    const auto params = unpack_parameters(m, x);
    f.theta = x;
    f.B = params.B;
    f.Psi = params.Psi;
    f.Sigma = implied_matrix(m, x);
    f.f_uls = fx;
    f.converged = converged;
    f.iterations = it;
    return f;
}

int FitReport::passes(const FitThresholds& t) const {
    return static_cast<int>(pass_cfi(t)) + static_cast<int>(pass_nfi(t)) + static_cast<int>(pass_tli(t)) +
           static_cast<int>(pass_rmsea(t));
}

namespace {

/// ln|M| and M^-1 via Cholesky; nullopt when M is not positive definite.
std::optional<std::pair<double, Eigen::MatrixXd>> logdet_inverse(const Eigen::MatrixXd& m) {
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) return std::nullopt;
    const Eigen::MatrixXd l = llt.matrixL();
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (!(l(i, i) > 0.0)) return std::nullopt;
        logdet += 2.0 * std::log(l(i, i));
    }
    return std::make_pair(logdet, llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols())));
}

}  // namespace

double ml_discrepancy(const Eigen::MatrixXd& s, const Eigen::MatrixXd& sigma) {
    auto ls = logdet_inverse(s);
    auto lsig = logdet_inverse(sigma);
    if (!ls || !lsig) return nan_v;
    const double value = lsig->first - ls->first + (s * lsig->second).trace() - static_cast<double>(s.rows());
    return std::max(value, 0.0);
}

FitReport fit_indices(const FittedSem& f, const SemModel& m, const CorrelationMatrix& c, std::size_t n_in) {
    const Eigen::MatrixXd& s = c.values;
    const auto p = static_cast<double>(m.size());
    FitReport r;
    r.n = n_in ? n_in : (f.n ? f.n : c.n);
    const double n = static_cast<double>(r.n);
    r.dof = m.dof();
    r.dof_baseline = static_cast<long>(m.size() * (m.size() - 1) / 2);
    r.parameters = m.parameter_count();
    r.edge_count = m.edge_count();
    r.f_uls = f.f_uls;
    r.converged = f.converged;
    if (!f.converged) r.warnings.push_back("ULS fit did not converge");

    const auto ls = logdet_inverse(s);
    const auto lsig = logdet_inverse(f.Sigma);
    r.implied_positive_definite = lsig.has_value();
    if (!ls) r.warnings.push_back("sample matrix is not positive definite; likelihood-based indices are n/a");
    if (!lsig) r.warnings.push_back("implied matrix is not positive definite; likelihood-based indices are n/a");

    const double f_ml = ml_discrepancy(s, f.Sigma);
    r.chi_square = (n - 1.0) * f_ml;
    double baseline = nan_v;
    if (ls) {
        double sum_log_diag = 0.0;
        for (Eigen::Index i = 0; i < s.rows(); ++i) sum_log_diag += std::log(s(i, i));
        baseline = std::max(sum_log_diag - ls->first, 0.0);
    }
    r.chi_square_baseline = (n - 1.0) * baseline;

    const double df = static_cast<double>(r.dof), dfb = static_cast<double>(r.dof_baseline);
    const double chi = r.chi_square, chib = r.chi_square_baseline;
    r.p_value = r.dof > 0 ? detail::chi_square_sf(chi, df) : nan_v;

    const double num = std::max(chi - df, 0.0);
    const double den = std::max({chib - dfb, chi - df, 0.0});
    r.cfi = std::isnan(chi) || std::isnan(chib) ? nan_v : (den > 0.0 ? 1.0 - num / den : 1.0);
    r.nfi = chib > 0.0 ? 1.0 - chi / chib : nan_v;
    r.tli = (r.dof > 0 && dfb > 0 && chib / dfb != 1.0) ? ((chib / dfb) - (chi / df)) / ((chib / dfb) - 1.0) : nan_v;
    if (r.dof > 0) r.rmsea = std::sqrt(num / (df * (n - 1.0)));
    else r.rmsea = std::abs(chi) <= 1e-8 * std::max(n - 1.0, 1.0) ? 0.0 : nan_v;

    const double tr_s2 = s.squaredNorm();
    r.gfi = tr_s2 > 0.0 ? 1.0 - (s - f.Sigma).squaredNorm() / tr_s2 : nan_v;
    r.agfi = r.dof > 0 ? 1.0 - (p * (p + 1.0) / (2.0 * df)) * (1.0 - r.gfi) : nan_v;

    if (lsig) {
        r.loglik = -(n / 2.0) * (p * std::log(2.0 * std::numbers::pi) + lsig->first + (s * lsig->second).trace());
    } else {
        r.loglik = nan_v;
    }
    const double t = static_cast<double>(r.parameters);
    r.aic = -2.0 * r.loglik + 2.0 * t;
    r.bic = -2.0 * r.loglik + t * std::log(n);
    return r;
}

MixedGraph path_coefficients(const FittedSem& f, const SemModel& m) {
    MixedGraph g(m.names, GraphKind::weighted_dag);
    for (std::size_t v = 0; v < m.size(); ++v)
        for (auto pa : m.parents[v]) {
            g.add_directed(pa, v);
            g.set_weight(pa, v, f.B(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(pa)));
        }
    return g;
}

std::vector<std::size_t> rank_models(const std::vector<FitReport>& reports, const FitThresholds& t) {
    std::vector<std::size_t> order(reports.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto bic_key = [&](std::size_t i) {
        const double b = reports[i].bic;
        return std::isnan(b) ? std::numeric_limits<double>::infinity() : b;
    };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const int pa = reports[a].passes(t), pb = reports[b].passes(t);
        if (pa != pb) return pa > pb;
        const double ba = bic_key(a), bb = bic_key(b);
        if (ba != bb) return ba < bb;
        return reports[a].edge_count < reports[b].edge_count;
    });
    return order;
}

namespace {

nlohmann::ordered_json number_or_null(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

std::string fixed(double v, int precision) {
    if (std::isnan(v)) return "n/a";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    if (std::abs(v) >= 1e7) std::snprintf(buf, sizeof buf, "%.3g", v);
    else std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

}  // namespace

std::string fit_report_to_json(const FitReport& r, const FitThresholds& t) {
    nlohmann::ordered_json j;
    j["chi_square"] = number_or_null(r.chi_square);
    j["dof"] = r.dof;
    j["p_value"] = number_or_null(r.p_value);
    j["chi_square_baseline"] = number_or_null(r.chi_square_baseline);
    j["dof_baseline"] = r.dof_baseline;
    j["cfi"] = number_or_null(r.cfi);
    j["gfi"] = number_or_null(r.gfi);
    j["agfi"] = number_or_null(r.agfi);
    j["nfi"] = number_or_null(r.nfi);
    j["tli"] = number_or_null(r.tli);
    j["rmsea"] = number_or_null(r.rmsea);
    j["aic"] = number_or_null(r.aic);
    j["bic"] = number_or_null(r.bic);
    j["loglik"] = number_or_null(r.loglik);
    j["n"] = r.n;
    j["edge_count"] = r.edge_count;
    j["parameters"] = r.parameters;
    j["f_uls"] = r.f_uls;
    j["converged"] = r.converged;
    j["implied_positive_definite"] = r.implied_positive_definite;
    j["checks"] = {{"cfi", r.pass_cfi(t)},
                   {"nfi", r.pass_nfi(t)},
                   {"tli", r.pass_tli(t)},
                   {"rmsea", r.pass_rmsea(t)},
                   {"p_value", r.pass_p_value(t)}};
    j["passes"] = r.passes(t);
    j["warnings"] = r.warnings;
    return j.dump(2);
}

std::string fit_table(const std::vector<std::pair<std::string, FitReport>>& reports, const FitThresholds& t) {
    struct Row {
        std::string label;
        std::string level;
        std::function<std::string(const FitReport&)> cell;
    };
    const std::vector<Row> rows = {
        {"CFI", ">= " + fixed(t.cfi, 2), [](const FitReport& r) { return fixed(r.cfi, 3); }},
        {"GFI", "", [](const FitReport& r) { return fixed(r.gfi, 3); }},
        {"AGFI", "", [](const FitReport& r) { return fixed(r.agfi, 3); }},
        {"NFI", "> " + fixed(t.nfi, 2), [](const FitReport& r) { return fixed(r.nfi, 3); }},
        {"TLI", "> " + fixed(t.tli, 2), [](const FitReport& r) { return fixed(r.tli, 3); }},
        {"RMSEA", "< " + fixed(t.rmsea, 2), [](const FitReport& r) { return fixed(r.rmsea, 3); }},
        {"AIC", "lower", [](const FitReport& r) { return fixed(r.aic, 2); }},
        {"BIC", "lower", [](const FitReport& r) { return fixed(r.bic, 2); }},
        {"loglik", "", [](const FitReport& r) { return fixed(r.loglik, 2); }},
        {"df", "", [](const FitReport& r) { return std::to_string(r.dof); }},
        {"df baseline", "", [](const FitReport& r) { return std::to_string(r.dof_baseline); }},
        {"chi-square", "", [](const FitReport& r) { return fixed(r.chi_square, 1); }},
        {"p-value", "> " + fixed(t.p_value, 2), [](const FitReport& r) { return fixed(r.p_value, 3); }},
        {"chi-square baseline", "", [](const FitReport& r) { return fixed(r.chi_square_baseline, 1); }},
        {"edges", "", [](const FitReport& r) { return std::to_string(r.edge_count); }},
    };
    std::size_t w0 = std::string("metric").size();
    for (const auto& row : rows) w0 = std::max(w0, row.label.size());
    std::size_t wl = std::string("accepted").size();
    for (const auto& row : rows) wl = std::max(wl, row.level.size());
    std::vector<std::size_t> widths;
    for (const auto& [name, rep] : reports) {
        std::size_t w = name.size();
        for (const auto& row : rows) w = std::max(w, row.cell(rep).size());
        widths.push_back(w);
    }
    std::ostringstream out;
    out << std::left << std::setw(static_cast<int>(w0)) << "metric" << "  " << std::setw(static_cast<int>(wl)) << "accepted";
    for (std::size_t k = 0; k < reports.size(); ++k) out << "  " << std::right << std::setw(static_cast<int>(widths[k])) << reports[k].first;
    out << "\n";
    for (const auto& row : rows) {
        out << std::left << std::setw(static_cast<int>(w0)) << row.label << "  " << std::setw(static_cast<int>(wl)) << row.level;
        for (std::size_t k = 0; k < reports.size(); ++k)
            out << "  " << std::right << std::setw(static_cast<int>(widths[k])) << row.cell(reports[k].second);
        out << "\n";
    }
    return out.str();
}

std::string fit_formulas() {
    return "chi-square = (n-1) F_ML at the ULS estimates, F_ML = ln|Sigma| - ln|S| + tr(S Sigma^-1) - p\n"
           "baseline: diagonal Sigma, df_b = p(p-1)/2\n"
           "CFI = 1 - max(chi2-df,0) / max(chi2_b-df_b, chi2-df, 0)\n"
           "NFI = 1 - chi2/chi2_b;  TLI = (chi2_b/df_b - chi2/df) / (chi2_b/df_b - 1)\n"
           "RMSEA = sqrt(max(chi2-df,0) / (df (n-1)))\n"
           "GFI = 1 - tr[(S-Sigma)^2] / tr[S^2];  AGFI = 1 - p(p+1)/(2 df) (1-GFI)\n"
           "loglik = -(n/2) [p ln(2 pi) + ln|Sigma| + tr(S Sigma^-1)];  AIC = -2 loglik + 2t;  BIC = -2 loglik + t ln n\n";
}

}  // namespace causalsem
