#include "causalsem/independence.hpp"

#include "causalsem/detail/numeric.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace causalsem {

namespace {

constexpr double kMaxConditionNumber = 1e10;

std::string set_text(const std::vector<std::size_t>& z) {
    std::string s = "{";
    for (std::size_t k = 0; k < z.size(); ++k) s += (k ? "," : "") + std::to_string(z[k]);
    return s + "}";
}

void check_query(std::size_t p, std::size_t x, std::size_t y, const std::vector<std::size_t>& z) {
    if (x >= p || y >= p) throw std::out_of_range("CI query node out of range");
    if (x == y) throw std::invalid_argument("CI query needs distinct x and y");
    for (auto v : z) {
        if (v >= p) throw std::out_of_range("CI conditioning node out of range");
        if (v == x || v == y) throw std::invalid_argument("CI conditioning set contains x or y");
    }
}

}  // namespace

std::string CiTestLog::to_json_lines(const std::vector<std::string>& names, double alpha) const {
    std::ostringstream out;
    for (const auto& e : entries_) {
        nlohmann::ordered_json j;
        j["x"] = names.at(e.x);
        j["y"] = names.at(e.y);
        std::vector<std::string> z;
        for (auto v : e.z) z.push_back(names.at(v));
        j["z"] = z;
        j["statistic"] = e.result.statistic;
        j["p_value"] = e.result.p_value;
        j["dof_or_condsize"] = e.result.dof_or_condsize;
        j["alpha"] = alpha;
        j["independent"] = e.result.independent;
        if (!e.result.warning.empty()) j["warning"] = e.result.warning;
        out << j.dump() << '\n';
    }
    return out.str();
}

CiTestResult IndependenceTest::operator()(std::size_t x, std::size_t y, const std::vector<std::size_t>& z) const {
    ++calls_;
    CiTestResult r = test(x, y, z);
    if (log_) log_->record(x, y, z, r);
    return r;
}

double partial_correlation(const CorrelationMatrix& c, std::size_t x, std::size_t y, const std::vector<std::size_t>& z) {
    check_query(c.size(), x, y, z);
    if (z.empty()) return c.values(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y));
    // Canonical order keeps (x, y, Z) and (y, x, Z) bitwise identical.
    std::vector<std::size_t> idx{std::min(x, y), std::max(x, y)};
    std::vector<std::size_t> zs(z);
    std::sort(zs.begin(), zs.end());
    idx.insert(idx.end(), zs.begin(), zs.end());
    const auto m = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd sub(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j)
            sub(i, j) = c.values(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(i)]),
                                 static_cast<Eigen::Index>(idx[static_cast<std::size_t>(j)]));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sub, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > kMaxConditionNumber)
        throw SingularConditioningError("singular conditioning submatrix for set " + set_text(zs), zs);
    const Eigen::MatrixXd precision = sub.llt().solve(Eigen::MatrixXd::Identity(m, m));
    const double r = -precision(0, 1) / std::sqrt(precision(0, 0) * precision(1, 1));
    return std::clamp(r, -1.0, 1.0);
}

CiTestResult fisher_z_test(const CorrelationMatrix& c, std::size_t x, std::size_t y, const std::vector<std::size_t>& z,
                           double alpha) {
    CiTestResult res;
    res.dof_or_condsize = static_cast<double>(z.size());
    const double n = static_cast<double>(c.n);
    if (!(n > static_cast<double>(z.size()) + 3.0))
        throw std::invalid_argument("Fisher-z needs n > |Z| + 3 (n = " + std::to_string(c.n) +
                                    ", |Z| = " + std::to_string(z.size()) + ")");
    double r = 0.0;
    try {
        r = partial_correlation(c, x, y, z);
    } catch (const SingularConditioningError& e) {
        res.statistic = INFINITY;
        res.p_value = 0.0;
        res.independent = false;
        res.warning = e.what();
        return res;
    }
    if (std::abs(r) >= 1.0) {
        res.statistic = std::copysign(INFINITY, r);
        res.p_value = 0.0;
        res.independent = false;
        res.saturated = true;
        return res;
    }
    res.statistic = std::sqrt(n - static_cast<double>(z.size()) - 3.0) * std::atanh(r);
    res.p_value = std::clamp(detail::normal_two_sided_p(res.statistic), 0.0, 1.0);
    res.independent = res.p_value > alpha;
    return res;
}

CiTestResult g_squared_test(const Dataset& d, std::size_t x, std::size_t y, const std::vector<std::size_t>& z,
                            double alpha) {
    check_query(d.cols(), x, y, z);
    for (std::size_t v : z)
        if (d.schema[v].kind == VariableKind::continuous)
            throw DataError("G-squared needs discrete variables; '" + d.schema[v].name + "' is continuous");
    if (d.schema[x].kind == VariableKind::continuous || d.schema[y].kind == VariableKind::continuous)
        throw DataError("G-squared needs discrete variables");

    std::vector<std::size_t> zs(z);
    std::sort(zs.begin(), zs.end());
    const auto lo = std::min(x, y), hi = std::max(x, y);
    // stratum key -> (x value, y value) -> count
    std::map<std::vector<double>, std::map<std::pair<double, double>, double>> strata;
    for (Eigen::Index r = 0; r < d.values.rows(); ++r) {
        std::vector<double> key;
        key.reserve(zs.size());
        for (auto v : zs) key.push_back(d.values(r, static_cast<Eigen::Index>(v)));
        strata[key][{d.values(r, static_cast<Eigen::Index>(lo)), d.values(r, static_cast<Eigen::Index>(hi))}] += 1.0;
    }
    double g2 = 0.0;
    double dof = 0.0;
    for (const auto& [key, cells] : strata) {
        (void)key;
        std::map<double, double> rows, cols;
        double total = 0.0;
        for (const auto& [xy, count] : cells) {
            rows[xy.first] += count;
            cols[xy.second] += count;
            total += count;
        }
        for (const auto& [xy, count] : cells) {
            const double expected = rows[xy.first] * cols[xy.second] / total;
            g2 += 2.0 * count * std::log(count / expected);
        }
        dof += static_cast<double>(rows.size() - 1) * static_cast<double>(cols.size() - 1);
    }
    CiTestResult res;
    res.statistic = std::max(g2, 0.0);
    res.dof_or_condsize = dof;
    if (dof <= 0.0) {
        res.p_value = 1.0;
        res.independent = true;
        res.saturated = true;
        res.warning = "no informative strata";
        return res;
    }
    res.p_value = detail::chi_square_sf(res.statistic, dof);
    res.independent = res.p_value > alpha;
    return res;
}

FisherZTest::FisherZTest(CorrelationMatrix c, double alpha) : IndependenceTest(alpha), corr_(std::move(c)) {}

CiTestResult FisherZTest::test(std::size_t x, std::size_t y, const std::vector<std::size_t>& z) const {
    return fisher_z_test(corr_, x, y, z, alpha());
}

GSquaredTest::GSquaredTest(Dataset d, double alpha) : IndependenceTest(alpha), data_(std::move(d)), names_(data_.names()) {}

CiTestResult GSquaredTest::test(std::size_t x, std::size_t y, const std::vector<std::size_t>& z) const {
    return g_squared_test(data_, x, y, z, alpha());
}

OracleTest::OracleTest(MixedGraph dag, std::vector<std::string> observed)
    : IndependenceTest(0.5), dag_(std::move(dag)), observed_(std::move(observed)) {
    if (!is_dag(dag_)) throw GraphError("oracle CI test needs a DAG");
    if (observed_.empty()) observed_ = dag_.nodes();
    for (const auto& n : observed_) to_dag_.push_back(dag_.index_of(n));
}

CiTestResult OracleTest::test(std::size_t x, std::size_t y, const std::vector<std::size_t>& z) const {
    check_query(observed_.size(), x, y, z);
    std::vector<std::size_t> zd;
    for (auto v : z) zd.push_back(to_dag_[v]);
    CiTestResult res;
    res.independent = d_separated(dag_, to_dag_[x], to_dag_[y], zd);
    res.p_value = res.independent ? 1.0 : 0.0;
    res.statistic = res.independent ? 0.0 : 1.0;
    res.dof_or_condsize = static_cast<double>(z.size());
    return res;
}

std::unique_ptr<OracleTest> oracle_ci(const MixedGraph& dag, std::vector<std::string> observed) {
    return std::make_unique<OracleTest>(dag, std::move(observed));
}

}  // namespace causalsem
