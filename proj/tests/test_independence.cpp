#include "causalsem/independence.hpp"
#include "causalsem/simulate.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

using namespace causalsem;

namespace {

Dataset discrete_chain(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Dataset d;
    d.schema = {{"A", VariableKind::binary, 2, "", {}},
                {"B", VariableKind::ordinal, 3, "", {}},
                {"C", VariableKind::binary, 2, "", {}}};
    d.values.resize(static_cast<Eigen::Index>(n), 3);
    for (Eigen::Index i = 0; i < d.values.rows(); ++i) {
        const double a = u(rng) < 0.4 ? 1.0 : 0.0;
        const double w = u(rng);
        const double b = a > 0 ? (w < 0.6 ? 2.0 : w < 0.8 ? 1.0 : 0.0) : (w < 0.6 ? 0.0 : w < 0.8 ? 1.0 : 2.0);
        const double c = u(rng) < 0.2 + 0.25 * b ? 1.0 : 0.0;
        d.values(i, 0) = a;
        d.values(i, 1) = b;
        d.values(i, 2) = c;
    }
    return d;
}

double hand_g2(const Dataset& d, int x, int y, int z) {
    std::map<std::tuple<double, double, double>, double> nxyz;
    std::map<std::pair<double, double>, double> nxz, nyz;
    std::map<double, double> nz;
    for (Eigen::Index i = 0; i < d.values.rows(); ++i) {
        const double a = d.values(i, x), b = d.values(i, y), c = d.values(i, z);
        nxyz[{a, b, c}] += 1;
        nxz[{a, c}] += 1;
        nyz[{b, c}] += 1;
        nz[c] += 1;
    }
    double g = 0.0;
    for (const auto& [k, o] : nxyz) {
        const auto [a, b, c] = k;
        const double e = nxz[{a, c}] * nyz[{b, c}] / nz[c];
        g += 2.0 * o * std::log(o / e);
    }
    return g;
}

}  // namespace

TEST_CASE("partial correlation matches the recursive formula") {
    auto scm = random_scm(random_dag(6, 0.5, 4), NoiseFamily::gaussian, 4);
    const auto c = make_correlation(
        [&] {
            Eigen::MatrixXd s = implied_covariance(scm);
            const Eigen::VectorXd sd = s.diagonal().cwiseSqrt().cwiseInverse();
            return Eigen::MatrixXd(sd.asDiagonal() * s * sd.asDiagonal());
        }(),
        1000, random_dag(6, 0.5, 4).nodes());
    for (std::vector<std::size_t> z : {std::vector<std::size_t>{}, {2}, {2, 3}, {2, 3, 5}})
        CHECK(partial_correlation(c, 0, 1, z) ==
              doctest::Approx(oracle::recursive_partial_correlation(c.values, 0, 1, z)).epsilon(1e-10));
}

TEST_CASE("Fisher z statistic and p-value") {
    Eigen::MatrixXd r(2, 2);
    r << 1.0, 0.1, 0.1, 1.0;
    const auto c = make_correlation(r, 403, {"x", "y"});
    const auto res = fisher_z_test(c, 0, 1, {}, 0.05);
    const double z = std::sqrt(400.0) * std::atanh(0.1);
    CHECK(res.statistic == doctest::Approx(z));
    CHECK(res.p_value == doctest::Approx(2.0 * (1.0 - oracle::big_phi(z))).epsilon(1e-9));
    CHECK_FALSE(res.independent);
    CHECK(res.dof_or_condsize == 0.0);
}

TEST_CASE("perfectly dependent pairs saturate with p-value 0") {
    Eigen::MatrixXd r(2, 2);
    r << 1.0, 1.0, 1.0, 1.0;
    const auto res = fisher_z_test(make_correlation(r, 100, {"x", "y"}), 0, 1, {}, 0.05);
    CHECK(res.saturated);
    CHECK(res.p_value == 0.0);
    CHECK_FALSE(res.independent);
}

TEST_CASE("singular conditioning sets raise with the offending set") {
    Eigen::MatrixXd r = Eigen::MatrixXd::Identity(4, 4);
    r(2, 3) = r(3, 2) = 1.0;
    const auto c = make_correlation(r, 100, {"a", "b", "c", "d"});
    try {
        partial_correlation(c, 0, 1, {2, 3});
        FAIL("expected SingularConditioningError");
    } catch (const SingularConditioningError& e) {
        CHECK(e.conditioning_set() == std::vector<std::size_t>{2, 3});
    }
}

TEST_CASE("G-squared matches a hand-summed statistic") {
    const auto d = discrete_chain(3000, 21);
    const auto res = g_squared_test(d, 0, 2, {1}, 0.05);
    CHECK(res.statistic == doctest::Approx(hand_g2(d, 0, 2, 1)).epsilon(1e-10));
    CHECK(res.dof_or_condsize == 3.0);
    CHECK(res.independent);
    CHECK_FALSE(g_squared_test(d, 0, 1, {}, 0.05).independent);
}

TEST_CASE("oracle test reproduces d-separation over the observed subset") {
    MixedGraph g({"A", "L", "B"});
    g.add_directed("L", "A");
    g.add_directed("L", "B");
    const auto full = oracle_ci(g);
    CHECK(full->test(0, 2, {1}).independent);
    const auto hidden = oracle_ci(g, {"A", "B"});
    CHECK(hidden->size() == 2);
    CHECK_FALSE(hidden->test(0, 1, {}).independent);
}

TEST_CASE("calls are counted and logged as JSON lines") {
    MixedGraph g({"A", "B"});
    OracleTest t(g);
    CiTestLog log;
    t.attach_log(&log);
    t(0, 1, {});
    t(0, 1, {});
    CHECK(t.calls() == 2);
    REQUIRE(log.entries().size() == 2);
    const auto text = log.to_json_lines(t.names(), t.alpha());
    CHECK(std::count(text.begin(), text.end(), '\n') == 2);
    CHECK(text.find("\"A\"") != std::string::npos);
}
