#include "causalsem/simulate.hpp"

#include "causalsem/discovery.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <tuple>

namespace causalsem {

std::string to_string(NoiseFamily f) {
    switch (f) {
        case NoiseFamily::gaussian: return "gaussian";
        case NoiseFamily::uniform: return "uniform";
        case NoiseFamily::laplace: return "laplace";
    }
    return "gaussian";
}

NoiseFamily noise_family_from_string(const std::string& s) {
    if (s == "gaussian" || s == "normal") return NoiseFamily::gaussian;
    if (s == "uniform") return NoiseFamily::uniform;
    if (s == "laplace") return NoiseFamily::laplace;
    throw std::invalid_argument("unknown noise family '" + s + "'");
}

void ScmSpec::validate() const {
    if (!is_dag(dag)) throw GraphError("SCM graph must be a DAG");
    if (noise.size() != dag.size()) throw std::invalid_argument("SCM needs one noise spec per node");
    for (std::size_t v = 0; v < noise.size(); ++v)
        if (!(noise[v].scale > 0.0) || !std::isfinite(noise[v].scale))
            throw std::invalid_argument("noise scale of '" + dag.name(v) + "' must be positive");
    for (const auto& e : dag.edges())
        if (!e.weight) throw std::invalid_argument("SCM edge " + dag.name(e.a) + " - " + dag.name(e.b) + " has no weight");
}

Eigen::MatrixXd ScmSpec::coefficients() const {
    const auto p = static_cast<Eigen::Index>(dag.size());
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(p, p);
    for (std::size_t to = 0; to < dag.size(); ++to)
        for (auto from : dag.parents(to))
            b(static_cast<Eigen::Index>(to), static_cast<Eigen::Index>(from)) = dag.weight(from, to).value_or(0.0);
    return b;
}

MixedGraph random_dag(std::size_t p, double edge_prob, std::uint64_t seed) {
    if (p < 1) throw std::invalid_argument("random_dag needs p >= 1");
    if (!(edge_prob >= 0.0 && edge_prob <= 1.0)) throw std::invalid_argument("edge_prob must lie in [0, 1]");
    std::vector<std::string> names;
    for (std::size_t i = 0; i < p; ++i) names.push_back("X" + std::to_string(i + 1));
    MixedGraph g(names, GraphKind::dag);
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> order(p);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i + 1; j < p; ++j)
            if (unif(rng) < edge_prob) g.add_directed(order[i], order[j]);
    return g;
}

ScmSpec random_scm(const MixedGraph& dag, NoiseFamily family, std::uint64_t seed, double w_lo, double w_hi) {
    if (!(w_lo > 0.0 && w_hi >= w_lo)) throw std::invalid_argument("weight range must satisfy 0 < lo <= hi");
    ScmSpec spec;
    spec.dag = dag;
    spec.dag.set_kind(GraphKind::dag);
    spec.seed = seed;
    spec.noise.assign(dag.size(), NoiseSpec{family, 1.0});
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> mag(w_lo, w_hi);
    std::bernoulli_distribution sign(0.5);
    for (const auto& e : dag.edges()) {
        const auto [from, to] = dag.directed(e.a, e.b) ? std::pair{e.a, e.b} : std::pair{e.b, e.a};
        const double w = mag(rng);
        spec.dag.set_weight(from, to, sign(rng) ? w : -w);
    }
    spec.validate();
    return spec;
}

namespace {

double draw_noise(const NoiseSpec& s, std::mt19937_64& rng) {
    switch (s.family) {
        case NoiseFamily::gaussian: return std::normal_distribution<double>(0.0, s.scale)(rng);
        case NoiseFamily::uniform: {
            const double h = s.scale * std::sqrt(3.0);
            return std::uniform_real_distribution<double>(-h, h)(rng);
        }
        case NoiseFamily::laplace: {
            const double b = s.scale / std::sqrt(2.0);
            const double u = std::uniform_real_distribution<double>(-0.5, 0.5)(rng);
            return -b * (u < 0.0 ? -1.0 : 1.0) * std::log1p(-2.0 * std::abs(u));
        }
    }
    return 0.0;
}

}  // namespace

Dataset sample_scm(const ScmSpec& spec, std::size_t n) {
    spec.validate();
    if (n < 1) throw std::invalid_argument("sample_scm needs n >= 1");
    const std::size_t p = spec.dag.size();
    Dataset d;
    for (const auto& name : spec.dag.nodes()) d.schema.push_back({name, VariableKind::continuous, 0, "", {}});
    d.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    std::mt19937_64 rng(spec.seed);
    for (auto v : topological_order(spec.dag)) {
        const auto col = static_cast<Eigen::Index>(v);
        for (std::size_t i = 0; i < n; ++i) d.values(static_cast<Eigen::Index>(i), col) = draw_noise(spec.noise[v], rng);
        for (auto parent : spec.dag.parents(v))
            d.values.col(col) += *spec.dag.weight(parent, v) * d.values.col(static_cast<Eigen::Index>(parent));
    }
    d.provenance.push_back("simulated " + std::to_string(n) + " rows, seed " + std::to_string(spec.seed));
    return d;
}

Eigen::MatrixXd implied_covariance(const ScmSpec& spec) {
    spec.validate();
    const auto p = static_cast<Eigen::Index>(spec.dag.size());
    Eigen::MatrixXd psi = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index v = 0; v < p; ++v) psi(v, v) = spec.noise[static_cast<std::size_t>(v)].scale * spec.noise[static_cast<std::size_t>(v)].scale;
    const Eigen::MatrixXd a = (Eigen::MatrixXd::Identity(p, p) - spec.coefficients()).inverse();
    return a * psi * a.transpose();
}

std::vector<MixedGraph> all_dags(const std::vector<std::string>& nodes) {
    const std::size_t p = nodes.size();
    if (p > 5) throw std::invalid_argument("all_dags refuses more than 5 nodes");
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i + 1; j < p; ++j) pairs.emplace_back(i, j);
    std::vector<int> state(pairs.size(), 0);
    std::vector<MixedGraph> out;
    while (true) {
        MixedGraph g(nodes, GraphKind::dag);
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            if (state[k] == 1) g.add_directed(pairs[k].first, pairs[k].second);
            if (state[k] == 2) g.add_directed(pairs[k].second, pairs[k].first);
        }
        if (is_dag(g)) out.push_back(std::move(g));
        std::size_t k = pairs.size();
        while (k > 0 && state[k - 1] == 2) state[--k] = 0;
        if (k == 0) break;
        ++state[k - 1];
    }
    return out;
}

MixedGraph exhaustive_best_dag(const CorrelationMatrix& c, double penalty_discount) {
    if (c.size() > 4) throw std::invalid_argument("exhaustive_best_dag refuses more than 4 variables");
    const BicScore score(c, penalty_discount);
    MixedGraph best;
    double best_score = -std::numeric_limits<double>::infinity();
    for (auto& g : all_dags(c.names)) {
        const double s = score.total(g);
        if (s > best_score) {
            best_score = s;
            best = std::move(g);
        }
    }
    return best;
}

MixedGraph exhaustive_best_dag(const Dataset& d, double penalty_discount) {
    return exhaustive_best_dag(pearson_matrix(d), penalty_discount);
}

Dataset discretize(const Dataset& d, const std::map<std::string, std::vector<double>>& thresholds) {
    Dataset out = d;
    for (const auto& [name, cuts] : thresholds) {
        const auto j = static_cast<Eigen::Index>(d.column_index(name));
        if (cuts.empty()) throw std::invalid_argument("no thresholds for '" + name + "'");
        for (std::size_t k = 1; k < cuts.size(); ++k)
            if (!(cuts[k] > cuts[k - 1])) throw std::invalid_argument("thresholds for '" + name + "' must be strictly increasing");
        for (Eigen::Index i = 0; i < out.values.rows(); ++i) {
            const double v = d.values(i, j);
            if (std::isnan(v)) continue;
            out.values(i, j) = static_cast<double>(std::count_if(cuts.begin(), cuts.end(), [&](double t) { return v > t; }));
        }
        auto& s = out.schema[static_cast<std::size_t>(j)];
        s.kind = cuts.size() == 1 ? VariableKind::binary : VariableKind::ordinal;
        s.levels = static_cast<int>(cuts.size()) + 1;
        s.level_labels.clear();
    }
    out.provenance.push_back("discretized " + std::to_string(thresholds.size()) + " columns");
    return out;
}

std::string scm_to_json(const ScmSpec& spec) {
    nlohmann::ordered_json j;
    j["seed"] = spec.seed;
    j["nodes"] = spec.dag.nodes();
    auto edges = nlohmann::ordered_json::array();
    for (std::size_t to = 0; to < spec.dag.size(); ++to)
        for (auto from : spec.dag.parents(to)) {
            nlohmann::ordered_json e;
            e["source"] = spec.dag.name(from);
            e["target"] = spec.dag.name(to);
            e["weight"] = spec.dag.weight(from, to).value_or(0.0);
            edges.push_back(e);
        }
    j["edges"] = edges;
    nlohmann::ordered_json noise;
    for (std::size_t v = 0; v < spec.dag.size(); ++v)
        noise[spec.dag.name(v)] = {{"family", to_string(spec.noise[v].family)}, {"scale", spec.noise[v].scale}};
    j["noise"] = noise;
    return j.dump(2);
}

ScmSpec scm_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("invalid SCM JSON: ") + e.what());
    }
    try {
        ScmSpec spec;
        spec.seed = j.value("seed", std::uint64_t{0});
        spec.dag = MixedGraph(j.at("nodes").get<std::vector<std::string>>(), GraphKind::dag);
        for (const auto& e : j.value("edges", nlohmann::json::array())) {
            const auto from = spec.dag.index_of(e.at("source").get<std::string>());
            const auto to = spec.dag.index_of(e.at("target").get<std::string>());
            spec.dag.add_directed(from, to);
            spec.dag.set_weight(from, to, e.at("weight").get<double>());
        }
        spec.noise.assign(spec.dag.size(), NoiseSpec{});
        if (j.contains("noise")) {
            const auto& nj = j.at("noise");
            for (std::size_t v = 0; v < spec.dag.size(); ++v) {
                if (nj.is_string()) {
                    spec.noise[v].family = noise_family_from_string(nj.get<std::string>());
                } else if (nj.contains(spec.dag.name(v))) {
                    const auto& one = nj.at(spec.dag.name(v));
                    spec.noise[v].family = noise_family_from_string(one.value("family", std::string("gaussian")));
                    spec.noise[v].scale = one.value("scale", 1.0);
                }
            }
        }
        spec.validate();
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("invalid SCM JSON: ") + e.what());
    }
}

ScmSpec load_scm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open SCM spec '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return scm_from_json(ss.str());
}

std::string data_config_to_json(const std::vector<VariableSchema>& schema) {
    nlohmann::ordered_json j;
    auto vars = nlohmann::ordered_json::array();
    for (const auto& s : schema) {
        nlohmann::ordered_json v;
        v["name"] = s.name;
        v["kind"] = to_string(s.kind);
        if (s.kind != VariableKind::continuous) v["levels"] = s.levels;
        if (!s.role.empty()) v["role"] = s.role;
        if (!s.level_labels.empty()) v["labels"] = s.level_labels;
        vars.push_back(v);
    }
    j["variables"] = vars;
    return j.dump(2);
}

namespace {

struct TravelVariable {
    const char* name;
    const char* role;
    std::vector<double> cuts;  // in standard deviations
    std::vector<std::string> labels;
};

const std::vector<TravelVariable>& travel_variables() {
    static const std::vector<TravelVariable> vars = {
        {"age", "sociodemographic", {-0.84, -0.25, 0.25, 0.84}, {}},
        {"gender", "sociodemographic", {0.0}, {"male", "female"}},
        {"race_white", "sociodemographic", {-0.5}, {}},
        {"education", "sociodemographic", {-0.67, 0.0, 0.67}, {}},
        {"hh_income", "sociodemographic", {-0.84, -0.25, 0.25, 0.84}, {}},
        {"vehicles", "sociodemographic", {-1.0, 0.0, 0.8}, {}},
        {"place_type", "sociodemographic", {-0.3}, {"rural", "urban"}},
        {"gas_price", "trip_attribute", {-0.43, 0.43}, {}},
        {"weekday", "trip_attribute", {-0.6}, {"weekend", "weekday"}},
        {"trip_distance", "trip_characteristic", {-0.84, -0.25, 0.25, 0.84}, {}},
        {"peak_hour", "trip_characteristic", {0.2}, {}},
        {"car", "target", {-0.7}, {}},
        {"public", "target", {1.0}, {}},
        {"walk", "target", {0.9}, {}},
    };
    return vars;
}

}  // namespace

TravelExample travel_example(std::uint64_t seed, std::size_t n) {
    const auto& vars = travel_variables();
    std::vector<std::string> names;
    for (const auto& v : vars) names.emplace_back(v.name);

    TravelExample ex;
    ex.scm.dag = MixedGraph(names, GraphKind::dag);
    ex.scm.seed = seed;
    const std::vector<std::tuple<const char*, const char*, double>> edges = {
        {"age", "education", 0.3},          {"age", "hh_income", 0.3},
        {"race_white", "hh_income", 0.3},   {"race_white", "vehicles", 0.3},
        {"education", "hh_income", 0.5},    {"hh_income", "vehicles", 0.5},
        {"place_type", "vehicles", -0.6},   {"place_type", "trip_distance", -0.4},
        {"vehicles", "trip_distance", 0.3}, {"weekday", "peak_hour", 0.5},
        {"gas_price", "car", -0.2},         {"trip_distance", "walk", -0.7},
        {"trip_distance", "car", 0.4},      {"trip_distance", "public", 0.3},
        {"vehicles", "car", 0.8},           {"vehicles", "public", -0.6},
        {"vehicles", "walk", -0.3},         {"place_type", "public", 0.5},
        {"place_type", "walk", 0.4},        {"race_white", "car", 0.2},
        {"peak_hour", "public", 0.3},       {"age", "walk", -0.2},
    };
    for (const auto& [from, to, w] : edges) {
        ex.scm.dag.add_directed(from, to);
        ex.scm.dag.set_weight(ex.scm.dag.index_of(from), ex.scm.dag.index_of(to), w);
    }
    for (std::size_t v = 0; v < names.size(); ++v)
        ex.scm.noise.push_back({v % 2 == 0 ? NoiseFamily::uniform : NoiseFamily::laplace, 1.0});

    Dataset raw = sample_scm(ex.scm, n);
    const Eigen::MatrixXd cov = implied_covariance(ex.scm);
    std::map<std::string, std::vector<double>> cuts;
    for (std::size_t v = 0; v < vars.size(); ++v) {
        const double sd = std::sqrt(cov(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(v)));
        std::vector<double> c;
        for (double z : vars[v].cuts) c.push_back(z * sd);
        cuts[names[v]] = c;
    }
    ex.data = discretize(raw, cuts);
    for (std::size_t v = 0; v < vars.size(); ++v) {
        ex.data.schema[v].role = vars[v].role;
        ex.data.schema[v].level_labels = vars[v].labels;
    }
    ex.exogenous = {"place_type", "gas_price", "race_white", "age", "gender"};
    ex.forbidden = {{"vehicles", "education"}, {"hh_income", "education"}};
    return ex;
}

}  // namespace causalsem
