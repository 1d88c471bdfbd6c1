#include "causalsem/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace causalsem {

BackgroundKnowledge knowledge_from_roles(const std::vector<VariableSchema>& schema, const KnowledgeRules& rules) {
    BackgroundKnowledge bk;
    std::map<std::string, std::size_t> role_tier;
    for (std::size_t t = 0; t < rules.role_order.size(); ++t) role_tier[rules.role_order[t]] = t;
    bk.tiers.assign(rules.role_order.size(), {});
    std::set<std::string> names;
    for (const auto& v : schema) {
        names.insert(v.name);
        if (v.role.empty()) throw DataError("variable '" + v.name + "' has no role");
        auto it = role_tier.find(v.role);
        if (it == role_tier.end()) throw DataError("variable '" + v.name + "' has unknown role '" + v.role + "'");
        bk.tiers[it->second].push_back(v.name);
    }
    bk.tiers.erase(std::remove_if(bk.tiers.begin(), bk.tiers.end(), [](const auto& t) { return t.empty(); }),
                   bk.tiers.end());

    const std::set<std::string> sinks(rules.sink_roles.begin(), rules.sink_roles.end());
    for (const auto& a : schema) {
        if (!sinks.count(a.role)) continue;
        for (const auto& b : schema)
            if (a.name != b.name) bk.forbidden.insert({a.name, b.name});
    }
    for (const auto& x : rules.exogenous) {
        if (!names.count(x)) throw DataError("exogenous variable '" + x + "' is not in the schema");
        for (const auto& b : schema)
            if (b.name != x) bk.forbidden.insert({b.name, x});
    }
    for (const auto& [a, b] : rules.forbidden) {
        if (!names.count(a) || !names.count(b)) throw DataError("forbidden pair " + a + " -> " + b + " names an unknown variable");
        bk.forbidden.insert({a, b});
    }
    for (const auto& [a, b] : rules.required) {
        if (!names.count(a) || !names.count(b)) throw DataError("required pair " + a + " -> " + b + " names an unknown variable");
        bk.required.insert({a, b});
    }
    bk.validate();
    return bk;
}

namespace {

std::vector<std::pair<std::string, std::string>> read_pairs(const nlohmann::json& j, const char* key) {
    std::vector<std::pair<std::string, std::string>> out;
    if (!j.contains(key)) return out;
    for (const auto& item : j.at(key)) {
        if (item.is_array() && item.size() == 2) {
            out.emplace_back(item[0].get<std::string>(), item[1].get<std::string>());
        } else if (item.is_object()) {
            out.emplace_back(item.at("from").get<std::string>(), item.at("to").get<std::string>());
        } else {
            throw DataError(std::string("knowledge '") + key + "' entries must be [cause, effect] pairs");
        }
    }
    return out;
}

nlohmann::json parse_json(const std::string& text, const char* what) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("invalid ") + what + " JSON: " + e.what());
    }
}

KnowledgeRules rules_from_json(const nlohmann::json& j) {
    KnowledgeRules rules;
    if (j.contains("role_order")) rules.role_order = j.at("role_order").get<std::vector<std::string>>();
    if (j.contains("sink_roles")) rules.sink_roles = j.at("sink_roles").get<std::vector<std::string>>();
    if (j.contains("exogenous")) rules.exogenous = j.at("exogenous").get<std::vector<std::string>>();
    rules.forbidden = read_pairs(j, "forbidden");
    rules.required = read_pairs(j, "required");
    return rules;
}

}  // namespace

KnowledgeRules parse_knowledge_rules(const std::string& json_text) {
    const auto j = parse_json(json_text, "knowledge");
    try {
        return rules_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("invalid knowledge JSON: ") + e.what());
    }
}

BackgroundKnowledge parse_knowledge(const std::string& json_text, const std::vector<VariableSchema>& schema) {
    const auto j = parse_json(json_text, "knowledge");
    try {
        if (j.contains("tiers")) {
            BackgroundKnowledge bk;
            bk.tiers = j.at("tiers").get<std::vector<std::vector<std::string>>>();
            for (auto& p : read_pairs(j, "forbidden")) bk.forbidden.insert(p);
            for (auto& p : read_pairs(j, "required")) bk.required.insert(p);
            bk.validate();
            return bk;
        }
        return knowledge_from_roles(schema, rules_from_json(j));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("invalid knowledge JSON: ") + e.what());
    }
}

BackgroundKnowledge load_knowledge(const std::string& path, const std::vector<VariableSchema>& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open knowledge file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_knowledge(ss.str(), schema);
}

namespace {

DiscoveryResult discover(Algorithm a, const Dataset& d, const CorrelationMatrix& c, const DiscoveryConfig& cfg,
                         const BackgroundKnowledge& bk) {
    switch (a) {
        case Algorithm::pc: return pc(c, cfg, bk);
        case Algorithm::fci: return fci(c, cfg, bk);
        case Algorithm::fges: return fges(c, cfg, bk);
        case Algorithm::lingam: return direct_lingam(d, cfg, bk);
    }
    throw std::invalid_argument("unknown algorithm");
}

MixedGraph model_dag(const SemModel& m) {
    MixedGraph g(m.names, GraphKind::dag);
    for (std::size_t v = 0; v < m.size(); ++v)
        for (auto p : m.parents[v]) g.add_directed(p, v);
    return g;
}

}  // namespace

PipelineReport run_pipeline(const Dataset& d, const BackgroundKnowledge& bk, const DiscoveryConfig& cfg,
                            const std::vector<Algorithm>& algorithms, const PipelineOptions& options) {
    if (algorithms.empty()) throw std::invalid_argument("run_pipeline needs at least one algorithm");
    cfg.validate();
    bk.validate();
    std::vector<Algorithm> order(algorithms);
    std::sort(order.begin(), order.end());
    order.erase(std::unique(order.begin(), order.end()), order.end());

    PipelineReport report;
    report.options = options;
    report.config = cfg;
    report.knowledge_digest = bk.digest();
    report.n = d.rows();

    const CorrelationMatrix c_disc = correlation_matrix(d, options.corr_discovery);
    const CorrelationMatrix c_sem =
        options.corr_sem == options.corr_discovery ? c_disc : correlation_matrix(d, options.corr_sem);
    for (const auto& w : c_disc.warnings) report.correlation_warnings.push_back(to_string(c_disc.method) + ": " + w);
    if (options.corr_sem != options.corr_discovery)
        for (const auto& w : c_sem.warnings) report.correlation_warnings.push_back(to_string(c_sem.method) + ": " + w);

    for (auto a : order) {
        PipelineEntry e;
        e.algorithm = a;
        try {
            auto res = discover(a, d, c_disc, cfg, bk);
            e.graph = std::move(res.graph);
            e.record = std::move(res.record);
            e.model = model_from_graph(e.graph);
            e.fit = fit_uls(e.model, c_sem, d.rows());
            e.report = fit_indices(e.fit, e.model, c_sem, d.rows());
            e.path_graph = path_coefficients(e.fit, e.model);
            for (auto& v : knowledge_violations(e.graph, bk)) e.knowledge_violations.push_back("graph: " + v);
            for (auto& v : knowledge_violations(model_dag(e.model), bk)) e.knowledge_violations.push_back("model: " + v);
        } catch (const std::exception& ex) {
            e.error = ex.what();
        }
        report.entries.push_back(std::move(e));
    }

    std::vector<std::size_t> usable;
    std::vector<FitReport> reports;
    for (std::size_t i = 0; i < report.entries.size(); ++i)
        if (report.entries[i].usable()) {
            usable.push_back(i);
            reports.push_back(report.entries[i].report);
        }
    for (auto k : rank_models(reports, options.fit_thresholds)) report.ranking.push_back(usable[k]);

    if (report.ranking.empty()) {
        std::ostringstream msg;
        msg << "no usable model:";
        for (const auto& e : report.entries)
            msg << " " << to_string(e.algorithm) << " (" << (e.error.empty() ? "ULS fit did not converge" : e.error) << ")";
        report.failure_summary = msg.str();
        report.rationale = "selection rule: most passed checks among CFI, NFI, TLI, RMSEA; then lowest BIC; then fewest edges";
        return report;
    }
    report.selected = report.ranking.front();
    const auto& win = report.entries[*report.selected];
    std::ostringstream why;
    why << "selection rule: most passed checks among CFI, NFI, TLI, RMSEA; then lowest BIC; then fewest edges. "
        << to_string(win.algorithm) << " passes " << win.report.passes(options.fit_thresholds) << " of 4 with BIC "
        << win.report.bic << " and " << win.report.edge_count << " edges";
    report.rationale = why.str();
    report.simplified_winner = simplify_by_weight(win.path_graph, options.threshold);
    return report;
}

namespace {

nlohmann::ordered_json as_json(const std::string& text) { return nlohmann::ordered_json::parse(text); }

}  // namespace

std::string pipeline_report_to_json(const PipelineReport& r) {
    nlohmann::ordered_json j;
    j["n"] = r.n;
    j["knowledge_digest"] = r.knowledge_digest;
    j["correlation_discovery"] = to_string(r.options.corr_discovery);
    j["correlation_sem"] = to_string(r.options.corr_sem);
    j["threshold"] = r.options.threshold;
    j["fit_thresholds"] = {{"cfi", r.options.fit_thresholds.cfi},
                           {"nfi", r.options.fit_thresholds.nfi},
                           {"tli", r.options.fit_thresholds.tli},
                           {"rmsea", r.options.fit_thresholds.rmsea},
                           {"p_value", r.options.fit_thresholds.p_value}};
    j["correlation_warnings"] = r.correlation_warnings;
    auto entries = nlohmann::ordered_json::array();
    for (const auto& e : r.entries) {
        nlohmann::ordered_json ej;
        ej["algorithm"] = to_string(e.algorithm);
        ej["usable"] = e.usable();
        if (!e.error.empty()) {
            ej["error"] = e.error;
            entries.push_back(ej);
            continue;
        }
        ej["run_record"] = as_json(run_record_to_json(e.record, false));
        ej["graph"] = as_json(graph_to_json(e.graph));
        ej["model_digest"] = e.model.digest();
        ej["model_notes"] = e.model.notes;
        ej["converged"] = e.fit.converged;
        ej["iterations"] = e.fit.iterations;
        ej["fit"] = as_json(fit_report_to_json(e.report, r.options.fit_thresholds));
        ej["path_coefficients"] = as_json(graph_to_json(e.path_graph));
        ej["knowledge_violations"] = e.knowledge_violations;
        entries.push_back(ej);
    }
    j["entries"] = entries;
    auto ranking = nlohmann::ordered_json::array();
    for (auto i : r.ranking) ranking.push_back(to_string(r.entries[i].algorithm));
    j["ranking"] = ranking;
    if (r.selected) j["selected"] = to_string(r.entries[*r.selected].algorithm);
    else j["selected"] = nullptr;
    j["rationale"] = r.rationale;
    if (!r.failure_summary.empty()) j["failure_summary"] = r.failure_summary;
    if (r.selected) j["simplified_winner"] = as_json(graph_to_json(r.simplified_winner));
    j["formulas"] = fit_formulas();
    return j.dump(2) + "\n";
}

std::string pipeline_summary(const PipelineReport& r) {
    std::vector<std::pair<std::string, FitReport>> cols;
    for (const auto& e : r.entries)
        if (e.error.empty()) cols.emplace_back(to_string(e.algorithm), e.report);
    std::ostringstream out;
    out << fit_table(cols, r.options.fit_thresholds);
    for (const auto& e : r.entries) {
        if (!e.error.empty()) out << to_string(e.algorithm) << ": failed (" << e.error << ")\n";
        else if (!e.fit.converged) out << to_string(e.algorithm) << ": ULS fit did not converge, excluded\n";
    }
    out << "\nranking:";
    for (auto i : r.ranking) out << " " << to_string(r.entries[i].algorithm);
    out << "\n";
    if (r.selected) out << "selected: " << to_string(r.entries[*r.selected].algorithm) << "\n";
    else out << "selected: none (" << r.failure_summary << ")\n";
    out << r.rationale << "\n\n" << fit_formulas();
    return out.str();
}

}  // namespace causalsem
