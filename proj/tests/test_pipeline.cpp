#include "causalsem/pipeline.hpp"
#include "causalsem/simulate.hpp"

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace causalsem;

namespace {

std::string data_dir() {
    const char* d = std::getenv("CAUSALSEM_DATA_DIR");
    return d ? d : "data";
}

std::vector<VariableSchema> small_schema() {
    return {{"age", VariableKind::ordinal, 3, "sociodemographic", {}},
            {"gas", VariableKind::ordinal, 3, "trip_attribute", {}},
            {"dist", VariableKind::ordinal, 3, "trip_characteristic", {}},
            {"car", VariableKind::binary, 2, "target", {}},
            {"walk", VariableKind::binary, 2, "target", {}}};
}

Dataset bundled() {
    const auto cfg = load_data_config(data_dir() + "/travel_config.json");
    return scale_unit(clean(load_csv(data_dir() + "/travel_sample.csv", cfg), cfg.cleaning));
}

}  // namespace

TEST_CASE("roles map onto tiers, sinks and sources") {
    KnowledgeRules rules;
    rules.exogenous = {"age"};
    const auto bk = knowledge_from_roles(small_schema(), rules);
    REQUIRE(bk.tiers.size() == 4);
    CHECK(bk.tiers[0] == std::vector<std::string>{"age"});
    CHECK(bk.is_forbidden("dist", "gas"));
    CHECK(bk.is_forbidden("car", "walk"));
    CHECK(bk.is_forbidden("walk", "car"));
    CHECK(bk.is_forbidden("car", "dist"));
    CHECK_FALSE(bk.is_forbidden("dist", "car"));
    CHECK(bk.is_forbidden("gas", "age"));
    CHECK_FALSE(bk.is_forbidden("age", "gas"));
}

TEST_CASE("missing or unknown roles are rejected") {
    auto s = small_schema();
    s[1].role = "";
    CHECK_THROWS_AS(knowledge_from_roles(s), DataError);
    s[1].role = "weather";
    CHECK_THROWS_AS(knowledge_from_roles(s), DataError);
    KnowledgeRules rules;
    rules.exogenous = {"nobody"};
    CHECK_THROWS_AS(knowledge_from_roles(small_schema(), rules), DataError);
}

TEST_CASE("knowledge JSON accepts explicit tiers and role rules") {
    const auto explicit_bk = parse_knowledge(R"({"tiers": [["age"], ["gas"]], "forbidden": [["gas", "dist"]]})",
                                             small_schema());
    CHECK(explicit_bk.tiers.size() == 2);
    CHECK(explicit_bk.is_forbidden("gas", "dist"));
    const auto rules_bk = parse_knowledge(R"({"exogenous": ["age"], "required": [["dist", "car"]]})", small_schema());
    CHECK(rules_bk.tiers.size() == 4);
    CHECK(rules_bk.is_required("dist", "car"));
    CHECK_THROWS_AS(parse_knowledge("[", small_schema()), DataError);
}

TEST_CASE("a single requested algorithm is selected when usable") {
    const auto ex = travel_example(5, 1500);
    const auto bk = knowledge_from_roles(ex.data.schema);
    const auto report = run_pipeline(scale_unit(ex.data), bk, DiscoveryConfig{}, {Algorithm::fges});
    REQUIRE(report.entries.size() == 1);
    REQUIRE(report.selected.has_value());
    CHECK(*report.selected == 0);
    CHECK(report.entries[0].usable());
}

TEST_CASE("pipeline runs four algorithms in fixed order and is deterministic") {
    const auto d = bundled();
    const auto bk = load_knowledge(data_dir() + "/travel_knowledge.json", d.schema);
    const std::vector<Algorithm> algos{Algorithm::lingam, Algorithm::pc, Algorithm::fges, Algorithm::fci,
                                       Algorithm::pc};
    const auto a = run_pipeline(d, bk, DiscoveryConfig{}, algos);
    REQUIRE(a.entries.size() == 4);
    CHECK(a.entries[0].algorithm == Algorithm::pc);
    CHECK(a.entries[1].algorithm == Algorithm::fci);
    CHECK(a.entries[2].algorithm == Algorithm::fges);
    CHECK(a.entries[3].algorithm == Algorithm::lingam);
    for (const auto& e : a.entries) {
        CHECK(e.error.empty());
        CHECK(e.knowledge_violations.empty());
    }
    REQUIRE(a.selected.has_value());
    CHECK(a.ranking.front() == *a.selected);
    const auto b = run_pipeline(d, bk, DiscoveryConfig{}, algos);
    CHECK(pipeline_report_to_json(a) == pipeline_report_to_json(b));
    CHECK(pipeline_report_to_json(a).find("wall_time") == std::string::npos);
    CHECK(pipeline_summary(a).find("selected") != std::string::npos);
    for (const auto& e : a.simplified_winner.edges()) CHECK(std::abs(*e.weight) > 0.25);
}

TEST_CASE("an empty algorithm list is an error") {
    const auto ex = travel_example(5, 200);
    CHECK_THROWS_AS(run_pipeline(ex.data, {}, DiscoveryConfig{}, {}), std::invalid_argument);
}

TEST_CASE("the true structure beats a structure with an omitted edge") {
    int wins = 0;
    const int runs = 20;
    for (int seed = 0; seed < runs; ++seed) {
        const auto spec = random_scm(random_dag(5, 0.5, 900 + seed), NoiseFamily::gaussian, 900 + seed);
        const auto c = pearson_matrix(sample_scm(spec, 5000));
        auto truth = spec.dag;
        truth.set_kind(GraphKind::dag);
        if (truth.edge_count() == 0) {
            ++wins;
            continue;
        }
        auto omitted = truth;
        const auto e = truth.edges().front();
        omitted.remove_edge(e.a, e.b);
        std::vector<FitReport> reports;
        for (const auto* g : {&truth, &omitted}) {
            const auto m = model_from_graph(*g);
            reports.push_back(fit_indices(fit_uls(m, c), m, c));
        }
        if (reports[0].bic < reports[1].bic) ++wins;
    }
    CHECK(wins >= runs - 1);
}
