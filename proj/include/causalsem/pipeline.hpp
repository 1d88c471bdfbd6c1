#pragma once

#include "causalsem/data.hpp"
#include "causalsem/discovery.hpp"
#include "causalsem/graph.hpp"
#include "causalsem/sem.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace causalsem {

/// How variable roles map onto background knowledge.
struct KnowledgeRules {
    /// Roles in causal order; a later role never causes an earlier one.
    std::vector<std::string> role_order = {"sociodemographic", "trip_attribute", "trip_characteristic", "target"};
    /// Roles whose variables cause nothing (mutually forbidden as well).
    std::vector<std::string> sink_roles = {"target"};
    /// Source-only variables: nothing may cause them.
    std::vector<std::string> exogenous;
    std::vector<std::pair<std::string, std::string>> forbidden;
    std::vector<std::pair<std::string, std::string>> required;
};

/// Tiers from roles plus sink, source and explicit constraints. Throws
/// DataError when a variable has no role or an unknown one.
BackgroundKnowledge knowledge_from_roles(const std::vector<VariableSchema>& schema, const KnowledgeRules& rules = {});

/// Knowledge JSON: either explicit {"tiers", "forbidden", "required"} or role
/// rules {"role_order", "sink_roles", "exogenous", "forbidden", "required"}
/// resolved against the schema.
BackgroundKnowledge parse_knowledge(const std::string& json_text, const std::vector<VariableSchema>& schema);
BackgroundKnowledge load_knowledge(const std::string& path, const std::vector<VariableSchema>& schema);
KnowledgeRules parse_knowledge_rules(const std::string& json_text);

struct PipelineOptions {
    CorrelationMethod corr_discovery = CorrelationMethod::pearson;
    CorrelationMethod corr_sem = CorrelationMethod::polychoric;
    /// |path coefficient| kept in the simplified winner graph.
    double threshold = 0.25;
    FitThresholds fit_thresholds;
};

struct PipelineEntry {
    Algorithm algorithm = Algorithm::pc;
    RunRecord record;
    MixedGraph graph;
    SemModel model;
    FittedSem fit;
    FitReport report;
    /// Fitted path coefficients over the model DAG.
    MixedGraph path_graph;
    /// Post-hoc knowledge check of the discovered graph and the model DAG.
    std::vector<std::string> knowledge_violations;
    /// Set when discovery or fitting raised; the entry is then unusable.
    std::string error;

    bool usable() const { return error.empty() && fit.converged; }
};

struct PipelineReport {
    std::vector<PipelineEntry> entries;
    /// Indices into entries, usable entries only.
    std::vector<std::size_t> ranking;
    std::optional<std::size_t> selected;
    std::string rationale;
    MixedGraph simplified_winner;
    PipelineOptions options;
    DiscoveryConfig config;
    std::string knowledge_digest;
    std::size_t n = 0;
    std::vector<std::string> correlation_warnings;
    std::string failure_summary;
};

/// Discover, fit and compare each algorithm, then select a winner. Algorithms
/// run in the fixed order pc, fci, fges, lingam regardless of request order.
PipelineReport run_pipeline(const Dataset& d, const BackgroundKnowledge& bk, const DiscoveryConfig& cfg,
                            const std::vector<Algorithm>& algorithms, const PipelineOptions& options = {});

/// Report JSON without wall-clock fields, so equal inputs give equal bytes.
std::string pipeline_report_to_json(const PipelineReport& r);
/// Fit comparison table, ranking and the selected model.
std::string pipeline_summary(const PipelineReport& r);

}  // namespace causalsem
