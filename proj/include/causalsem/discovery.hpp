#pragma once

#include "causalsem/data.hpp"
#include "causalsem/graph.hpp"
#include "causalsem/independence.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace causalsem {

struct DiscoveryConfig {
    double alpha = 0.05;
    std::optional<std::size_t> max_cond_size;
    double penalty_discount = 1.0;
    double prune_threshold = 0.01;
    std::uint64_t seed = 0;

    /// Throws std::invalid_argument on out-of-range fields.
    void validate() const;
};

/// Audit record of one discovery run.
struct RunRecord {
    std::string algorithm;
    DiscoveryConfig config;
    std::string knowledge_digest;
    std::string ci_test;
    std::size_t ci_tests = 0;
    std::size_t score_evaluations = 0;
    /// Final total score (FGES only).
    std::optional<double> score;
    /// Total score after each accepted FGES operator.
    std::vector<double> score_trace;
    /// DirectLiNGAM causal order (node names).
    std::vector<std::string> causal_order;
    std::vector<std::string> notes;
    double wall_time_ms = 0.0;
};

struct DiscoveryResult {
    MixedGraph graph;
    RunRecord record;
};

/// Separating sets keyed by (min index, max index).
using SepsetMap = std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>>;

struct SkeletonResult {
    MixedGraph graph;
    SepsetMap sepsets;
    std::size_t tests = 0;
};

/// Order-independent (stable) adjacency search. Pairs forbidden in both
/// directions are dropped up front; required pairs are never tested.
SkeletonResult pc_stable_skeleton(const IndependenceTest& test, const DiscoveryConfig& cfg,
                                  const KnowledgeIndex& knowledge);

DiscoveryResult pc(const IndependenceTest& test, const DiscoveryConfig& cfg, const BackgroundKnowledge& bk = {});
DiscoveryResult pc(const CorrelationMatrix& c, const DiscoveryConfig& cfg, const BackgroundKnowledge& bk = {});

DiscoveryResult fci(const IndependenceTest& test, const DiscoveryConfig& cfg, const BackgroundKnowledge& bk = {});
DiscoveryResult fci(const CorrelationMatrix& c, const DiscoveryConfig& cfg, const BackgroundKnowledge& bk = {});

/// Decomposable linear-Gaussian BIC on a correlation (or covariance) matrix:
/// local(v, pa) = -n ln(residual variance) - penalty * (|pa| + 1) * ln n.
/// Local scores are memoised per (node, parent set).
class BicScore {
public:
    BicScore(CorrelationMatrix c, double penalty_discount = 1.0);

    /// Throws SingularConditioningError when the parent block is singular.
    double local(std::size_t node, std::vector<std::size_t> parents) const;
    /// Sum of local scores over the parent sets of a DAG.
    double total(const MixedGraph& dag) const;
    std::size_t size() const { return corr_.size(); }
    const std::vector<std::string>& names() const { return corr_.names; }
    std::size_t evaluations() const { return evaluations_; }
    std::size_t cache_size() const { return cache_.size(); }

private:
    double compute(std::size_t node, const std::vector<std::size_t>& parents) const;

    CorrelationMatrix corr_;
    double penalty_;
    mutable std::map<std::pair<std::size_t, std::vector<std::size_t>>, double> cache_;
    mutable std::size_t evaluations_ = 0;
};

DiscoveryResult fges(const CorrelationMatrix& c, const DiscoveryConfig& cfg, const BackgroundKnowledge& bk = {});

/// Causal order search plus least-squares weights; output kind is weighted-dag.
DiscoveryResult direct_lingam(const Dataset& d, const DiscoveryConfig& cfg, const BackgroundKnowledge& bk = {});

/// Entropy approximation used by the pairwise independence measure.
double lingam_entropy(const Eigen::Ref<const Eigen::VectorXd>& u);

enum class Algorithm { pc, fci, fges, lingam };
std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);

std::string run_record_to_json(const RunRecord& r, bool include_timing = true);

}  // namespace causalsem
