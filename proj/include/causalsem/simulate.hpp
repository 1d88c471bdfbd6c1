#pragma once

#include "causalsem/data.hpp"
#include "causalsem/graph.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace causalsem {

enum class NoiseFamily { gaussian, uniform, laplace };

std::string to_string(NoiseFamily f);
NoiseFamily noise_family_from_string(const std::string& s);

/// `scale` is the standard deviation of the disturbance for every family.
struct NoiseSpec {
    NoiseFamily family = NoiseFamily::gaussian;
    double scale = 1.0;
};

/// Linear SCM: V_i = sum_j w(j -> i) V_j + U_i. Weights live on the DAG's directed edges.
struct ScmSpec {
    MixedGraph dag;
    std::vector<NoiseSpec> noise;
    std::uint64_t seed = 0;

    void validate() const;
    /// B(child, parent) coefficient matrix.
    Eigen::MatrixXd coefficients() const;
};

/// Random topological order, then each forward pair with probability edge_prob.
/// Nodes are named X1..Xp.
MixedGraph random_dag(std::size_t p, double edge_prob, std::uint64_t seed);

/// Attaches weights drawn from +-U[w_lo, w_hi] and one noise family to `dag`.
ScmSpec random_scm(const MixedGraph& dag, NoiseFamily family, std::uint64_t seed, double w_lo = 0.4,
                   double w_hi = 0.9);

/// n rows generated in topological order; all columns continuous.
Dataset sample_scm(const ScmSpec& spec, std::size_t n);

/// (I - B)^-1 Psi (I - B)^-T with Psi = diag(scale^2).
Eigen::MatrixXd implied_covariance(const ScmSpec& spec);

/// Every DAG over `nodes`, in a fixed enumeration order.
std::vector<MixedGraph> all_dags(const std::vector<std::string>& nodes);

/// Highest-BIC DAG among all DAGs (p <= 4); ties keep the first in enumeration order.
MixedGraph exhaustive_best_dag(const CorrelationMatrix& c, double penalty_discount = 1.0);
MixedGraph exhaustive_best_dag(const Dataset& d, double penalty_discount = 1.0);

/// Code = number of thresholds strictly below the value. Listed columns become
/// binary (one threshold) or ordinal; other columns are copied.
Dataset discretize(const Dataset& d, const std::map<std::string, std::vector<double>>& thresholds);

std::string scm_to_json(const ScmSpec& spec);
ScmSpec scm_from_json(const std::string& text);
ScmSpec load_scm(const std::string& path);

/// Data config (schema only) describing a simulated dataset.
std::string data_config_to_json(const std::vector<VariableSchema>& schema);

/// Synthetic 14-variable travel-mode survey: sociodemographics, trip attributes,
/// trip characteristics and three binary mode targets.
struct TravelExample {
    Dataset data;
    ScmSpec scm;
    std::vector<std::string> exogenous;
    std::vector<std::pair<std::string, std::string>> forbidden;
};

TravelExample travel_example(std::uint64_t seed, std::size_t n);

}  // namespace causalsem
