#pragma once

#include "causalsem/data.hpp"
#include "causalsem/graph.hpp"

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace causalsem {

/// All-observed linear path model: each variable regressed on its parents, one
/// disturbance variance per variable, plus free disturbance covariances.
struct SemModel {
    std::vector<std::string> names;
    std::vector<std::vector<std::size_t>> parents;
    /// Free disturbance covariances as (a, b) with a < b.
    std::vector<std::pair<std::size_t, std::size_t>> covariances;
    std::vector<std::string> notes;

    std::size_t size() const { return names.size(); }
    std::size_t coefficient_count() const;
    /// Free parameters: coefficients + disturbance variances + disturbance covariances.
    std::size_t parameter_count() const;
    /// p(p+1)/2 - t.
    long dof() const;
    std::size_t edge_count() const { return coefficient_count() + covariances.size(); }
    std::vector<std::size_t> exogenous() const;
    std::string digest() const;
};

/// DAGs translate directly; CPDAGs through a consistent extension; PAG
/// bidirected edges become disturbance covariances.
SemModel model_from_graph(const MixedGraph& g);

/// Parameter vector layout: coefficients (child by child, parents in model
/// order), then disturbance variances, then covariances.
struct SemParameters {
    Eigen::MatrixXd B;    ///< B(child, parent)
    Eigen::MatrixXd Psi;  ///< disturbance covariance
};
SemParameters unpack_parameters(const SemModel& m, const Eigen::VectorXd& theta);
Eigen::VectorXd pack_parameters(const SemModel& m, const SemParameters& params);

/// Sigma(theta) = (I - B)^-1 Psi (I - B)^-T.
Eigen::MatrixXd implied_matrix(const SemModel& m, const Eigen::VectorXd& theta);
/// F = 1/2 tr[(S - Sigma)^2].
double uls_objective(const SemModel& m, const Eigen::MatrixXd& s, const Eigen::VectorXd& theta);
Eigen::VectorXd uls_gradient(const SemModel& m, const Eigen::MatrixXd& s, const Eigen::VectorXd& theta);
/// Per-equation least squares on S, residual variances, zero covariances.
Eigen::VectorXd initial_parameters(const SemModel& m, const Eigen::MatrixXd& s);

struct FitOptions {
    std::size_t max_iterations = 5000;
    double gradient_tolerance = 1e-8;
    double relative_tolerance = 1e-12;
};

struct FittedSem {
    Eigen::VectorXd theta;
    Eigen::MatrixXd B;
    Eigen::MatrixXd Psi;
    Eigen::MatrixXd Sigma;
    double f_uls = 0.0;
    bool converged = false;
    std::size_t iterations = 0;
    std::size_t n = 0;
};

/// Quasi-Newton (BFGS) minimisation of the ULS discrepancy with analytic gradient.
FittedSem fit_uls(const SemModel& m, const CorrelationMatrix& c, std::size_t n = 0, const FitOptions& opt = {});

/// Table 1 acceptance levels.
struct FitThresholds {
    double cfi = 0.95;   ///< CFI >= cfi
    double nfi = 0.90;   ///< NFI > nfi
    double tli = 0.90;   ///< TLI > tli
    double rmsea = 0.06; ///< RMSEA < rmsea
    double p_value = 0.05;
};

/// Indices that are undefined (df = 0, or a non positive-definite implied
/// matrix for likelihood-based indices) hold NaN and print as n/a.
struct FitReport {
    double chi_square = 0.0;
    long dof = 0;
    double p_value = 0.0;
    double chi_square_baseline = 0.0;
    long dof_baseline = 0;
    double cfi = 0.0, gfi = 0.0, agfi = 0.0, nfi = 0.0, tli = 0.0, rmsea = 0.0;
    double aic = 0.0, bic = 0.0, loglik = 0.0;
    std::size_t n = 0;
    std::size_t edge_count = 0;
    std::size_t parameters = 0;
    double f_uls = 0.0;
    bool converged = true;
    bool implied_positive_definite = true;
    std::vector<std::string> warnings;

    bool pass_cfi(const FitThresholds& t = {}) const { return cfi >= t.cfi; }
    bool pass_nfi(const FitThresholds& t = {}) const { return nfi > t.nfi; }
    bool pass_tli(const FitThresholds& t = {}) const { return tli > t.tli; }
    bool pass_rmsea(const FitThresholds& t = {}) const { return rmsea < t.rmsea; }
    bool pass_p_value(const FitThresholds& t = {}) const { return p_value > t.p_value; }
    /// Passed checks among CFI, NFI, TLI and RMSEA.
    int passes(const FitThresholds& t = {}) const;
};

/// F_ML = ln|Sigma| - ln|S| + tr(S Sigma^-1) - p.
double ml_discrepancy(const Eigen::MatrixXd& s, const Eigen::MatrixXd& sigma);

FitReport fit_indices(const FittedSem& f, const SemModel& m, const CorrelationMatrix& c, std::size_t n = 0);

/// Directed edges weighted by the estimated coefficients.
MixedGraph path_coefficients(const FittedSem& f, const SemModel& m);

/// Ranking (indices into `reports`): threshold passes descending, then BIC
/// ascending, then fewer edges, then input order.
std::vector<std::size_t> rank_models(const std::vector<FitReport>& reports, const FitThresholds& t = {});

std::string fit_report_to_json(const FitReport& r, const FitThresholds& t = {});
/// Fixed-width comparison table, one column per labelled report.
std::string fit_table(const std::vector<std::pair<std::string, FitReport>>& reports, const FitThresholds& t = {});
/// Formula footer printed under the comparison table.
std::string fit_formulas();

}  // namespace causalsem
