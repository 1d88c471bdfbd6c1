#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace causalsem {

/// Raised for malformed input data or configuration.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class VariableKind { binary, ordinal, continuous };

std::string to_string(VariableKind kind);
VariableKind variable_kind_from_string(const std::string& s);

struct VariableSchema {
    std::string name;
    VariableKind kind = VariableKind::continuous;
    /// Declared level count for binary (2) and ordinal (k >= 2) variables; 0 for continuous.
    int levels = 0;
    /// Free-form category label consumed by tier mapping.
    std::string role;
    /// Optional ordered labels; label i maps to code i.
    std::vector<std::string> level_labels;
};

/// Checks the per-variable and cross-variable invariants, throwing DataError.
void validate_schema(const std::vector<VariableSchema>& schema);

struct Dataset {
    std::vector<VariableSchema> schema;
    /// n x p, column j holds variable schema[j].
    Eigen::MatrixXd values;
    /// Human-readable cleaning/ingestion log.
    std::vector<std::string> provenance;
    /// Columns flagged constant by scale_unit.
    std::vector<std::string> constant_columns;

    std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }
    std::vector<std::string> names() const;
    /// Index of the named column; throws DataError when absent.
    std::size_t column_index(const std::string& name) const;
    std::optional<std::size_t> find_column(const std::string& name) const;
};

/// One row filter. A row survives when the referenced cell satisfies every
/// populated predicate.
struct CleaningRule {
    std::string column;
    std::optional<double> min;
    std::optional<double> max;
    /// Allow-list; string entries are resolved through the column's level labels.
    std::vector<std::variant<double, std::string>> allow;
    /// Sentinel values whose rows are dropped.
    std::vector<std::variant<double, std::string>> exclude;
};

/// Schema plus cleaning rules, as read from a single JSON config document.
struct DataConfig {
    std::vector<VariableSchema> schema;
    std::vector<CleaningRule> cleaning;
    /// Cell tokens read as missing; rows holding a missing cell are removed by clean().
    std::vector<std::string> missing_tokens;
};

DataConfig load_data_config(const std::string& path);
DataConfig parse_data_config(const std::string& json_text);

/// Parses RFC-4180 CSV text into a header and string rows.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};
CsvTable parse_csv(const std::string& text);

Dataset load_csv(const std::string& path, const DataConfig& config);
Dataset dataset_from_csv_text(const std::string& text, const DataConfig& config);

/// Writes values with full round-trip precision.
std::string dataset_to_csv(const Dataset& d);

Dataset clean(const Dataset& d, const std::vector<CleaningRule>& rules);

/// Min-max scaling to [0, 1] per column; constant columns become 0 and are flagged.
Dataset scale_unit(const Dataset& d);

enum class CorrelationMethod { pearson, spearman, polychoric };

std::string to_string(CorrelationMethod m);
CorrelationMethod correlation_method_from_string(const std::string& s);

struct CorrelationMatrix {
    Eigen::MatrixXd values;
    CorrelationMethod method = CorrelationMethod::pearson;
    std::size_t n = 0;
    std::vector<std::string> names;
    std::vector<std::string> warnings;

    std::size_t size() const { return static_cast<std::size_t>(values.rows()); }
};

/// Builds a correlation matrix directly from values (used by tests and bindings).
CorrelationMatrix make_correlation(Eigen::MatrixXd values, std::size_t n, std::vector<std::string> names,
                                   CorrelationMethod method = CorrelationMethod::pearson);

CorrelationMatrix pearson_matrix(const Dataset& d);
CorrelationMatrix spearman_matrix(const Dataset& d);
CorrelationMatrix polychoric_matrix(const Dataset& d);
CorrelationMatrix correlation_matrix(const Dataset& d, CorrelationMethod method);

/// Midranks of a sample (1-based, ties share their average rank).
Eigen::VectorXd midranks(const Eigen::Ref<const Eigen::VectorXd>& x);

struct PolychoricEstimate {
    double rho = 0.0;
    bool boundary = false;
    std::vector<std::string> warnings;
};

/// Two-step polychoric correlation of two ordinal code columns.
PolychoricEstimate polychoric_pair(const Eigen::Ref<const Eigen::VectorXd>& x,
                                   const Eigen::Ref<const Eigen::VectorXd>& y);

/// Two-step polychoric estimate from a contingency table (rows: x categories, cols: y categories).
PolychoricEstimate polychoric_from_table(const Eigen::MatrixXd& counts);

/// P(X <= h, Y <= k) for a standard bivariate normal with correlation rho.
double bivariate_normal_cdf(double h, double k, double rho);

std::string correlation_to_csv(const CorrelationMatrix& c);
std::string correlation_to_json(const CorrelationMatrix& c);

}  // namespace causalsem
