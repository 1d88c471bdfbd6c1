#include "causalsem/data.hpp"

#include "causalsem/detail/numeric.hpp"

#include <boost/math/tools/minima.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace causalsem {

using json = nlohmann::ordered_json;

std::string to_string(VariableKind kind) {
    switch (kind) {
        case VariableKind::binary: return "binary";
        case VariableKind::ordinal: return "ordinal";
        case VariableKind::continuous: return "continuous";
    }
    return "continuous";
}

VariableKind variable_kind_from_string(const std::string& s) {
    if (s == "binary") return VariableKind::binary;
    if (s == "ordinal") return VariableKind::ordinal;
    if (s == "continuous") return VariableKind::continuous;
    throw DataError("unknown variable kind '" + s + "'");
}

std::string to_string(CorrelationMethod m) {
    switch (m) {
        case CorrelationMethod::pearson: return "pearson";
        case CorrelationMethod::spearman: return "spearman";
        case CorrelationMethod::polychoric: return "polychoric";
    }
    return "pearson";
}

CorrelationMethod correlation_method_from_string(const std::string& s) {
    if (s == "pearson") return CorrelationMethod::pearson;
    if (s == "spearman") return CorrelationMethod::spearman;
    if (s == "polychoric") return CorrelationMethod::polychoric;
    throw DataError("unknown correlation method '" + s + "'");
}

void validate_schema(const std::vector<VariableSchema>& schema) {
    std::set<std::string> seen;
    for (const auto& v : schema) {
        if (v.name.empty()) throw DataError("variable with empty name in schema");
        if (!seen.insert(v.name).second) throw DataError("duplicate variable name '" + v.name + "' in schema");
        if (v.kind == VariableKind::binary && v.levels != 2)
            throw DataError("binary variable '" + v.name + "' must declare exactly 2 levels");
        if (v.kind == VariableKind::ordinal && v.levels < 2)
            throw DataError("ordinal variable '" + v.name + "' must declare at least 2 levels");
        if (!v.level_labels.empty() && v.kind != VariableKind::continuous &&
            static_cast<int>(v.level_labels.size()) != v.levels)
            throw DataError("variable '" + v.name + "' has " + std::to_string(v.level_labels.size()) +
                            " labels for " + std::to_string(v.levels) + " levels");
    }
}

std::vector<std::string> Dataset::names() const {
    std::vector<std::string> out;
    out.reserve(schema.size());
    for (const auto& v : schema) out.push_back(v.name);
    return out;
}

std::optional<std::size_t> Dataset::find_column(const std::string& name) const {
    for (std::size_t j = 0; j < schema.size(); ++j)
        if (schema[j].name == name) return j;
    return std::nullopt;
}

std::size_t Dataset::column_index(const std::string& name) const {
    auto j = find_column(name);
    if (!j) throw DataError("unknown column '" + name + "'");
    return *j;
}

// ---------------------------------------------------------------------------
// Config

namespace {

std::vector<std::variant<double, std::string>> parse_value_list(const json& arr, const std::string& key) {
    std::vector<std::variant<double, std::string>> out;
    if (!arr.is_array()) throw DataError("cleaning field '" + key + "' must be an array");
    for (const auto& v : arr) {
        if (v.is_number()) out.emplace_back(v.get<double>());
        else if (v.is_string()) out.emplace_back(v.get<std::string>());
        else throw DataError("cleaning field '" + key + "' holds a non-scalar entry");
    }
    return out;
}

}  // namespace

DataConfig parse_data_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw DataError(std::string("invalid data config JSON: ") + e.what());
    }
    DataConfig cfg;
    if (!doc.contains("variables")) throw DataError("data config lacks a 'variables' array");
    for (const auto& v : doc.at("variables")) {
        VariableSchema s;
        s.name = v.at("name").get<std::string>();
        s.kind = variable_kind_from_string(v.value("kind", std::string("continuous")));
        if (v.contains("labels")) s.level_labels = v.at("labels").get<std::vector<std::string>>();
        s.levels = v.value("levels", s.kind == VariableKind::binary ? 2 : static_cast<int>(s.level_labels.size()));
        s.role = v.value("role", std::string());
        cfg.schema.push_back(std::move(s));
    }
    validate_schema(cfg.schema);
    if (doc.contains("cleaning")) {
        for (const auto& r : doc.at("cleaning")) {
            CleaningRule rule;
            rule.column = r.at("column").get<std::string>();
            if (r.contains("min")) rule.min = r.at("min").get<double>();
            if (r.contains("max")) rule.max = r.at("max").get<double>();
            if (r.contains("allow")) rule.allow = parse_value_list(r.at("allow"), "allow");
            if (r.contains("exclude")) rule.exclude = parse_value_list(r.at("exclude"), "exclude");
            cfg.cleaning.push_back(std::move(rule));
        }
    }
    if (doc.contains("missing_tokens")) cfg.missing_tokens = doc.at("missing_tokens").get<std::vector<std::string>>();
    return cfg;
}

DataConfig load_data_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open data config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_data_config(ss.str());
}

// ---------------------------------------------------------------------------
// CSV

CsvTable parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t i = 0;
    // UTF-8 byte order mark.
    if (text.size() >= 3 && static_cast<unsigned char>(text[0]) == 0xEF &&
        static_cast<unsigned char>(text[1]) == 0xBB && static_cast<unsigned char>(text[2]) == 0xBF)
        i = 3;
    auto end_record = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_started = false;
        if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
        record.clear();
    };
    for (; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        if (c == '"' && !field_started) {
            in_quotes = true;
            field_started = true;
        } else if (c == ',') {
            record.push_back(std::move(field));
            field.clear();
            field_started = false;
        } else if (c == '\r') {
            if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
            end_record();
        } else if (c == '\n') {
            end_record();
        } else {
            field.push_back(c);
            field_started = true;
        }
    }
    if (in_quotes) throw DataError("unterminated quoted field in CSV");
    if (field_started || !field.empty() || !record.empty()) end_record();

    CsvTable table;
    if (records.empty()) throw DataError("empty CSV input");
    table.header = std::move(records.front());
    table.rows.assign(std::make_move_iterator(records.begin() + 1), std::make_move_iterator(records.end()));
    return table;
}

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

std::optional<double> parse_number(const std::string& s) {
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) return std::nullopt;
    return v;
}

}  // namespace

Dataset dataset_from_csv_text(const std::string& text, const DataConfig& config) {
    validate_schema(config.schema);
    const CsvTable table = parse_csv(text);
    if (table.rows.empty()) throw DataError("CSV has a header but no data rows");

    std::map<std::string, std::size_t> header_index;
    for (std::size_t j = 0; j < table.header.size(); ++j) header_index[trim(table.header[j])] = j;

    Dataset d;
    d.schema = config.schema;
    std::vector<std::size_t> source(config.schema.size());
    for (std::size_t j = 0; j < config.schema.size(); ++j) {
        auto it = header_index.find(config.schema[j].name);
        if (it == header_index.end()) throw DataError("missing column '" + config.schema[j].name + "'");
        source[j] = it->second;
    }
    for (const auto& [name, idx] : header_index) {
        (void)idx;
        bool known = std::any_of(config.schema.begin(), config.schema.end(),
                                 [&](const VariableSchema& v) { return v.name == name; });
        if (!known) d.provenance.push_back("warning: column '" + name + "' not in schema, ignored");
    }

    const std::set<std::string> missing(config.missing_tokens.begin(), config.missing_tokens.end());
    const std::size_t n = table.rows.size();
    const std::size_t p = config.schema.size();
    d.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    std::size_t missing_cells = 0;
    for (std::size_t r = 0; r < n; ++r) {
        const auto& row = table.rows[r];
        if (row.size() != table.header.size())
            throw DataError("row " + std::to_string(r + 1) + " has " + std::to_string(row.size()) +
                            " fields, header has " + std::to_string(table.header.size()));
        for (std::size_t j = 0; j < p; ++j) {
            const std::string cell = trim(row[source[j]]);
            double value;
            if (missing.count(cell)) {
                value = std::numeric_limits<double>::quiet_NaN();
                ++missing_cells;
            } else if (auto num = parse_number(cell)) {
                value = *num;
            } else {
                const auto& labels = config.schema[j].level_labels;
                auto it = std::find(labels.begin(), labels.end(), cell);
                if (it == labels.end())
                    throw DataError("unmappable cell value '" + cell + "' in column '" + config.schema[j].name +
                                    "' at row " + std::to_string(r + 1));
                value = static_cast<double>(it - labels.begin());
            }
            d.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = value;
        }
    }
    d.provenance.push_back("loaded " + std::to_string(n) + " rows x " + std::to_string(p) + " columns");
    if (missing_cells > 0) d.provenance.push_back("marked " + std::to_string(missing_cells) + " missing cells");
    return d;
}

Dataset load_csv(const std::string& path, const DataConfig& config) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open CSV '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    Dataset d = dataset_from_csv_text(ss.str(), config);
    d.provenance.insert(d.provenance.begin(), "source: " + path);
    return d;
}

std::string dataset_to_csv(const Dataset& d) {
    std::ostringstream out;
    for (std::size_t j = 0; j < d.cols(); ++j) out << (j ? "," : "") << d.schema[j].name;
    out << '\n';
    for (Eigen::Index r = 0; r < d.values.rows(); ++r) {
        for (Eigen::Index j = 0; j < d.values.cols(); ++j) out << (j ? "," : "") << detail::format_double(d.values(r, j));
        out << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Cleaning and scaling

namespace {

double resolve_value(const std::variant<double, std::string>& v, const VariableSchema& s) {
    if (std::holds_alternative<double>(v)) return std::get<double>(v);
    const auto& label = std::get<std::string>(v);
    auto it = std::find(s.level_labels.begin(), s.level_labels.end(), label);
    if (it == s.level_labels.end())
        throw DataError("cleaning rule label '" + label + "' is not a level of '" + s.name + "'");
    return static_cast<double>(it - s.level_labels.begin());
}

}  // namespace

Dataset clean(const Dataset& d, const std::vector<CleaningRule>& rules) {
    struct Resolved {
        std::size_t col;
        std::optional<double> min, max;
        std::vector<double> allow, exclude;
        std::string column;
    };
    std::vector<Resolved> resolved;
    for (const auto& r : rules) {
        auto col = d.find_column(r.column);
        if (!col) throw DataError("cleaning rule references unknown column '" + r.column + "'");
        Resolved rr{*col, r.min, r.max, {}, {}, r.column};
        for (const auto& v : r.allow) rr.allow.push_back(resolve_value(v, d.schema[*col]));
        for (const auto& v : r.exclude) rr.exclude.push_back(resolve_value(v, d.schema[*col]));
        resolved.push_back(std::move(rr));
    }

    Dataset out;
    out.schema = d.schema;
    out.provenance = d.provenance;
    std::vector<Eigen::Index> keep;
    keep.reserve(d.rows());
    std::size_t dropped_missing = 0;
    std::vector<std::size_t> dropped_by_rule(resolved.size(), 0);
    for (Eigen::Index r = 0; r < d.values.rows(); ++r) {
        if (!d.values.row(r).allFinite()) {
            ++dropped_missing;
            continue;
        }
        bool ok = true;
        for (std::size_t k = 0; k < resolved.size() && ok; ++k) {
            const auto& rule = resolved[k];
            const double v = d.values(r, static_cast<Eigen::Index>(rule.col));
            if (rule.min && v < *rule.min) ok = false;
            if (rule.max && v > *rule.max) ok = false;
            if (!rule.allow.empty() && std::find(rule.allow.begin(), rule.allow.end(), v) == rule.allow.end())
                ok = false;
            if (std::find(rule.exclude.begin(), rule.exclude.end(), v) != rule.exclude.end()) ok = false;
            if (!ok) ++dropped_by_rule[k];
        }
        if (ok) keep.push_back(r);
    }
    out.values.resize(static_cast<Eigen::Index>(keep.size()), d.values.cols());
    for (std::size_t i = 0; i < keep.size(); ++i) out.values.row(static_cast<Eigen::Index>(i)) = d.values.row(keep[i]);
    if (dropped_missing > 0)
        out.provenance.push_back("clean: dropped " + std::to_string(dropped_missing) + " rows with missing cells");
    for (std::size_t k = 0; k < resolved.size(); ++k)
        out.provenance.push_back("clean: rule on '" + resolved[k].column + "' dropped " +
                                 std::to_string(dropped_by_rule[k]) + " rows");
    out.provenance.push_back("clean: " + std::to_string(keep.size()) + " of " + std::to_string(d.rows()) +
                             " rows survive");
    return out;
}

Dataset scale_unit(const Dataset& d) {
    Dataset out = d;
    out.constant_columns.clear();
    for (Eigen::Index j = 0; j < d.values.cols(); ++j) {
        auto col = out.values.col(j);
        if (col.size() == 0) continue;
        const double lo = col.minCoeff();
        const double hi = col.maxCoeff();
        if (hi > lo) {
            col = (col.array() - lo) / (hi - lo);
        } else {
            col.setZero();
            out.constant_columns.push_back(d.schema[static_cast<std::size_t>(j)].name);
            out.provenance.push_back("warning: constant column '" + d.schema[static_cast<std::size_t>(j)].name +
                                     "' scaled to 0");
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Correlations

CorrelationMatrix make_correlation(Eigen::MatrixXd values, std::size_t n, std::vector<std::string> names,
                                   CorrelationMethod method) {
    if (values.rows() != values.cols()) throw DataError("correlation matrix must be square");
    if (names.empty())
        for (Eigen::Index i = 0; i < values.rows(); ++i) names.push_back("X" + std::to_string(i + 1));
    if (static_cast<Eigen::Index>(names.size()) != values.rows())
        throw DataError("correlation matrix has " + std::to_string(values.rows()) + " rows but " +
                        std::to_string(names.size()) + " names");
    CorrelationMatrix c;
    c.values = std::move(values);
    c.n = n;
    c.names = std::move(names);
    c.method = method;
    return c;
}

namespace {

double pearson_pair(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y,
                    bool& degenerate) {
    const Eigen::ArrayXd xc = x.array() - x.mean();
    const Eigen::ArrayXd yc = y.array() - y.mean();
    const double sxx = (xc * xc).sum();
    const double syy = (yc * yc).sum();
    degenerate = !(sxx > 0.0) || !(syy > 0.0);
    if (degenerate) return 0.0;
    return std::clamp((xc * yc).sum() / std::sqrt(sxx * syy), -1.0, 1.0);
}

template <typename PairFn>
CorrelationMatrix pairwise_matrix(const Dataset& d, CorrelationMethod method, PairFn&& pair) {
    const auto p = d.values.cols();
    CorrelationMatrix c;
    c.method = method;
    c.n = d.rows();
    c.names = d.names();
    c.values = Eigen::MatrixXd::Identity(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = i + 1; j < p; ++j) {
            std::vector<std::string> warnings;
            const double r = pair(i, j, warnings);
            c.values(i, j) = r;
            c.values(j, i) = r;
            for (auto& w : warnings)
                c.warnings.push_back(c.names[static_cast<std::size_t>(i)] + "/" + c.names[static_cast<std::size_t>(j)] +
                                     ": " + w);
        }
    }
    return c;
}

}  // namespace

CorrelationMatrix pearson_matrix(const Dataset& d) {
    if (d.rows() < 3) throw DataError("correlation needs at least 3 rows");
    return pairwise_matrix(d, CorrelationMethod::pearson, [&](Eigen::Index i, Eigen::Index j, auto& warnings) {
        bool degenerate = false;
        double r = pearson_pair(d.values.col(i), d.values.col(j), degenerate);
        if (degenerate) warnings.emplace_back("constant column, correlation set to 0");
        return r;
    });
}

Eigen::VectorXd midranks(const Eigen::Ref<const Eigen::VectorXd>& x) {
    const auto n = x.size();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return x[a] < x[b]; });
    Eigen::VectorXd ranks(n);
    Eigen::Index i = 0;
    while (i < n) {
        Eigen::Index j = i;
        while (j + 1 < n && x[order[static_cast<std::size_t>(j + 1)]] == x[order[static_cast<std::size_t>(i)]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (Eigen::Index k = i; k <= j; ++k) ranks[order[static_cast<std::size_t>(k)]] = avg;
        i = j + 1;
    }
    return ranks;
}

CorrelationMatrix spearman_matrix(const Dataset& d) {
    if (d.rows() < 3) throw DataError("correlation needs at least 3 rows");
    Eigen::MatrixXd ranks(d.values.rows(), d.values.cols());
    for (Eigen::Index j = 0; j < d.values.cols(); ++j) ranks.col(j) = midranks(d.values.col(j));
    return pairwise_matrix(d, CorrelationMethod::spearman, [&](Eigen::Index i, Eigen::Index j, auto& warnings) {
        bool degenerate = false;
        double r = pearson_pair(ranks.col(i), ranks.col(j), degenerate);
        if (degenerate) warnings.emplace_back("constant column, correlation set to 0");
        return r;
    });
}

// ---------------------------------------------------------------------------
// Polychoric

namespace {

// Gauss-Legendre half-rules (6, 12, 20 points) from Genz's BVND.
constexpr double kGlWeights[3][10] = {
    {0.1713244923791705, 0.3607615730481384, 0.4679139345726904},
    {0.04717533638651177, 0.1069393259953183, 0.1600783285433464, 0.2031674267230659, 0.2334925365383547,
     0.2491470458134029},
    {0.01761400713915212, 0.04060142980038694, 0.06267204833410906, 0.08327674157670475, 0.1019301198172404,
     0.1181945319615184, 0.1316886384491766, 0.1420961093183821, 0.1491729864726037, 0.1527533871307259}};
constexpr double kGlNodes[3][10] = {
    {-0.9324695142031522, -0.6612093864662647, -0.2386191860831970},
    {-0.9815606342467191, -0.9041172563704750, -0.7699026741943050, -0.5873179542866171, -0.3678314989981802,
     -0.1252334085114692},
    {-0.9931285991850949, -0.9639719272779138, -0.9122344282513259, -0.8391169718222188, -0.7463319064601508,
     -0.6360536807265150, -0.5108670019508271, -0.3737060887154196, -0.2277858511416451, -0.07652652113349733}};

// Upper orthant P(X > h, Y > k).
double bvn_upper(double h, double k, double r) {
    constexpr double two_pi = 2.0 * M_PI;
    int ng = 0, lg = 3;
    if (std::abs(r) < 0.3) {
        ng = 0;
        lg = 3;
    } else if (std::abs(r) < 0.75) {
        ng = 1;
        lg = 6;
    } else {
        ng = 2;
        lg = 10;
    }
    double hk = h * k;
    double bvn = 0.0;
    if (std::abs(r) < 0.925) {
        const double hs = (h * h + k * k) / 2.0;
        const double asr = std::asin(r);
        for (int i = 0; i < lg; ++i) {
            double sn = std::sin(asr * (kGlNodes[ng][i] + 1.0) / 2.0);
            bvn += kGlWeights[ng][i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
            sn = std::sin(asr * (-kGlNodes[ng][i] + 1.0) / 2.0);
            bvn += kGlWeights[ng][i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
        }
        return bvn * asr / (2.0 * two_pi) + detail::normal_cdf(-h) * detail::normal_cdf(-k);
    }
    if (r < 0.0) {
        k = -k;
        hk = -hk;
    }
    if (std::abs(r) < 1.0) {
        const double as = (1.0 - r) * (1.0 + r);
        double a = std::sqrt(as);
        const double bs = (h - k) * (h - k);
        const double c = (4.0 - hk) / 8.0;
        const double d = (12.0 - hk) / 16.0;
        bvn = a * std::exp(-(bs / as + hk) / 2.0) * (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
        if (hk > -160.0) {
            const double b = std::sqrt(bs);
            bvn -= std::exp(-hk / 2.0) * std::sqrt(two_pi) * detail::normal_cdf(-b / a) * b *
                   (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
        }
        a /= 2.0;
        for (int i = 0; i < lg; ++i) {
            double xs = a * (kGlNodes[ng][i] + 1.0);
            xs *= xs;
            double rs = std::sqrt(1.0 - xs);
            bvn += a * kGlWeights[ng][i] *
                   (std::exp(-bs / (2.0 * xs) - hk / (1.0 + rs)) / rs - std::exp(-(bs / xs + hk) / 2.0) * (1.0 + c * xs * (1.0 + d * xs)));
            xs = as * (-kGlNodes[ng][i] + 1.0) * (-kGlNodes[ng][i] + 1.0) / 4.0;
            rs = std::sqrt(1.0 - xs);
            bvn += a * kGlWeights[ng][i] * std::exp(-(bs / xs + hk) / 2.0) *
                   (std::exp(-hk * xs / (2.0 * (1.0 + rs) * (1.0 + rs))) / rs - (1.0 + c * xs * (1.0 + d * xs)));
        }
        bvn = -bvn / two_pi;
    }
    if (r > 0.0) return bvn + detail::normal_cdf(-std::max(h, k));
    bvn = -bvn;
    if (k > h) {
        if (h < 0.0) bvn += detail::normal_cdf(k) - detail::normal_cdf(h);
        else bvn += detail::normal_cdf(-h) - detail::normal_cdf(-k);
    }
    return bvn;
}

}  // namespace

double bivariate_normal_cdf(double h, double k, double rho) {
    if (h == -INFINITY || k == -INFINITY) return 0.0;
    if (h == INFINITY) return detail::normal_cdf(k);
    if (k == INFINITY) return detail::normal_cdf(h);
    return std::clamp(bvn_upper(-h, -k, rho), 0.0, 1.0);
}

namespace {

constexpr double kPolychoricBound = 0.999;

std::vector<double> thresholds_from_margins(const Eigen::VectorXd& margin) {
    const double total = margin.sum();
    std::vector<double> tau;
    tau.push_back(-INFINITY);
    double cum = 0.0;
    for (Eigen::Index i = 0; i + 1 < margin.size(); ++i) {
        cum += margin[i];
        tau.push_back(detail::normal_quantile(cum / total));
    }
    tau.push_back(INFINITY);
    return tau;
}

}  // namespace

PolychoricEstimate polychoric_from_table(const Eigen::MatrixXd& counts_in) {
    PolychoricEstimate est;
    // Collapse empty categories.
    std::vector<Eigen::Index> rows, cols;
    for (Eigen::Index i = 0; i < counts_in.rows(); ++i)
        if (counts_in.row(i).sum() > 0) rows.push_back(i);
        else est.warnings.push_back("empty row category collapsed");
    for (Eigen::Index j = 0; j < counts_in.cols(); ++j)
        if (counts_in.col(j).sum() > 0) cols.push_back(j);
        else est.warnings.push_back("empty column category collapsed");
    Eigen::MatrixXd counts(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j)
            counts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = counts_in(rows[i], cols[j]);

    if (counts.rows() < 2 || counts.cols() < 2) {
        est.warnings.push_back("constant column, correlation set to 0");
        return est;
    }
    if (counts.rows() == 2 && counts.cols() == 2 && (counts.array() == 0.0).any()) {
        const bool off_diagonal_empty = counts(0, 1) == 0.0 || counts(1, 0) == 0.0;
        est.rho = off_diagonal_empty ? kPolychoricBound : -kPolychoricBound;
        est.boundary = true;
        est.warnings.push_back("2x2 table with an empty cell, boundary estimate");
        return est;
    }

    const auto tau_x = thresholds_from_margins(counts.rowwise().sum());
    const auto tau_y = thresholds_from_margins(counts.colwise().sum().transpose());
    const Eigen::Index R = counts.rows(), C = counts.cols();

    auto neg_loglik = [&](double rho) {
        // Cumulative grid F(tau_x[i], tau_y[j]).
        Eigen::MatrixXd F(R + 1, C + 1);
        for (Eigen::Index i = 0; i <= R; ++i)
            for (Eigen::Index j = 0; j <= C; ++j)
                F(i, j) = bivariate_normal_cdf(tau_x[static_cast<std::size_t>(i)], tau_y[static_cast<std::size_t>(j)], rho);
        double ll = 0.0;
        for (Eigen::Index i = 0; i < R; ++i) {
            for (Eigen::Index j = 0; j < C; ++j) {
                const double nij = counts(i, j);
                if (nij == 0.0) continue;
                const double pij = F(i + 1, j + 1) - F(i, j + 1) - F(i + 1, j) + F(i, j);
                ll += nij * std::log(std::max(pij, 1e-300));
            }
        }
        return -ll;
    };
    // Absolute tolerance ~1e-8 on rho.
    constexpr int bits = 26;
    const auto [rho, value] =
        boost::math::tools::brent_find_minima(neg_loglik, -kPolychoricBound, kPolychoricBound, bits);
    (void)value;
    est.rho = std::clamp(rho, -kPolychoricBound, kPolychoricBound);
    if (std::abs(est.rho) > kPolychoricBound - 1e-6) {
        est.rho = std::copysign(kPolychoricBound, est.rho);
        est.boundary = true;
        est.warnings.push_back("estimate at boundary");
    }
    return est;
}

PolychoricEstimate polychoric_pair(const Eigen::Ref<const Eigen::VectorXd>& x,
                                   const Eigen::Ref<const Eigen::VectorXd>& y) {
    if (x.size() != y.size()) throw DataError("polychoric: column lengths differ");
    std::map<double, Eigen::Index> xcat, ycat;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        xcat.emplace(x[i], 0);
        ycat.emplace(y[i], 0);
    }
    Eigen::Index k = 0;
    for (auto& [v, idx] : xcat) idx = k++;
    k = 0;
    for (auto& [v, idx] : ycat) idx = k++;
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(xcat.size()),
                                                   static_cast<Eigen::Index>(ycat.size()));
    for (Eigen::Index i = 0; i < x.size(); ++i) counts(xcat[x[i]], ycat[y[i]]) += 1.0;
    return polychoric_from_table(counts);
}

CorrelationMatrix polychoric_matrix(const Dataset& d) {
    if (d.rows() < 3) throw DataError("correlation needs at least 3 rows");
    for (const auto& v : d.schema)
        if (v.kind == VariableKind::continuous)
            throw DataError("polychoric correlation needs binary/ordinal columns; '" + v.name + "' is continuous");
    CorrelationMatrix c =
        pairwise_matrix(d, CorrelationMethod::polychoric, [&](Eigen::Index i, Eigen::Index j, auto& warnings) {
            auto est = polychoric_pair(d.values.col(i), d.values.col(j));
            for (auto& w : est.warnings) warnings.push_back(std::move(w));
            return est.rho;
        });
    for (Eigen::Index j = 0; j < d.values.cols(); ++j) {
        const auto& s = d.schema[static_cast<std::size_t>(j)];
        std::set<double> distinct(d.values.col(j).begin(), d.values.col(j).end());
        if (static_cast<int>(distinct.size()) < s.levels)
            c.warnings.push_back(s.name + ": " + std::to_string(s.levels - static_cast<int>(distinct.size())) +
                                 " declared categories have zero count and were collapsed");
    }
    return c;
}

CorrelationMatrix correlation_matrix(const Dataset& d, CorrelationMethod method) {
    switch (method) {
        case CorrelationMethod::pearson: return pearson_matrix(d);
        case CorrelationMethod::spearman: return spearman_matrix(d);
        case CorrelationMethod::polychoric: return polychoric_matrix(d);
    }
    return pearson_matrix(d);
}

std::string correlation_to_csv(const CorrelationMatrix& c) {
    std::ostringstream out;
    out << "variable";
    for (const auto& n : c.names) out << ',' << n;
    out << '\n';
    for (std::size_t i = 0; i < c.size(); ++i) {
        out << c.names[i];
        for (std::size_t j = 0; j < c.size(); ++j)
            out << ',' << detail::format_double(c.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        out << '\n';
    }
    return out.str();
}

std::string correlation_to_json(const CorrelationMatrix& c) {
    json doc;
    doc["method"] = to_string(c.method);
    doc["n"] = c.n;
    doc["names"] = c.names;
    json rows = json::array();
    for (std::size_t i = 0; i < c.size(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < c.size(); ++j) row.push_back(c.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        rows.push_back(std::move(row));
    }
    doc["values"] = std::move(rows);
    doc["warnings"] = c.warnings;
    return doc.dump(2);
}

}  // namespace causalsem
