#include "causalsem/data.hpp"
#include "causalsem/discovery.hpp"
#include "causalsem/graph.hpp"
#include "causalsem/pipeline.hpp"
#include "causalsem/sem.hpp"
#include "causalsem/simulate.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace causalsem;

namespace {

struct RunConfig {
    std::string data;
    std::string schema;
    std::string knowledge;
    std::string graph;
    std::string spec;
    std::vector<std::string> algorithms;
    double alpha = 0.05;
    std::optional<std::size_t> max_cond_size;
    double penalty = 1.0;
    double prune = 0.01;
    double threshold = 0.25;
    std::string corr_discovery = "pearson";
    std::string corr_sem = "polychoric";
    std::string out = "out";
    std::uint64_t seed = 0;
    std::size_t n = 1000;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

/// Command-line values win over the config file, which wins over defaults.
class Options {
public:
    void add_common(CLI::App* cmd) {
        cmd->add_option("--config", config_path_, "JSON run config; flags override its fields");
        cmd->add_option("--data", cli_.data, "CSV data file");
        cmd->add_option("--schema", cli_.schema, "schema and cleaning config JSON");
        cmd->add_option("--knowledge", cli_.knowledge, "background knowledge JSON");
        cmd->add_option("--algo", cli_.algorithms, "algorithm (pc, fci, fges, lingam); repeatable");
        cmd->add_option("--alpha", cli_.alpha, "CI test significance level");
        cmd->add_option("--max-cond", max_cond_, "cap on conditioning-set size");
        cmd->add_option("--penalty", cli_.penalty, "BIC penalty discount");
        cmd->add_option("--prune", cli_.prune, "LiNGAM coefficient pruning threshold");
        cmd->add_option("--threshold", cli_.threshold, "|path coefficient| kept in simplified graphs");
        cmd->add_option("--corr-discovery", cli_.corr_discovery, "pearson, spearman or polychoric");
        cmd->add_option("--corr-sem", cli_.corr_sem, "pearson, spearman or polychoric");
        cmd->add_option("--out", cli_.out, "output directory or file");
        cmd->add_option("--seed", cli_.seed, "random seed");
    }

    void add_graph(CLI::App* cmd) { cmd->add_option("--graph", cli_.graph, "graph JSON"); }
    void add_simulate(CLI::App* cmd) {
        cmd->add_option("--spec", cli_.spec, "SCM spec JSON");
        cmd->add_option("--n", cli_.n, "rows to sample");
    }

    RunConfig resolve(const CLI::App* cmd) const {
        RunConfig cfg;
        if (!config_path_.empty()) {
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(read_file(config_path_));
            } catch (const nlohmann::json::exception& e) {
                throw std::runtime_error("invalid config JSON: " + std::string(e.what()));
            }
            const fs::path base = fs::path(config_path_).parent_path();
            auto path_field = [&](const char* key, std::string& dst) {
                if (j.contains(key)) {
                    fs::path p = j.at(key).get<std::string>();
                    dst = (p.is_relative() ? base / p : p).string();
                }
            };
            path_field("data", cfg.data);
            path_field("schema", cfg.schema);
            path_field("knowledge", cfg.knowledge);
            path_field("graph", cfg.graph);
            path_field("spec", cfg.spec);
            if (j.contains("algorithms")) cfg.algorithms = j.at("algorithms").get<std::vector<std::string>>();
            cfg.alpha = j.value("alpha", cfg.alpha);
            if (j.contains("max_cond_size") && !j.at("max_cond_size").is_null())
                cfg.max_cond_size = j.at("max_cond_size").get<std::size_t>();
            cfg.penalty = j.value("penalty_discount", cfg.penalty);
            cfg.prune = j.value("prune_threshold", cfg.prune);
            cfg.threshold = j.value("threshold", cfg.threshold);
            cfg.corr_discovery = j.value("corr_discovery", cfg.corr_discovery);
            cfg.corr_sem = j.value("corr_sem", cfg.corr_sem);
            cfg.out = j.value("out", cfg.out);
            cfg.seed = j.value("seed", cfg.seed);
            cfg.n = j.value("n", cfg.n);
        }
        auto given = [&](const char* flag) {
            auto* opt = cmd->get_option_no_throw(flag);
            return opt && opt->count() > 0;
        };
        if (given("--data")) cfg.data = cli_.data;
        if (given("--schema")) cfg.schema = cli_.schema;
        if (given("--knowledge")) cfg.knowledge = cli_.knowledge;
        if (given("--graph")) cfg.graph = cli_.graph;
        if (given("--spec")) cfg.spec = cli_.spec;
        if (given("--algo")) cfg.algorithms = cli_.algorithms;
        if (given("--alpha")) cfg.alpha = cli_.alpha;
        if (given("--max-cond")) cfg.max_cond_size = max_cond_;
        if (given("--penalty")) cfg.penalty = cli_.penalty;
        if (given("--prune")) cfg.prune = cli_.prune;
        if (given("--threshold")) cfg.threshold = cli_.threshold;
        if (given("--corr-discovery")) cfg.corr_discovery = cli_.corr_discovery;
        if (given("--corr-sem")) cfg.corr_sem = cli_.corr_sem;
        if (given("--out")) cfg.out = cli_.out;
        if (given("--seed")) cfg.seed = cli_.seed;
        if (given("--n")) cfg.n = cli_.n;
        return cfg;
    }

private:
    std::string config_path_;
    std::size_t max_cond_ = 0;
    RunConfig cli_;
};

std::string run_config_json(const RunConfig& c) {
    nlohmann::ordered_json j;
    j["data"] = c.data;
    j["schema"] = c.schema;
    j["knowledge"] = c.knowledge;
    j["algorithms"] = c.algorithms;
    j["alpha"] = c.alpha;
    if (c.max_cond_size) j["max_cond_size"] = *c.max_cond_size;
    else j["max_cond_size"] = nullptr;
    j["penalty_discount"] = c.penalty;
    j["prune_threshold"] = c.prune;
    j["threshold"] = c.threshold;
    j["corr_discovery"] = c.corr_discovery;
    j["corr_sem"] = c.corr_sem;
    j["seed"] = c.seed;
    return j.dump(2) + "\n";
}

void require(const std::string& value, const char* flag) {
    if (value.empty()) throw std::runtime_error(std::string("missing required ") + flag);
}

Dataset load_dataset(const RunConfig& c) {
    require(c.data, "--data");
    require(c.schema, "--schema");
    const DataConfig dc = load_data_config(c.schema);
    Dataset d = load_csv(c.data, dc);
    d = clean(d, dc.cleaning);
    return scale_unit(d);
}

BackgroundKnowledge load_bk(const RunConfig& c, const Dataset& d) {
    if (c.knowledge.empty()) return {};
    return load_knowledge(c.knowledge, d.schema);
}

DiscoveryConfig discovery_config(const RunConfig& c) {
    DiscoveryConfig cfg;
    cfg.alpha = c.alpha;
    cfg.max_cond_size = c.max_cond_size;
    cfg.penalty_discount = c.penalty;
    cfg.prune_threshold = c.prune;
    cfg.seed = c.seed;
    cfg.validate();
    return cfg;
}

std::vector<Algorithm> algorithms(const RunConfig& c) {
    if (c.algorithms.empty()) throw std::runtime_error("no algorithms requested (use --algo pc|fci|fges|lingam)");
    std::vector<Algorithm> out;
    for (const auto& a : c.algorithms) out.push_back(algorithm_from_string(a));
    return out;
}

int cmd_discover(const RunConfig& c) {
    const auto algos = algorithms(c);
    const Dataset d = load_dataset(c);
    const auto bk = load_bk(c, d);
    const auto cfg = discovery_config(c);
    const CorrelationMatrix corr = correlation_matrix(d, correlation_method_from_string(c.corr_discovery));
    const fs::path out = c.out;
    for (auto a : algos) {
        DiscoveryResult res;
        switch (a) {
            case Algorithm::pc: res = pc(corr, cfg, bk); break;
            case Algorithm::fci: res = fci(corr, cfg, bk); break;
            case Algorithm::fges: res = fges(corr, cfg, bk); break;
            case Algorithm::lingam: res = direct_lingam(d, cfg, bk); break;
        }
        const std::string name = to_string(a);
        write_file(out / (name + ".graph.json"), graph_to_json(res.graph) + "\n");
        write_file(out / (name + ".dot"), graph_to_dot(res.graph, name));
        write_file(out / (name + ".run.json"), run_record_to_json(res.record, true) + "\n");
        std::cout << name << ": " << res.graph.edge_count() << " edges -> " << (out / (name + ".graph.json")).string()
                  << "\n";
    }
    write_file(out / "run_config.json", run_config_json(c));
    return 0;
}

int cmd_fit(const RunConfig& c) {
    require(c.graph, "--graph");
    const Dataset d = load_dataset(c);
    const MixedGraph g = graph_from_json(read_file(c.graph));
    if (g.nodes() != d.names()) throw std::runtime_error("graph nodes do not match the data columns");
    const CorrelationMatrix corr = correlation_matrix(d, correlation_method_from_string(c.corr_sem));
    const SemModel m = model_from_graph(g);
    const FittedSem f = fit_uls(m, corr, d.rows());
    const FitReport r = fit_indices(f, m, corr, d.rows());
    const MixedGraph paths = path_coefficients(f, m);
    const fs::path out = c.out;
    nlohmann::ordered_json j;
    j["model_digest"] = m.digest();
    j["converged"] = f.converged;
    j["iterations"] = f.iterations;
    j["fit"] = nlohmann::ordered_json::parse(fit_report_to_json(r));
    j["path_coefficients"] = nlohmann::ordered_json::parse(graph_to_json(paths));
    write_file(out / "fit.json", j.dump(2) + "\n");
    write_file(out / "paths.dot", graph_to_dot(paths, "paths"));
    const std::string table = fit_table({{"model", r}});
    write_file(out / "fit.txt", table);
    std::cout << table;
    return f.converged ? 0 : 3;
}

int cmd_pipeline(const RunConfig& c) {
    const auto algos = algorithms(c);
    const Dataset d = load_dataset(c);
    const auto bk = load_bk(c, d);
    PipelineOptions opt;
    opt.corr_discovery = correlation_method_from_string(c.corr_discovery);
    opt.corr_sem = correlation_method_from_string(c.corr_sem);
    opt.threshold = c.threshold;
    const PipelineReport r = run_pipeline(d, bk, discovery_config(c), algos, opt);
    const fs::path out = c.out;
    write_file(out / "report.json", pipeline_report_to_json(r));
    nlohmann::ordered_json timing;
    for (const auto& e : r.entries) {
        const std::string name = to_string(e.algorithm);
        if (e.error.empty()) write_file(out / (name + ".dot"), graph_to_dot(e.path_graph, name));
        timing[name] = e.record.wall_time_ms;
    }
    write_file(out / "timing.json", timing.dump(2) + "\n");
    if (r.selected) write_file(out / "winner.dot", graph_to_dot(r.simplified_winner, "winner"));
    const std::string summary = pipeline_summary(r);
    write_file(out / "table.txt", summary);
    write_file(out / "run_config.json", run_config_json(c));
    std::cout << summary;
    return r.selected ? 0 : 3;
}

int cmd_simulate(const RunConfig& c) {
    require(c.spec, "--spec");
    if (c.n == 0) throw std::runtime_error("--n must be at least 1");
    ScmSpec spec = load_scm(c.spec);
    spec.seed = c.seed ? c.seed : spec.seed;
    const Dataset d = sample_scm(spec, c.n);
    const fs::path out = c.out;
    write_file(out / "data.csv", dataset_to_csv(d));
    write_file(out / "schema.json", data_config_to_json(d.schema) + "\n");
    std::cout << "wrote " << c.n << " rows to " << (out / "data.csv").string() << "\n";
    return 0;
}

int cmd_export_dot(const RunConfig& c, bool threshold_given) {
    require(c.graph, "--graph");
    MixedGraph g = graph_from_json(read_file(c.graph));
    if (threshold_given) g = simplify_by_weight(g, c.threshold);
    const std::string dot = graph_to_dot(g, fs::path(c.graph).stem().string());
    if (c.out.empty() || c.out == "-") std::cout << dot;
    else write_file(c.out, dot);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Causal discovery under background knowledge with path-model comparison"};
    app.require_subcommand(1);
    Options opts;

    auto* discover = app.add_subcommand("discover", "run discovery algorithms and write graphs");
    auto* fit = app.add_subcommand("fit", "fit a path model to a graph");
    auto* pipeline = app.add_subcommand("pipeline", "discover, fit, compare and select");
    auto* simulate = app.add_subcommand("simulate", "sample a linear SCM to CSV");
    auto* export_dot = app.add_subcommand("export-dot", "convert a graph JSON to DOT");
    for (auto* cmd : {discover, fit, pipeline, simulate, export_dot}) opts.add_common(cmd);
    opts.add_graph(fit);
    opts.add_graph(export_dot);
    opts.add_simulate(simulate);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (discover->parsed()) return cmd_discover(opts.resolve(discover));
        if (fit->parsed()) return cmd_fit(opts.resolve(fit));
        if (pipeline->parsed()) return cmd_pipeline(opts.resolve(pipeline));
        if (simulate->parsed()) return cmd_simulate(opts.resolve(simulate));
        if (export_dot->parsed()) {
            auto c = opts.resolve(export_dot);
            const bool threshold_given = export_dot->get_option("--threshold")->count() > 0;
            if (export_dot->get_option("--out")->count() == 0) c.out = "-";
            return cmd_export_dot(c, threshold_given);
        }
    } catch (const std::exception& e) {
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        std::cerr << "causalsem: error: " << msg << "\n";
        return 2;
    }
    return 1;
}
