#include "causalsem/data.hpp"
#include "causalsem/discovery.hpp"
#include "causalsem/graph.hpp"
#include "causalsem/pipeline.hpp"
#include "causalsem/sem.hpp"
#include "causalsem/simulate.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace causalsem;

namespace {

DataConfig config_from(const std::string& path_or_json) {
    const auto first = path_or_json.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && path_or_json[first] == '{') return parse_data_config(path_or_json);
    return load_data_config(path_or_json);
}

std::vector<Algorithm> algorithms_from(const std::vector<std::string>& names) {
    std::vector<Algorithm> out;
    for (const auto& n : names) out.push_back(algorithm_from_string(n));
    return out;
}

py::tuple edge_tuple(const MixedGraph& g, const Edge& e) {
    return py::make_tuple(g.name(e.a), g.name(e.b), to_string(e.mark_a), to_string(e.mark_b), e.weight);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Causal discovery and SEM model comparison";

    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<GraphError>(m, "GraphError", PyExc_ValueError);

    py::class_<Dataset>(m, "Dataset")
        .def_property_readonly("names", &Dataset::names)
        .def_property_readonly("values", [](const Dataset& d) { return d.values; })
        .def_property_readonly("rows", &Dataset::rows)
        .def_property_readonly("cols", &Dataset::cols)
        .def_property_readonly("kinds",
                               [](const Dataset& d) {
                                   std::vector<std::string> out;
                                   for (const auto& v : d.schema) out.push_back(to_string(v.kind));
                                   return out;
                               })
        .def_readonly("provenance", &Dataset::provenance)
        .def_readonly("constant_columns", &Dataset::constant_columns)
        .def("to_csv", &dataset_to_csv)
        .def("__repr__", [](const Dataset& d) {
            return "<Dataset rows=" + std::to_string(d.rows()) + " cols=" + std::to_string(d.cols()) + ">";
        });

    m.def(
        "load_csv",
        [](const std::string& csv_path, const std::string& config, bool do_clean, bool scale) {
            const auto cfg = config_from(config);
            auto d = load_csv(csv_path, cfg);
            if (do_clean) d = clean(d, cfg.cleaning);
            if (scale) d = scale_unit(d);
            return d;
        },
        py::arg("csv_path"), py::arg("config"), py::arg("clean") = true, py::arg("scale") = true,
        "Load a CSV with a data config given as a path or JSON text.");
    m.def(
        "dataset_from_csv_text",
        [](const std::string& text, const std::string& config_json) {
            return dataset_from_csv_text(text, parse_data_config(config_json));
        },
        py::arg("text"), py::arg("config_json"));
    m.def("scale_unit", &scale_unit);

    py::class_<CorrelationMatrix>(m, "CorrelationMatrix")
        .def_readonly("values", &CorrelationMatrix::values)
        .def_readonly("names", &CorrelationMatrix::names)
        .def_readonly("n", &CorrelationMatrix::n)
        .def_readonly("warnings", &CorrelationMatrix::warnings)
        .def_property_readonly("method", [](const CorrelationMatrix& c) { return to_string(c.method); })
        .def("to_json", &correlation_to_json);

    m.def(
        "correlation",
        [](const Dataset& d, const std::string& method) {
            return correlation_matrix(d, correlation_method_from_string(method));
        },
        py::arg("dataset"), py::arg("method") = "pearson");
    m.def("bivariate_normal_cdf", &bivariate_normal_cdf, py::arg("h"), py::arg("k"), py::arg("rho"));

    py::class_<MixedGraph>(m, "Graph")
        .def(py::init([](std::vector<std::string> nodes, const std::string& kind) {
                 return MixedGraph(std::move(nodes), graph_kind_from_string(kind));
             }),
             py::arg("nodes"), py::arg("kind") = "dag")
        .def_static("from_json", &graph_from_json)
        .def_property_readonly("nodes", &MixedGraph::nodes)
        .def_property_readonly("kind", [](const MixedGraph& g) { return to_string(g.kind()); })
        .def("add_directed",
             [](MixedGraph& g, const std::string& from, const std::string& to, std::optional<double> w) {
                 g.add_directed(from, to);
                 if (w) g.set_weight(g.index_of(from), g.index_of(to), *w);
             },
             py::arg("source"), py::arg("target"), py::arg("weight") = std::nullopt)
        .def("edges",
             [](const MixedGraph& g) {
                 py::list out;
                 for (const auto& e : g.edges()) out.append(edge_tuple(g, e));
                 return out;
             },
             "Edges as (a, b, mark_at_a, mark_at_b, weight).")
        .def("directed",
             [](const MixedGraph& g, const std::string& from, const std::string& to) {
                 return g.directed(g.index_of(from), g.index_of(to));
             })
        .def("adjacent",
             [](const MixedGraph& g, const std::string& a, const std::string& b) {
                 return g.adjacent(g.index_of(a), g.index_of(b));
             })
        .def("edge_count", &MixedGraph::edge_count)
        .def("to_json", &graph_to_json)
        .def("to_dot", &graph_to_dot, py::arg("title") = "causal_graph")
        .def("__len__", &MixedGraph::size)
        .def("__eq__", &MixedGraph::operator==);

    m.def("d_separated", [](const MixedGraph& g, const std::string& x, const std::string& y,
                            const std::vector<std::string>& z) {
        std::vector<std::size_t> zi;
        for (const auto& n : z) zi.push_back(g.index_of(n));
        return d_separated(g, g.index_of(x), g.index_of(y), zi);
    });
    m.def("cpdag_of", &cpdag_of);
    m.def("structural_hamming_distance", &structural_hamming_distance);
    m.def("simplify_by_weight", &simplify_by_weight, py::arg("graph"), py::arg("threshold"));

    py::class_<BackgroundKnowledge>(m, "Knowledge")
        .def(py::init<>())
        .def_readwrite("tiers", &BackgroundKnowledge::tiers)
        .def_readwrite("forbidden", &BackgroundKnowledge::forbidden)
        .def_readwrite("required", &BackgroundKnowledge::required)
        .def("is_forbidden", &BackgroundKnowledge::is_forbidden)
        .def("is_required", &BackgroundKnowledge::is_required)
        .def("validate", &BackgroundKnowledge::validate)
        .def("digest", &BackgroundKnowledge::digest)
        .def("to_json", &knowledge_to_json);

    m.def(
        "knowledge_from_roles", [](const Dataset& d) { return knowledge_from_roles(d.schema); }, py::arg("dataset"));
    m.def(
        "parse_knowledge", [](const std::string& text, const Dataset& d) { return parse_knowledge(text, d.schema); },
        py::arg("json_text"), py::arg("dataset"));
    m.def(
        "load_knowledge", [](const std::string& path, const Dataset& d) { return load_knowledge(path, d.schema); },
        py::arg("path"), py::arg("dataset"));
    m.def("knowledge_violations", &knowledge_violations);

    py::class_<DiscoveryConfig>(m, "DiscoveryConfig")
        .def(py::init<>())
        .def_readwrite("alpha", &DiscoveryConfig::alpha)
        .def_readwrite("max_cond_size", &DiscoveryConfig::max_cond_size)
        .def_readwrite("penalty_discount", &DiscoveryConfig::penalty_discount)
        .def_readwrite("prune_threshold", &DiscoveryConfig::prune_threshold)
        .def_readwrite("seed", &DiscoveryConfig::seed)
        .def("validate", &DiscoveryConfig::validate);

    py::class_<DiscoveryResult>(m, "DiscoveryResult")
        .def_readonly("graph", &DiscoveryResult::graph)
        .def_property_readonly("ci_tests", [](const DiscoveryResult& r) { return r.record.ci_tests; })
        .def_property_readonly("score", [](const DiscoveryResult& r) { return r.record.score; })
        .def_property_readonly("score_trace", [](const DiscoveryResult& r) { return r.record.score_trace; })
        .def_property_readonly("causal_order", [](const DiscoveryResult& r) { return r.record.causal_order; })
        .def("record_json", [](const DiscoveryResult& r, bool timing) { return run_record_to_json(r.record, timing); },
             py::arg("include_timing") = false);

    const auto empty_bk = BackgroundKnowledge{};
    m.def(
        "pc", [](const CorrelationMatrix& c, const DiscoveryConfig& cfg, const BackgroundKnowledge& bk) {
            return pc(c, cfg, bk);
        },
        py::arg("corr"), py::arg("config") = DiscoveryConfig{}, py::arg("knowledge") = empty_bk);
    m.def(
        "fci", [](const CorrelationMatrix& c, const DiscoveryConfig& cfg, const BackgroundKnowledge& bk) {
            return fci(c, cfg, bk);
        },
        py::arg("corr"), py::arg("config") = DiscoveryConfig{}, py::arg("knowledge") = empty_bk);
    m.def("fges", &fges, py::arg("corr"), py::arg("config") = DiscoveryConfig{}, py::arg("knowledge") = empty_bk);
    m.def("direct_lingam", &direct_lingam, py::arg("dataset"), py::arg("config") = DiscoveryConfig{},
          py::arg("knowledge") = empty_bk);

    py::class_<FittedSem>(m, "FittedSem")
        .def_readonly("theta", &FittedSem::theta)
        .def_readonly("B", &FittedSem::B)
        .def_readonly("Psi", &FittedSem::Psi)
        .def_readonly("Sigma", &FittedSem::Sigma)
        .def_readonly("f_uls", &FittedSem::f_uls)
        .def_readonly("converged", &FittedSem::converged)
        .def_readonly("iterations", &FittedSem::iterations);

    py::class_<FitReport>(m, "FitReport")
        .def_readonly("chi_square", &FitReport::chi_square)
        .def_readonly("dof", &FitReport::dof)
        .def_readonly("p_value", &FitReport::p_value)
        .def_readonly("cfi", &FitReport::cfi)
        .def_readonly("gfi", &FitReport::gfi)
        .def_readonly("agfi", &FitReport::agfi)
        .def_readonly("nfi", &FitReport::nfi)
        .def_readonly("tli", &FitReport::tli)
        .def_readonly("rmsea", &FitReport::rmsea)
        .def_readonly("aic", &FitReport::aic)
        .def_readonly("bic", &FitReport::bic)
        .def_readonly("n", &FitReport::n)
        .def_readonly("warnings", &FitReport::warnings)
        .def("passes", [](const FitReport& r) { return r.passes(); })
        .def("to_json", [](const FitReport& r) { return fit_report_to_json(r); });

    m.def(
        "fit_sem",
        [](const MixedGraph& g, const CorrelationMatrix& c, std::size_t n) {
            const auto model = model_from_graph(g);
            auto fitted = fit_uls(model, c, n);
            auto report = fit_indices(fitted, model, c, n);
            auto paths = path_coefficients(fitted, model);
            return py::make_tuple(std::move(fitted), std::move(report), std::move(paths));
        },
        py::arg("graph"), py::arg("corr"), py::arg("n") = 0,
        "ULS fit of the graph; returns (fitted, report, path_graph).");
    m.def(
        "rank_models", [](const std::vector<FitReport>& r) { return rank_models(r); }, py::arg("reports"));

    py::class_<PipelineReport>(m, "PipelineReport")
        .def_readonly("ranking", &PipelineReport::ranking)
        .def_readonly("selected", &PipelineReport::selected)
        .def_readonly("rationale", &PipelineReport::rationale)
        .def_readonly("simplified_winner", &PipelineReport::simplified_winner)
        .def_property_readonly("algorithms",
                               [](const PipelineReport& r) {
                                   std::vector<std::string> out;
                                   for (const auto& e : r.entries) out.push_back(to_string(e.algorithm));
                                   return out;
                               })
        .def_property_readonly("reports",
                               [](const PipelineReport& r) {
                                   std::vector<FitReport> out;
                                   for (const auto& e : r.entries) out.push_back(e.report);
                                   return out;
                               })
        .def_property_readonly("graphs",
                               [](const PipelineReport& r) {
                                   std::vector<MixedGraph> out;
                                   for (const auto& e : r.entries) out.push_back(e.graph);
                                   return out;
                               })
        .def("to_json", &pipeline_report_to_json)
        .def("summary", &pipeline_summary);

    m.def(
        "run_pipeline",
        [](const Dataset& d, const BackgroundKnowledge& bk, const std::vector<std::string>& algos,
           const DiscoveryConfig& cfg, double threshold, const std::string& corr_discovery,
           const std::string& corr_sem) {
            PipelineOptions opt;
            opt.threshold = threshold;
            opt.corr_discovery = correlation_method_from_string(corr_discovery);
            opt.corr_sem = correlation_method_from_string(corr_sem);
            return run_pipeline(d, bk, cfg, algorithms_from(algos), opt);
        },
        py::arg("dataset"), py::arg("knowledge"),
        py::arg("algorithms") = std::vector<std::string>{"pc", "fci", "fges", "lingam"},
        py::arg("config") = DiscoveryConfig{}, py::arg("threshold") = 0.25, py::arg("corr_discovery") = "pearson",
        py::arg("corr_sem") = "polychoric");

    py::class_<ScmSpec>(m, "Scm")
        .def_static("from_json", &scm_from_json)
        .def_readonly("dag", &ScmSpec::dag)
        .def_readonly("seed", &ScmSpec::seed)
        .def("coefficients", &ScmSpec::coefficients)
        .def("implied_covariance", [](const ScmSpec& s) { return implied_covariance(s); })
        .def("to_json", &scm_to_json)
        .def("sample", &sample_scm, py::arg("n"));

    m.def(
        "random_scm",
        [](std::size_t p, double edge_prob, const std::string& noise, std::uint64_t seed) {
            return random_scm(random_dag(p, edge_prob, seed), noise_family_from_string(noise), seed);
        },
        py::arg("p"), py::arg("edge_prob"), py::arg("noise") = "gaussian", py::arg("seed") = 0);
    m.def("random_dag", &random_dag, py::arg("p"), py::arg("edge_prob"), py::arg("seed") = 0);
    m.def(
        "travel_example", [](std::uint64_t seed, std::size_t n) { return travel_example(seed, n).data; },
        py::arg("seed") = 0, py::arg("n") = 2000);
}
