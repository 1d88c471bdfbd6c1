// Writes the bundled synthetic travel survey: a raw CSV with the usual survey
// warts (under-age codes, -9 refusals, NA cells, text labels, an id column),
// the matching schema/cleaning config, the knowledge config and the SCM.

#include "causalsem/simulate.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

using namespace causalsem;

namespace {

void write(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + p.string());
}

std::string code(double v) { return std::to_string(static_cast<int>(std::lround(v))); }

}  // namespace

int main(int argc, char** argv) {
    const std::filesystem::path dir = argc > 1 ? argv[1] : "data";
    const std::size_t n = argc > 2 ? std::stoul(argv[2]) : 2000;
    const std::uint64_t seed = argc > 3 ? std::stoull(argv[3]) : 20240601;
    std::filesystem::create_directories(dir);

    const TravelExample ex = travel_example(seed, n);
    const Dataset& d = ex.data;
    std::mt19937_64 rng(seed + 1);
    std::uniform_real_distribution<double> u(0.0, 1.0);

    std::ostringstream csv;
    csv << "household_id";
    for (const auto& s : d.schema) csv << "," << s.name;
    csv << "\n";
    for (std::size_t i = 0; i < d.rows(); ++i) {
        csv << 100000 + i;
        const bool minor = u(rng) < 0.02;
        for (std::size_t j = 0; j < d.cols(); ++j) {
            const auto& s = d.schema[j];
            const double v = d.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            csv << ",";
            if (s.name == "age") {
                csv << (minor ? "0" : code(v + 1));
            } else if ((s.name == "education" || s.name == "hh_income") && u(rng) < 0.015) {
                csv << "-9";
            } else if (s.name == "trip_distance" && u(rng) < 0.01) {
                csv << "NA";
            } else if (!s.level_labels.empty()) {
                csv << s.level_labels[static_cast<std::size_t>(std::lround(v))];
            } else {
                csv << code(v);
            }
        }
        csv << "\n";
    }
    write(dir / "travel_sample.csv", csv.str());

    std::ostringstream cfg;
    cfg << "{\n  \"variables\": [\n";
    for (std::size_t j = 0; j < d.cols(); ++j) {
        const auto& s = d.schema[j];
        cfg << "    {\"name\": \"" << s.name << "\", \"kind\": \"" << to_string(s.kind) << "\", \"levels\": " << s.levels
            << ", \"role\": \"" << s.role << "\"";
        if (!s.level_labels.empty()) {
            cfg << ", \"labels\": [";
            for (std::size_t k = 0; k < s.level_labels.size(); ++k) cfg << (k ? ", " : "") << "\"" << s.level_labels[k] << "\"";
            cfg << "]";
        }
        cfg << "}" << (j + 1 < d.cols() ? "," : "") << "\n";
    }
    cfg << "  ],\n"
           "  \"cleaning\": [\n"
           "    {\"column\": \"age\", \"min\": 1},\n"
           "    {\"column\": \"education\", \"exclude\": [-9]},\n"
           "    {\"column\": \"hh_income\", \"exclude\": [-9]}\n"
           "  ],\n"
           "  \"missing_tokens\": [\"NA\", \"\"]\n"
           "}\n";
    write(dir / "travel_config.json", cfg.str());

    std::ostringstream kn;
    kn << "{\n"
          "  \"role_order\": [\"sociodemographic\", \"trip_attribute\", \"trip_characteristic\", \"target\"],\n"
          "  \"sink_roles\": [\"target\"],\n"
          "  \"exogenous\": [";
    for (std::size_t k = 0; k < ex.exogenous.size(); ++k) kn << (k ? ", " : "") << "\"" << ex.exogenous[k] << "\"";
    kn << "],\n  \"forbidden\": [";
    for (std::size_t k = 0; k < ex.forbidden.size(); ++k)
        kn << (k ? ", " : "") << "[\"" << ex.forbidden[k].first << "\", \"" << ex.forbidden[k].second << "\"]";
    kn << "]\n}\n";
    write(dir / "travel_knowledge.json", kn.str());

    write(dir / "travel_scm.json", scm_to_json(ex.scm) + "\n");
    std::cout << "wrote " << n << " rows to " << (dir / "travel_sample.csv").string() << "\n";
    return 0;
}
