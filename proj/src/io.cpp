#include "oaforge/io.hpp"

#include "oaforge/error.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace oaforge {

void write_design_csv(const std::string& path, const Design& design, const DesignFileMeta& meta) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write design file: " + path);
    }
    if (!meta.empty()) {
        out << "#";
        for (const auto& [key, value] : meta) {
            out << " " << key << "=" << value;
        }
        out << "\n";
    }
    for (const Permutation& x : design.runs()) {
        for (int r = 0; r < x.size(); ++r) {
            out << (r ? "," : "") << x.component_at(r);
        }
        out << "\n";
    }
}

DesignFile read_design_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError(0, "cannot open design file: " + path);
    }
    DesignFileMeta meta;
    std::vector<Permutation> runs;
    std::string line;
    std::size_t lineno = 0;
    int m = -1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        if (line[0] == '#') {
            std::stringstream ss(line.substr(1));
            std::string token;
            while (ss >> token) {
                const auto eq = token.find('=');
                if (eq != std::string::npos) {
                    meta[token.substr(0, eq)] = token.substr(eq + 1);
                }
            }
            continue;
        }
        std::vector<int> entries;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                entries.push_back(std::stoi(cell));
            } catch (const std::exception&) {
                throw ParseError(lineno, "invalid component label '" + cell + "'");
            }
        }
        if (m >= 0 && static_cast<int>(entries.size()) != m) {
            throw ParseError(lineno, "run has " + std::to_string(entries.size()) +
                                         " labels, expected " + std::to_string(m));
        }
        try {
            runs.emplace_back(std::move(entries));
        } catch (const std::invalid_argument& e) {
            throw ParseError(lineno, e.what());
        }
        m = runs.back().size();
    }
    if (runs.size() < 2) {
        throw ParseError(lineno, "design file must hold at least 2 runs");
    }
    return DesignFile{Design(std::move(runs)), std::move(meta)};
}

namespace {

void put_rational(nlohmann::ordered_json& j, const std::string& key, const Rat& value) {
    j[key] = rat_to_string(value);
    j[key + "_decimal"] = rat_to_double(value);
}

} // namespace

nlohmann::ordered_json metrics_to_json(const MetricsReport& report) {
    nlohmann::ordered_json j;
    j["m"] = report.m;
    j["n"] = report.n;
    j["method"] = report.method.empty() ? nlohmann::ordered_json(nullptr)
                                        : nlohmann::ordered_json(report.method);
    if (report.seed) {
        j["seed"] = *report.seed;
    } else {
        j["seed"] = nullptr;
    }
    j["lambda"] = report.lambda;
    j["k_min"] = report.summary.k_min;
    put_rational(j, "k_ave", report.summary.k_ave);
    put_rational(j, "k_m2", report.summary.k_m2);
    put_rational(j, "c1", report.summary.c1);
    put_rational(j, "c2", report.summary.c2);
    put_rational(j, "tr_m2", report.summary.tr_m2);
    if (report.summary.phi) {
        j["phi"] = *report.summary.phi;
    } else {
        j["phi"] = nullptr;
    }
    if (report.summary.bounds) {
        nlohmann::ordered_json b;
        b["B1"] = report.summary.bounds->b1;
        put_rational(b, "L2", report.summary.bounds->l2);
        put_rational(b, "U2", report.summary.bounds->u2);
        put_rational(b, "kave_bench", report.summary.bounds->kave_bench);
        j["bounds"] = b;
    } else {
        j["bounds"] = nullptr;
    }
    j["foldover"] = report.foldover;
    j["warnings"] = report.warnings;
    if (report.elapsed_seconds) {
        j["elapsed_seconds"] = *report.elapsed_seconds;
    } else {
        j["elapsed_seconds"] = nullptr;
    }
    if (report.update_count) {
        j["update_count"] = *report.update_count;
    } else {
        j["update_count"] = nullptr;
    }
    return j;
}

void write_metrics_json(const std::string& path, const MetricsReport& report) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write metrics file: " + path);
    }
    out << metrics_to_json(report).dump(2) << "\n";
}

} // namespace oaforge
