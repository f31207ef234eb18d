#pragma once

#include "oaforge/criteria.hpp"
#include "oaforge/perm.hpp"
#include "oaforge/rational.hpp"

#include "json.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace oaforge {

/// Key=value metadata carried on '#' comment lines of a design file.
using DesignFileMeta = std::map<std::string, std::string>;

struct DesignFile {
    Design design;
    DesignFileMeta meta;
};

/// One run per line, m comma-separated component labels; '#' lines carry
/// metadata and are ignored by the parser apart from key=value harvesting.
void write_design_csv(const std::string& path, const Design& design, const DesignFileMeta& meta);
DesignFile read_design_csv(const std::string& path);

/// Structured report of a design evaluation. Rational fields serialize as
/// exact "p/q" strings plus a parallel decimal rendering.
struct MetricsReport {
    int m = 0;
    long long n = 0;
    std::string method;
    std::optional<std::uint64_t> seed;
    double lambda = 0.5;
    CriteriaSummary summary;
    bool foldover = false;
    std::vector<std::string> warnings;
    std::optional<double> elapsed_seconds;
    std::optional<long long> update_count;
};

nlohmann::ordered_json metrics_to_json(const MetricsReport& report);
void write_metrics_json(const std::string& path, const MetricsReport& report);

} // namespace oaforge
