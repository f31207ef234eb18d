#pragma once

#include "oaforge/perm.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace oaforge {

/// Travel-cost matrix for a closed-tour objective over m cities. The
/// diagonal is zero and all entries are finite and nonnegative.
class TspInstance {
public:
    TspInstance(int m, std::vector<double> cost_row_major);

    /// m cities uniform on the unit square, symmetric Euclidean costs.
    static TspInstance random_euclidean(int m, std::uint64_t seed);

    /// Directional costs, independent Uniform(0.1, 1) per ordered pair.
    /// The demo default: with symmetric costs a tour and its reverse cost
    /// the same, which makes half of any foldover design's evaluations
    /// redundant.
    static TspInstance random_asymmetric(int m, std::uint64_t seed);

    /// Plain numeric matrix file: a header line holding m, then m rows of
    /// m comma-separated costs.
    static TspInstance load_csv(const std::string& path);
    void save_csv(const std::string& path) const;

    int m() const { return m_; }
    double cost(int from, int to) const { return cost_[static_cast<std::size_t>(from) * m_ + to]; }

private:
    int m_ = 0;
    std::vector<double> cost_;
};

/// Closed-tour cost: sum of consecutive legs plus the return leg.
double tsp_objective(const Permutation& x, const TspInstance& instance);

} // namespace oaforge
