#pragma once

#include "oaforge/gp.hpp"
#include "oaforge/perm.hpp"
#include "oaforge/tsp.hpp"

#include <cstdint>
#include <vector>

namespace oaforge {

enum class BoInitMode { FsaKd, Srs };

struct BoConfig {
    int n_init = 20;
    int n_seq = 60;
    BoInitMode init_mode = BoInitMode::FsaKd;
    int restarts = 10; // acquisition local-search restarts
    double lambda = 0.5;
    std::uint64_t seed = 0;
};

struct BoResult {
    std::vector<Permutation> evaluated; // in evaluation order
    std::vector<double> values;
    std::vector<double> best_so_far; // length n_init + n_seq, nonincreasing
};

/// Bayesian optimization of a closed-tour objective over permutations:
/// Mallows-kernel GP surrogate, expected improvement, and best-improvement
/// local search over the all-pairs swap neighborhood from random restarts.
/// Already-evaluated permutations are skipped by the acquisition search.
BoResult run_bo(const TspInstance& instance, const BoConfig& cfg);

} // namespace oaforge
