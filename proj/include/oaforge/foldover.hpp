#pragma once

#include "oaforge/criteria.hpp"
#include "oaforge/perm.hpp"
#include "oaforge/rational.hpp"

#include <vector>

namespace oaforge {

/// Representative half H of a foldover design D = H u H~. Valid iff H has
/// no duplicate run and no pair of mutual reverses, so that the expansion
/// has no repeated run.
class HalfDesign {
public:
    /// Throws naming the offending pair when the half is invalid.
    explicit HalfDesign(std::vector<Permutation> reps);

    int m() const { return reps_.front().size(); }
    int h() const { return static_cast<int>(reps_.size()); }
    const std::vector<Permutation>& reps() const { return reps_; }

private:
    std::vector<Permutation> reps_;
};

/// Within-half Kendall distances. Off-diagonal entries lie in [1, q-1];
/// the values 0 and q are excluded by half-design validity. All cross
/// distances of the expansion derive from this matrix and are never stored.
class HalfDistanceMatrix {
public:
    explicit HalfDistanceMatrix(const HalfDesign& half);
    /// Explicit construction for tests; validates shape and entry range.
    HalfDistanceMatrix(int m, int h, std::vector<int> entries_row_major);

    int h() const { return h_; }
    int m() const { return m_; }
    long long q() const { return pair_count(m_); }
    int at(int i, int j) const { return entries_[static_cast<std::size_t>(i) * h_ + j]; }

private:
    void validate() const;

    int m_ = 0;
    int h_ = 0;
    std::vector<int> entries_;
};

/// The n = 2h run design with rows ordered H then H~ (reverse of row i in
/// slot h + i).
Design expand(const HalfDesign& half);

/// Distance histogram of the expanded design, derived without forming it:
/// each within-half distance u appears twice, each cross distance q-u
/// twice, and each row contributes one self-foldover pair at q.
DistanceHistogram full_histogram_from_half(const HalfDistanceMatrix& hdm);

struct FoldoverMetrics {
    long long k_min = 0;
    Rat k_ave; // fixed at nm(m-1)/(4(n-1)) over the foldover class
    Rat k_m2;
};

/// (k_min, k_ave, k_m2) of the expansion, from the half-distance matrix:
///   k_min = min_{i<j} min{u_ij, q-u_ij}
///   k_m2  = {h q^2 + 2 sum_{i<j} [u_ij^2 + (q-u_ij)^2]} / {h(2h-1)}.
FoldoverMetrics foldover_metrics(const HalfDistanceMatrix& hdm);

/// True iff the design is a valid foldover design up to row order: all runs
/// distinct and closed under reversal.
bool is_foldover_design(const Design& d);

} // namespace oaforge
