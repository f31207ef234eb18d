#pragma once

#include "oaforge/perm.hpp"
#include "oaforge/rational.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace oaforge {

/// An n-run order-of-addition design: n permutations over the same m.
class Design {
public:
    /// Validates shared m and n >= 2. With `require_distinct`, duplicate
    /// runs are rejected.
    explicit Design(std::vector<Permutation> runs, bool require_distinct = false);

    int m() const { return runs_.front().size(); }
    long long n() const { return static_cast<long long>(runs_.size()); }
    long long q() const { return pair_count(m()); }
    const std::vector<Permutation>& runs() const { return runs_; }
    const Permutation& run(long long i) const { return runs_[i]; }
    bool has_duplicate_runs() const;

private:
    std::vector<Permutation> runs_;
};

/// counts[r] = number of unordered run pairs at Kendall distance r.
struct DistanceHistogram {
    std::vector<long long> counts; // length q + 1
    long long total_pairs = 0;     // n(n-1)/2
    int m = 0;

    long long q() const { return static_cast<long long>(counts.size()) - 1; }
};

DistanceHistogram distance_histogram(const Design& d);

/// Smallest distance with a nonzero pair count. Throws on an empty histogram.
long long k_min(const DistanceHistogram& h);
/// First moment of the pair-distance multiset, exact.
Rat k_ave(const DistanceHistogram& h);
/// Second moment of the pair-distance multiset, exact.
Rat k_m2(const DistanceHistogram& h);

/// tr(M^2) for the pairwise-ordering model matrix X = [1 | Z], M = X^T X,
/// evaluated exactly through the Gram identity
///   tr(M^2) = sum_{i,j} (1 + q - 2 k(x_i,x_j))^2.
Rat ms_criterion_direct(const Design& d);

/// tr(M^2) from the distance moments:
///   4n(n-1) k_m2 - {2m(m-1)+4} n(n-1) k_ave + n^2 (m^2-m+2)^2 / 4.
Rat ms_criterion_identity(const DistanceHistogram& h, long long n, int m);

/// First two centralized wordlength quantities from the distance moments:
///   C1 = q - 2(n-1)/n k_ave
///   C2 = q(q-1)/2 - 2q(n-1)/n k_ave + 2(n-1)/n k_m2 - m(m-1)(m-2)/18.
std::pair<Rat, Rat> c1_c2(const DistanceHistogram& h, long long n, int m);

/// (C1, C2) computed directly from J-characteristics against the full
/// design, by exhaustive enumeration of S_m. Oracle for c1_c2; capped at
/// m <= 7 (5040 runs).
std::pair<Rat, Rat> c1_c2_direct(const Design& d);

/// Normalization benchmarks for the foldover class.
struct DesignBounds {
    long long b1 = 0; // upper bound on k_min: floor(m(m-1)/4)
    Rat l2;           // lower benchmark for k_m2
    Rat u2;           // upper benchmark for k_m2
    Rat kave_bench;   // fixed foldover average: nm(m-1)/(4(n-1))
};

/// Foldover-class bounds; requires even n >= 4 and m >= 3.
DesignBounds bounds(long long n, int m);

/// Same formulas without the parity gate. Used where the foldover
/// benchmarks serve as fixed normalizers for an unrestricted search.
DesignBounds bounds_normalizers(long long n, int m);

/// Shared floating-point evaluation of the composite objective. All callers
/// (criteria summaries and both annealers) go through this one function so
/// that cached and recomputed values agree bitwise.
/// When b1 == 1 (m = 3) the minimum-distance term is degenerate and the
/// objective reduces to the second term alone.
double phi_value(double lambda, long long kmin, long long b1, double km2, double u2, double l2);

/// Composite objective Phi_lambda = lambda (k_min-1)/(B1-1)
///                                + (1-lambda) (U2-k_m2)/(U2-L2).
/// Raw linear value; may leave [0,1] for non-foldover designs. Requires
/// even n and 0 <= lambda <= 1.
double phi_lambda(long long kmin, const Rat& km2, long long n, int m, double lambda);

/// Reporting variant: the second term is clamped to [0,1] so that designs
/// outside the foldover benchmarks render on the same scale.
double phi_lambda_clamped(long long kmin, const Rat& km2, long long n, int m, double lambda);

struct CriteriaSummary {
    long long k_min = 0;
    Rat k_ave;
    Rat k_m2;
    Rat c1;
    Rat c2;
    Rat tr_m2;
    std::optional<DesignBounds> bounds; // present when n even >= 4, m >= 3
    std::optional<double> phi;          // clamped reporting value
    std::optional<double> phi_raw;
};

/// Full criteria evaluation of a design at the given weight.
CriteriaSummary evaluate_design(const Design& d, double lambda);

} // namespace oaforge
