#pragma once

#include "oaforge/criteria.hpp"
#include "oaforge/foldover.hpp"
#include "oaforge/perm.hpp"

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <utility>
#include <vector>

namespace oaforge {

/// Annealing schedule and problem size. The defaults are the reference
/// parameter set this implementation is tuned around; override per run.
struct AnnealConfig {
    int m = 0;
    long long n = 0;
    double t0 = 1.0;
    double t_min = 1e-8;
    double alpha = 0.997;
    long long n_max = 6000;
    double lambda = 0.5;
    std::uint64_t seed = 0;
};

enum class MoveKind { GlobalReplace, LocalSwap };

struct Move {
    MoveKind kind = MoveKind::GlobalReplace;
    int row = 0;
    int s = -1; // swap positions, s < t (LocalSwap only)
    int t = -1;
    Permutation proposal; // the candidate row
};

/// How candidate objectives are evaluated.
///  - Incremental: local swaps update distances through the pairwise-sign
///    delta; global replacements recompute only the changed row.
///  - FullRecompute: every candidate is scored from a from-scratch
///    recomputation of the whole distance state (runtime baseline).
enum class UpdateMode { Incremental, FullRecompute };

struct OpCounters {
    long long proposals = 0;
    long long accepted = 0;
    long long validity_rejections = 0;
    long long row_distance_updates = 0; // per-row distance refreshes
    long long sign_products = 0;        // pairwise sign products in swap deltas
    long long full_state_recomputes = 0;
};

struct TracePoint {
    long long iteration = 0;
    double temperature = 0.0;
    double phi = 0.0;      // current state
    double best_phi = 0.0; // incumbent
    long long k_min = 0;   // current state
};

class AnnealState;
struct MoveEval;
MoveEval evaluate_move(const AnnealState& state, const Move& move, UpdateMode mode,
                       OpCounters& counters);
void commit_move(AnnealState& state, const Move& move, const MoveEval& eval);

/// Live search state over the representative half-design. Caches the
/// within-half distance matrix, the multiset of effective distances
/// min{u, q-u} as a count array, and the running second-moment numerator.
class AnnealState {
public:
    AnnealState(const HalfDesign& half, double lambda);

    int m() const { return m_; }
    int h() const { return h_; }
    long long q() const { return q_; }
    long long n() const { return 2LL * h_; }
    double lambda() const { return lambda_; }
    const std::vector<Permutation>& reps() const { return reps_; }
    const std::vector<int>& positions(int row) const { return pos_[row]; }
    int distance(int i, int j) const { return dist_[static_cast<std::size_t>(i) * h_ + j]; }
    long long k_min_effective() const { return k_min_; }
    long long g_sum() const { return g_sum_; }
    double phi() const { return phi_; }
    double temperature() const { return temperature_; }
    void set_temperature(double t) { temperature_ = t; }
    double t0() const { return t0_; }
    void set_t0(double t0) { t0_ = t0; }
    const DesignBounds& normalizers() const { return norm_; }

    /// k_m2 of the expanded design from the cached integers, exact.
    Rat k_m2_exact() const;
    /// Composite objective from the cached integers (shared phi_value path).
    double phi_from_cache() const { return phi_of(k_min_, g_sum_); }
    double phi_of(long long kmin_eff, long long g_sum) const;

    /// True iff the cached distance matrix, effective-distance counts and
    /// g_sum match a from-scratch recomputation. Asserted after every
    /// accepted move in debug builds.
    bool consistent() const;

    HalfDesign half() const { return HalfDesign(reps_); }

private:
    friend MoveEval evaluate_move(const AnnealState&, const Move&, UpdateMode, OpCounters&);
    friend void commit_move(AnnealState&, const Move&, const MoveEval&);

    long long effective(long long u) const { return std::min(u, q_ - u); }
    long long g(long long u) const { return u * u + (q_ - u) * (q_ - u); }
    void rebuild_cache();

    int m_ = 0;
    int h_ = 0;
    long long q_ = 0;
    double lambda_ = 0.5;
    double t0_ = 1.0;
    double temperature_ = 1.0;
    DesignBounds norm_;
    double u2d_ = 0.0;
    double l2d_ = 0.0;

    std::vector<Permutation> reps_;
    std::vector<std::vector<int>> pos_;
    std::vector<int> dist_;             // h x h, row-major, symmetric
    std::vector<long long> eff_counts_; // index 0..floor(q/2)
    long long k_min_ = 0;               // min effective distance
    long long g_sum_ = 0;               // sum_{i<j} u^2 + (q-u)^2
    double phi_ = 0.0;
};

/// Component pairs whose relative order flips when positions s < t of x are
/// swapped; cardinality 2(t-s)-1.
std::vector<std::pair<int, int>> swap_pair_set(const Permutation& x, int s, int t);

/// k(x_r', x_j) from k(x_r, x_j) and the flipped pair set, without a full
/// distance recomputation. The signs are taken from x_r before the swap.
int incremental_distance(int k_old, const Permutation& x_r, const Permutation& x_j,
                         const std::vector<std::pair<int, int>>& pairs);

/// Draw order is fixed: move-kind, row, move details. GlobalReplace with
/// probability T/T0, LocalSwap otherwise.
Move propose_move(const AnnealState& state, std::mt19937_64& rng);

struct MoveEval {
    bool valid = false;
    int row = 0;
    std::vector<int> new_row_distances; // h entries, [row] = 0
    long long delta_g = 0;
    long long new_k_min = 0;
    double delta_phi = 0.0;
};

/// Scores a candidate move. Invalid candidates (duplicate or foldover pair
/// inside the half) return valid = false: a rejection, not an error.
MoveEval evaluate_move(const AnnealState& state, const Move& move, UpdateMode mode,
                       OpCounters& counters);

void commit_move(AnnealState& state, const Move& move, const MoveEval& eval);

/// Accept iff delta_phi > 0, else with probability exp(delta_phi / T).
bool accept_move(double delta_phi, double temperature, std::mt19937_64& rng);

struct SearchOptions {
    UpdateMode mode = UpdateMode::Incremental;
    std::optional<std::chrono::steady_clock::time_point> deadline;
    bool record_trace = true;
    std::function<void(const AnnealState&)> on_accept; // test hook
};

struct FsaResult {
    HalfDesign half;
    Design design;
    double phi = 0.0; // objective of the returned design
    long long updates = 0;
    OpCounters counters;
    std::vector<TracePoint> trace;
};

/// Foldover simulated annealing over representative half-designs.
/// Requires even n with h = n/2 >= 2 and n <= m!.
FsaResult run_fsa_kd(const AnnealConfig& cfg, std::mt19937_64& rng,
                     const SearchOptions& options = {});

/// Odd run sizes: construct at n+1, then delete the row whose removal
/// leaves the largest minimum distance (ties: smaller k_m2, then lowest
/// deleted row index). `parent_updates`, when given, receives the parent
/// search's proposal count.
Design odd_run_design(const AnnealConfig& cfg, std::mt19937_64& rng,
                      const SearchOptions& options = {}, long long* parent_updates = nullptr);

/// n distinct permutations sampled uniformly without replacement.
Design srs_design(long long n, int m, std::mt19937_64& rng);

/// Evaluation strategy for the unrestricted-space baseline.
///  - Full: every candidate is scored from a full n x n distance
///    recomputation.
///  - IncrementalFree: only the changed row's distances are recomputed
///    directly (no pairwise-sign delta).
enum class OrdinaryUpdate { Full, IncrementalFree };

struct OrdinaryResult {
    Design design;
    double phi = 0.0;
    long long updates = 0;
    OpCounters counters;
};

/// Simulated annealing over the unrestricted n-run distinct-permutation
/// space with the same moves, schedule and objective; the foldover
/// benchmarks act as fixed normalizers for comparability.
OrdinaryResult ordinary_sa(const AnnealConfig& cfg, std::mt19937_64& rng, OrdinaryUpdate mode,
                           const SearchOptions& options = {});

/// m! capped at `cap` (saturating); feasibility checks only.
long long factorial_capped(int m, long long cap);

} // namespace oaforge
