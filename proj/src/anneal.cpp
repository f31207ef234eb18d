#include "oaforge/anneal.hpp"

#include "oaforge/error.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <iostream>
#include <set>
#include <stdexcept>
#include <string>

namespace oaforge {

long long factorial_capped(int m, long long cap) {
    long long f = 1;
    for (int i = 2; i <= m; ++i) {
        if (f > cap / i) {
            return cap;
        }
        f *= i;
    }
    return std::min(f, cap);
}

AnnealState::AnnealState(const HalfDesign& half, double lambda)
    : m_(half.m()),
      h_(half.h()),
      q_(pair_count(half.m())),
      lambda_(lambda),
      norm_(bounds(2LL * half.h(), half.m())),
      reps_(half.reps()) {
    if (lambda < 0.0 || lambda > 1.0) {
        throw std::invalid_argument("AnnealState: lambda must lie in [0,1]");
    }
    u2d_ = rat_to_double(norm_.u2);
    l2d_ = rat_to_double(norm_.l2);
    rebuild_cache();
}

void AnnealState::rebuild_cache() {
    pos_.clear();
    pos_.reserve(h_);
    for (const Permutation& x : reps_) {
        pos_.push_back(x.positions());
    }
    dist_.assign(static_cast<std::size_t>(h_) * h_, 0);
    eff_counts_.assign(q_ / 2 + 1, 0);
    g_sum_ = 0;
    for (int i = 0; i < h_; ++i) {
        for (int j = i + 1; j < h_; ++j) {
            const int d = kendall_from_positions(pos_[i], pos_[j]);
            dist_[static_cast<std::size_t>(i) * h_ + j] = d;
            dist_[static_cast<std::size_t>(j) * h_ + i] = d;
            ++eff_counts_[effective(d)];
            g_sum_ += g(d);
        }
    }
    k_min_ = 0;
    while (k_min_ <= q_ / 2 && eff_counts_[k_min_] == 0) {
        ++k_min_;
    }
    phi_ = phi_of(k_min_, g_sum_);
}

Rat AnnealState::k_m2_exact() const {
    return Rat(BigInt(h_) * q_ * q_ + 2 * BigInt(g_sum_), BigInt(h_) * (2 * h_ - 1));
}

double AnnealState::phi_of(long long kmin_eff, long long gsum) const {
    const double km2 = static_cast<double>(h_ * q_ * q_ + 2 * gsum) /
                       static_cast<double>(h_ * (2LL * h_ - 1));
    return phi_value(lambda_, kmin_eff, norm_.b1, km2, u2d_, l2d_);
}

bool AnnealState::consistent() const {
    AnnealState fresh(HalfDesign(reps_), lambda_);
    if (fresh.dist_ != dist_ || fresh.eff_counts_ != eff_counts_ || fresh.g_sum_ != g_sum_ ||
        fresh.k_min_ != k_min_) {
        return false;
    }
    return fresh.phi_ == phi_; // bitwise: both sides go through phi_of
}

std::vector<std::pair<int, int>> swap_pair_set(const Permutation& x, int s, int t) {
    if (s < 0 || s >= t || t >= x.size()) {
        throw std::invalid_argument("swap_pair_set: require 0 <= s < t < m");
    }
    const std::vector<int>& e = x.entries();
    auto unordered = [](int a, int b) { return a < b ? std::pair{a, b} : std::pair{b, a}; };
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(2 * (t - s) - 1);
    pairs.push_back(unordered(e[s], e[t]));
    for (int l = s + 1; l < t; ++l) {
        pairs.push_back(unordered(e[s], e[l]));
        pairs.push_back(unordered(e[t], e[l]));
    }
    return pairs;
}

int incremental_distance(int k_old, const Permutation& x_r, const Permutation& x_j,
                         const std::vector<std::pair<int, int>>& pairs) {
    const std::vector<int> pr = x_r.positions();
    const std::vector<int> pj = x_j.positions();
    int d = k_old;
    for (const auto& [u, v] : pairs) {
        d += (pr[u] < pr[v]) == (pj[u] < pj[v]) ? 1 : -1;
    }
    return d;
}

Move propose_move(const AnnealState& state, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const MoveKind kind = unif(rng) < state.temperature() / state.t0() ? MoveKind::GlobalReplace
                                                                       : MoveKind::LocalSwap;
    std::uniform_int_distribution<int> row_pick(0, state.h() - 1);
    const int row = row_pick(rng);
    if (kind == MoveKind::GlobalReplace) {
        return Move{kind, row, -1, -1, random_permutation(state.m(), rng)};
    }
    std::uniform_int_distribution<long long> pair_pick(0, state.q() - 1);
    const auto [s, t] = pair_from_index(state.m(), pair_pick(rng));
    std::vector<int> e = state.reps()[row].entries();
    std::swap(e[s], e[t]);
    return Move{kind, row, s, t, Permutation(std::move(e))};
}

MoveEval evaluate_move(const AnnealState& state, const Move& move, UpdateMode mode,
                       OpCounters& counters) {
    MoveEval ev;
    ev.row = move.row;
    const int r = move.row;
    const int h = state.h_;
    const long long q = state.q_;

    // Candidate half validity: the new row must not duplicate another
    // representative nor be the foldover of one. The proposal may equal the
    // current row itself (a no-op candidate), which is a legal move.
    const Permutation prop_fold = move.proposal.foldover();
    for (int j = 0; j < h; ++j) {
        if (j == r) {
            continue;
        }
        if (move.proposal == state.reps_[j] || prop_fold == state.reps_[j]) {
            return ev; // rejection signal, not an error
        }
    }
    ev.valid = true;
    ev.new_row_distances.assign(h, 0);

    if (mode == UpdateMode::FullRecompute) {
        ++counters.full_state_recomputes;
        const std::vector<int> prop_pos = move.proposal.positions();
        long long g2 = 0;
        long long kmin2 = q;
        for (int i = 0; i < h; ++i) {
            const std::vector<int>& pi = i == r ? prop_pos : state.pos_[i];
            for (int j = i + 1; j < h; ++j) {
                const std::vector<int>& pj = j == r ? prop_pos : state.pos_[j];
                const int d = kendall_from_positions(pi, pj);
                g2 += state.g(d);
                kmin2 = std::min(kmin2, state.effective(d));
                if (i == r) {
                    ev.new_row_distances[j] = d;
                } else if (j == r) {
                    ev.new_row_distances[i] = d;
                }
            }
        }
        ev.delta_g = g2 - state.g_sum_;
        ev.new_k_min = kmin2;
        ev.delta_phi = state.phi_of(kmin2, g2) - state.phi_;
        return ev;
    }

    if (move.kind == MoveKind::LocalSwap) {
        const std::vector<int>& pr = state.pos_[r]; // signs taken before the swap
        const std::vector<std::pair<int, int>> pairs =
            swap_pair_set(state.reps_[r], move.s, move.t);
        for (int j = 0; j < h; ++j) {
            if (j == r) {
                continue;
            }
            ++counters.row_distance_updates;
            counters.sign_products += static_cast<long long>(pairs.size());
            const std::vector<int>& pj = state.pos_[j];
            int d = state.distance(r, j);
            for (const auto& [u, v] : pairs) {
                d += (pr[u] < pr[v]) == (pj[u] < pj[v]) ? 1 : -1;
            }
            ev.new_row_distances[j] = d;
        }
    } else {
        const std::vector<int> prop_pos = move.proposal.positions();
        for (int j = 0; j < h; ++j) {
            if (j == r) {
                continue;
            }
            ++counters.row_distance_updates;
            ev.new_row_distances[j] = kendall_from_positions(prop_pos, state.pos_[j]);
        }
    }

    for (int j = 0; j < h; ++j) {
        if (j != r) {
            ev.delta_g += state.g(ev.new_row_distances[j]) - state.g(state.distance(r, j));
        }
    }

    // k_min update: delete the old effective values for row r, insert the
    // new ones, then scan the count array.
    std::vector<long long> scratch = state.eff_counts_;
    for (int j = 0; j < h; ++j) {
        if (j != r) {
            --scratch[state.effective(state.distance(r, j))];
            ++scratch[state.effective(ev.new_row_distances[j])];
        }
    }
    ev.new_k_min = 0;
    while (ev.new_k_min <= q / 2 && scratch[ev.new_k_min] == 0) {
        ++ev.new_k_min;
    }

    const long long pair_total = static_cast<long long>(h) * (2 * h - 1);
    const double second = 2.0 * static_cast<double>(ev.delta_g) /
                          (static_cast<double>(pair_total) * (state.u2d_ - state.l2d_));
    if (state.norm_.b1 == 1) {
        ev.delta_phi = -second;
    } else {
        ev.delta_phi = state.lambda_ * static_cast<double>(ev.new_k_min - state.k_min_) /
                           static_cast<double>(state.norm_.b1 - 1) -
                       (1.0 - state.lambda_) * second;
    }
    return ev;
}

void commit_move(AnnealState& state, const Move& move, const MoveEval& eval) {
    const int r = move.row;
    for (int j = 0; j < state.h_; ++j) {
        if (j == r) {
            continue;
        }
        --state.eff_counts_[state.effective(state.distance(r, j))];
        ++state.eff_counts_[state.effective(eval.new_row_distances[j])];
        state.dist_[static_cast<std::size_t>(r) * state.h_ + j] = eval.new_row_distances[j];
        state.dist_[static_cast<std::size_t>(j) * state.h_ + r] = eval.new_row_distances[j];
    }
    state.g_sum_ += eval.delta_g;
    state.k_min_ = eval.new_k_min;
    state.reps_[r] = move.proposal;
    state.pos_[r] = move.proposal.positions();
    state.phi_ = state.phi_of(state.k_min_, state.g_sum_);
}

bool accept_move(double delta_phi, double temperature, std::mt19937_64& rng) {
    if (delta_phi > 0.0) {
        return true;
    }
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    return unif(rng) < std::exp(delta_phi / temperature);
}

namespace {

void validate_anneal_config(const AnnealConfig& cfg) {
    if (cfg.m < 3) {
        throw std::invalid_argument("anneal: m must be >= 3");
    }
    if (cfg.lambda < 0.0 || cfg.lambda > 1.0) {
        throw std::invalid_argument("anneal: lambda must lie in [0,1]");
    }
    if (cfg.t0 <= 0.0 || cfg.alpha <= 0.0 || cfg.alpha >= 1.0 || cfg.t_min <= 0.0) {
        throw std::invalid_argument("anneal: require t0 > 0, t_min > 0 and alpha in (0,1)");
    }
}

HalfDesign random_half(int m, int h, std::mt19937_64& rng) {
    std::set<CanonicalKey> keys;
    std::vector<Permutation> reps;
    reps.reserve(h);
    long long consecutive_failures = 0;
    const long long retry_budget = 100LL * h;
    while (static_cast<int>(reps.size()) < h) {
        Permutation x = random_permutation(m, rng);
        if (keys.count(canonical_key(x)) > 0 || keys.count(canonical_key(x.foldover())) > 0) {
            if (++consecutive_failures > retry_budget) {
                throw InfeasibleError("anneal: no valid initial half-design found after " +
                                      std::to_string(retry_budget) + " consecutive retries");
            }
            continue;
        }
        consecutive_failures = 0;
        keys.insert(canonical_key(x));
        reps.push_back(std::move(x));
    }
    return HalfDesign(std::move(reps));
}

bool past_deadline(const SearchOptions& options) {
    return options.deadline && std::chrono::steady_clock::now() >= *options.deadline;
}

} // namespace

FsaResult run_fsa_kd(const AnnealConfig& cfg, std::mt19937_64& rng, const SearchOptions& options) {
    validate_anneal_config(cfg);
    if (cfg.n % 2 != 0 || cfg.n < 4) {
        throw std::invalid_argument("run_fsa_kd: n must be even with h = n/2 >= 2");
    }
    if (cfg.n > factorial_capped(cfg.m, cfg.n)) {
        throw InfeasibleError("run_fsa_kd: n exceeds m!; no distinct-run design exists");
    }
    if (cfg.m == 3) {
        std::cerr << "oaforge: m = 3 makes the minimum-distance term degenerate; "
                     "the weight parameter is ignored\n";
    }

    const int h = static_cast<int>(cfg.n / 2);
    AnnealState state(random_half(cfg.m, h, rng), cfg.lambda);
    state.set_t0(cfg.t0);
    state.set_temperature(cfg.t0);

    FsaResult result{state.half(), expand(state.half()), state.phi(), 0, {}, {}};
    std::vector<Permutation> best_reps = state.reps();
    double best_phi = state.phi();
    if (options.record_trace) {
        result.trace.reserve(static_cast<std::size_t>(std::min<long long>(cfg.n_max, 1 << 20)));
    }

    double temperature = cfg.t0;
    for (long long iter = 1; iter <= cfg.n_max; ++iter) {
        if (temperature < cfg.t_min || past_deadline(options)) {
            break;
        }
        const Move move = propose_move(state, rng);
        ++result.counters.proposals;
        const MoveEval eval = evaluate_move(state, move, options.mode, result.counters);
        if (!eval.valid) {
            ++result.counters.validity_rejections;
        } else if (accept_move(eval.delta_phi, temperature, rng)) {
            commit_move(state, move, eval);
            ++result.counters.accepted;
            assert(state.consistent());
            if (options.on_accept) {
                options.on_accept(state);
            }
            if (state.phi() > best_phi) {
                best_phi = state.phi();
                best_reps = state.reps();
            }
        }
        if (options.record_trace) {
            result.trace.push_back(
                {iter, temperature, state.phi(), best_phi, state.k_min_effective()});
        }
        temperature *= cfg.alpha;
        state.set_temperature(temperature);
    }

    result.half = HalfDesign(best_reps);
    result.design = expand(result.half);
    result.phi = best_phi;
    result.updates = result.counters.proposals;
    return result;
}

Design odd_run_design(const AnnealConfig& cfg, std::mt19937_64& rng,
                      const SearchOptions& options, long long* parent_updates) {
    if (cfg.n % 2 == 0) {
        throw std::invalid_argument("odd_run_design: n must be odd");
    }
    AnnealConfig parent_cfg = cfg;
    parent_cfg.n = cfg.n + 1;
    const FsaResult parent = run_fsa_kd(parent_cfg, rng, options);
    if (parent_updates != nullptr) {
        *parent_updates = parent.updates;
    }
    const std::vector<Permutation>& rows = parent.design.runs();

    long long best_kmin = -1;
    Rat best_km2;
    std::optional<Design> best;
    for (std::size_t del = 0; del < rows.size(); ++del) {
        std::vector<Permutation> kept;
        kept.reserve(rows.size() - 1);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (i != del) {
                kept.push_back(rows[i]);
            }
        }
        Design candidate(std::move(kept), /*require_distinct=*/true);
        const DistanceHistogram hist = distance_histogram(candidate);
        const long long km = k_min(hist);
        const Rat k2 = k_m2(hist);
        if (km > best_kmin || (km == best_kmin && k2 < best_km2)) {
            best_kmin = km;
            best_km2 = k2;
            best = std::move(candidate);
        }
    }
    return *best;
}

Design srs_design(long long n, int m, std::mt19937_64& rng) {
    if (m < 2 || n < 2) {
        throw std::invalid_argument("srs_design: require m >= 2 and n >= 2");
    }
    if (n > factorial_capped(m, n)) {
        throw std::invalid_argument("srs_design: n exceeds m!");
    }
    std::set<CanonicalKey> keys;
    std::vector<Permutation> runs;
    runs.reserve(n);
    while (static_cast<long long>(runs.size()) < n) {
        Permutation x = random_permutation(m, rng);
        if (keys.insert(canonical_key(x)).second) {
            runs.push_back(std::move(x));
        }
    }
    return Design(std::move(runs), /*require_distinct=*/true);
}

namespace {

// Search state for the unrestricted-space baseline: full n x n distance
// matrix, distance counts for k_min, and the running sum of squared
// distances for k_m2.
class OrdinaryState {
public:
    OrdinaryState(const Design& d, double lambda)
        : m_(d.m()),
          n_(d.n()),
          q_(d.q()),
          lambda_(lambda),
          norm_(bounds_normalizers(d.n(), d.m())),
          runs_(d.runs()) {
        u2d_ = rat_to_double(norm_.u2);
        l2d_ = rat_to_double(norm_.l2);
        pos_.reserve(n_);
        for (const Permutation& x : runs_) {
            pos_.push_back(x.positions());
        }
        dist_.assign(static_cast<std::size_t>(n_) * n_, 0);
        counts_.assign(q_ + 1, 0);
        sum_sq_ = 0;
        for (long long i = 0; i < n_; ++i) {
            for (long long j = i + 1; j < n_; ++j) {
                const int dd = kendall_from_positions(pos_[i], pos_[j]);
                dist_[i * n_ + j] = dd;
                dist_[j * n_ + i] = dd;
                ++counts_[dd];
                sum_sq_ += static_cast<long long>(dd) * dd;
            }
        }
        k_min_ = scan_min(counts_);
        phi_ = phi_of(k_min_, sum_sq_);
    }

    double phi_of(long long kmin, long long sum_sq) const {
        const double km2 = static_cast<double>(sum_sq) / static_cast<double>(n_ * (n_ - 1) / 2);
        return phi_value(lambda_, kmin, norm_.b1, km2, u2d_, l2d_);
    }

    static long long scan_min(const std::vector<long long>& counts) {
        long long r = 0;
        while (r < static_cast<long long>(counts.size()) && counts[r] == 0) {
            ++r;
        }
        return r;
    }

    int m_;
    long long n_;
    long long q_;
    double lambda_;
    DesignBounds norm_;
    double u2d_ = 0.0;
    double l2d_ = 0.0;
    std::vector<Permutation> runs_;
    std::vector<std::vector<int>> pos_;
    std::vector<int> dist_;
    std::vector<long long> counts_;
    long long sum_sq_ = 0;
    long long k_min_ = 0;
    double phi_ = 0.0;
};

} // namespace

OrdinaryResult ordinary_sa(const AnnealConfig& cfg, std::mt19937_64& rng, OrdinaryUpdate mode,
                           const SearchOptions& options) {
    validate_anneal_config(cfg);
    if (cfg.n < 2) {
        throw std::invalid_argument("ordinary_sa: n must be >= 2");
    }
    if (cfg.n > factorial_capped(cfg.m, cfg.n)) {
        throw InfeasibleError("ordinary_sa: n exceeds m!; no distinct-run design exists");
    }

    OpCounters counters;
    OrdinaryState st(srs_design(cfg.n, cfg.m, rng), cfg.lambda);
    std::vector<Permutation> best_runs = st.runs_;
    double best_phi = st.phi_;

    const long long n = st.n_;
    const long long pair_total = n * (n - 1) / 2;
    double temperature = cfg.t0;
    for (long long iter = 1; iter <= cfg.n_max; ++iter) {
        if (temperature < cfg.t_min || past_deadline(options)) {
            break;
        }

        // Same move kinds and draw order as the foldover search.
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        const MoveKind kind =
            unif(rng) < temperature / cfg.t0 ? MoveKind::GlobalReplace : MoveKind::LocalSwap;
        std::uniform_int_distribution<long long> row_pick(0, n - 1);
        const long long r = row_pick(rng);
        Permutation proposal = [&] {
            if (kind == MoveKind::GlobalReplace) {
                return random_permutation(cfg.m, rng);
            }
            std::uniform_int_distribution<long long> pair_pick(0, st.q_ - 1);
            const auto [s, t] = pair_from_index(cfg.m, pair_pick(rng));
            std::vector<int> e = st.runs_[r].entries();
            std::swap(e[s], e[t]);
            return Permutation(std::move(e));
        }();
        ++counters.proposals;

        bool valid = true;
        for (long long j = 0; j < n; ++j) {
            if (j != r && proposal == st.runs_[j]) {
                valid = false;
                break;
            }
        }
        if (!valid) {
            ++counters.validity_rejections;
            temperature *= cfg.alpha;
            continue;
        }

        const std::vector<int> prop_pos = proposal.positions();
        std::vector<int> new_row(n, 0);
        long long new_sum_sq = 0;
        long long new_k_min = 0;
        double delta_phi = 0.0;

        if (mode == OrdinaryUpdate::Full) {
            ++counters.full_state_recomputes;
            long long kmin2 = st.q_;
            long long sum2 = 0;
            for (long long i = 0; i < n; ++i) {
                const std::vector<int>& pi = i == r ? prop_pos : st.pos_[i];
                for (long long j = i + 1; j < n; ++j) {
                    const std::vector<int>& pj = j == r ? prop_pos : st.pos_[j];
                    const int dd = kendall_from_positions(pi, pj);
                    sum2 += static_cast<long long>(dd) * dd;
                    kmin2 = std::min<long long>(kmin2, dd);
                    if (i == r) {
                        new_row[j] = dd;
                    } else if (j == r) {
                        new_row[i] = dd;
                    }
                }
            }
            new_sum_sq = sum2;
            new_k_min = kmin2;
            delta_phi = st.phi_of(kmin2, sum2) - st.phi_;
        } else {
            long long delta_sq = 0;
            std::vector<long long> scratch = st.counts_;
            for (long long j = 0; j < n; ++j) {
                if (j == r) {
                    continue;
                }
                ++counters.row_distance_updates;
                const int dd = kendall_from_positions(prop_pos, st.pos_[j]);
                new_row[j] = dd;
                const int old = st.dist_[r * n + j];
                delta_sq += static_cast<long long>(dd) * dd - static_cast<long long>(old) * old;
                --scratch[old];
                ++scratch[dd];
            }
            new_sum_sq = st.sum_sq_ + delta_sq;
            new_k_min = OrdinaryState::scan_min(scratch);
            const double second = static_cast<double>(delta_sq) /
                                  (static_cast<double>(pair_total) * (st.u2d_ - st.l2d_));
            if (st.norm_.b1 == 1) {
                delta_phi = -second;
            } else {
                delta_phi = cfg.lambda * static_cast<double>(new_k_min - st.k_min_) /
                                static_cast<double>(st.norm_.b1 - 1) -
                            (1.0 - cfg.lambda) * second;
            }
        }

        if (accept_move(delta_phi, temperature, rng)) {
            for (long long j = 0; j < n; ++j) {
                if (j == r) {
                    continue;
                }
                --st.counts_[st.dist_[r * n + j]];
                ++st.counts_[new_row[j]];
                st.dist_[r * n + j] = new_row[j];
                st.dist_[j * n + r] = new_row[j];
            }
            st.sum_sq_ = new_sum_sq;
            st.k_min_ = new_k_min;
            st.runs_[r] = std::move(proposal);
            st.pos_[r] = prop_pos;
            st.phi_ = st.phi_of(st.k_min_, st.sum_sq_);
            ++counters.accepted;
            if (st.phi_ > best_phi) {
                best_phi = st.phi_;
                best_runs = st.runs_;
            }
        }
        temperature *= cfg.alpha;
    }

    OrdinaryResult result{Design(std::move(best_runs), /*require_distinct=*/true), best_phi,
                          counters.proposals, counters};
    return result;
}

} // namespace oaforge
