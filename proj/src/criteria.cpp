#include "oaforge/criteria.hpp"

#include "oaforge/error.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <set>
#include <stdexcept>
#include <string>

namespace oaforge {

Design::Design(std::vector<Permutation> runs, bool require_distinct) : runs_(std::move(runs)) {
    if (runs_.size() < 2) {
        throw std::invalid_argument("Design: need at least 2 runs");
    }
    const int m = runs_.front().size();
    for (const Permutation& x : runs_) {
        if (x.size() != m) {
            throw std::invalid_argument("Design: all runs must share the same m");
        }
    }
    if (require_distinct && has_duplicate_runs()) {
        throw std::invalid_argument("Design: duplicate runs not allowed");
    }
}

bool Design::has_duplicate_runs() const {
    std::set<CanonicalKey> keys;
    for (const Permutation& x : runs_) {
        if (!keys.insert(canonical_key(x)).second) {
            return true;
        }
    }
    return false;
}

DistanceHistogram distance_histogram(const Design& d) {
    DistanceHistogram h;
    h.m = d.m();
    h.counts.assign(d.q() + 1, 0);
    std::vector<std::vector<int>> pos;
    pos.reserve(d.n());
    for (const Permutation& x : d.runs()) {
        pos.push_back(x.positions());
    }
    for (long long i = 0; i < d.n(); ++i) {
        for (long long j = i + 1; j < d.n(); ++j) {
            ++h.counts[kendall_from_positions(pos[i], pos[j])];
            ++h.total_pairs;
        }
    }
    return h;
}

long long k_min(const DistanceHistogram& h) {
    if (h.total_pairs < 1) {
        throw std::invalid_argument("k_min: empty histogram");
    }
    for (long long r = 0; r <= h.q(); ++r) {
        if (h.counts[r] > 0) {
            return r;
        }
    }
    throw std::logic_error("k_min: inconsistent histogram");
}

Rat k_ave(const DistanceHistogram& h) {
    if (h.total_pairs < 1) {
        throw std::invalid_argument("k_ave: empty histogram");
    }
    BigInt sum = 0;
    for (long long r = 0; r <= h.q(); ++r) {
        sum += BigInt(r) * h.counts[r];
    }
    return Rat(sum, BigInt(h.total_pairs));
}

Rat k_m2(const DistanceHistogram& h) {
    if (h.total_pairs < 1) {
        throw std::invalid_argument("k_m2: empty histogram");
    }
    BigInt sum = 0;
    for (long long r = 0; r <= h.q(); ++r) {
        sum += BigInt(r) * r * h.counts[r];
    }
    return Rat(sum, BigInt(h.total_pairs));
}

Rat ms_criterion_direct(const Design& d) {
    const long long q = d.q();
    std::vector<std::vector<int>> pos;
    pos.reserve(d.n());
    for (const Permutation& x : d.runs()) {
        pos.push_back(x.positions());
    }
    BigInt total = BigInt(d.n()) * (q + 1) * (q + 1); // diagonal, k(x_i,x_i) = 0
    for (long long i = 0; i < d.n(); ++i) {
        for (long long j = i + 1; j < d.n(); ++j) {
            const long long v = 1 + q - 2 * kendall_from_positions(pos[i], pos[j]);
            total += 2 * BigInt(v) * v;
        }
    }
    return Rat(total);
}

Rat ms_criterion_identity(const DistanceHistogram& h, long long n, int m) {
    if (h.total_pairs != n * (n - 1) / 2 || h.m != m) {
        throw std::invalid_argument("ms_criterion_identity: histogram inconsistent with (n, m)");
    }
    const Rat km2 = k_m2(h);
    const Rat kav = k_ave(h);
    const BigInt nn1 = BigInt(n) * (n - 1);
    const BigInt msq = BigInt(m) * m - m + 2;
    return Rat(4 * nn1) * km2 - Rat(BigInt(2 * m * (m - 1) + 4) * nn1) * kav +
           Rat(BigInt(n) * n * msq * msq, 4);
}

std::pair<Rat, Rat> c1_c2(const DistanceHistogram& h, long long n, int m) {
    if (h.total_pairs != n * (n - 1) / 2 || h.m != m) {
        throw std::invalid_argument("c1_c2: histogram inconsistent with (n, m)");
    }
    const long long q = pair_count(m);
    const Rat kav = k_ave(h);
    const Rat km2 = k_m2(h);
    const Rat two_frac(2 * (n - 1), n);
    const Rat c1 = Rat(q) - two_frac * kav;
    const Rat c2 = Rat(BigInt(q) * (q - 1), 2) - Rat(q) * two_frac * kav + two_frac * km2 -
                   Rat(BigInt(m) * (m - 1) * (m - 2), 18);
    return {c1, c2};
}

namespace {

// Full-design J-characteristic tables, one per m, built once by exhaustive
// enumeration of S_m. J_W(D_full) for |W| = 1 is zero by symmetry but is
// still computed rather than assumed.
struct FullDesignTables {
    long long n_full = 0;
    std::vector<long long> j1;              // per pair index
    std::vector<std::vector<long long>> j2; // upper triangle over pair indices
};

const FullDesignTables& full_design_tables(int m) {
    static std::mutex mu;
    static std::map<int, FullDesignTables> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(m);
    if (it != cache.end()) {
        return it->second;
    }

    const long long q = pair_count(m);
    FullDesignTables t;
    t.j1.assign(q, 0);
    t.j2.assign(q, std::vector<long long>());
    for (long long p = 0; p < q; ++p) {
        t.j2[p].assign(q - p - 1, 0);
    }

    std::vector<int> e(m);
    for (int i = 0; i < m; ++i) {
        e[i] = i;
    }
    std::vector<std::int8_t> z(q);
    std::vector<int> pos(m);
    do {
        for (int r = 0; r < m; ++r) {
            pos[e[r]] = r;
        }
        long long idx = 0;
        for (int a = 0; a < m - 1; ++a) {
            for (int b = a + 1; b < m; ++b) {
                z[idx++] = pos[a] < pos[b] ? 1 : -1;
            }
        }
        for (long long p = 0; p < q; ++p) {
            t.j1[p] += z[p];
            for (long long p2 = p + 1; p2 < q; ++p2) {
                t.j2[p][p2 - p - 1] += z[p] * z[p2];
            }
        }
        ++t.n_full;
    } while (std::next_permutation(e.begin(), e.end()));

    return cache.emplace(m, std::move(t)).first->second;
}

} // namespace

std::pair<Rat, Rat> c1_c2_direct(const Design& d) {
    const int m = d.m();
    if (m > 7) {
        throw CapabilityError("c1_c2_direct: full-design enumeration supported only for m <= 7");
    }
    const long long q = d.q();
    const long long n = d.n();
    const FullDesignTables& full = full_design_tables(m);

    std::vector<std::vector<std::int8_t>> z;
    z.reserve(n);
    for (const Permutation& x : d.runs()) {
        z.push_back(pwo_vector(x).signs());
    }

    Rat c1 = 0;
    for (long long p = 0; p < q; ++p) {
        long long jd = 0;
        for (long long i = 0; i < n; ++i) {
            jd += z[i][p];
        }
        const Rat diff = Rat(jd, n) - Rat(full.j1[p], full.n_full);
        c1 += diff * diff;
    }

    Rat c2 = 0;
    for (long long p = 0; p < q; ++p) {
        for (long long p2 = p + 1; p2 < q; ++p2) {
            long long jd = 0;
            for (long long i = 0; i < n; ++i) {
                jd += z[i][p] * z[i][p2];
            }
            const Rat diff = Rat(jd, n) - Rat(full.j2[p][p2 - p - 1], full.n_full);
            c2 += diff * diff;
        }
    }
    return {c1, c2};
}

DesignBounds bounds(long long n, int m) {
    if (n % 2 != 0) {
        throw std::invalid_argument("bounds: n must be even (foldover class only)");
    }
    if (n < 4 || m < 3) {
        throw std::invalid_argument("bounds: require n >= 4 and m >= 3");
    }
    return bounds_normalizers(n, m);
}

DesignBounds bounds_normalizers(long long n, int m) {
    if (n < 2 || m < 3) {
        throw std::invalid_argument("bounds_normalizers: require n >= 2 and m >= 3");
    }
    DesignBounds b;
    const BigInt mm1 = BigInt(m) * (m - 1);
    b.b1 = static_cast<long long>(m) * (m - 1) / 4;
    b.l2 = Rat(BigInt(n) * mm1 * (BigInt(9) * m * m - 5 * m + 10), BigInt(144) * (n - 1));
    b.u2 = Rat(BigInt(n) * mm1 * mm1 - BigInt(4) * (n - 2) * (mm1 - 2), BigInt(8) * (n - 1));
    b.kave_bench = Rat(BigInt(n) * mm1, BigInt(4) * (n - 1));
    return b;
}

double phi_value(double lambda, long long kmin, long long b1, double km2, double u2, double l2) {
    const double t2 = (u2 - km2) / (u2 - l2);
    if (b1 == 1) {
        return t2; // m = 3: the minimum-distance term is degenerate
    }
    const double t1 = static_cast<double>(kmin - 1) / static_cast<double>(b1 - 1);
    return lambda * t1 + (1.0 - lambda) * t2;
}

namespace {

double phi_impl(long long kmin, const Rat& km2, long long n, int m, double lambda, bool clamp) {
    if (n % 2 != 0) {
        throw std::invalid_argument("phi_lambda: n must be even");
    }
    if (lambda < 0.0 || lambda > 1.0) {
        throw std::invalid_argument("phi_lambda: lambda must lie in [0,1]");
    }
    const DesignBounds b = bounds(n, m);
    const double u2 = rat_to_double(b.u2);
    const double l2 = rat_to_double(b.l2);
    double km2d = rat_to_double(km2);
    if (clamp) {
        // Clamp the second term to its natural range for reporting; the raw
        // value is what the search optimizes.
        km2d = std::min(std::max(km2d, l2), u2);
    }
    return phi_value(lambda, kmin, b.b1, km2d, u2, l2);
}

} // namespace

double phi_lambda(long long kmin, const Rat& km2, long long n, int m, double lambda) {
    return phi_impl(kmin, km2, n, m, lambda, false);
}

double phi_lambda_clamped(long long kmin, const Rat& km2, long long n, int m, double lambda) {
    return phi_impl(kmin, km2, n, m, lambda, true);
}

CriteriaSummary evaluate_design(const Design& d, double lambda) {
    const DistanceHistogram h = distance_histogram(d);
    CriteriaSummary s;
    s.k_min = k_min(h);
    s.k_ave = k_ave(h);
    s.k_m2 = k_m2(h);
    std::tie(s.c1, s.c2) = c1_c2(h, d.n(), d.m());
    s.tr_m2 = ms_criterion_identity(h, d.n(), d.m());
    if (d.n() % 2 == 0 && d.n() >= 4 && d.m() >= 3) {
        s.bounds = bounds(d.n(), d.m());
        s.phi = phi_lambda_clamped(s.k_min, s.k_m2, d.n(), d.m(), lambda);
        s.phi_raw = phi_lambda(s.k_min, s.k_m2, d.n(), d.m(), lambda);
    }
    return s;
}

} // namespace oaforge
