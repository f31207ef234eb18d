#include "oaforge/foldover.hpp"

#include <map>
#include <set>
#include <stdexcept>
#include <string>

namespace oaforge {

HalfDesign::HalfDesign(std::vector<Permutation> reps) : reps_(std::move(reps)) {
    if (reps_.size() < 2) {
        throw std::invalid_argument("HalfDesign: need at least 2 representatives");
    }
    const int m = reps_.front().size();
    std::map<CanonicalKey, int> seen; // key -> row index
    for (int i = 0; i < static_cast<int>(reps_.size()); ++i) {
        if (reps_[i].size() != m) {
            throw std::invalid_argument("HalfDesign: all representatives must share the same m");
        }
        auto [it, fresh] = seen.emplace(canonical_key(reps_[i]), i);
        if (!fresh) {
            throw std::invalid_argument("HalfDesign: rows " + std::to_string(it->second) +
                                        " and " + std::to_string(i) + " are identical");
        }
    }
    for (int i = 0; i < static_cast<int>(reps_.size()); ++i) {
        auto it = seen.find(canonical_key(reps_[i].foldover()));
        if (it != seen.end()) {
            throw std::invalid_argument("HalfDesign: rows " + std::to_string(i) + " and " +
                                        std::to_string(it->second) +
                                        " are a foldover pair; the expansion would repeat runs");
        }
    }
}

HalfDistanceMatrix::HalfDistanceMatrix(const HalfDesign& half)
    : m_(half.m()), h_(half.h()), entries_(static_cast<std::size_t>(half.h()) * half.h(), 0) {
    std::vector<std::vector<int>> pos;
    pos.reserve(h_);
    for (const Permutation& x : half.reps()) {
        pos.push_back(x.positions());
    }
    for (int i = 0; i < h_; ++i) {
        for (int j = i + 1; j < h_; ++j) {
            const int d = kendall_from_positions(pos[i], pos[j]);
            entries_[static_cast<std::size_t>(i) * h_ + j] = d;
            entries_[static_cast<std::size_t>(j) * h_ + i] = d;
        }
    }
    validate();
}

HalfDistanceMatrix::HalfDistanceMatrix(int m, int h, std::vector<int> entries_row_major)
    : m_(m), h_(h), entries_(std::move(entries_row_major)) {
    if (entries_.size() != static_cast<std::size_t>(h_) * h_) {
        throw std::invalid_argument("HalfDistanceMatrix: expected h*h entries");
    }
    validate();
}

void HalfDistanceMatrix::validate() const {
    if (h_ < 2 || m_ < 2) {
        throw std::invalid_argument("HalfDistanceMatrix: require h >= 2 and m >= 2");
    }
    const long long qq = q();
    for (int i = 0; i < h_; ++i) {
        if (at(i, i) != 0) {
            throw std::invalid_argument("HalfDistanceMatrix: nonzero diagonal");
        }
        for (int j = i + 1; j < h_; ++j) {
            const int d = at(i, j);
            if (d != at(j, i)) {
                throw std::invalid_argument("HalfDistanceMatrix: not symmetric");
            }
            if (d < 1 || d > qq - 1) {
                throw std::invalid_argument(
                    "HalfDistanceMatrix: off-diagonal distance outside [1, q-1]");
            }
        }
    }
}

Design expand(const HalfDesign& half) {
    std::vector<Permutation> runs;
    runs.reserve(2 * static_cast<std::size_t>(half.h()));
    for (const Permutation& x : half.reps()) {
        runs.push_back(x);
    }
    for (const Permutation& x : half.reps()) {
        runs.push_back(x.foldover());
    }
    return Design(std::move(runs), /*require_distinct=*/true);
}

DistanceHistogram full_histogram_from_half(const HalfDistanceMatrix& hdm) {
    const long long q = hdm.q();
    const int h = hdm.h();
    DistanceHistogram out;
    out.m = hdm.m();
    out.counts.assign(q + 1, 0);
    for (int i = 0; i < h; ++i) {
        out.counts[q] += 1; // pair (x_i, x~_i)
        for (int j = i + 1; j < h; ++j) {
            const int u = hdm.at(i, j);
            out.counts[u] += 2;     // (x_i, x_j) and (x~_i, x~_j)
            out.counts[q - u] += 2; // (x_i, x~_j) and (x_j, x~_i)
        }
    }
    out.total_pairs = static_cast<long long>(h) * (2 * h - 1);
    return out;
}

FoldoverMetrics foldover_metrics(const HalfDistanceMatrix& hdm) {
    const long long q = hdm.q();
    const int h = hdm.h();
    const int m = hdm.m();
    const long long n = 2LL * h;

    FoldoverMetrics out;
    out.k_min = q;
    BigInt g_sum = 0; // sum over i<j of u^2 + (q-u)^2
    for (int i = 0; i < h; ++i) {
        for (int j = i + 1; j < h; ++j) {
            const long long u = hdm.at(i, j);
            out.k_min = std::min(out.k_min, std::min(u, q - u));
            g_sum += BigInt(u) * u + BigInt(q - u) * (q - u);
        }
    }
    out.k_ave = Rat(BigInt(n) * m * (m - 1), BigInt(4) * (n - 1));
    out.k_m2 = Rat(BigInt(h) * q * q + 2 * g_sum, BigInt(h) * (2 * h - 1));
    return out;
}

bool is_foldover_design(const Design& d) {
    if (d.n() % 2 != 0) {
        return false;
    }
    std::set<CanonicalKey> keys;
    for (const Permutation& x : d.runs()) {
        if (!keys.insert(canonical_key(x)).second) {
            return false; // repeated run
        }
    }
    for (const Permutation& x : d.runs()) {
        if (keys.count(canonical_key(x.foldover())) == 0) {
            return false;
        }
    }
    return true;
}

} // namespace oaforge
