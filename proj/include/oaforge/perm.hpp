#pragma once

#include <compare>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace oaforge {

/// One addition order over components {0,...,m-1}. The entry at position r
/// (0-based) is the component added (r+1)-th.
class Permutation {
public:
    /// Validates that `entries` is a bijection on {0,...,m-1} with m >= 2.
    explicit Permutation(std::vector<int> entries);

    static Permutation identity(int m);

    int size() const { return static_cast<int>(entries_.size()); }
    int component_at(int pos) const { return entries_[pos]; }
    const std::vector<int>& entries() const { return entries_; }

    /// Position map: result[c] = position of component c in this order.
    std::vector<int> positions() const;

    /// The reverse order. Involution; flips every pairwise-ordering sign.
    Permutation foldover() const;

    /// Entry sequences compare lexicographically; this ordering doubles as
    /// the canonical key for duplicate and foldover-pair detection.
    auto operator<=>(const Permutation&) const = default;
    bool operator==(const Permutation&) const = default;

private:
    std::vector<int> entries_;
};

/// Canonical key: the entry sequence itself; total-order comparable, no
/// hashing semantics.
using CanonicalKey = std::vector<int>;
inline CanonicalKey canonical_key(const Permutation& x) { return x.entries(); }

/// q = m(m-1)/2, the number of unordered pairs and the maximum Kendall tau
/// distance.
inline long long pair_count(int m) { return static_cast<long long>(m) * (m - 1) / 2; }

/// Lexicographic index of the pair (a,b), a < b, over {0,...,m-1}. This
/// indexing is fixed once and shared by every module.
inline int pair_index(int m, int a, int b) {
    return a * (2 * m - a - 1) / 2 + (b - a - 1);
}

/// Inverse of pair_index.
std::pair<int, int> pair_from_index(int m, long long index);

/// Pairwise-ordering signs: +1 at pair (a,b), a < b, iff a precedes b.
class PwoVector {
public:
    PwoVector(int m, std::vector<std::int8_t> signs);

    int m() const { return m_; }
    long long size() const { return static_cast<long long>(signs_.size()); }
    int sign(int a, int b) const { return signs_[pair_index(m_, a, b)]; }
    const std::vector<std::int8_t>& signs() const { return signs_; }

    bool operator==(const PwoVector&) const = default;

private:
    int m_;
    std::vector<std::int8_t> signs_;
};

/// Number of component pairs whose relative order differs between x and y.
/// Symmetric; 0 iff x == y; q iff y is the reverse of x. Throws on
/// mismatched sizes.
int kendall_distance(const Permutation& x, const Permutation& y);

/// Same distance computed from precomputed position maps; the annealer's
/// hot path keeps these cached.
int kendall_from_positions(std::span<const int> px, std::span<const int> py);

PwoVector pwo_vector(const Permutation& x);

/// Uniform draw over S_m by Fisher-Yates; reproducible given the generator
/// state. Throws for m < 2.
Permutation random_permutation(int m, std::mt19937_64& rng);

} // namespace oaforge
