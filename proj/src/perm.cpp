#include "oaforge/perm.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace oaforge {

Permutation::Permutation(std::vector<int> entries) : entries_(std::move(entries)) {
    const int m = static_cast<int>(entries_.size());
    if (m < 2) {
        throw std::invalid_argument("Permutation: need at least 2 components, got " +
                                    std::to_string(m));
    }
    std::vector<bool> seen(m, false);
    for (int v : entries_) {
        if (v < 0 || v >= m || seen[v]) {
            throw std::invalid_argument("Permutation: entries must be a bijection on {0,...," +
                                        std::to_string(m - 1) + "}");
        }
        seen[v] = true;
    }
}

Permutation Permutation::identity(int m) {
    std::vector<int> e(m);
    std::iota(e.begin(), e.end(), 0);
    return Permutation(std::move(e));
}

std::vector<int> Permutation::positions() const {
    std::vector<int> pos(entries_.size());
    for (int r = 0; r < size(); ++r) {
        pos[entries_[r]] = r;
    }
    return pos;
}

Permutation Permutation::foldover() const {
    std::vector<int> rev(entries_.rbegin(), entries_.rend());
    return Permutation(std::move(rev));
}

std::pair<int, int> pair_from_index(int m, long long index) {
    if (index < 0 || index >= pair_count(m)) {
        throw std::invalid_argument("pair_from_index: index out of range");
    }
    // Walk the row starts; m is small so a linear scan is fine.
    long long offset = 0;
    for (int a = 0; a < m - 1; ++a) {
        const long long row = m - a - 1;
        if (index < offset + row) {
            return {a, a + 1 + static_cast<int>(index - offset)};
        }
        offset += row;
    }
    throw std::logic_error("pair_from_index: unreachable");
}

PwoVector::PwoVector(int m, std::vector<std::int8_t> signs) : m_(m), signs_(std::move(signs)) {
    if (static_cast<long long>(signs_.size()) != pair_count(m_)) {
        throw std::invalid_argument("PwoVector: expected m(m-1)/2 signs");
    }
    for (std::int8_t s : signs_) {
        if (s != 1 && s != -1) {
            throw std::invalid_argument("PwoVector: signs must be +1 or -1");
        }
    }
}

int kendall_distance(const Permutation& x, const Permutation& y) {
    if (x.size() != y.size()) {
        throw std::invalid_argument("kendall_distance: permutations of different sizes (" +
                                    std::to_string(x.size()) + " vs " + std::to_string(y.size()) +
                                    ")");
    }
    const std::vector<int> px = x.positions();
    const std::vector<int> py = y.positions();
    return kendall_from_positions(px, py);
}

int kendall_from_positions(std::span<const int> px, std::span<const int> py) {
    const int m = static_cast<int>(px.size());
    int d = 0;
    for (int a = 0; a < m - 1; ++a) {
        for (int b = a + 1; b < m; ++b) {
            d += (px[a] < px[b]) != (py[a] < py[b]);
        }
    }
    return d;
}

PwoVector pwo_vector(const Permutation& x) {
    const int m = x.size();
    const std::vector<int> pos = x.positions();
    std::vector<std::int8_t> signs(pair_count(m));
    long long idx = 0;
    for (int a = 0; a < m - 1; ++a) {
        for (int b = a + 1; b < m; ++b) {
            signs[idx++] = pos[a] < pos[b] ? 1 : -1;
        }
    }
    return PwoVector(m, std::move(signs));
}

Permutation random_permutation(int m, std::mt19937_64& rng) {
    if (m < 2) {
        throw std::invalid_argument("random_permutation: m must be >= 2");
    }
    std::vector<int> e(m);
    std::iota(e.begin(), e.end(), 0);
    for (int i = m - 1; i > 0; --i) {
        std::uniform_int_distribution<int> pick(0, i);
        std::swap(e[i], e[pick(rng)]);
    }
    return Permutation(std::move(e));
}

} // namespace oaforge
