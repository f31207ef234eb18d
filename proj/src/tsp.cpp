#include "oaforge/tsp.hpp"

#include "oaforge/error.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace oaforge {

TspInstance::TspInstance(int m, std::vector<double> cost_row_major)
    : m_(m), cost_(std::move(cost_row_major)) {
    if (m_ < 2 || cost_.size() != static_cast<std::size_t>(m_) * m_) {
        throw std::invalid_argument("TspInstance: expected an m x m cost matrix with m >= 2");
    }
    for (int i = 0; i < m_; ++i) {
        if (cost(i, i) != 0.0) {
            throw std::invalid_argument("TspInstance: diagonal must be zero");
        }
        for (int j = 0; j < m_; ++j) {
            const double c = cost(i, j);
            if (!std::isfinite(c) || c < 0.0) {
                throw std::invalid_argument("TspInstance: costs must be finite and nonnegative");
            }
        }
    }
}

TspInstance TspInstance::random_euclidean(int m, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coord(0.0, 1.0);
    std::vector<double> xs(m), ys(m);
    for (int i = 0; i < m; ++i) {
        xs[i] = coord(rng);
        ys[i] = coord(rng);
    }
    std::vector<double> cost(static_cast<std::size_t>(m) * m, 0.0);
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            const double d = std::hypot(xs[i] - xs[j], ys[i] - ys[j]);
            cost[static_cast<std::size_t>(i) * m + j] = d;
            cost[static_cast<std::size_t>(j) * m + i] = d;
        }
    }
    return TspInstance(m, std::move(cost));
}

TspInstance TspInstance::random_asymmetric(int m, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> draw(0.1, 1.0);
    std::vector<double> cost(static_cast<std::size_t>(m) * m, 0.0);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            if (i != j) {
                cost[static_cast<std::size_t>(i) * m + j] = draw(rng);
            }
        }
    }
    return TspInstance(m, std::move(cost));
}

TspInstance TspInstance::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError(0, "cannot open TSP instance file: " + path);
    }
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) {
        throw ParseError(1, "missing header line with m");
    }
    ++lineno;
    int m = 0;
    try {
        m = std::stoi(line);
    } catch (const std::exception&) {
        throw ParseError(lineno, "header must hold the city count m");
    }
    if (m < 2) {
        throw ParseError(lineno, "m must be >= 2");
    }
    std::vector<double> cost;
    cost.reserve(static_cast<std::size_t>(m) * m);
    for (int r = 0; r < m; ++r) {
        if (!std::getline(in, line)) {
            throw ParseError(lineno + 1, "expected " + std::to_string(m) + " matrix rows");
        }
        ++lineno;
        std::stringstream ss(line);
        std::string cell;
        int cols = 0;
        while (std::getline(ss, cell, ',')) {
            try {
                cost.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw ParseError(lineno, "invalid cost value '" + cell + "'");
            }
            ++cols;
        }
        if (cols != m) {
            throw ParseError(lineno, "expected " + std::to_string(m) + " columns, got " +
                                         std::to_string(cols));
        }
    }
    try {
        return TspInstance(m, std::move(cost));
    } catch (const std::invalid_argument& e) {
        throw ParseError(lineno, e.what());
    }
}

void TspInstance::save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write TSP instance file: " + path);
    }
    out << m_ << "\n";
    out.precision(17);
    for (int i = 0; i < m_; ++i) {
        for (int j = 0; j < m_; ++j) {
            out << (j ? "," : "") << cost(i, j);
        }
        out << "\n";
    }
}

double tsp_objective(const Permutation& x, const TspInstance& instance) {
    if (x.size() != instance.m()) {
        throw std::invalid_argument("tsp_objective: permutation size does not match the instance");
    }
    const int m = instance.m();
    double total = 0.0;
    for (int r = 0; r + 1 < m; ++r) {
        total += instance.cost(x.component_at(r), x.component_at(r + 1));
    }
    total += instance.cost(x.component_at(m - 1), x.component_at(0));
    return total;
}

} // namespace oaforge
