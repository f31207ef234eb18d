#include "oaforge/bo.hpp"

#include "oaforge/anneal.hpp"
#include "oaforge/error.hpp"

#include <algorithm>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>

namespace oaforge {

namespace {

std::vector<Permutation> initial_design(const TspInstance& instance, const BoConfig& cfg,
                                        std::mt19937_64& rng) {
    const int m = instance.m();
    if (cfg.init_mode == BoInitMode::Srs) {
        return srs_design(cfg.n_init, m, rng).runs();
    }
    AnnealConfig acfg;
    acfg.m = m;
    acfg.n = cfg.n_init;
    acfg.lambda = cfg.lambda;
    if (cfg.n_init % 2 == 0) {
        return run_fsa_kd(acfg, rng).design.runs();
    }
    return odd_run_design(acfg, rng).runs();
}

Permutation random_unevaluated(int m, const std::set<CanonicalKey>& evaluated,
                               std::mt19937_64& rng) {
    for (int attempt = 0; attempt < 100000; ++attempt) {
        Permutation x = random_permutation(m, rng);
        if (evaluated.count(canonical_key(x)) == 0) {
            return x;
        }
    }
    throw InfeasibleError("run_bo: could not draw an unevaluated permutation");
}

/// Best-improvement ascent of the acquisition over the all-pairs swap
/// neighborhood, never stepping onto an evaluated point.
Permutation acquisition_search(const GpModel& model, double best_y, int m,
                               const std::set<CanonicalKey>& evaluated, int restarts,
                               std::mt19937_64& rng) {
    std::optional<Permutation> overall;
    double overall_ei = -std::numeric_limits<double>::infinity();
    const int step_cap = 500; // the ascent terminates long before this

    for (int r = 0; r < restarts; ++r) {
        Permutation current = random_unevaluated(m, evaluated, rng);
        double current_ei = expected_improvement(model, current, best_y);
        for (int step = 0; step < step_cap; ++step) {
            std::optional<Permutation> best_neighbor;
            double best_neighbor_ei = current_ei;
            for (int s = 0; s < m - 1; ++s) {
                for (int t = s + 1; t < m; ++t) {
                    std::vector<int> e = current.entries();
                    std::swap(e[s], e[t]);
                    Permutation neighbor(std::move(e));
                    if (evaluated.count(canonical_key(neighbor)) > 0) {
                        continue;
                    }
                    const double ei = expected_improvement(model, neighbor, best_y);
                    if (ei > best_neighbor_ei) {
                        best_neighbor_ei = ei;
                        best_neighbor = std::move(neighbor);
                    }
                }
            }
            if (!best_neighbor) {
                break;
            }
            current = std::move(*best_neighbor);
            current_ei = best_neighbor_ei;
        }
        if (current_ei > overall_ei) {
            overall_ei = current_ei;
            overall = std::move(current);
        }
    }
    if (!overall) {
        return random_unevaluated(m, evaluated, rng);
    }
    return *overall;
}

} // namespace

BoResult run_bo(const TspInstance& instance, const BoConfig& cfg) {
    const int m = instance.m();
    const long long total = static_cast<long long>(cfg.n_init) + cfg.n_seq;
    if (cfg.n_init < 2 || cfg.n_seq < 0) {
        throw std::invalid_argument("run_bo: require n_init >= 2 and n_seq >= 0");
    }
    if (total > factorial_capped(m, total)) {
        throw std::invalid_argument("run_bo: n_init + n_seq exceeds m! distinct evaluations");
    }
    if (cfg.restarts < 1) {
        throw std::invalid_argument("run_bo: restarts must be >= 1");
    }

    std::mt19937_64 rng(cfg.seed);
    BoResult result;
    result.evaluated = initial_design(instance, cfg, rng);

    std::set<CanonicalKey> seen;
    double best = std::numeric_limits<double>::infinity();
    for (const Permutation& x : result.evaluated) {
        seen.insert(canonical_key(x));
        const double y = tsp_objective(x, instance);
        result.values.push_back(y);
        best = std::min(best, y);
        result.best_so_far.push_back(best);
    }

    for (int step = 0; step < cfg.n_seq; ++step) {
        const GpModel model = GpModel::fit(result.evaluated, result.values);
        Permutation next = acquisition_search(model, best, m, seen, cfg.restarts, rng);
        // Duplicate policy: the search already skips evaluated points, so
        // this only fires in pathological states; an evaluated proposal is
        // replaced by its best unevaluated neighbor.
        if (seen.count(canonical_key(next)) > 0) {
            std::optional<Permutation> repl;
            double repl_ei = -std::numeric_limits<double>::infinity();
            for (int s = 0; s < m - 1; ++s) {
                for (int t = s + 1; t < m; ++t) {
                    std::vector<int> e = next.entries();
                    std::swap(e[s], e[t]);
                    Permutation neighbor(std::move(e));
                    if (seen.count(canonical_key(neighbor)) > 0) {
                        continue;
                    }
                    const double ei = expected_improvement(model, neighbor, best);
                    if (ei > repl_ei) {
                        repl_ei = ei;
                        repl = std::move(neighbor);
                    }
                }
            }
            next = repl ? *repl : random_unevaluated(m, seen, rng);
        }
        seen.insert(canonical_key(next));
        const double y = tsp_objective(next, instance);
        result.evaluated.push_back(std::move(next));
        result.values.push_back(y);
        best = std::min(best, y);
        result.best_so_far.push_back(best);
    }
    return result;
}

} // namespace oaforge
