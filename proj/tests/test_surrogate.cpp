#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "oaforge/anneal.hpp"
#include "oaforge/bo.hpp"
#include "oaforge/error.hpp"
#include "oaforge/foldover.hpp"
#include "oaforge/gp.hpp"
#include "oaforge/tsp.hpp"

#include "oracles.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>

using namespace oaforge;

namespace {

Design design_d1() {
    return Design({Permutation({0, 1, 2, 3}), Permutation({1, 2, 3, 0}),
                   Permutation({2, 3, 0, 1}), Permutation({3, 0, 1, 2})});
}

} // namespace

TEST_CASE("kernel values") {
    const Permutation x({0, 1, 2, 3});
    const Permutation y({1, 2, 3, 0});
    CHECK(mallows_kernel(x, x, 0.7) == 1.0);
    CHECK(mallows_kernel(x, y, 0.0) == 1.0);
    CHECK(mallows_kernel(x, y, 0.1) == doctest::Approx(std::exp(-0.3)).epsilon(1e-12));
    CHECK_THROWS_AS(mallows_kernel(x, y, -1.0), std::invalid_argument);
}

TEST_CASE("kernel matrices") {
    const MallowsKernelParams params{0.5, 1e-8};
    const Eigen::MatrixXd k = kernel_matrix(design_d1().runs(), params);
    REQUIRE(k.rows() == 4);
    for (int i = 0; i < 4; ++i) {
        CHECK(k(i, i) == doctest::Approx(1.0 + 1e-8));
    }
    // All eigenvalues positive at this nugget.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
    CHECK(es.eigenvalues().minCoeff() > 0.0);

    // A foldover pair sits at the maximum distance q.
    const HalfDesign half({Permutation({0, 1, 2, 3}), Permutation({1, 3, 0, 2})});
    const Eigen::MatrixXd kf = kernel_matrix(expand(half).runs(), params);
    CHECK(kf(0, 2) == doctest::Approx(std::exp(-0.5 * 6.0)).epsilon(1e-12));
}

TEST_CASE("log determinant") {
    const std::vector<Permutation> rows = design_d1().runs();
    const double ld = log_det(rows, {0.5, 1e-8});

    // Row reordering leaves the determinant unchanged.
    std::vector<Permutation> shuffled{rows[2], rows[0], rows[3], rows[1]};
    CHECK(log_det(shuffled, {0.5, 1e-8}) == doctest::Approx(ld).epsilon(1e-12));

    // Identical rows without a nugget are singular.
    const std::vector<Permutation> dup{rows[0], rows[0]};
    CHECK_THROWS_AS(log_det(dup, {0.5, 0.0}), ConditioningError);

    // Large theta drives the matrix to the identity and the log det to 0.
    CHECK(std::abs(log_det(rows, {50.0, 0.0})) < 1e-9);
}

TEST_CASE("kernel positive definiteness over random distinct designs") {
    std::mt19937_64 rng(59);
    const double thetas[] = {0.05, 0.1, 0.2, 0.5, 1.0};
    for (int rep = 0; rep < 100; ++rep) {
        const int m = 4 + rep % 7;
        const long long n = std::min<long long>(6 + rep % 35, factorial_capped(m, 40));
        const Design d = srs_design(n, m, rng);
        const Eigen::MatrixXd k = kernel_matrix(d.runs(), {thetas[rep % 5], 1e-8});
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
        CHECK(es.eigenvalues().minCoeff() > 0.0);
    }
}

TEST_CASE("gp fit and prediction") {
    const TspInstance inst = TspInstance::random_euclidean(6, 2024);
    std::mt19937_64 rng(61);
    const Design d = srs_design(12, 6, rng);
    std::vector<double> y;
    for (const Permutation& x : d.runs()) {
        y.push_back(tsp_objective(x, inst));
    }
    const GpModel model = GpModel::fit(d.runs(), y);

    // Interpolation at the training points to nugget-scale error.
    for (std::size_t i = 0; i < y.size(); ++i) {
        const GpPrediction p = model.predict(d.run(i));
        CHECK(std::abs(p.mean - y[i]) < 1e-6);
        CHECK(p.variance < 1e-6);
    }

    // Far point at large theta reverts to the process mean and variance.
    const GpModel wide = GpModel::fit(d.runs(), y, {8.0});
    const Permutation far_point({5, 4, 3, 2, 1, 0});
    bool in_training = false;
    for (const Permutation& x : d.runs()) {
        in_training = in_training || x == far_point;
    }
    if (!in_training) {
        const GpPrediction p = wide.predict(far_point);
        CHECK(p.mean == doctest::Approx(wide.mu()).epsilon(1e-3));
        CHECK(p.variance == doctest::Approx(wide.sigma2()).epsilon(1e-3));
    }

    // Constant outputs collapse to the constant with vanishing variance.
    std::vector<double> flat(d.runs().size(), 3.25);
    const GpModel cm = GpModel::fit(d.runs(), flat);
    CHECK(cm.mu() == doctest::Approx(3.25).epsilon(1e-9));
    const GpPrediction p = cm.predict(far_point);
    CHECK(p.mean == doctest::Approx(3.25).epsilon(1e-6));
    CHECK(p.variance < 1e-9);
}

TEST_CASE("predictions agree with a dense-solve oracle") {
    const TspInstance inst = TspInstance::random_euclidean(7, 7);
    std::mt19937_64 rng(67);
    const Design d = srs_design(14, 7, rng);
    std::vector<double> y;
    for (const Permutation& x : d.runs()) {
        y.push_back(tsp_objective(x, inst));
    }
    const GpModel model = GpModel::fit(d.runs(), y);

    // Independent route: full-pivot LU on the same kernel matrix.
    const Eigen::MatrixXd sigma = kernel_matrix(d.runs(), model.params());
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sigma);
    Eigen::VectorXd yv(14);
    for (int i = 0; i < 14; ++i) {
        yv(i) = y[i];
    }
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(14);
    const double mu = ones.dot(lu.solve(yv)) / ones.dot(lu.solve(ones));
    const Eigen::VectorXd alpha = lu.solve(yv - mu * ones);

    for (int rep = 0; rep < 50; ++rep) {
        const Permutation x = random_permutation(7, rng);
        Eigen::VectorXd k(14);
        for (int i = 0; i < 14; ++i) {
            k(i) = std::exp(-model.params().theta * kendall_distance(x, d.run(i)));
        }
        const double mean = mu + k.dot(alpha);
        const double var =
            std::max(model.sigma2() * (1.0 - k.dot(lu.solve(k))), 0.0);
        const GpPrediction p = model.predict(x);
        CHECK(p.mean == doctest::Approx(mean).epsilon(1e-8));
        CHECK(p.variance == doctest::Approx(var).epsilon(1e-8).scale(1.0));
    }
}

TEST_CASE("expected improvement") {
    const TspInstance inst = TspInstance::random_euclidean(6, 99);
    std::mt19937_64 rng(71);
    const Design d = srs_design(10, 6, rng);
    std::vector<double> y;
    for (const Permutation& x : d.runs()) {
        y.push_back(tsp_objective(x, inst));
    }
    const GpModel model = GpModel::fit(d.runs(), y);
    const double best = *std::min_element(y.begin(), y.end());

    // Nonnegative everywhere.
    for (int rep = 0; rep < 200; ++rep) {
        CHECK(expected_improvement(model, random_permutation(6, rng), best) >= 0.0);
    }

    // Deterministic limits at a training point (variance collapses).
    std::size_t best_i = 0, worst_i = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] < y[best_i]) {
            best_i = i;
        }
        if (y[i] > y[worst_i]) {
            worst_i = i;
        }
    }
    CHECK(expected_improvement(model, d.run(worst_i), best) < 1e-6);
    const double gap = 1.0;
    CHECK(expected_improvement(model, d.run(best_i), best + gap) ==
          doctest::Approx(gap).epsilon(1e-3));

    // Closed-form properties: zero-deviation limits, and strictly more
    // expected improvement from more predictive spread at a fixed gap.
    CHECK(expected_improvement_value(-0.5, 0.0) == 0.0);
    CHECK(expected_improvement_value(0.5, 0.0) == 0.5);
    // Deviations are kept away from zero so the z-scores stay in a range
    // where the gain from extra spread is numerically resolvable.
    std::uniform_real_distribution<double> imp_draw(-1.5, 1.5);
    std::uniform_real_distribution<double> s_draw(0.25, 2.0);
    for (int rep = 0; rep < 200; ++rep) {
        const double imp = imp_draw(rng);
        const double s1 = s_draw(rng);
        const double s2 = s1 + s_draw(rng);
        CHECK(expected_improvement_value(imp, s1) >= 0.0);
        CHECK(expected_improvement_value(imp, s2) > expected_improvement_value(imp, s1));
    }
}

TEST_CASE("tour objective") {
    const TspInstance zero(3, std::vector<double>(9, 0.0));
    CHECK(tsp_objective(Permutation({0, 1, 2}), zero) == 0.0);

    // Symmetric 3-city instance: every tour costs the full triangle.
    const std::vector<double> tri{0, 1, 3, 1, 0, 2, 3, 2, 0};
    const TspInstance inst(3, tri);
    for (const Permutation& x : oracle::full_design_runs(3)) {
        CHECK(tsp_objective(x, inst) == doctest::Approx(6.0));
    }

    // Rotations preserve the tour; reversal needs symmetry.
    const TspInstance e = TspInstance::random_euclidean(8, 5);
    std::mt19937_64 rng(73);
    for (int rep = 0; rep < 50; ++rep) {
        const Permutation x = random_permutation(8, rng);
        std::vector<int> rot(x.entries().begin() + 1, x.entries().end());
        rot.push_back(x.component_at(0));
        CHECK(tsp_objective(Permutation(rot), e) == doctest::Approx(tsp_objective(x, e)));
        CHECK(tsp_objective(x.foldover(), e) == doctest::Approx(tsp_objective(x, e)));
    }

    CHECK_THROWS_AS(tsp_objective(Permutation({0, 1, 2, 3}), inst), std::invalid_argument);
    CHECK_THROWS_AS(TspInstance(2, {0.0, 1.0, 1.0, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(TspInstance(2, {0.0, -1.0, -1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("directional instances break reversal symmetry") {
    const TspInstance inst = TspInstance::random_asymmetric(7, 17);
    bool asymmetric = false;
    for (int i = 0; i < 7; ++i) {
        CHECK(inst.cost(i, i) == 0.0);
        for (int j = 0; j < 7; ++j) {
            if (i != j) {
                CHECK(inst.cost(i, j) >= 0.1);
                CHECK(inst.cost(i, j) <= 1.0);
                asymmetric = asymmetric || inst.cost(i, j) != inst.cost(j, i);
            }
        }
    }
    CHECK(asymmetric);

    std::mt19937_64 rng(19);
    bool some_reverse_differs = false;
    for (int rep = 0; rep < 20; ++rep) {
        const Permutation x = random_permutation(7, rng);
        some_reverse_differs =
            some_reverse_differs ||
            tsp_objective(x, inst) != tsp_objective(x.foldover(), inst);
    }
    CHECK(some_reverse_differs);
}

TEST_CASE("instance files round-trip") {
    const TspInstance inst = TspInstance::random_euclidean(5, 11);
    const std::string path = "tsp_roundtrip_test.csv";
    inst.save_csv(path);
    const TspInstance back = TspInstance::load_csv(path);
    REQUIRE(back.m() == 5);
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) {
            CHECK(back.cost(i, j) == inst.cost(i, j));
        }
    }
    std::remove(path.c_str());
    CHECK_THROWS_AS(TspInstance::load_csv("does_not_exist.csv"), ParseError);
}

TEST_CASE("bo traces") {
    const TspInstance inst = TspInstance::random_euclidean(6, 31);
    BoConfig cfg;
    cfg.n_init = 8;
    cfg.n_seq = 6;
    cfg.restarts = 4;
    cfg.seed = 3;
    for (const BoInitMode mode : {BoInitMode::FsaKd, BoInitMode::Srs}) {
        cfg.init_mode = mode;
        const BoResult result = run_bo(inst, cfg);
        REQUIRE(result.best_so_far.size() == 14);
        REQUIRE(result.evaluated.size() == 14);

        // Nonincreasing incumbent; the first n_init entries are the running
        // minimum of the initial evaluations.
        double running = result.values[0];
        for (int i = 0; i < cfg.n_init; ++i) {
            running = std::min(running, result.values[i]);
            CHECK(result.best_so_far[i] == running);
        }
        for (std::size_t i = 1; i < result.best_so_far.size(); ++i) {
            CHECK(result.best_so_far[i] <= result.best_so_far[i - 1]);
        }

        // No permutation is evaluated twice.
        std::set<CanonicalKey> keys;
        for (const Permutation& x : result.evaluated) {
            CHECK(keys.insert(canonical_key(x)).second);
        }
    }
}

TEST_CASE("bo accepts odd initial sizes through the deletion construction") {
    const TspInstance inst = TspInstance::random_asymmetric(5, 23);
    BoConfig cfg;
    cfg.n_init = 7;
    cfg.n_seq = 3;
    cfg.restarts = 3;
    cfg.seed = 11;
    cfg.init_mode = BoInitMode::FsaKd;
    const BoResult result = run_bo(inst, cfg);
    CHECK(result.best_so_far.size() == 10);
    std::set<CanonicalKey> keys;
    for (const Permutation& x : result.evaluated) {
        CHECK(keys.insert(canonical_key(x)).second);
    }
}

TEST_CASE("sharp-kernel determinants favor separated foldover designs") {
    // Exhaustive 2-rep halves over S_4: the maximin class has within-half
    // distance 3; every other class is a competitor with a smaller minimum.
    const auto all = oracle::full_design_runs(4);
    std::vector<Design> maximin, competitors;
    long long best_kmin = -1;
    std::vector<long long> kmins;
    std::vector<Design> designs;
    std::vector<long long> nu_at_kmin;
    for (std::size_t i = 0; i < all.size(); ++i) {
        for (std::size_t j = i + 1; j < all.size(); ++j) {
            if (all[j] == all[i].foldover()) {
                continue;
            }
            const Design d = expand(HalfDesign({all[i], all[j]}));
            const DistanceHistogram h = distance_histogram(d);
            designs.push_back(d);
            kmins.push_back(k_min(h));
            nu_at_kmin.push_back(h.counts[k_min(h)]);
            best_kmin = std::max(best_kmin, kmins.back());
        }
    }
    REQUIRE(best_kmin == 3);

    // The representative optimum: minimal count at the critical distance
    // among the maximin designs.
    std::size_t star = 0;
    long long star_nu = -1;
    for (std::size_t i = 0; i < designs.size(); ++i) {
        if (kmins[i] == best_kmin && (star_nu < 0 || nu_at_kmin[i] < star_nu)) {
            star = i;
            star_nu = nu_at_kmin[i];
        }
    }

    // The competing determinants differ from 1 by less than double epsilon
    // at the sharpest decay rate, so the comparison runs in 50-digit
    // arithmetic.
    for (double theta : {5.0, 8.0, 12.0}) {
        const oracle::BigFloat det_star =
            oracle::mallows_det_highprec(designs[star].runs(), theta);
        for (std::size_t i = 0; i < designs.size(); ++i) {
            const bool competitor =
                kmins[i] < best_kmin || (kmins[i] == best_kmin && nu_at_kmin[i] > star_nu);
            if (!competitor) {
                continue; // ties at the same leading terms are excluded
            }
            CHECK(det_star > oracle::mallows_det_highprec(designs[i].runs(), theta));
        }
    }
}
