#pragma once

#include "oaforge/perm.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <vector>

namespace oaforge {

struct MallowsKernelParams {
    double theta = 1.0;   // decay rate; > 0 for model use
    double nugget = 1e-8; // diagonal stabilizer
};

/// Mallows correlation exp(-theta * k(x, y)) in (0, 1].
double mallows_kernel(const Permutation& x, const Permutation& y, double theta);

/// n x n kernel correlation matrix with the nugget on the diagonal.
Eigen::MatrixXd kernel_matrix(const std::vector<Permutation>& runs,
                              const MallowsKernelParams& params);

/// log det of the kernel matrix via Cholesky. Throws ConditioningError when
/// the factorization fails (nugget too small).
double log_det(const std::vector<Permutation>& runs, const MallowsKernelParams& params);

struct GpPrediction {
    double mean = 0.0;
    double variance = 0.0; // floored at 0
};

/// Constant-mean Gaussian process over permutations with the Mallows
/// kernel. The decay rate is chosen by profile likelihood over a grid; the
/// process mean and variance have closed generalized-least-squares forms.
class GpModel {
public:
    /// Default grid: 25 logarithmic points on [1e-3, 10].
    static std::vector<double> default_theta_grid();

    /// Fits on distinct inputs (n >= 2). The nugget starts at
    /// `params.nugget` and is raised tenfold up to 1e-4 when a
    /// factorization fails; if every theta fails, throws ConditioningError.
    static GpModel fit(const std::vector<Permutation>& inputs, const std::vector<double>& outputs,
                       const std::vector<double>& theta_grid = default_theta_grid(),
                       double initial_nugget = 1e-8);

    GpPrediction predict(const Permutation& x) const;

    double mu() const { return mu_; }
    double sigma2() const { return sigma2_; }
    const MallowsKernelParams& params() const { return params_; }
    const std::vector<Permutation>& inputs() const { return inputs_; }

private:
    GpModel() = default;

    std::vector<Permutation> inputs_;
    std::vector<std::vector<int>> input_pos_;
    Eigen::VectorXd y_;
    double mu_ = 0.0;
    double sigma2_ = 0.0;
    MallowsKernelParams params_;
    Eigen::MatrixXd sigma_inv_;        // kept explicit; predict runs in the
                                       // acquisition inner loop
    Eigen::VectorXd alpha_;            // Sigma^{-1} (y - mu 1)
    std::vector<double> corr_by_dist_; // exp(-theta r), r = 0..q
};

/// Closed form of the expected improvement given the predicted improvement
/// best_y - mean and the predictive deviation.
double expected_improvement_value(double improvement, double stddev);

/// Expected improvement under the minimization convention; zero when the
/// predictive deviation vanishes and the mean does not improve on best_y.
double expected_improvement(const GpModel& model, const Permutation& x, double best_y);

} // namespace oaforge
