#include "oaforge/gp.hpp"

#include "oaforge/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace oaforge {

double mallows_kernel(const Permutation& x, const Permutation& y, double theta) {
    if (theta < 0.0) {
        throw std::invalid_argument("mallows_kernel: theta must be >= 0");
    }
    return std::exp(-theta * kendall_distance(x, y));
}

Eigen::MatrixXd kernel_matrix(const std::vector<Permutation>& runs,
                              const MallowsKernelParams& params) {
    const auto n = static_cast<Eigen::Index>(runs.size());
    std::vector<std::vector<int>> pos;
    pos.reserve(runs.size());
    for (const Permutation& x : runs) {
        pos.push_back(x.positions());
    }
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        k(i, i) = 1.0 + params.nugget;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v = std::exp(-params.theta * kendall_from_positions(pos[i], pos[j]));
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    return k;
}

namespace {

double log_det_from_llt(const Eigen::LLT<Eigen::MatrixXd>& llt) {
    double ld = 0.0;
    const auto& l = llt.matrixLLT();
    for (Eigen::Index i = 0; i < l.rows(); ++i) {
        ld += std::log(l(i, i));
    }
    return 2.0 * ld;
}

Eigen::LLT<Eigen::MatrixXd> factorize_or_throw(const Eigen::MatrixXd& k) {
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (llt.info() != Eigen::Success) {
        throw ConditioningError("kernel matrix is not positive definite at this nugget");
    }
    // Eigen can report Success on a semidefinite matrix; a zero or negative
    // pivot still means the factorization is unusable.
    const auto& l = llt.matrixLLT();
    for (Eigen::Index i = 0; i < l.rows(); ++i) {
        if (!(l(i, i) > 0.0) || !std::isfinite(l(i, i))) {
            throw ConditioningError("kernel matrix is not positive definite at this nugget");
        }
    }
    return llt;
}

} // namespace

double log_det(const std::vector<Permutation>& runs, const MallowsKernelParams& params) {
    return log_det_from_llt(factorize_or_throw(kernel_matrix(runs, params)));
}

std::vector<double> GpModel::default_theta_grid() {
    std::vector<double> grid;
    grid.reserve(25);
    const double lo = std::log10(1e-3);
    const double hi = std::log10(10.0);
    for (int i = 0; i < 25; ++i) {
        grid.push_back(std::pow(10.0, lo + (hi - lo) * i / 24.0));
    }
    return grid;
}

GpModel GpModel::fit(const std::vector<Permutation>& inputs, const std::vector<double>& outputs,
                     const std::vector<double>& theta_grid, double initial_nugget) {
    if (inputs.size() < 2 || inputs.size() != outputs.size()) {
        throw std::invalid_argument("GpModel::fit: need n >= 2 inputs with matching outputs");
    }
    if (theta_grid.empty()) {
        throw std::invalid_argument("GpModel::fit: empty theta grid");
    }
    const auto n = static_cast<Eigen::Index>(inputs.size());
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        y(i) = outputs[i];
    }
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);

    double best_ll = -std::numeric_limits<double>::infinity();
    bool have_fit = false;
    GpModel model;

    for (double theta : theta_grid) {
        MallowsKernelParams params{theta, initial_nugget};
        Eigen::LLT<Eigen::MatrixXd> llt;
        bool factorized = false;
        while (true) {
            try {
                llt = factorize_or_throw(kernel_matrix(inputs, params));
                factorized = true;
                break;
            } catch (const ConditioningError&) {
                if (params.nugget >= 1e-4) {
                    break;
                }
                params.nugget *= 10.0;
            }
        }
        if (!factorized) {
            continue;
        }

        const Eigen::VectorXd sy = llt.solve(y);
        const Eigen::VectorXd s1 = llt.solve(ones);
        const double denom = ones.dot(s1);
        if (!(denom > 0.0)) {
            continue;
        }
        const double mu = ones.dot(sy) / denom;
        const Eigen::VectorXd resid = y - mu * ones;
        const double sigma2 = std::max(resid.dot(llt.solve(resid)) / static_cast<double>(n), 0.0);
        const double ll = -0.5 * (static_cast<double>(n) * std::log(std::max(sigma2, 1e-300)) +
                                  log_det_from_llt(llt));
        if (!have_fit || ll > best_ll) {
            have_fit = true;
            best_ll = ll;
            model.params_ = params;
            model.mu_ = mu;
            model.sigma2_ = sigma2;
            model.sigma_inv_ = llt.solve(Eigen::MatrixXd::Identity(n, n));
            model.alpha_ = llt.solve(resid);
        }
    }

    if (!have_fit) {
        throw ConditioningError("GpModel::fit: factorization failed for every theta");
    }

    model.inputs_ = inputs;
    model.input_pos_.reserve(inputs.size());
    for (const Permutation& x : inputs) {
        model.input_pos_.push_back(x.positions());
    }
    model.y_ = y;
    const long long q = pair_count(inputs.front().size());
    model.corr_by_dist_.resize(q + 1);
    for (long long r = 0; r <= q; ++r) {
        model.corr_by_dist_[r] = std::exp(-model.params_.theta * static_cast<double>(r));
    }
    return model;
}

GpPrediction GpModel::predict(const Permutation& x) const {
    const auto n = static_cast<Eigen::Index>(inputs_.size());
    const std::vector<int> px = x.positions();
    Eigen::VectorXd k(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        k(i) = corr_by_dist_[kendall_from_positions(px, input_pos_[i])];
    }
    GpPrediction out;
    out.mean = mu_ + k.dot(alpha_);
    out.variance = std::max(sigma2_ * (1.0 - k.dot(sigma_inv_ * k)), 0.0);
    return out;
}

double expected_improvement_value(double improvement, double stddev) {
    if (stddev == 0.0) {
        return std::max(improvement, 0.0);
    }
    const double z = improvement / stddev;
    const double cdf = 0.5 * std::erfc(-z / std::sqrt(2.0));
    const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
    return improvement * cdf + stddev * pdf;
}

double expected_improvement(const GpModel& model, const Permutation& x, double best_y) {
    const GpPrediction p = model.predict(x);
    return expected_improvement_value(best_y - p.mean, std::sqrt(p.variance));
}

} // namespace oaforge
