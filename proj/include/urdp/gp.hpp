#pragma once

#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "urdp/errors.hpp"

namespace urdp::gp {

// Lower floor for uncertainty-derived length scales; a fully duplicated
// component (U = 0) would otherwise make distances infinite.
inline constexpr double kUncertaintyFloor = 0.05;

struct KernelParams {
    double variance = 1.0;  // sigma^2
    double nu = 2.5;        // one of {0.5, 1.5, 2.5}
    Eigen::VectorXd per_dim_lengths;  // component uncertainties, floored
    double global_length = 1.0;       // sample uncertainty, floored
};

// Euclidean norm of coordinate-wise differences divided by per-dimension
// lengths. Throws DimensionMismatchError.
double weighted_distance(const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                         const Eigen::VectorXd& per_dim_lengths);

// sigma^2 * m_nu(sqrt(2 nu) d_u / global_length) with the closed-form
// Matern profile for half-integer nu.
double kernel_eval(const Eigen::VectorXd& p, const Eigen::VectorXd& q, const KernelParams& params);

// Closed-form Matern correlation profile m_nu(t), m_nu(0) = 1.
double matern_profile(double t, double nu);

struct FitConfig {
    double nu = 2.5;
    // Grids over (sigma^2, noise) searched by log marginal likelihood;
    // targets are standardized so the variance grid is dimensionless.
    std::vector<double> variance_grid = {0.25, 1.0, 4.0};
    std::vector<double> noise_grid = {1e-6, 1e-4, 1e-2};
};

struct GpModel {
    KernelParams kernel;
    double noise_variance = 0.0;
    Eigen::MatrixXd train_x;  // rows are points in the unit box
    Eigen::VectorXd train_y;  // standardized targets
    Eigen::MatrixXd chol;     // lower-triangular L with L L^T = K + noise I
    Eigen::VectorXd alpha;    // (K + noise I)^{-1} y
    double y_mean = 0.0;
    double y_std = 1.0;
    double log_marginal = 0.0;

    int dim() const { return static_cast<int>(train_x.cols()); }
    int size() const { return static_cast<int>(train_x.rows()); }
};

// Fits the surrogate: standardizes y, floors the uncertainty-derived length
// scales, grid-selects (sigma^2, noise) by log marginal likelihood, and
// factorizes with a jitter ladder. Length scales are never fitted; they
// carry the uncertainty signal. Throws SingularKernelError if the ladder is
// exhausted.
GpModel fit(const Eigen::MatrixXd& train_x, const Eigen::VectorXd& train_y,
            const Eigen::VectorXd& lengths_from_uncertainty, double global_from_uncertainty,
            const FitConfig& config = {});

struct Posterior {
    double mean = 0.0;
    double variance = 0.0;  // clamped at zero, de-standardized
};

Posterior posterior(const GpModel& model, const Eigen::VectorXd& query);

void to_json(nlohmann::json& j, const GpModel& m);  // summary only (params + LML)

}  // namespace urdp::gp
