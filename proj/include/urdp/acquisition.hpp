#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "urdp/gp.hpp"

namespace urdp::acquisition {

enum class Mode { EI, uEI };

Mode mode_from_string(const std::string& s);
std::string to_string(Mode mode);

// Everything an acquisition evaluation needs. incumbent_theta and queries
// live in normalized unit-box coordinates; incumbent_y is in raw fitness
// units (the posterior is de-standardized).
struct Context {
    const gp::GpModel* model = nullptr;
    double incumbent_y = 0.0;
    Eigen::VectorXd incumbent_theta;
    Eigen::VectorXd component_u;  // per-dimension U(r_j) in [0, 1]
    Mode mode = Mode::uEI;
};

// sigma(q) h(z) with z = (mu(q) - y*) / sigma(q), h(z) = phi(z) + z Phi(z);
// zero when the posterior deviation collapses below 1e-12.
double expected_improvement(const Context& ctx, const Eigen::VectorXd& query);

// EI(q) * exp(-sum_j U(r_j) (q_j - theta*_j)^2).
double u_expected_improvement(const Context& ctx, const Eigen::VectorXd& query);

// Dispatches on ctx.mode.
double evaluate(const Context& ctx, const Eigen::VectorXd& query);

struct OptConfig {
    std::uint64_t seed = 0;
    int n_starts = 0;       // 0 = max(32, 8 d)
    int local_iters = 100;  // coordinate line searches per refined start
    int n_refine = 4;       // starts given the full local budget
};

// Multi-start maximization over the unit box: stratified starts plus the
// incumbent and small perturbations of it, a cheap refinement sweep on every
// start, then full coordinate-wise golden-section descent on the leaders.
// Deterministic given the seed; the result is clipped to the unit box.
Eigen::VectorXd maximize_acquisition(const Context& ctx, const OptConfig& config = {});

// Standard normal pdf / cdf used by EI.
double normal_pdf(double z);
double normal_cdf(double z);

}  // namespace urdp::acquisition
