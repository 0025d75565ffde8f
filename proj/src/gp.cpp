#include "urdp/gp.hpp"

#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

namespace urdp::gp {
namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& x, const KernelParams& params) {
    const auto n = x.rows();
    Eigen::MatrixXd c(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd xi = x.row(i).transpose();
        c(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d = weighted_distance(xi, x.row(j).transpose(), params.per_dim_lengths);
            const double t = std::sqrt(2.0 * params.nu) * d / params.global_length;
            c(i, j) = c(j, i) = matern_profile(t, params.nu);
        }
    }
    return c;
}

// LLT with an escalating diagonal jitter; returns the factor and the jitter
// actually applied.
std::pair<Eigen::MatrixXd, double> cholesky_with_jitter(const Eigen::MatrixXd& k) {
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (llt.info() == Eigen::Success) {
        return {Eigen::MatrixXd(llt.matrixL()), 0.0};
    }
    for (double jitter = 1e-10; jitter <= 1e-4 * 1.0000001; jitter *= 10.0) {
        Eigen::MatrixXd kj = k;
        kj.diagonal().array() += jitter;
        llt.compute(kj);
        if (llt.info() == Eigen::Success) {
            return {Eigen::MatrixXd(llt.matrixL()), jitter};
        }
    }
    throw SingularKernelError("Cholesky failed after exhausting the jitter ladder");
}

}  // namespace

double matern_profile(double t, double nu) {
    if (t < 0.0) t = -t;
    if (nu == 0.5) {
        return std::exp(-t);
    }
    if (nu == 1.5) {
        return (1.0 + t) * std::exp(-t);
    }
    if (nu == 2.5) {
        return (1.0 + t + t * t / 3.0) * std::exp(-t);
    }
    throw ConfigError("nu must be one of {0.5, 1.5, 2.5}");
}

double weighted_distance(const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                         const Eigen::VectorXd& per_dim_lengths) {
    if (p.size() != q.size() || p.size() != per_dim_lengths.size()) {
        throw DimensionMismatchError("weighted_distance: dimension mismatch");
    }
    double sum = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        const double d = (p(i) - q(i)) / per_dim_lengths(i);
        sum += d * d;
    }
    return std::sqrt(sum);
}

double kernel_eval(const Eigen::VectorXd& p, const Eigen::VectorXd& q, const KernelParams& params) {
    const double d = weighted_distance(p, q, params.per_dim_lengths);
    const double t = std::sqrt(2.0 * params.nu) * d / params.global_length;
    return params.variance * matern_profile(t, params.nu);
}

GpModel fit(const Eigen::MatrixXd& train_x, const Eigen::VectorXd& train_y,
            const Eigen::VectorXd& lengths_from_uncertainty, double global_from_uncertainty,
            const FitConfig& config) {
    const auto n = train_x.rows();
    if (n < 1) throw ConfigError("fit requires at least one training point");
    if (train_y.size() != n) throw DimensionMismatchError("fit: x/y row count mismatch");
    if (lengths_from_uncertainty.size() != train_x.cols()) {
        throw DimensionMismatchError("fit: length-scale vector does not match input dimension");
    }

    GpModel model;
    model.kernel.nu = config.nu;
    model.kernel.per_dim_lengths = lengths_from_uncertainty.cwiseMax(kUncertaintyFloor);
    model.kernel.global_length = std::max(global_from_uncertainty, kUncertaintyFloor);
    model.train_x = train_x;

    model.y_mean = train_y.mean();
    const double var = (train_y.array() - model.y_mean).square().sum() / static_cast<double>(n);
    model.y_std = std::sqrt(var);
    if (model.y_std < 1e-12) model.y_std = 1.0;
    model.train_y = (train_y.array() - model.y_mean) / model.y_std;

    const Eigen::MatrixXd corr = correlation_matrix(train_x, model.kernel);

    double best_lml = -std::numeric_limits<double>::infinity();
    bool fitted = false;
    for (double variance : config.variance_grid) {
        for (double noise : config.noise_grid) {
            Eigen::MatrixXd k = variance * corr;
            k.diagonal().array() += noise;
            Eigen::MatrixXd chol;
            try {
                chol = cholesky_with_jitter(k).first;
            } catch (const SingularKernelError&) {
                continue;
            }
            const Eigen::VectorXd solved =
                chol.transpose().triangularView<Eigen::Upper>().solve(
                    chol.triangularView<Eigen::Lower>().solve(model.train_y));
            const double lml = -0.5 * model.train_y.dot(solved) -
                               chol.diagonal().array().log().sum() -
                               0.5 * static_cast<double>(n) * std::log(2.0 * kPi);
            if (lml > best_lml) {
                best_lml = lml;
                model.kernel.variance = variance;
                model.noise_variance = noise;
                model.chol = std::move(chol);
                model.alpha = solved;
                fitted = true;
            }
        }
    }
    if (!fitted) {
        throw SingularKernelError("no (variance, noise) grid point factorized");
    }
    model.log_marginal = best_lml;
    return model;
}

Posterior posterior(const GpModel& model, const Eigen::VectorXd& query) {
    if (query.size() != model.train_x.cols()) {
        throw DimensionMismatchError("posterior: query dimension mismatch");
    }
    const auto n = model.size();
    Eigen::VectorXd k(n);
    for (int i = 0; i < n; ++i) {
        k(i) = kernel_eval(model.train_x.row(i).transpose(), query, model.kernel);
    }
    const Eigen::VectorXd v = model.chol.triangularView<Eigen::Lower>().solve(k);
    const double mean_std = k.dot(model.alpha);
    double var_std = model.kernel.variance - v.squaredNorm();
    if (var_std < 0.0) var_std = 0.0;

    Posterior p;
    p.mean = model.y_mean + model.y_std * mean_std;
    p.variance = var_std * model.y_std * model.y_std;
    return p;
}

void to_json(nlohmann::json& j, const GpModel& m) {
    j = nlohmann::json{{"variance", m.kernel.variance},
                       {"nu", m.kernel.nu},
                       {"per_dim_lengths", std::vector<double>(m.kernel.per_dim_lengths.begin(),
                                                               m.kernel.per_dim_lengths.end())},
                       {"global_length", m.kernel.global_length},
                       {"noise_variance", m.noise_variance},
                       {"n_train", m.size()},
                       {"log_marginal", m.log_marginal}};
}

}  // namespace urdp::gp
