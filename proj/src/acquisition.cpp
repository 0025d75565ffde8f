#include "urdp/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "urdp/rng.hpp"

namespace urdp::acquisition {
namespace {

constexpr double kSigmaFloor = 1e-12;
constexpr double kGolden = 0.6180339887498949;  // 1/phi

Eigen::VectorXd clip_unit(Eigen::VectorXd v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        v(i) = std::clamp(v(i), 0.0, 1.0);
    }
    return v;
}

// Golden-section line search along dimension `dim` within [lo, hi];
// maximizes and updates (point, value) in place. Acquisition surfaces are
// not unimodal, so this is a local polish, not a global claim.
template <typename F>
void golden_section_dim(F&& f, Eigen::VectorXd& point, double& value, int dim,
                        double lo, double hi, int evals) {
    double a = lo, b = hi;
    Eigen::VectorXd probe = point;
    double x1 = b - kGolden * (b - a);
    double x2 = a + kGolden * (b - a);
    probe(dim) = x1;
    double f1 = f(probe);
    probe(dim) = x2;
    double f2 = f(probe);
    for (int it = 0; it < evals; ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kGolden * (b - a);
            probe(dim) = x2;
            f2 = f(probe);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kGolden * (b - a);
            probe(dim) = x1;
            f1 = f(probe);
        }
    }
    const double best_x = f1 > f2 ? x1 : x2;
    const double best_f = std::max(f1, f2);
    if (best_f > value) {
        value = best_f;
        point(dim) = best_x;
    }
}

}  // namespace

Mode mode_from_string(const std::string& s) {
    if (s == "EI" || s == "ei") return Mode::EI;
    if (s == "uEI" || s == "uei") return Mode::uEI;
    throw ConfigError("unknown acquisition mode: " + s);
}

std::string to_string(Mode mode) { return mode == Mode::EI ? "EI" : "uEI"; }

double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * 3.14159265358979323846);
}

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

double expected_improvement(const Context& ctx, const Eigen::VectorXd& query) {
    const gp::Posterior p = gp::posterior(*ctx.model, query);
    const double sigma = std::sqrt(std::max(p.variance, 0.0));
    if (sigma < kSigmaFloor) return 0.0;
    const double z = (p.mean - ctx.incumbent_y) / sigma;
    const double h = normal_pdf(z) + z * normal_cdf(z);
    return std::max(0.0, sigma * h);
}

double u_expected_improvement(const Context& ctx, const Eigen::VectorXd& query) {
    const double ei = expected_improvement(ctx, query);
    if (ei == 0.0) return 0.0;
    if (query.size() != ctx.incumbent_theta.size() || query.size() != ctx.component_u.size()) {
        throw DimensionMismatchError("u_expected_improvement: dimension mismatch");
    }
    double penalty = 0.0;
    for (Eigen::Index j = 0; j < query.size(); ++j) {
        const double d = query(j) - ctx.incumbent_theta(j);
        penalty += ctx.component_u(j) * d * d;
    }
    return ei * std::exp(-penalty);
}

double evaluate(const Context& ctx, const Eigen::VectorXd& query) {
    return ctx.mode == Mode::EI ? expected_improvement(ctx, query)
                                : u_expected_improvement(ctx, query);
}

Eigen::VectorXd maximize_acquisition(const Context& ctx, const OptConfig& config) {
    const int d = ctx.model->dim();
    const int n_starts = config.n_starts > 0 ? config.n_starts : std::max(32, 8 * d);
    Rng rng(mix_seed(config.seed, 0x61637175ULL));

    auto objective = [&](const Eigen::VectorXd& q) { return evaluate(ctx, q); };

    // Start set: stratified draws, the incumbent, and jittered copies of it.
    std::vector<Eigen::VectorXd> starts;
    for (const auto& row : latin_hypercube(n_starts, d, rng)) {
        starts.emplace_back(Eigen::Map<const Eigen::VectorXd>(row.data(), d));
    }
    if (ctx.incumbent_theta.size() == d) {
        starts.push_back(clip_unit(ctx.incumbent_theta));
        for (int k = 0; k < 4; ++k) {
            Eigen::VectorXd pert = ctx.incumbent_theta;
            for (int j = 0; j < d; ++j) pert(j) += 0.05 * rng.normal();
            starts.push_back(clip_unit(pert));
        }
    }

    struct Candidate {
        Eigen::VectorXd point;
        double value;
        size_t start_index;
    };
    std::vector<Candidate> candidates;
    candidates.reserve(starts.size());
    for (size_t s = 0; s < starts.size(); ++s) {
        candidates.push_back({starts[s], objective(starts[s]), s});
    }

    // One cheap coordinate sweep on every start.
    for (auto& c : candidates) {
        for (int j = 0; j < d; ++j) {
            const double radius = 0.25;
            golden_section_dim(objective, c.point, c.value, j,
                               std::max(0.0, c.point(j) - radius),
                               std::min(1.0, c.point(j) + radius), 6);
        }
    }

    // Full local descent on the leaders, shrinking the search radius when a
    // sweep stalls. Ties between candidates resolve to the lowest start index.
    std::vector<size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (candidates[a].value != candidates[b].value) {
            return candidates[a].value > candidates[b].value;
        }
        return candidates[a].start_index < candidates[b].start_index;
    });
    const int n_refine = std::min<int>(config.n_refine, static_cast<int>(order.size()));
    for (int r = 0; r < n_refine; ++r) {
        Candidate& c = candidates[order[r]];
        double radius = 0.25;
        int line_searches = 0;
        while (line_searches < config.local_iters && radius > 1e-4) {
            const double before = c.value;
            for (int j = 0; j < d && line_searches < config.local_iters; ++j, ++line_searches) {
                golden_section_dim(objective, c.point, c.value, j,
                                   std::max(0.0, c.point(j) - radius),
                                   std::min(1.0, c.point(j) + radius), 10);
            }
            if (c.value <= before * (1.0 + 1e-9) && c.value - before < 1e-15) {
                radius *= 0.5;
            }
        }
    }

    const Candidate* best = &candidates[0];
    for (const auto& c : candidates) {
        if (c.value > best->value ||
            (c.value == best->value && c.start_index < best->start_index)) {
            best = &c;
        }
    }
    return clip_unit(best->point);
}

}  // namespace urdp::acquisition
