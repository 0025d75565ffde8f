#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <random>
#include <vector>

namespace urdp {

// Deterministic seed mixing (splitmix64 finalizer). Used to derive
// independent RNG streams per (seed, iteration, sample, purpose).
inline std::uint64_t mix_seed(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    return mix_seed(a ^ (mix_seed(b) + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

template <typename... Rest>
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, Rest... rest) {
    return mix_seed(mix_seed(a, b), static_cast<std::uint64_t>(rest)...);
}

inline std::uint64_t hash_double(double x) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(x));
    std::memcpy(&bits, &x, sizeof(bits));
    return mix_seed(bits);
}

// mt19937_64 output is pinned by the standard; the derived uniform/normal
// draws below avoid std::*_distribution, whose streams are
// implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform01() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Marsaglia polar method; no cached spare so the stream is easy to reason about.
    double normal() {
        for (;;) {
            const double u = 2.0 * uniform01() - 1.0;
            const double v = 2.0 * uniform01() - 1.0;
            const double s = u * u + v * v;
            if (s > 0.0 && s < 1.0) {
                return u * std::sqrt(-2.0 * std::log(s) / s);
            }
        }
    }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // Rejection-free modulo is biased; n here is always tiny relative to 2^64.
        return gen_() % n;
    }

private:
    std::mt19937_64 gen_;
};

// One stratified sample per axis-aligned stratum (Latin hypercube):
// rows are points in the unit box.
inline std::vector<std::vector<double>> latin_hypercube(int n, int d, Rng& rng) {
    std::vector<std::vector<double>> pts(n, std::vector<double>(d, 0.0));
    std::vector<int> perm(n);
    for (int j = 0; j < d; ++j) {
        for (int i = 0; i < n; ++i) perm[i] = i;
        for (int i = n - 1; i > 0; --i) {
            const int k = static_cast<int>(rng.below(static_cast<std::uint64_t>(i + 1)));
            std::swap(perm[i], perm[k]);
        }
        for (int i = 0; i < n; ++i) {
            pts[i][j] = (perm[i] + rng.uniform01()) / n;
        }
    }
    return pts;
}

}  // namespace urdp
