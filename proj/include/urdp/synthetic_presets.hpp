#pragma once

#include <string>
#include <vector>

#include "urdp/evaluator.hpp"
#include "urdp/reward_model.hpp"

namespace urdp {

// A bundled synthetic task: the task spec, a canonical candidate that covers
// the vocabulary, bench-time uncertainty weights, and the known optimum.
struct SyntheticPreset {
    std::string name;
    SyntheticTaskSpec spec;
    std::string canonical_code;
    std::vector<double> bench_dim_u;  // per hyperparameter, declaration order
    double bench_sample_u = 1.0;
    std::vector<double> optimum_theta;
    double optimum_value = 0.0;
};

std::vector<std::string> preset_names();

// "d2", "d4", or "d6m2" (six tunables, two of which carry fitness).
SyntheticPreset make_preset(const std::string& name);

// Parses the canonical code into a sample (sample_id/iteration = 0).
RewardFunctionSample preset_sample(const SyntheticPreset& preset);

}  // namespace urdp
