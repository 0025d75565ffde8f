#include "urdp/synthetic_presets.hpp"

#include <cmath>
#include <sstream>

namespace urdp {
namespace {

struct ConceptPlan {
    std::string stem;        // "distance" -> distance_reward / distance_temp
    double relevance;
    double target_theta;     // raw-scale optimum of the owning temperature
    std::string signal;      // expression the component transforms
};

SyntheticPreset build(const std::string& name, const std::vector<ConceptPlan>& plan) {
    SyntheticPreset preset;
    preset.name = name;
    preset.spec.task_name = name;
    preset.spec.noise_std = 0.0;
    preset.spec.coverage_bonus = 0.5;
    preset.spec.irrelevant_penalty = 0.1;
    preset.spec.sparse_score = 0.0;

    std::ostringstream code;
    code << "def compute_reward(obs: torch.Tensor) -> Tuple[torch.Tensor, Dict[str, torch.Tensor]]:\n";
    for (const auto& c : plan) {
        code << "    " << c.stem << "_temp = 1.0\n";
    }
    for (const auto& c : plan) {
        code << "    " << c.stem << "_signal = " << c.signal << "\n";
        TaskConcept tc;
        tc.name = c.stem + "_reward";
        tc.description = c.stem + "_reward";
        tc.relevance = c.relevance;
        tc.target_log_theta = std::log(c.target_theta);
        preset.spec.vocabulary.push_back(std::move(tc));
    }
    for (const auto& c : plan) {
        code << "    " << c.stem << "_reward = torch.exp(-" << c.stem << "_temp * "
             << c.stem << "_signal)\n";
    }
    code << "    total_reward =";
    for (size_t i = 0; i < plan.size(); ++i) {
        code << (i == 0 ? " " : " + ") << plan[i].stem << "_reward";
    }
    code << "\n    reward_components = {\n";
    for (size_t i = 0; i < plan.size(); ++i) {
        code << "        \"" << plan[i].stem << "_reward\": " << plan[i].stem << "_reward"
             << (i + 1 < plan.size() ? "," : "") << "\n";
    }
    code << "    }\n";
    code << "    return total_reward, reward_components\n";
    preset.canonical_code = code.str();

    MockEmbeddingProvider provider;
    const RewardFunctionSample sample = preset_sample(preset);
    const SyntheticOptimum opt = synthetic_optimum(sample, preset.spec, provider);
    preset.optimum_theta = opt.theta;
    preset.optimum_value = opt.value;
    preset.spec.human_score = opt.value;

    // Bench weights follow the movement-penalty convention: high U restrains
    // a dimension, so fitness-neutral dimensions get U = 1 and active ones a
    // small U.
    for (const auto& c : plan) {
        if (plan.size() == 6) {
            preset.bench_dim_u.push_back(c.relevance > 0.0 ? 0.05 : 1.0);
        } else {
            preset.bench_dim_u.push_back(0.35);
        }
    }
    preset.bench_sample_u = 1.0;
    return preset;
}

}  // namespace

std::vector<std::string> preset_names() { return {"d2", "d4", "d6m2"}; }

SyntheticPreset make_preset(const std::string& name) {
    if (name == "d2") {
        return build("d2", {
            {"distance", 1.0, 2.5, "torch.norm(obs[:, 0:3], dim=-1)"},
            {"velocity", 0.6, 0.4, "torch.norm(obs[:, 3:6], dim=-1)"},
        });
    }
    if (name == "d4") {
        return build("d4", {
            {"distance", 1.0, 2.5, "torch.norm(obs[:, 0:3], dim=-1)"},
            {"velocity", 0.6, 0.4, "torch.norm(obs[:, 3:6], dim=-1)"},
            {"orientation", 0.9, 3.0, "torch.abs(obs[:, 6])"},
            {"action", 0.5, 0.15, "torch.sum(torch.square(obs[:, 7:10]), dim=-1)"},
        });
    }
    if (name == "d6m2") {
        return build("d6m2", {
            {"forward_velocity", 1.0, 3.0, "obs[:, 7]"},
            {"stability", 0.8, 0.25, "torch.abs(obs[:, 2])"},
            {"energy", 0.0, 1.0, "torch.sum(torch.square(obs[:, 8:11]), dim=-1)"},
            {"contact", 0.0, 1.0, "torch.abs(obs[:, 11])"},
            {"height", 0.0, 1.0, "torch.abs(obs[:, 1])"},
            {"smoothness", 0.0, 1.0, "torch.abs(obs[:, 12])"},
        });
    }
    throw ConfigError("unknown synthetic preset: " + name);
}

RewardFunctionSample preset_sample(const SyntheticPreset& preset) {
    ParseOutcome outcome = parse_reward_sample(preset.canonical_code);
    if (!outcome.ok()) {
        throw ConfigError("preset '" + preset.name + "' canonical code failed to parse: " +
                          outcome.detail);
    }
    return *outcome.sample;
}

}  // namespace urdp
