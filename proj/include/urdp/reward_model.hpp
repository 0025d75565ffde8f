#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "urdp/errors.hpp"

namespace urdp {

enum class BoundScale { Linear, Log };

std::string to_string(BoundScale scale);
BoundScale bound_scale_from_string(const std::string& s);

// One named sub-term of a candidate reward function.
struct RewardComponent {
    std::string name;
    std::string body_text;
    std::string normalized_text;

    bool operator==(const RewardComponent&) const = default;
};

// A tunable intensity scalar extracted from candidate code.
struct HyperparameterSpec {
    std::string name;
    double initial_value = 0.0;
    double lower_bound = 0.0;
    double upper_bound = 0.0;
    BoundScale scale = BoundScale::Linear;

    bool operator==(const HyperparameterSpec&) const = default;
};

// One LLM-generated reward-function candidate.
struct RewardFunctionSample {
    int sample_id = 0;
    std::string code_text;
    std::vector<RewardComponent> components;
    std::vector<HyperparameterSpec> hyperparameters;
    int iteration = 0;

    bool operator==(const RewardFunctionSample&) const = default;
};

struct ComponentStats {
    double max = 0.0;
    double mean = 0.0;
    double min = 0.0;

    bool operator==(const ComponentStats&) const = default;
};

// One evaluator call. `failed` records never enter the surrogate.
struct EvaluationRecord {
    int sample_id = 0;
    std::vector<double> theta;
    double fitness = 0.0;
    std::map<std::string, ComponentStats> component_stats;
    double wall_time = 0.0;
    bool failed = false;
    std::string failure;
};

struct Bounds {
    double lower = 0.0;
    double upper = 0.0;
    BoundScale scale = BoundScale::Linear;
};

struct ParseConfig {
    // Regex a scalar assignment's name must match to count as tunable.
    std::string hyperparameter_pattern = ".*_temp";
    // Overrides for names the default one-decade rule cannot handle
    // (e.g. an initial value of exactly zero).
    std::map<std::string, Bounds> explicit_bounds;
};

enum class ParseErrorCode {
    None,
    NoFunction,
    NoComponentDict,
    DuplicateName,
    ZeroInitial,
};

std::string to_string(ParseErrorCode code);

struct ParseOutcome {
    std::optional<RewardFunctionSample> sample;
    ParseErrorCode error = ParseErrorCode::None;
    std::string detail;

    bool ok() const { return sample.has_value(); }
};

// Extracts components (keys of the returned component dictionary) and
// tunable hyperparameters from candidate code. Total over arbitrary text:
// failures are reported through ParseOutcome, never thrown.
ParseOutcome parse_reward_sample(const std::string& code_text, const ParseConfig& config = {});

// One-decade box around the initial value; log scale for positives.
// Throws ZeroInitialError for 0 (caller must supply explicit bounds).
Bounds default_bounds(double initial_value);

// Strip comments, collapse whitespace, lowercase. Identifiers keep their
// spelling; lexical variation is what the similarity metrics consume.
std::string normalize_text(const std::string& text);

// Rewrites each hyperparameter's assignment literal in code_text with the
// corresponding theta entry (round-trippable decimal form). Throws
// SubstitutionMissError when an assignment cannot be located.
std::string substitute_hyperparameters(const RewardFunctionSample& sample,
                                       const std::vector<double>& theta);

void to_json(nlohmann::json& j, const RewardComponent& c);
void from_json(const nlohmann::json& j, RewardComponent& c);
void to_json(nlohmann::json& j, const HyperparameterSpec& h);
void from_json(const nlohmann::json& j, HyperparameterSpec& h);
void to_json(nlohmann::json& j, const RewardFunctionSample& s);
void from_json(const nlohmann::json& j, RewardFunctionSample& s);
void to_json(nlohmann::json& j, const ComponentStats& s);
void from_json(const nlohmann::json& j, ComponentStats& s);
void to_json(nlohmann::json& j, const EvaluationRecord& r);
void from_json(const nlohmann::json& j, EvaluationRecord& r);

}  // namespace urdp
