#pragma once

#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "urdp/reward_model.hpp"
#include "urdp/similarity.hpp"

namespace urdp {

struct EvaluationRequest {
    const RewardFunctionSample* sample = nullptr;
    std::vector<double> theta;  // raw scale, declaration order
    int run_id = 0;
    int iteration = 0;
    int attempt = 0;
};

class Evaluator {
public:
    virtual ~Evaluator() = default;
    // Returns a record; infrastructure failures throw EvaluatorError, task
    // failures come back as failed records.
    virtual EvaluationRecord evaluate(const EvaluationRequest& request) = 0;
    virtual bool supports_concurrency() const = 0;
};

// One canonical reward idea a synthetic task rewards candidates for hitting.
struct TaskConcept {
    std::string name;
    std::string description;     // matched against component names/bodies
    double relevance = 1.0;      // in [0, 1]; 0 = fitness-neutral dimension
    double target_log_theta = 0.0;  // natural-log optimum of the owning temperature
};

// Desk-scale stand-in for simulation training: fitness rewards covering the
// vocabulary with temperatures near per-concept targets.
struct SyntheticTaskSpec {
    std::string task_name;
    std::vector<TaskConcept> vocabulary;
    double noise_std = 0.0;
    double coverage_bonus = 0.5;       // scaled by the fraction of relevant concepts matched
    double irrelevant_penalty = 0.1;   // per component matching no concept
    double human_score = 1.0;
    double sparse_score = 0.0;
};

// Concept matching reuses combined similarity at a looser threshold than the
// dedup omega; concept descriptions are paraphrases, not near-duplicates.
inline constexpr double kConceptMatchThreshold = 0.7;

EvaluationRecord evaluate_synthetic(const EvaluationRequest& request, const SyntheticTaskSpec& spec,
                                    std::uint64_t seed, EmbeddingProvider& provider);

// Noise-free fitness maximizer over theta for a fixed sample: every matched
// relevant concept's temperature at its target.
struct SyntheticOptimum {
    std::vector<double> theta;
    double value = 0.0;
};
SyntheticOptimum synthetic_optimum(const RewardFunctionSample& sample, const SyntheticTaskSpec& spec,
                                   EmbeddingProvider& provider);

class SyntheticEvaluator : public Evaluator {
public:
    SyntheticEvaluator(SyntheticTaskSpec spec, std::uint64_t seed);
    EvaluationRecord evaluate(const EvaluationRequest& request) override;
    bool supports_concurrency() const override { return true; }
    const SyntheticTaskSpec& spec() const { return spec_; }

private:
    SyntheticTaskSpec spec_;
    std::uint64_t seed_;
    MockEmbeddingProvider provider_;
};

struct ExternalCommandConfig {
    std::string command;          // receives the work dir as its sole argument
    double timeout_s = 300.0;
    std::string output_file = "result.json";
    int max_parallel = 1;
    std::string work_root;        // empty = system temp dir
};

// Writes request.json into a fresh work dir, runs the command, reads the
// declared output file. Timeout, nonzero exit, and malformed output all
// produce failed records.
EvaluationRecord evaluate_external(const EvaluationRequest& request, const ExternalCommandConfig& config);

class ExternalEvaluator : public Evaluator {
public:
    explicit ExternalEvaluator(ExternalCommandConfig config);
    EvaluationRecord evaluate(const EvaluationRequest& request) override;
    bool supports_concurrency() const override { return config_.max_parallel > 1; }

private:
    ExternalCommandConfig config_;
    std::mutex mutex_;
    std::condition_variable slots_cv_;
    int in_flight_ = 0;
};

// Human Normalized Score (method - sparse) / |human - sparse|.
// Throws DegenerateBaselineError when human == sparse.
double hns(double method_score, double human_score, double sparse_score);

void to_json(nlohmann::json& j, const SyntheticTaskSpec& s);
void from_json(const nlohmann::json& j, SyntheticTaskSpec& s);

}  // namespace urdp
