#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "urdp/reward_model.hpp"
#include "urdp/similarity.hpp"

namespace urdp {

// One set of mutually near-duplicate samples; only the representative is
// evaluated downstream.
struct SimilarityGroup {
    int representative = 0;
    std::vector<int> members;

    bool operator==(const SimilarityGroup&) const = default;
};

using ComponentKey = std::pair<int, std::string>;  // (sample_id, component name)

struct UncertaintyReport {
    std::map<ComponentKey, double> component_u;
    std::map<int, double> raw_sample_u;
    // Normalized over the retained representatives; sums to 1 over them.
    std::map<int, double> normalized_sample_u;
    std::vector<SimilarityGroup> groups;
    std::vector<int> retained;
};

// U(r) = 1 - match_count / K where match_count is the number of OTHER
// samples containing at least one component whose combined similarity with r
// strictly exceeds omega. Similarity is computed on normalized component
// text, lower sample_id first.
std::map<ComponentKey, double> component_uncertainty(const std::vector<RewardFunctionSample>& samples,
                                                     double omega, EmbeddingProvider& provider);

// raw(R_i) = mean component uncertainty of sample i; normalized over the
// given sample set (uniform fallback if the total is zero).
std::pair<std::map<int, double>, std::map<int, double>> sample_uncertainty(
    const std::map<ComponentKey, double>& component_u,
    const std::vector<RewardFunctionSample>& samples);

// Greedy single-link grouping in ascending sample_id order over
// whole-function combined similarity at threshold omega. The representative
// is the lowest sample_id in each group.
std::vector<SimilarityGroup> build_groups(const std::vector<RewardFunctionSample>& samples,
                                          double omega, EmbeddingProvider& provider);

// Representatives of report.groups in ascending sample_id order.
std::vector<RewardFunctionSample> filter_redundant(const std::vector<RewardFunctionSample>& samples,
                                                   const UncertaintyReport& report);

// Population standard deviation and max-min range of the per-sample scores
// fed into the reflection prompt.
std::pair<double, double> score_dispersion(const std::vector<double>& scores);

// Full screening pipeline: component scores over all samples, groups,
// retained representatives, and sample scores normalized over the retained
// set. With filtering disabled every sample forms its own group.
UncertaintyReport build_report(const std::vector<RewardFunctionSample>& samples, double omega,
                               EmbeddingProvider& provider, bool filtering_enabled = true);

void to_json(nlohmann::json& j, const SimilarityGroup& g);
void from_json(const nlohmann::json& j, SimilarityGroup& g);
void to_json(nlohmann::json& j, const UncertaintyReport& r);
void from_json(const nlohmann::json& j, UncertaintyReport& r);

}  // namespace urdp
