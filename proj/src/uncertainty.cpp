#include "urdp/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

namespace urdp {
namespace {

std::vector<size_t> order_by_sample_id(const std::vector<RewardFunctionSample>& samples) {
    std::vector<size_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return samples[a].sample_id < samples[b].sample_id;
    });
    return order;
}

}  // namespace

std::map<ComponentKey, double> component_uncertainty(const std::vector<RewardFunctionSample>& samples,
                                                     double omega, EmbeddingProvider& provider) {
    if (samples.empty()) {
        throw EmptyInputError("component_uncertainty requires at least one sample");
    }
    if (!(omega > 0.0 && omega < 1.0)) {
        throw ConfigError("omega must lie in (0, 1)");
    }
    const auto order = order_by_sample_id(samples);
    const size_t k = samples.size();

    // Flatten components in ascending sample_id order so that pairwise
    // similarity always sees the lower-id text first.
    std::vector<std::string> texts;
    std::vector<std::pair<size_t, size_t>> owner;  // (order position, component idx)
    for (size_t pos = 0; pos < order.size(); ++pos) {
        const auto& s = samples[order[pos]];
        for (size_t c = 0; c < s.components.size(); ++c) {
            texts.push_back(s.components[c].normalized_text);
            owner.emplace_back(pos, c);
        }
    }
    const auto sim = pairwise_combined_similarity(texts, provider);

    std::map<ComponentKey, double> result;
    for (size_t a = 0; a < texts.size(); ++a) {
        const auto& sa = samples[order[owner[a].first]];
        std::vector<bool> matched(k, false);
        for (size_t b = 0; b < texts.size(); ++b) {
            if (owner[b].first == owner[a].first) continue;
            if (sim[a][b] > omega) matched[owner[b].first] = true;
        }
        const auto match_count = static_cast<double>(std::count(matched.begin(), matched.end(), true));
        const double u = 1.0 - match_count / static_cast<double>(k);
        result[{sa.sample_id, sa.components[owner[a].second].name}] = u;
    }
    return result;
}

std::pair<std::map<int, double>, std::map<int, double>> sample_uncertainty(
    const std::map<ComponentKey, double>& component_u,
    const std::vector<RewardFunctionSample>& samples) {
    std::map<int, double> raw;
    for (const auto& s : samples) {
        double sum = 0.0;
        for (const auto& c : s.components) {
            auto it = component_u.find({s.sample_id, c.name});
            if (it == component_u.end()) {
                throw ConfigError("component_u missing entry for sample " +
                                  std::to_string(s.sample_id) + " component " + c.name);
            }
            sum += it->second;
        }
        raw[s.sample_id] = s.components.empty() ? 0.0 : sum / static_cast<double>(s.components.size());
    }

    double total = 0.0;
    for (const auto& [id, u] : raw) total += u;

    std::map<int, double> normalized;
    if (total <= 0.0) {
        const double uniform = 1.0 / static_cast<double>(samples.size());
        for (const auto& [id, u] : raw) normalized[id] = uniform;
    } else {
        for (const auto& [id, u] : raw) normalized[id] = u / total;
    }
    return {std::move(raw), std::move(normalized)};
}

std::vector<SimilarityGroup> build_groups(const std::vector<RewardFunctionSample>& samples,
                                          double omega, EmbeddingProvider& provider) {
    if (samples.empty()) {
        throw EmptyInputError("build_groups requires at least one sample");
    }
    const auto order = order_by_sample_id(samples);

    std::vector<std::string> texts;
    texts.reserve(samples.size());
    for (size_t pos : order) texts.push_back(samples[pos].code_text);
    const auto sim = pairwise_combined_similarity(texts, provider);

    std::vector<bool> assigned(order.size(), false);
    std::vector<SimilarityGroup> groups;
    for (size_t i = 0; i < order.size(); ++i) {
        if (assigned[i]) continue;
        SimilarityGroup g;
        g.representative = samples[order[i]].sample_id;
        g.members.push_back(g.representative);
        assigned[i] = true;
        for (size_t j = i + 1; j < order.size(); ++j) {
            if (assigned[j]) continue;
            if (sim[i][j] > omega) {
                g.members.push_back(samples[order[j]].sample_id);
                assigned[j] = true;
            }
        }
        groups.push_back(std::move(g));
    }
    return groups;
}

std::vector<RewardFunctionSample> filter_redundant(const std::vector<RewardFunctionSample>& samples,
                                                   const UncertaintyReport& report) {
    std::vector<int> keep = report.retained;
    std::sort(keep.begin(), keep.end());
    std::vector<RewardFunctionSample> out;
    for (int id : keep) {
        for (const auto& s : samples) {
            if (s.sample_id == id) {
                out.push_back(s);
                break;
            }
        }
    }
    return out;
}

std::pair<double, double> score_dispersion(const std::vector<double>& scores) {
    if (scores.empty()) {
        throw EmptyInputError("score_dispersion requires at least one score");
    }
    const double mean = std::accumulate(scores.begin(), scores.end(), 0.0) /
                        static_cast<double>(scores.size());
    double var = 0.0;
    for (double s : scores) var += (s - mean) * (s - mean);
    var /= static_cast<double>(scores.size());
    const auto [mn, mx] = std::minmax_element(scores.begin(), scores.end());
    return {std::sqrt(var), *mx - *mn};
}

UncertaintyReport build_report(const std::vector<RewardFunctionSample>& samples, double omega,
                               EmbeddingProvider& provider, bool filtering_enabled) {
    UncertaintyReport report;
    report.component_u = component_uncertainty(samples, omega, provider);
    report.raw_sample_u = sample_uncertainty(report.component_u, samples).first;

    if (filtering_enabled) {
        report.groups = build_groups(samples, omega, provider);
    } else {
        for (size_t pos : order_by_sample_id(samples)) {
            SimilarityGroup g;
            g.representative = samples[pos].sample_id;
            g.members.push_back(g.representative);
            report.groups.push_back(std::move(g));
        }
    }
    for (const auto& g : report.groups) report.retained.push_back(g.representative);
    std::sort(report.retained.begin(), report.retained.end());

    // Normalize sample scores over the retained set only.
    double total = 0.0;
    for (int id : report.retained) total += report.raw_sample_u.at(id);
    if (total <= 0.0) {
        const double uniform = 1.0 / static_cast<double>(report.retained.size());
        for (int id : report.retained) report.normalized_sample_u[id] = uniform;
    } else {
        for (int id : report.retained) {
            report.normalized_sample_u[id] = report.raw_sample_u.at(id) / total;
        }
    }
    return report;
}

void to_json(nlohmann::json& j, const SimilarityGroup& g) {
    j = nlohmann::json{{"representative", g.representative}, {"members", g.members}};
}

void from_json(const nlohmann::json& j, SimilarityGroup& g) {
    j.at("representative").get_to(g.representative);
    j.at("members").get_to(g.members);
}

void to_json(nlohmann::json& j, const UncertaintyReport& r) {
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& [key, u] : r.component_u) {
        comps.push_back({{"sample_id", key.first}, {"component", key.second}, {"u", u}});
    }
    nlohmann::json raw = nlohmann::json::object();
    for (const auto& [id, u] : r.raw_sample_u) raw[std::to_string(id)] = u;
    nlohmann::json normalized = nlohmann::json::object();
    for (const auto& [id, u] : r.normalized_sample_u) normalized[std::to_string(id)] = u;
    j = nlohmann::json{{"component_u", comps},
                       {"raw_sample_u", raw},
                       {"normalized_sample_u", normalized},
                       {"groups", r.groups},
                       {"retained", r.retained}};
}

void from_json(const nlohmann::json& j, UncertaintyReport& r) {
    r.component_u.clear();
    for (const auto& item : j.at("component_u")) {
        r.component_u[{item.at("sample_id").get<int>(), item.at("component").get<std::string>()}] =
            item.at("u").get<double>();
    }
    r.raw_sample_u.clear();
    for (const auto& [key, value] : j.at("raw_sample_u").items()) {
        r.raw_sample_u[std::stoi(key)] = value.get<double>();
    }
    r.normalized_sample_u.clear();
    for (const auto& [key, value] : j.at("normalized_sample_u").items()) {
        r.normalized_sample_u[std::stoi(key)] = value.get<double>();
    }
    j.at("groups").get_to(r.groups);
    j.at("retained").get_to(r.retained);
}

}  // namespace urdp
