#include "urdp/evaluator.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "urdp/rng.hpp"

namespace urdp {
namespace {

namespace fs = std::filesystem;

// Identifier-boundary containment: `velocity_temp` must not match inside
// `angular_velocity_temp`.
bool contains_identifier(const std::string& text, const std::string& name) {
    size_t pos = 0;
    auto is_ident = [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    };
    while ((pos = text.find(name, pos)) != std::string::npos) {
        const bool left_ok = pos == 0 || !is_ident(text[pos - 1]);
        const size_t end = pos + name.size();
        const bool right_ok = end >= text.size() || !is_ident(text[end]);
        if (left_ok && right_ok) return true;
        pos += 1;
    }
    return false;
}

struct ConceptMatch {
    int component = -1;   // index into sample.components, -1 = unmatched
    double score = 0.0;
};

// Per-concept best matching component and per-component matched flag.
struct MatchTable {
    std::vector<ConceptMatch> concept_match;   // per concept
    std::vector<bool> component_matched;       // per component
};

MatchTable match_concepts(const RewardFunctionSample& sample, const SyntheticTaskSpec& spec,
                          EmbeddingProvider& provider) {
    MatchTable table;
    table.concept_match.resize(spec.vocabulary.size());
    table.component_matched.assign(sample.components.size(), false);
    for (size_t ci = 0; ci < spec.vocabulary.size(); ++ci) {
        const TaskConcept& tc = spec.vocabulary[ci];
        for (size_t k = 0; k < sample.components.size(); ++k) {
            const RewardComponent& comp = sample.components[k];
            double score = combined_similarity(comp.name, tc.description, provider);
            if (!comp.normalized_text.empty()) {
                score = std::max(score,
                                 combined_similarity(comp.normalized_text, tc.description, provider));
            }
            if (score > kConceptMatchThreshold && score > table.concept_match[ci].score) {
                table.concept_match[ci] = {static_cast<int>(k), score};
            }
        }
        if (table.concept_match[ci].component >= 0) {
            table.component_matched[table.concept_match[ci].component] = true;
        }
    }
    return table;
}

// Index of the first hyperparameter referenced by the component body, or -1.
int owning_hyperparameter(const RewardFunctionSample& sample, int component) {
    const std::string& body = sample.components[component].body_text;
    for (size_t h = 0; h < sample.hyperparameters.size(); ++h) {
        if (contains_identifier(body, sample.hyperparameters[h].name)) {
            return static_cast<int>(h);
        }
    }
    return -1;
}

double concept_term(const RewardFunctionSample& sample, const std::vector<double>& theta,
                    const TaskConcept& tc, int component) {
    const int h = owning_hyperparameter(sample, component);
    if (h < 0) return tc.relevance;  // untunable component: full credit
    const double value = theta[static_cast<size_t>(h)];
    if (value <= 0.0) return 0.0;
    const double gap = std::log(value) - tc.target_log_theta;
    return tc.relevance * std::exp(-gap * gap);
}

}  // namespace

EvaluationRecord evaluate_synthetic(const EvaluationRequest& request, const SyntheticTaskSpec& spec,
                                    std::uint64_t seed, EmbeddingProvider& provider) {
    const auto start = std::chrono::steady_clock::now();
    const RewardFunctionSample& sample = *request.sample;
    const MatchTable table = match_concepts(sample, spec, provider);

    double fitness = 0.0;
    std::vector<double> component_share(sample.components.size(), 0.0);

    int relevant_total = 0, relevant_matched = 0;
    for (size_t ci = 0; ci < spec.vocabulary.size(); ++ci) {
        const TaskConcept& tc = spec.vocabulary[ci];
        if (tc.relevance > 0.0) ++relevant_total;
        const int comp = table.concept_match[ci].component;
        if (comp < 0) continue;
        if (tc.relevance > 0.0) ++relevant_matched;
        const double term = concept_term(sample, request.theta, tc, comp);
        fitness += term;
        component_share[static_cast<size_t>(comp)] += term;
    }
    if (relevant_total > 0) {
        fitness += spec.coverage_bonus * static_cast<double>(relevant_matched) /
                   static_cast<double>(relevant_total);
    }
    for (size_t k = 0; k < sample.components.size(); ++k) {
        if (!table.component_matched[k]) {
            fitness -= spec.irrelevant_penalty;
            component_share[k] = -spec.irrelevant_penalty;
        }
    }
    if (spec.noise_std > 0.0) {
        std::uint64_t theta_hash = 0;
        for (double t : request.theta) theta_hash = mix_seed(theta_hash, hash_double(t));
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(sample.sample_id),
                         static_cast<std::uint64_t>(request.iteration), theta_hash));
        fitness += spec.noise_std * rng.normal();
    }

    EvaluationRecord record;
    record.sample_id = sample.sample_id;
    record.theta = request.theta;
    record.fitness = fitness;
    for (size_t k = 0; k < sample.components.size(); ++k) {
        const double share = component_share[k];
        record.component_stats[sample.components[k].name] =
            ComponentStats{share + 0.5 * std::abs(share), share, share - 0.5 * std::abs(share)};
    }
    record.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return record;
}

SyntheticOptimum synthetic_optimum(const RewardFunctionSample& sample, const SyntheticTaskSpec& spec,
                                   EmbeddingProvider& provider) {
    const MatchTable table = match_concepts(sample, spec, provider);
    SyntheticOptimum opt;
    opt.theta.reserve(sample.hyperparameters.size());
    for (const auto& h : sample.hyperparameters) opt.theta.push_back(h.initial_value);
    for (size_t ci = 0; ci < spec.vocabulary.size(); ++ci) {
        const TaskConcept& tc = spec.vocabulary[ci];
        const int comp = table.concept_match[ci].component;
        if (comp < 0 || tc.relevance <= 0.0) continue;
        const int h = owning_hyperparameter(sample, comp);
        if (h >= 0) {
            opt.theta[static_cast<size_t>(h)] = std::exp(tc.target_log_theta);
        }
    }
    SyntheticTaskSpec noiseless = spec;
    noiseless.noise_std = 0.0;
    EvaluationRequest req;
    req.sample = &sample;
    req.theta = opt.theta;
    opt.value = evaluate_synthetic(req, noiseless, 0, provider).fitness;
    return opt;
}

SyntheticEvaluator::SyntheticEvaluator(SyntheticTaskSpec spec, std::uint64_t seed)
    : spec_(std::move(spec)), seed_(seed) {}

EvaluationRecord SyntheticEvaluator::evaluate(const EvaluationRequest& request) {
    return evaluate_synthetic(request, spec_, seed_, provider_);
}

namespace {

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out += "'\\''";
        else out.push_back(c);
    }
    out.push_back('\'');
    return out;
}

}  // namespace

EvaluationRecord evaluate_external(const EvaluationRequest& request, const ExternalCommandConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    EvaluationRecord record;
    record.sample_id = request.sample->sample_id;
    record.theta = request.theta;
    record.failed = true;
    record.fitness = std::numeric_limits<double>::quiet_NaN();

    auto finish = [&]() {
        record.wall_time =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return record;
    };

    fs::path root = config.work_root.empty() ? fs::temp_directory_path() : fs::path(config.work_root);
    std::error_code ec;
    fs::create_directories(root, ec);
    std::string tmpl = (root / "urdp-eval-XXXXXX").string();
    std::vector<char> buf(tmpl.begin(), tmpl.end());
    buf.push_back('\0');
    if (!mkdtemp(buf.data())) {
        throw EvaluatorError("failed to create evaluation work dir under " + root.string());
    }
    const fs::path work_dir(buf.data());

    nlohmann::json theta_json = nlohmann::json::object();
    for (size_t i = 0; i < request.sample->hyperparameters.size(); ++i) {
        theta_json[request.sample->hyperparameters[i].name] = request.theta[i];
    }
    nlohmann::json request_json{{"code", substitute_hyperparameters(*request.sample, request.theta)},
                                {"theta", theta_json},
                                {"sample_id", request.sample->sample_id},
                                {"iteration", request.iteration}};
    {
        std::ofstream out(work_dir / "request.json");
        out << request_json.dump(2) << "\n";
    }

    const std::string cmdline = config.command + " " + shell_quote(work_dir.string());
    const pid_t pid = fork();
    if (pid < 0) {
        throw EvaluatorError("fork failed");
    }
    if (pid == 0) {
        execl("/bin/sh", "sh", "-c", cmdline.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }

    const auto deadline = start + std::chrono::duration<double>(config.timeout_s);
    int status = 0;
    bool exited = false;
    for (;;) {
        const pid_t r = waitpid(pid, &status, WNOHANG);
        if (r == pid) {
            exited = true;
            break;
        }
        if (std::chrono::steady_clock::now() >= deadline) break;
        usleep(10000);
    }
    if (!exited) {
        kill(pid, SIGKILL);
        waitpid(pid, &status, 0);
        record.failure = "Timeout";
        fs::remove_all(work_dir, ec);
        return finish();
    }
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        record.failure = "NonZeroExit";
        fs::remove_all(work_dir, ec);
        return finish();
    }

    std::ifstream in(work_dir / config.output_file);
    if (!in) {
        record.failure = "MalformedOutput";
        fs::remove_all(work_dir, ec);
        return finish();
    }
    try {
        nlohmann::json result = nlohmann::json::parse(in);
        record.fitness = result.at("fitness").get<double>();
        if (result.contains("component_stats")) {
            for (const auto& [name, stats] : result.at("component_stats").items()) {
                record.component_stats[name] = ComponentStats{stats.at("max").get<double>(),
                                                              stats.at("mean").get<double>(),
                                                              stats.at("min").get<double>()};
            }
        }
        if (!std::isfinite(record.fitness)) {
            record.failure = "MalformedOutput";
            record.fitness = std::numeric_limits<double>::quiet_NaN();
        } else {
            record.failed = false;
        }
    } catch (const nlohmann::json::exception&) {
        record.failure = "MalformedOutput";
    }
    fs::remove_all(work_dir, ec);
    return finish();
}

ExternalEvaluator::ExternalEvaluator(ExternalCommandConfig config) : config_(std::move(config)) {}

EvaluationRecord ExternalEvaluator::evaluate(const EvaluationRequest& request) {
    {
        std::unique_lock lock(mutex_);
        slots_cv_.wait(lock, [&] { return in_flight_ < std::max(1, config_.max_parallel); });
        ++in_flight_;
    }
    EvaluationRecord record;
    try {
        record = evaluate_external(request, config_);
    } catch (...) {
        {
            std::lock_guard lock(mutex_);
            --in_flight_;
        }
        slots_cv_.notify_one();
        throw;
    }
    {
        std::lock_guard lock(mutex_);
        --in_flight_;
    }
    slots_cv_.notify_one();
    return record;
}

double hns(double method_score, double human_score, double sparse_score) {
    if (human_score == sparse_score) {
        throw DegenerateBaselineError("hns undefined when human == sparse");
    }
    return (method_score - sparse_score) / std::abs(human_score - sparse_score);
}

void to_json(nlohmann::json& j, const SyntheticTaskSpec& s) {
    nlohmann::json vocab = nlohmann::json::array();
    for (const auto& c : s.vocabulary) {
        vocab.push_back({{"name", c.name},
                         {"description", c.description},
                         {"relevance", c.relevance},
                         {"target_log_theta", c.target_log_theta}});
    }
    j = nlohmann::json{{"task_name", s.task_name},
                       {"vocabulary", vocab},
                       {"noise_std", s.noise_std},
                       {"coverage_bonus", s.coverage_bonus},
                       {"irrelevant_penalty", s.irrelevant_penalty},
                       {"human_score", s.human_score},
                       {"sparse_score", s.sparse_score}};
}

void from_json(const nlohmann::json& j, SyntheticTaskSpec& s) {
    s.vocabulary.clear();
    j.at("task_name").get_to(s.task_name);
    for (const auto& item : j.at("vocabulary")) {
        TaskConcept c;
        item.at("name").get_to(c.name);
        item.at("description").get_to(c.description);
        item.at("relevance").get_to(c.relevance);
        item.at("target_log_theta").get_to(c.target_log_theta);
        s.vocabulary.push_back(std::move(c));
    }
    j.at("noise_std").get_to(s.noise_std);
    j.at("coverage_bonus").get_to(s.coverage_bonus);
    j.at("irrelevant_penalty").get_to(s.irrelevant_penalty);
    j.at("human_score").get_to(s.human_score);
    j.at("sparse_score").get_to(s.sparse_score);
}

}  // namespace urdp
