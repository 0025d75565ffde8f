#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "urdp/errors.hpp"

namespace urdp {

// Similarity scores live in (0, 1]; zero is clamped to this floor.
inline constexpr double kSimilarityFloor = 1e-9;

// Ratcliff-Obershelp ratio 2M / (|a| + |b|), M = total length of matched
// blocks from recursive longest-matching-substring decomposition. Mildly
// order-dependent; callers that need determinism pass the lower-id text
// first. Throws EmptyInputError on empty input.
double text_similarity(std::string_view a, std::string_view b);

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    // One embedding per input, in order. Implementations must be safe for
    // concurrent calls and must never return a zero vector.
    virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& inputs) = 0;
};

// Offline deterministic embedder: each whitespace token is hashed into a
// signed 256-dim count vector, then L2-normalized.
class MockEmbeddingProvider : public EmbeddingProvider {
public:
    static constexpr int kDim = 256;
    std::vector<std::vector<double>> embed(const std::vector<std::string>& inputs) override;
};

struct EmbeddingClientConfig {
    std::string base_url;
    std::string model = "bge-m3";
    std::string api_key_env = "URDP_EMBEDDING_API_KEY";
    double timeout_s = 30.0;
    int max_retries = 2;
};

// OpenAI-compatible embeddings endpoint:
// POST {base_url}/embeddings {"input": [...], "model": ...}
// -> {"data": [{"embedding": [...]}, ...]}
class HttpEmbeddingProvider : public EmbeddingProvider {
public:
    explicit HttpEmbeddingProvider(EmbeddingClientConfig config);
    std::vector<std::vector<double>> embed(const std::vector<std::string>& inputs) override;

private:
    EmbeddingClientConfig config_;
};

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

// Cosine of provider embeddings mapped from [-1,1] to (0,1].
double semantic_similarity(const std::string& a, const std::string& b, EmbeddingProvider& provider);

// max(text, semantic) per the screening rule.
double combined_similarity(const std::string& a, const std::string& b, EmbeddingProvider& provider);

// Pairwise combined similarities with one batched embed() call; entry (i,j)
// is computed with the lower-index text as the first argument.
std::vector<std::vector<double>> pairwise_combined_similarity(const std::vector<std::string>& texts,
                                                              EmbeddingProvider& provider);

}  // namespace urdp
