#include "urdp/similarity.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <numeric>
#include <sstream>

#include "urdp/http.hpp"

#include <nlohmann/json.hpp>

namespace urdp {
namespace {

struct Match {
    size_t a, b, size;
};

// Scratch rows for the longest-match dynamic program; only touched entries
// are reset between rows.
struct MatchScratch {
    std::vector<size_t> j2len, newj2len;
    std::vector<size_t> touched_prev, touched_cur;

    explicit MatchScratch(size_t n) : j2len(n, 0), newj2len(n, 0) {}
};

// Longest matching block within a[alo,ahi) x b[blo,bhi); ties resolve to the
// earliest position in a, then in b.
Match find_longest_match(std::string_view a, std::string_view b,
                         size_t alo, size_t ahi, size_t blo, size_t bhi,
                         const std::array<std::vector<size_t>, 256>& b2j,
                         MatchScratch& scratch) {
    Match best{alo, blo, 0};
    for (size_t j : scratch.touched_prev) scratch.j2len[j] = 0;
    scratch.touched_prev.clear();
    for (size_t i = alo; i < ahi; ++i) {
        scratch.touched_cur.clear();
        const auto& positions = b2j[static_cast<unsigned char>(a[i])];
        for (size_t j : positions) {
            if (j < blo) continue;
            if (j >= bhi) break;
            const size_t k = (j > blo ? scratch.j2len[j - 1] : 0) + 1;
            scratch.newj2len[j] = k;
            scratch.touched_cur.push_back(j);
            if (k > best.size) {
                best = Match{i - k + 1, j - k + 1, k};
            }
        }
        for (size_t j : scratch.touched_prev) scratch.j2len[j] = 0;
        std::swap(scratch.j2len, scratch.newj2len);
        std::swap(scratch.touched_prev, scratch.touched_cur);
    }
    for (size_t j : scratch.touched_prev) scratch.j2len[j] = 0;
    scratch.touched_prev.clear();
    return best;
}

size_t total_matched(std::string_view a, std::string_view b) {
    std::array<std::vector<size_t>, 256> b2j;
    for (size_t j = 0; j < b.size(); ++j) {
        b2j[static_cast<unsigned char>(b[j])].push_back(j);
    }
    MatchScratch scratch(b.size());

    size_t matched = 0;
    std::deque<std::array<size_t, 4>> queue{{0, a.size(), 0, b.size()}};
    while (!queue.empty()) {
        auto [alo, ahi, blo, bhi] = queue.front();
        queue.pop_front();
        if (alo >= ahi || blo >= bhi) continue;
        Match m = find_longest_match(a, b, alo, ahi, blo, bhi, b2j, scratch);
        if (m.size == 0) continue;
        matched += m.size;
        queue.push_back({alo, m.a, blo, m.b});
        queue.push_back({m.a + m.size, ahi, m.b + m.size, bhi});
    }
    return matched;
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace

double text_similarity(std::string_view a, std::string_view b) {
    if (a.empty() || b.empty()) {
        throw EmptyInputError("text_similarity requires non-empty inputs");
    }
    const size_t m = total_matched(a, b);
    const double ratio = 2.0 * static_cast<double>(m) / static_cast<double>(a.size() + b.size());
    return std::max(ratio, kSimilarityFloor);
}

std::vector<std::vector<double>> MockEmbeddingProvider::embed(const std::vector<std::string>& inputs) {
    std::vector<std::vector<double>> out;
    out.reserve(inputs.size());
    for (const std::string& text : inputs) {
        std::vector<double> v(kDim, 0.0);
        std::istringstream tokens(text);
        std::string tok;
        while (tokens >> tok) {
            const std::uint64_t h = fnv1a64(tok);
            const int bucket = static_cast<int>(h % kDim);
            const double sign = ((h >> 32) & 1ULL) ? 1.0 : -1.0;
            v[bucket] += sign;
        }
        const double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
        if (norm == 0.0) {
            throw ProviderError("mock embedding of token-free text is the zero vector");
        }
        for (double& x : v) x /= norm;
        out.push_back(std::move(v));
    }
    return out;
}

HttpEmbeddingProvider::HttpEmbeddingProvider(EmbeddingClientConfig config)
    : config_(std::move(config)) {}

std::vector<std::vector<double>> HttpEmbeddingProvider::embed(const std::vector<std::string>& inputs) {
    nlohmann::json body{{"input", inputs}, {"model", config_.model}};
    HttpRequest req;
    req.base_url = config_.base_url;
    req.path = "/embeddings";
    req.api_key_env = config_.api_key_env;
    req.timeout_s = config_.timeout_s;
    req.max_retries = config_.max_retries;
    req.body = body.dump();

    const HttpResponse resp = http_post_json(req);
    if (resp.status != 200) {
        throw ProviderError("embeddings endpoint returned status " + std::to_string(resp.status));
    }
    std::vector<std::vector<double>> out;
    try {
        nlohmann::json parsed = nlohmann::json::parse(resp.body);
        for (const auto& item : parsed.at("data")) {
            out.push_back(item.at("embedding").get<std::vector<double>>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw ProviderError(std::string("malformed embeddings response: ") + e.what());
    }
    if (out.size() != inputs.size()) {
        throw ProviderError("embeddings response count mismatch");
    }
    for (const auto& v : out) {
        if (std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; })) {
            throw ProviderError("provider returned a zero embedding vector");
        }
    }
    return out;
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) {
        throw DimensionMismatchError("cosine_similarity: embedding dimensions differ");
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) {
        throw ProviderError("cosine_similarity over a zero vector");
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

namespace {
double remap_cosine(double cos) {
    return std::max(kSimilarityFloor, (cos + 1.0) / 2.0);
}
}  // namespace

double semantic_similarity(const std::string& a, const std::string& b, EmbeddingProvider& provider) {
    if (a.empty() || b.empty()) {
        throw EmptyInputError("semantic_similarity requires non-empty inputs");
    }
    const auto vecs = provider.embed({a, b});
    return remap_cosine(cosine_similarity(vecs[0], vecs[1]));
}

double combined_similarity(const std::string& a, const std::string& b, EmbeddingProvider& provider) {
    return std::max(text_similarity(a, b), semantic_similarity(a, b, provider));
}

std::vector<std::vector<double>> pairwise_combined_similarity(const std::vector<std::string>& texts,
                                                              EmbeddingProvider& provider) {
    const size_t n = texts.size();
    std::vector<std::vector<double>> sim(n, std::vector<double>(n, 1.0));
    if (n < 2) return sim;
    const auto embeddings = provider.embed(texts);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            const double s_text = text_similarity(texts[i], texts[j]);
            const double s_sem = remap_cosine(cosine_similarity(embeddings[i], embeddings[j]));
            sim[i][j] = sim[j][i] = std::max(s_text, s_sem);
        }
    }
    return sim;
}

}  // namespace urdp
