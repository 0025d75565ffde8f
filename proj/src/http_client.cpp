#include "urdp/http.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#ifdef URDP_HAVE_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include "urdp/errors.hpp"

namespace urdp {
namespace {

// Split "scheme://host:port/prefix" into origin and path prefix.
std::pair<std::string, std::string> split_origin(const std::string& base_url) {
    size_t scheme = base_url.find("://");
    size_t path_start = base_url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    if (path_start == std::string::npos) return {base_url, ""};
    std::string prefix = base_url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {base_url.substr(0, path_start), prefix};
}

bool retryable(int status) {
    return status == 429 || (status >= 500 && status < 600);
}

}  // namespace

HttpResponse http_post_json(const HttpRequest& request) {
    const auto [origin, prefix] = split_origin(request.base_url);
    httplib::Client client(origin);
    client.set_connection_timeout(std::chrono::milliseconds(
        static_cast<int>(request.timeout_s * 1000)));
    client.set_read_timeout(std::chrono::milliseconds(
        static_cast<int>(request.timeout_s * 1000)));
    client.set_write_timeout(std::chrono::milliseconds(
        static_cast<int>(request.timeout_s * 1000)));

    httplib::Headers headers;
    if (!request.api_key_env.empty()) {
        if (const char* key = std::getenv(request.api_key_env.c_str())) {
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }
    }

    const std::string path = prefix + request.path;
    std::string last_error;
    for (int attempt = 0; attempt <= request.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(250 * attempt));
        }
        auto result = client.Post(path, headers, request.body, "application/json");
        if (!result) {
            last_error = "transport error: " + httplib::to_string(result.error());
            continue;
        }
        if (retryable(result->status)) {
            last_error = "status " + std::to_string(result->status);
            continue;
        }
        return HttpResponse{result->status, result->body};
    }
    throw ProviderError("POST " + request.base_url + request.path + " failed after " +
                        std::to_string(request.max_retries + 1) + " attempts (" + last_error + ")");
}

}  // namespace urdp
