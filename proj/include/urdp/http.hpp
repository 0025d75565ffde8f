#pragma once

#include <map>
#include <string>

namespace urdp {

struct HttpRequest {
    std::string base_url;  // scheme://host[:port][/prefix]
    std::string path;      // appended to any prefix in base_url
    std::string body;      // JSON payload
    std::string api_key_env;  // env var holding a bearer token; empty = no auth
    double timeout_s = 30.0;
    int max_retries = 2;   // additional attempts after the first
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

// POST with Content-Type: application/json and optional bearer auth.
// Retries transport errors and 5xx/429 with linear backoff, then throws
// ProviderError. Non-retryable statuses are returned to the caller.
HttpResponse http_post_json(const HttpRequest& request);

}  // namespace urdp
