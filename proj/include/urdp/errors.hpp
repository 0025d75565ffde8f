#pragma once

#include <stdexcept>
#include <string>

namespace urdp {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyInputError : Error {
    using Error::Error;
};

struct DimensionMismatchError : Error {
    using Error::Error;
};

// Embedding endpoint failure (network, timeout, bad status, zero vector).
struct ProviderError : Error {
    using Error::Error;
};

// Chat-completion endpoint failure after retries.
struct LlmError : Error {
    using Error::Error;
};

struct InsufficientSamplesError : Error {
    using Error::Error;
};

// Infrastructure failure while invoking an evaluator (distinct from a
// recorded failed evaluation, which is data).
struct EvaluatorError : Error {
    using Error::Error;
};

struct AllEvaluationsFailedError : Error {
    using Error::Error;
};

// Cholesky factorization failed even after the jitter ladder.
struct SingularKernelError : Error {
    using Error::Error;
};

struct SubstitutionMissError : Error {
    using Error::Error;
};

struct DegenerateBaselineError : Error {
    using Error::Error;
};

struct ZeroInitialError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace urdp
