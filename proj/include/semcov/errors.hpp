#pragma once

#include <stdexcept>
#include <string>

namespace semcov {

// Error taxonomy mirrors the CLI exit-code contract:
//   ValidationError -> 2, ReferenceError -> 3, HookError -> 4.

/// Malformed or inconsistent input (files, vectors, config ranges).
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A reference that cannot be resolved (unknown qid, missing record id).
class ReferenceError : public std::runtime_error {
public:
    explicit ReferenceError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Failure of an external hook (encoder service, QA generator command/URL).
class HookError : public std::runtime_error {
public:
    explicit HookError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Pearson correlation is undefined when one input has zero variance.
/// Callers that gate on r treat this as maximal redundancy.
class DegenerateCorrelation : public std::runtime_error {
public:
    explicit DegenerateCorrelation(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace semcov
