#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace svsc {

// Every named failure mode carries a stable [CODE] prefix in what() so
// callers and tests can match on the code rather than on prose.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error("[" + code + "] " + message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

// Malformed input document (not parseable at all).
class ParseError : public Error {
public:
    using Error::Error;
};

// Structurally parseable but violates the case or problem schema.
class SchemaError : public Error {
public:
    using Error::Error;
};

// Linear-algebra or iteration failures: singular matrices, divergence.
class NumericsError : public Error {
public:
    using Error::Error;
};

// Optimization engine failures: stalls, node/iteration limits, infeasibility
// where the caller expected a solution.
class SolverError : public Error {
public:
    using Error::Error;
};

// Invalid configuration detected at setup time (e.g. a Big-M bound that is
// provably too small for the given network).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Command-line usage problems; maps to exit code 64.
class UsageError : public Error {
public:
    using Error::Error;
};

}  // namespace svsc
