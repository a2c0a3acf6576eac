#pragma once

#include <stdexcept>
#include <string>

namespace qrnn {

/// Failure categories surfaced by the library. The CLI maps these to
/// process exit codes; tests match on them.
enum class ErrorKind {
    dimension_mismatch,
    domain_error,
    length_mismatch,
    empty_sequence,
    config_error,
    parse_error,
    non_uniform_sampling,
    missing_columns,
    degenerate_truth,
    series_too_short,
    insufficient_samples,
    insufficient_history,
    non_finite,
    io_error,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::dimension_mismatch: return "DimensionMismatch";
        case ErrorKind::domain_error: return "DomainError";
        case ErrorKind::length_mismatch: return "LengthMismatch";
        case ErrorKind::empty_sequence: return "EmptySequence";
        case ErrorKind::config_error: return "ConfigError";
        case ErrorKind::parse_error: return "ParseError";
        case ErrorKind::non_uniform_sampling: return "NonUniformSampling";
        case ErrorKind::missing_columns: return "MissingColumns";
        case ErrorKind::degenerate_truth: return "DegenerateTruth";
        case ErrorKind::series_too_short: return "SeriesTooShort";
        case ErrorKind::insufficient_samples: return "InsufficientSamples";
        case ErrorKind::insufficient_history: return "InsufficientHistory";
        case ErrorKind::non_finite: return "NonFinite";
        case ErrorKind::io_error: return "IoError";
    }
    return "Error";
}

}  // namespace qrnn
