#pragma once

#include <stdexcept>
#include <string>

namespace iafmc {

// Malformed input text (CSV lines, config files). `line` is 1-based, -1 when unknown.
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& msg, long line = -1)
        : std::runtime_error(line >= 0 ? "line " + std::to_string(line) + ": " + msg : msg),
          line(line) {}
    long line;
};

// Configuration values out of range or inconsistent.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dataset-level violations (nothing survives filtering, bad snapshot contents).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Snapshot or checkpoint could not be loaded (bad magic, version mismatch, truncation).
struct LoadError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite model parameters detected after a training epoch.
struct DivergenceError : std::runtime_error {
    DivergenceError(const std::string& msg, int epoch)
        : std::runtime_error(msg), epoch(epoch) {}
    int epoch;
};

}  // namespace iafmc
