#pragma once

#include <stdexcept>
#include <string>

namespace nlm {

// Error taxonomy mirrors the C API status codes (see include/neurolm.h).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& m) : std::runtime_error(m) {}
};
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& m) : std::runtime_error(m) {}
};
struct InputError : std::runtime_error {
    explicit InputError(const std::string& m) : std::runtime_error(m) {}
};
struct IoError : std::runtime_error {
    explicit IoError(const std::string& m) : std::runtime_error(m) {}
};
struct LexError : std::runtime_error {
    LexError(const std::string& m, std::size_t line) : std::runtime_error(m), line_number(line) {}
    std::size_t line_number;
};
struct TrainError : std::runtime_error {
    explicit TrainError(const std::string& m) : std::runtime_error(m) {}
};
struct ScoreError : std::runtime_error {
    explicit ScoreError(const std::string& m) : std::runtime_error(m) {}
};

}  // namespace nlm
