#pragma once

#include <stdexcept>
#include <string>

namespace bistab {

// Exit-code contract used by the CLI:
//   0 success, 2 bad configuration, 3 solver failure, 4 I/O failure.

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
    static constexpr int exit_code = 2;
};

struct SolveError : std::runtime_error {
    explicit SolveError(const std::string& what) : std::runtime_error(what) {}
    static constexpr int exit_code = 3;
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
    static constexpr int exit_code = 4;
};

inline int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return ConfigError::exit_code;
    if (dynamic_cast<const SolveError*>(&e)) return SolveError::exit_code;
    if (dynamic_cast<const IoError*>(&e)) return IoError::exit_code;
    return 1;
}

} // namespace bistab
