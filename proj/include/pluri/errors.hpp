#pragma once

#include <stdexcept>
#include <string>

namespace pluri {

// Category drives the CLI exit code: parse=2, model=3, solver=4.
struct ModelError : std::runtime_error {
    explicit ModelError(const std::string& m) : std::runtime_error(m) {}
};
struct SolverError : std::runtime_error {
    explicit SolverError(const std::string& m) : std::runtime_error(m) {}
};
struct ConeError : std::runtime_error {
    int witness;  // carrier index where positivity fails, -1 if n/a
    explicit ConeError(const std::string& m, int w = -1) : std::runtime_error(m), witness(w) {}
};
struct VolumeError : std::runtime_error {
    explicit VolumeError(const std::string& m) : std::runtime_error(m) {}
};
struct ArityError : std::invalid_argument {
    explicit ArityError(const std::string& m) : std::invalid_argument(m) {}
};

}  // namespace pluri
