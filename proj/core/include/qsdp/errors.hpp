#pragma once

#include <stdexcept>
#include <string>

namespace qsdp {

// Bad experiment or model configuration (schema violations, out-of-range
// parameters).  The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Runtime failure of a structurally valid model (stalled rebirth loop,
// vanished survival mass).  The CLI maps this to exit code 3.
class ModelError : public std::runtime_error {
public:
    explicit ModelError(const std::string& msg) : std::runtime_error(msg) {}
};

// Power iteration ran out of iterations; carries the last residual so the
// caller can distinguish slow mixing from genuine oscillation.
class ConvergenceError : public ModelError {
public:
    ConvergenceError(const std::string& msg, double residual, long iterations)
        : ModelError(msg), residual(residual), iterations(iterations) {}

    double residual;
    long iterations;
};

} // namespace qsdp
