#pragma once

#include <stdexcept>
#include <string>

namespace confound {

/// Bad inputs: schema problems, contract violations, degenerate data.
/// The CLI maps this to exit code 1.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
    ValidationError(const std::string& msg, std::string field_name)
        : std::runtime_error(msg), field(std::move(field_name)) {}

    std::string field;  // config/schema key the failure points at, when known
};

/// Failures while computing: solver breakdowns, learner failures inside
/// permutation loops. The CLI maps this to exit code 2.
struct ComputationError : std::runtime_error {
    explicit ComputationError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace confound
