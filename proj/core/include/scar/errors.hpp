#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace scar {

/// Input violates a model invariant (scenario, schedule or parameter set).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A Gaussian approximation was asked to operate outside its validity region.
class ApproximationError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Malformed input text (scenario JSON, schedule literal, study config).
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File could not be read or written. The message carries the path.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// ApproximationError raised while processing a specific schedule task.
class EstimationError : public ApproximationError {
public:
    EstimationError(std::size_t task_index, const std::string& what)
        : ApproximationError("task " + std::to_string(task_index) + ": " + what),
          task_index_(task_index) {}

    std::size_t task_index() const noexcept { return task_index_; }

private:
    std::size_t task_index_;
};

}  // namespace scar
