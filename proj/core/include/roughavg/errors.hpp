#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace roughavg {

// Argument outside the mathematical domain of an operation (negative time,
// Hurst index out of range, inadmissible fractional order, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Inconsistent configuration: mismatched dimensions, non-nested grids,
// invalid experiment settings. `field()` names the offending setting when known.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what, std::string field = {})
        : std::invalid_argument(what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// A solver produced a non-finite state.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, std::size_t step)
        : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

} // namespace roughavg
