#pragma once

#include <cstddef>

namespace roughavg {

/// Uniform time grid t_start = t_0 < t_1 < ... < t_n = t_end.
class Grid {
public:
    Grid() = default;

    /// Throws DomainError unless 0 <= t_start < t_end and n_steps >= 1.
    Grid(double t_start, double t_end, std::size_t n_steps);

    double t_start() const noexcept { return t_start_; }
    double t_end() const noexcept { return t_end_; }
    std::size_t n_steps() const noexcept { return n_steps_; }
    std::size_t n_points() const noexcept { return n_steps_ + 1; }
    double dt() const noexcept { return (t_end_ - t_start_) / static_cast<double>(n_steps_); }
    double horizon() const noexcept { return t_end_ - t_start_; }

    double time(std::size_t i) const noexcept;

    /// Grid with `factor` steps per step of this one.
    Grid refine(std::size_t factor) const;

    /// Index of the grid point equal to `t` (within 1e-9 of a step); throws ConfigError otherwise.
    std::size_t index_of(double t) const;

    /// Number of fine steps per step of `*this` when `fine` nests it; 0 when it does not.
    std::size_t nesting_factor(const Grid& fine) const noexcept;

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    double t_start_ = 0.0;
    double t_end_ = 1.0;
    std::size_t n_steps_ = 1;
};

} // namespace roughavg
