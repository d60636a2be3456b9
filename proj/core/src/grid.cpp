#include "roughavg/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "roughavg/errors.hpp"

namespace roughavg {

Grid::Grid(double t_start, double t_end, std::size_t n_steps)
    : t_start_(t_start), t_end_(t_end), n_steps_(n_steps) {
    if (!(t_start >= 0.0) || !std::isfinite(t_end) || !(t_end > t_start)) {
        throw DomainError("grid requires 0 <= t_start < t_end");
    }
    if (n_steps == 0) {
        throw DomainError("grid requires n_steps >= 1");
    }
}

double Grid::time(std::size_t i) const noexcept {
    return i == n_steps_ ? t_end_ : t_start_ + dt() * static_cast<double>(i);
}

Grid Grid::refine(std::size_t factor) const {
    if (factor == 0) throw ConfigError("refinement factor must be positive", "fine_factor");
    return Grid(t_start_, t_end_, n_steps_ * factor);
}

std::size_t Grid::index_of(double t) const {
    const double x = (t - t_start_) / dt();
    const double r = std::round(x);
    if (std::abs(x - r) > 1e-9 || r < 0.0 || r > static_cast<double>(n_steps_)) {
        throw ConfigError("time " + std::to_string(t) + " is not a grid point", "grid");
    }
    return static_cast<std::size_t>(r);
}

std::size_t Grid::nesting_factor(const Grid& fine) const noexcept {
    if (fine.n_steps_ % n_steps_ != 0) return 0;
    const double scale = std::max(1.0, std::abs(t_end_));
    if (std::abs(fine.t_start_ - t_start_) > 1e-12 * scale ||
        std::abs(fine.t_end_ - t_end_) > 1e-12 * scale) {
        return 0;
    }
    return fine.n_steps_ / n_steps_;
}

} // namespace roughavg
