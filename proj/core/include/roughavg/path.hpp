#pragma once

#include <Eigen/Dense>
#include <cstddef>

#include "roughavg/grid.hpp"

namespace roughavg {

/// Vector-valued path sampled on a uniform grid; row k holds the value at t_k.
struct Path {
    Grid grid;
    Eigen::MatrixXd values;

    Path() = default;
    Path(Grid g, std::size_t dim) : grid(g), values(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(g.n_points()), static_cast<Eigen::Index>(dim))) {}
    Path(Grid g, Eigen::MatrixXd v) : grid(g), values(std::move(v)) {}

    std::size_t dim() const noexcept { return static_cast<std::size_t>(values.cols()); }
    std::size_t n_points() const noexcept { return static_cast<std::size_t>(values.rows()); }

    Eigen::VectorXd at(std::size_t i) const { return values.row(static_cast<Eigen::Index>(i)).transpose(); }
    Eigen::VectorXd increment(std::size_t i, std::size_t j) const { return at(j) - at(i); }
};

} // namespace roughavg
