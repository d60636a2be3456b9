#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "roughavg/rough_integrate.hpp"

namespace roughavg {

/// Fractional-calculus integral against the compensated Riemann sum on one triplet.
struct XcheckReport {
    std::string name;
    Vec frac;
    Vec riemann;
    std::optional<Vec> exact;
    double abs_gap = 0.0;
    double rel_gap = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    std::size_t quad_points = 0;
    std::size_t riemann_points = 0;

    nlohmann::json to_json() const;
};

/// x = sin t, omega = cos t, v the exact iterated integral, sigma(x) = x on [0, 1]. The Riemann
/// sum runs on a grid `oracle_refine` times finer than the fractional quadrature.
XcheckReport xcheck_smooth(std::size_t quad_points, std::size_t oracle_refine = 10, double beta = 0.45);

/// x = omega = B for a scalar fBm sample with its geometric lift, sigma(x) = sin x on [0, 1].
XcheckReport xcheck_fbm(double hurst, std::size_t quad_points, std::uint64_t seed, std::optional<double> beta = {});

} // namespace roughavg
