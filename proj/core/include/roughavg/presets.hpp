#pragma once

#include <functional>
#include <string>
#include <vector>

#include "roughavg/averaging.hpp"
#include "roughavg/coefficients.hpp"

namespace roughavg {

/// Named coefficient set with initial data, a default f-bar lattice and, when known, f-bar in closed form.
struct Preset {
    CoefficientSet coeffs;
    Vec x0;
    Vec y0;
    LatticeSpec lattice;
    std::function<Vec(const Vec&)> exact_fbar;
    std::string description;
};

/// Built-ins:
///   remark13    g = xi - 8 phi, h = sin xi + sin phi, f = phi/(1+xi^2) + sin xi, sigma = (1+xi^2)^{-1/2}
///   averaging   as remark13 with h = 1
///   ou          f = phi, g = xi - 8 phi, h = 1, sigma = 0, X0 = 8, Y0 = 1
///   degenerate  f = sin xi, g = xi - 8 phi, h = 1, sigma = (1+xi^2)^{-1/2}
/// Throws ConfigError naming "preset" for unknown names.
Preset make_preset(const std::string& name);

std::vector<std::string> preset_names();

} // namespace roughavg
