#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

#include "roughavg/coefficients.hpp"
#include "roughavg/gaussian_paths.hpp"
#include "roughavg/path.hpp"
#include "roughavg/rough_lift.hpp"

namespace roughavg {

/// du = a(u) dt + V(u) dZ with V: R^e -> R^{e x D}, D the lift dimension.
struct RdeSystem {
    std::function<Vec(const Vec&)> drift;
    MatrixField diffusion;
};

/// Explicit second-order rough Euler on the lift's coarse grid:
///   u_{k+1} = u_k + a(u_k) dt + V(u_k) Z_{k,k+1} + sum_{l,j} D_{V_l} V_j(u_k) Z2^{lj}_{k,k+1}.
/// Throws DivergenceError on a non-finite state.
Path solve_rde(const RdeSystem& system, const RoughLift& lift, const Vec& u0);

/// Joint system u = (X, Y) with drift (f, g/eps) and block-diagonal diffusion
/// (sigma, h/sqrt(eps)), for solving the fast-slow system purely as an RDE.
RdeSystem joint_fast_slow_system(const CoefficientSet& coeffs, double eps);

struct FastSlowSolution {
    Path x;         // slow component on the coarse grid
    Path y;         // fast component restricted to the coarse grid
    Path y_fast;    // fast component on the substep grid
    double eps = 1.0;
    std::uint64_t seed = 0;
    std::size_t substep_factor = 1;
};

/// Smallest substep factor with dt / factor <= eps / 4.
std::size_t required_substep_factor(double eps, double dt);

/// Fast-slow solve on the lift's coarse grid. The fast component uses Ito Euler-Maruyama with
/// drift g~/eps and diffusion h/sqrt(eps) on substep_factor substeps per coarse step, driven by
/// the same fine Bm path the lift was built from; the slow component uses the rough Euler rule
/// against the fBm block plus the trapezoid integral of f(X_k, Y_s) over the substeps.
FastSlowSolution solve_fast_slow(const CoefficientSet& coeffs, double eps, const RoughLift& lift,
                                 const GaussianPath& bm_fine, const Vec& x0, const Vec& y0,
                                 std::size_t substep_factor, std::uint64_t seed = 0);

/// Ito Euler-Maruyama path of dY = g~(xi, Y) dt + h(xi, Y) dW on [0, horizon].
Path solve_frozen(const Vec& xi, const Vec& phi0, const CoefficientSet& coeffs, double horizon,
                  std::size_t n_steps, std::uint64_t seed);

/// As above with caller-supplied Bm increments (rows: steps, cols: dp).
Path solve_frozen(const Vec& xi, const Vec& phi0, const CoefficientSet& coeffs, double horizon,
                  const Eigen::MatrixXd& dw);

} // namespace roughavg
