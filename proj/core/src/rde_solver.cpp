#include "roughavg/rde_solver.hpp"

#include <cmath>
#include <random>
#include <string>

#include "roughavg/errors.hpp"
#include "roughavg/rng.hpp"

namespace roughavg {

namespace {

using Index = Eigen::Index;

Index idx(std::size_t i) { return static_cast<Index>(i); }

void require_finite(const Vec& u, std::size_t step, const char* what) {
    if (!u.allFinite()) throw DivergenceError(std::string(what) + " produced a non-finite state", step);
}

} // namespace

Path solve_rde(const RdeSystem& system, const RoughLift& lift, const Vec& u0) {
    const Grid& grid = lift.coarse_grid();
    const std::size_t e = static_cast<std::size_t>(u0.size());
    Path out(grid, e);
    out.values.row(0) = u0.transpose();
    const double dt = grid.dt();
    Vec u = u0;
    for (std::size_t k = 0; k < grid.n_steps(); ++k) {
        const Mat v = system.diffusion(u);
        if (static_cast<std::size_t>(v.rows()) != e || static_cast<std::size_t>(v.cols()) != lift.dim()) {
            throw ConfigError("diffusion shape does not match state and lift dimensions", "lift");
        }
        Vec next = u + v * lift.increment(k, k + 1);
        if (system.drift) next += system.drift(u) * dt;
        next += levy_correction(v, system.diffusion.jacobian_at(u), lift.second_level(k, k + 1));
        require_finite(next, k + 1, "rough Euler");
        u = std::move(next);
        out.values.row(idx(k + 1)) = u.transpose();
    }
    return out;
}

RdeSystem joint_fast_slow_system(const CoefficientSet& coeffs, double eps) {
    if (!(eps > 0.0)) throw DomainError("eps must be positive");
    const std::size_t m = coeffs.m;
    const std::size_t n = coeffs.n;
    RdeSystem sys;
    sys.drift = [coeffs, eps, m, n](const Vec& u) {
        const Vec xi = u.head(idx(m));
        const Vec phi = u.tail(idx(n));
        Vec out(idx(m + n));
        out.head(idx(m)) = coeffs.eval_f(xi, phi);
        out.tail(idx(n)) = coeffs.eval_g(xi, phi) / eps;
        return out;
    };
    sys.diffusion.value = [coeffs, eps, m, n](const Vec& u) {
        const Vec xi = u.head(idx(m));
        const Vec phi = u.tail(idx(n));
        Mat v = Mat::Zero(idx(m + n), idx(coeffs.d + coeffs.dp));
        v.topLeftCorner(idx(m), idx(coeffs.d)) = coeffs.eval_sigma(xi);
        v.bottomRightCorner(idx(n), idx(coeffs.dp)) = coeffs.eval_h(xi, phi) / std::sqrt(eps);
        return v;
    };
    return sys;
}

std::size_t required_substep_factor(double eps, double dt) {
    if (!(eps > 0.0) || !(dt > 0.0)) throw DomainError("eps and dt must be positive");
    const double ratio = 4.0 * dt / eps;
    const auto factor = static_cast<std::size_t>(std::ceil(ratio * (1.0 - 1e-12)));
    return factor == 0 ? 1 : factor;
}

FastSlowSolution solve_fast_slow(const CoefficientSet& coeffs, double eps, const RoughLift& lift,
                                 const GaussianPath& bm_fine, const Vec& x0, const Vec& y0,
                                 std::size_t substep_factor, std::uint64_t seed) {
    if (!(eps > 0.0 && eps <= 1.0)) throw DomainError("eps must lie in (0, 1]");
    if (lift.block_dims().fbm != coeffs.d || lift.block_dims().bm != coeffs.dp) {
        throw ConfigError("lift block dimensions do not match (d, d')", "lift");
    }
    if (bm_fine.dim() != coeffs.dp) throw ConfigError("Bm path dimension does not match d'", "bm");
    if (static_cast<std::size_t>(x0.size()) != coeffs.m || static_cast<std::size_t>(y0.size()) != coeffs.n) {
        throw ConfigError("initial state dimensions do not match (m, n)", "initial_state");
    }
    const Grid& grid = lift.coarse_grid();
    const std::size_t fine_factor = lift.fine_factor();
    if (grid.nesting_factor(bm_fine.grid()) != fine_factor) {
        throw ConfigError("Bm path is not on the lift's fine grid", "fine_factor");
    }
    if (substep_factor == 0 || fine_factor % substep_factor != 0) {
        throw ConfigError("substep_factor must divide the lift fine_factor (" + std::to_string(fine_factor) + ")",
                          "substep_factor");
    }
    const double dt = grid.dt();
    const std::size_t needed = required_substep_factor(eps, dt);
    if (substep_factor < needed) {
        throw ConfigError("fast substep exceeds eps/4; substep_factor must be at least " + std::to_string(needed),
                          "substep_factor");
    }

    const std::size_t stride = fine_factor / substep_factor;
    const double hs = dt / static_cast<double>(substep_factor);
    const double inv_eps = 1.0 / eps;
    const double inv_sqrt_eps = 1.0 / std::sqrt(eps);
    const std::size_t d = coeffs.d;
    const Eigen::MatrixXd& w = bm_fine.values();

    FastSlowSolution sol;
    sol.eps = eps;
    sol.seed = seed;
    sol.substep_factor = substep_factor;
    sol.x = Path(grid, coeffs.m);
    sol.y = Path(grid, coeffs.n);
    sol.y_fast = Path(grid.refine(substep_factor), coeffs.n);
    sol.x.values.row(0) = x0.transpose();
    sol.y.values.row(0) = y0.transpose();
    sol.y_fast.values.row(0) = y0.transpose();

    Vec x = x0;
    Vec y = y0;
    for (std::size_t k = 0; k < grid.n_steps(); ++k) {
        Vec f_integral = Vec::Zero(idx(coeffs.m));
        Vec f_left = coeffs.eval_f(x, y);
        for (std::size_t s = 0; s < substep_factor; ++s) {
            const std::size_t sub = k * substep_factor + s;
            const Vec dw = (w.row(idx((sub + 1) * stride)) - w.row(idx(sub * stride))).transpose();
            Vec y_next = y + ito_correction(coeffs, x, y) * (hs * inv_eps) + coeffs.eval_h(x, y) * dw * inv_sqrt_eps;
            require_finite(y_next, k + 1, "fast Euler-Maruyama");
            const Vec f_right = coeffs.eval_f(x, y_next);
            f_integral += 0.5 * hs * (f_left + f_right);
            f_left = f_right;
            y = std::move(y_next);
            sol.y_fast.values.row(idx(sub + 1)) = y.transpose();
        }
        const Mat sig = coeffs.eval_sigma(x);
        Vec x_next = x + f_integral + sig * lift.increment(k, k + 1).head(idx(d));
        x_next += levy_correction(sig, coeffs.eval_sigma_jacobian(x),
                                  lift.second_level(k, k + 1).topLeftCorner(idx(d), idx(d)));
        require_finite(x_next, k + 1, "slow rough Euler");
        x = std::move(x_next);
        sol.x.values.row(idx(k + 1)) = x.transpose();
        sol.y.values.row(idx(k + 1)) = y.transpose();
    }
    return sol;
}

Path solve_frozen(const Vec& xi, const Vec& phi0, const CoefficientSet& coeffs, double horizon,
                  const Eigen::MatrixXd& dw) {
    const Grid grid(0.0, horizon, static_cast<std::size_t>(dw.rows()));
    if (static_cast<std::size_t>(dw.cols()) != coeffs.dp) throw ConfigError("noise width does not match d'", "bm");
    const double dt = grid.dt();
    Path out(grid, coeffs.n);
    out.values.row(0) = phi0.transpose();
    Vec y = phi0;
    for (std::size_t k = 0; k < grid.n_steps(); ++k) {
        y = y + ito_correction(coeffs, xi, y) * dt + coeffs.eval_h(xi, y) * dw.row(idx(k)).transpose();
        require_finite(y, k + 1, "frozen Euler-Maruyama");
        out.values.row(idx(k + 1)) = y.transpose();
    }
    return out;
}

Path solve_frozen(const Vec& xi, const Vec& phi0, const CoefficientSet& coeffs, double horizon,
                  std::size_t n_steps, std::uint64_t seed) {
    const Grid grid(0.0, horizon, n_steps);
    Engine rng = make_engine(seed, {tag(StreamTag::frozen)});
    std::normal_distribution<double> normal(0.0, std::sqrt(grid.dt()));
    Eigen::MatrixXd dw(idx(n_steps), idx(coeffs.dp));
    for (Index k = 0; k < dw.rows(); ++k)
        for (Index j = 0; j < dw.cols(); ++j) dw(k, j) = normal(rng);
    return solve_frozen(xi, phi0, coeffs, horizon, dw);
}

} // namespace roughavg
