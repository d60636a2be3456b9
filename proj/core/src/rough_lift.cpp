#include "roughavg/rough_lift.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "roughavg/errors.hpp"

namespace roughavg {

namespace {

using Index = Eigen::Index;

Index idx(std::size_t i) { return static_cast<Index>(i); }

std::size_t resolve_window(std::size_t requested, std::size_t n_points) {
    const std::size_t full = n_points - 1;
    if (requested == 0) return n_points <= 512 ? full : std::min<std::size_t>(16, full);
    return std::min(requested, full);
}

// Second-level increment of one fine step, given the step increment.
using LocalRule = void (*)(const double* delta, std::size_t dim, const BlockDims& dims,
                           BmScheme scheme, double* out);

void mixed_local(const double* delta, std::size_t dim, const BlockDims& dims, BmScheme scheme,
                 double* out) {
    // out is column-major dim x dim.
    const std::size_t d = dims.fbm;
    for (std::size_t b = 0; b < dim; ++b) {
        for (std::size_t a = 0; a < dim; ++a) {
            const bool a_fbm = a < d;
            const bool b_fbm = b < d;
            double v = 0.0;
            if (a_fbm && b_fbm) {
                v = 0.5 * delta[a] * delta[b];
            } else if (!a_fbm && !b_fbm) {
                v = scheme == BmScheme::stratonovich ? 0.5 * delta[a] * delta[b] : 0.0;
            } else if (a_fbm && !b_fbm) {
                v = 0.0;  // left-point sum of B_{s,u} dW_u within one step
            } else {
                v = delta[a] * delta[b];  // W (x) B - (B-W)^T on one step
            }
            out[a + b * dim] = v;
        }
    }
}

void geometric_local(const double* delta, std::size_t dim, const BlockDims&, BmScheme, double* out) {
    for (std::size_t b = 0; b < dim; ++b)
        for (std::size_t a = 0; a < dim; ++a) out[a + b * dim] = 0.5 * delta[a] * delta[b];
}

RoughLift accumulate(const Eigen::MatrixXd& fine, const Grid& coarse, std::size_t fine_factor,
                     const BlockDims& dims, BmScheme scheme, std::size_t window, LocalRule rule) {
    const std::size_t dim = dims.total();
    const std::size_t n = coarse.n_steps();
    Eigen::MatrixXd z(idx(n + 1), idx(dim));
    for (std::size_t k = 0; k <= n; ++k) z.row(idx(k)) = fine.row(idx(k * fine_factor));

    RoughLift lift(coarse, fine_factor, dims, z, resolve_window(window, n + 1));

    // Per-coarse-step second level, accumulated over fine steps with Chen's rule.
    std::vector<Eigen::MatrixXd> step_area(n, Eigen::MatrixXd::Zero(idx(dim), idx(dim)));
    std::vector<double> delta(dim), acc(dim), local(dim * dim);
    for (std::size_t c = 0; c < n; ++c) {
        Eigen::MatrixXd& s = step_area[c];
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t f = c * fine_factor; f < (c + 1) * fine_factor; ++f) {
            for (std::size_t a = 0; a < dim; ++a) delta[a] = fine(idx(f + 1), idx(a)) - fine(idx(f), idx(a));
            rule(delta.data(), dim, dims, scheme, local.data());
            for (std::size_t b = 0; b < dim; ++b) {
                for (std::size_t a = 0; a < dim; ++a) {
                    s(idx(a), idx(b)) += local[a + b * dim] + acc[a] * delta[b];
                }
            }
            for (std::size_t a = 0; a < dim; ++a) acc[a] += delta[a];
        }
    }

    // Coarse pairs by Chen composition of adjacent coarse steps.
    const std::size_t w = lift.window();
    Eigen::MatrixXd cur(idx(dim), idx(dim));
    for (std::size_t i = 0; i <= n; ++i) {
        cur.setZero();
        lift.set_second_level(i, i, cur);
        for (std::size_t j = i; j < n && j + 1 - i <= w; ++j) {
            const Eigen::VectorXd zij = z.row(idx(j)) - z.row(idx(i));
            const Eigen::VectorXd zjj = z.row(idx(j + 1)) - z.row(idx(j));
            cur += step_area[j] + zij * zjj.transpose();
            lift.set_second_level(i, j + 1, cur);
        }
    }
    return lift;
}

void check_nested(const Grid& coarse, const Grid& fine, std::size_t fine_factor, const char* name) {
    if (coarse.nesting_factor(fine) != fine_factor) {
        throw ConfigError(std::string(name) + " is not sampled on coarse.refine(fine_factor)", "fine_factor");
    }
}

double second_level_scale(const RoughLift& lift) {
    double scale = 0.0;
    const std::size_t n = lift.n_points();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n && j - i <= lift.window(); ++j) {
            scale = std::max(scale, lift.second_level(i, j).cwiseAbs().maxCoeff());
            const Eigen::VectorXd inc = lift.increment(i, j);
            scale = std::max(scale, inc.cwiseAbs2().maxCoeff());
        }
    }
    return scale;
}

} // namespace

RoughLift::RoughLift(Grid coarse, std::size_t fine_factor, BlockDims dims, Eigen::MatrixXd first_level,
                     std::size_t window)
    : grid_(coarse), fine_factor_(fine_factor), dims_(dims), window_(window), z_(std::move(first_level)) {
    if (static_cast<std::size_t>(z_.rows()) != grid_.n_points()) {
        throw ConfigError("first level must have one row per coarse grid point", "lift");
    }
    if (static_cast<std::size_t>(z_.cols()) != dims_.total()) {
        throw ConfigError("first level width does not match block dimensions", "lift");
    }
    window_ = std::min(window_, grid_.n_steps());
    const std::size_t d = dim();
    z2_.assign(n_points() * (window_ + 1) * d * d, 0.0);
}

std::size_t RoughLift::slot(std::size_t i, std::size_t j) const {
    if (!has_pair(i, j)) {
        throw ConfigError("second level (" + std::to_string(i) + "," + std::to_string(j) +
                              ") is not stored (window " + std::to_string(window_) + ")",
                          "window");
    }
    return (i * (window_ + 1) + (j - i)) * dim() * dim();
}

Eigen::VectorXd RoughLift::increment(std::size_t i, std::size_t j) const {
    return (z_.row(idx(j)) - z_.row(idx(i))).transpose();
}

Eigen::Map<const Eigen::MatrixXd> RoughLift::second_level(std::size_t i, std::size_t j) const {
    return Eigen::Map<const Eigen::MatrixXd>(z2_.data() + slot(i, j), idx(dim()), idx(dim()));
}

void RoughLift::set_second_level(std::size_t i, std::size_t j, const Eigen::MatrixXd& value) {
    if (static_cast<std::size_t>(value.rows()) != dim() || static_cast<std::size_t>(value.cols()) != dim()) {
        throw ConfigError("second-level tensor has the wrong shape", "lift");
    }
    Eigen::Map<Eigen::MatrixXd>(z2_.data() + slot(i, j), idx(dim()), idx(dim())) = value;
}

RoughLift RoughLift::with_second_level(std::size_t i, std::size_t j, const Eigen::MatrixXd& value) const {
    RoughLift copy = *this;
    copy.set_second_level(i, j, value);
    return copy;
}

RoughLift RoughLift::block(std::size_t offset, std::size_t count) const {
    if (offset + count > dim()) throw ConfigError("lift block out of range", "lift");
    BlockDims sub;
    const std::size_t fbm_end = std::min(dims_.fbm, offset + count);
    sub.fbm = fbm_end > offset ? fbm_end - offset : 0;
    sub.bm = count - sub.fbm;
    RoughLift out(grid_, fine_factor_, sub, z_.middleCols(idx(offset), idx(count)), window_);
    for (std::size_t i = 0; i < n_points(); ++i) {
        for (std::size_t j = i; j < n_points() && j - i <= window_; ++j) {
            out.set_second_level(i, j, second_level(i, j).block(idx(offset), idx(offset), idx(count), idx(count)));
        }
    }
    return out;
}

RoughLift lift_mixed(const GaussianPath& fbm, const GaussianPath& bm, const Grid& coarse,
                     std::size_t fine_factor, const LiftOptions& options) {
    if (fine_factor == 0) throw ConfigError("fine_factor must be >= 1", "fine_factor");
    if (fbm.kind == ProcessKind::bm) throw ConfigError("first driver must be the fBm component", "fbm");
    if (bm.kind == ProcessKind::fbm) throw ConfigError("second driver must be the Bm component", "bm");
    check_nested(coarse, fbm.grid(), fine_factor, "fBm path");
    check_nested(coarse, bm.grid(), fine_factor, "Bm path");
    if (fbm.path.n_points() != bm.path.n_points()) throw ConfigError("driver lengths differ", "lift");

    BlockDims dims{fbm.dim(), bm.dim()};
    Eigen::MatrixXd fine(fbm.path.values.rows(), idx(dims.total()));
    if (dims.fbm) fine.leftCols(idx(dims.fbm)) = fbm.values();
    if (dims.bm) fine.rightCols(idx(dims.bm)) = bm.values();
    return accumulate(fine, coarse, fine_factor, dims, options.bm_scheme, options.window, &mixed_local);
}

RoughLift lift_geometric(const Path& fine, const Grid& coarse, std::size_t fine_factor, std::size_t window) {
    if (fine_factor == 0) throw ConfigError("fine_factor must be >= 1", "fine_factor");
    check_nested(coarse, fine.grid, fine_factor, "path");
    BlockDims dims{fine.dim(), 0};
    return accumulate(fine.values, coarse, fine_factor, dims, BmScheme::stratonovich, window, &geometric_local);
}

LiftDiagnostics check_chen(const RoughLift& lift, double tol, std::size_t triple_budget, double holder_beta) {
    LiftDiagnostics diag;
    diag.tol = tol;
    diag.holder_beta = holder_beta;
    const std::size_t n = lift.n_points();
    const std::size_t w = lift.window();

    std::size_t total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t jmax = std::min(n - 1, i + w);
        if (jmax > i) total += (jmax - i) * (jmax - i + 1) / 2;
    }
    const std::size_t stride = std::max<std::size_t>(1, (total + triple_budget - 1) / std::max<std::size_t>(1, triple_budget));

    std::size_t counter = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n && j - i <= w; ++j) {
            const auto z2_ij = lift.second_level(i, j);
            for (std::size_t k = i + 1; k < j; ++k) {
                if ((counter++ % stride) != 0) continue;
                const Eigen::VectorXd a = lift.increment(i, k);
                const Eigen::VectorXd b = lift.increment(k, j);
                const double r = (z2_ij - lift.second_level(i, k) - lift.second_level(k, j) - a * b.transpose())
                                     .cwiseAbs()
                                     .maxCoeff();
                diag.chen_residual_max = std::max(diag.chen_residual_max, r);
                ++diag.triples_checked;
            }
        }
    }
    const double scale = second_level_scale(lift);
    diag.chen_residual_relative = scale > 0.0 ? diag.chen_residual_max / scale : diag.chen_residual_max;
    diag.chen_passed = diag.chen_residual_relative <= tol;
    return diag;
}

LiftDiagnostics check_geometric(const RoughLift& lift, double tol, double holder_beta) {
    LiftDiagnostics diag;
    diag.tol = tol;
    diag.holder_beta = holder_beta;
    const std::size_t n = lift.n_points();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n && j - i <= lift.window(); ++j) {
            const auto z2 = lift.second_level(i, j);
            const Eigen::VectorXd inc = lift.increment(i, j);
            const double r = (z2 + z2.transpose() - inc * inc.transpose()).cwiseAbs().maxCoeff();
            diag.symmetry_residual_max = std::max(diag.symmetry_residual_max, r);
        }
    }
    const double scale = second_level_scale(lift);
    diag.symmetry_residual_relative = scale > 0.0 ? diag.symmetry_residual_max / scale : diag.symmetry_residual_max;
    diag.symmetry_passed = diag.symmetry_residual_relative <= tol;
    return diag;
}

LiftDiagnostics diagnose_lift(const RoughLift& lift, double tol, double holder_beta) {
    LiftDiagnostics diag = check_chen(lift, tol, 4'000'000, holder_beta);
    const LiftDiagnostics sym = check_geometric(lift, tol, holder_beta);
    diag.symmetry_residual_max = sym.symmetry_residual_max;
    diag.symmetry_residual_relative = sym.symmetry_residual_relative;
    diag.symmetry_passed = sym.symmetry_passed;

    const std::size_t n = lift.n_points();
    const double dt = lift.coarse_grid().dt();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n && j - i <= lift.window(); ++j) {
            const double gap = dt * static_cast<double>(j - i);
            diag.first_level_norm =
                std::max(diag.first_level_norm, lift.increment(i, j).norm() / std::pow(gap, holder_beta));
            diag.second_level_norm =
                std::max(diag.second_level_norm, lift.second_level(i, j).norm() / std::pow(gap, 2.0 * holder_beta));
        }
    }
    return diag;
}

} // namespace roughavg
