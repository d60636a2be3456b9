#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "roughavg/gaussian_paths.hpp"
#include "roughavg/grid.hpp"
#include "roughavg/path.hpp"

namespace roughavg {

/// Coordinates 0..fbm-1 of the joint driver are fBm, fbm..fbm+bm-1 are Bm.
struct BlockDims {
    std::size_t fbm = 0;
    std::size_t bm = 0;
    std::size_t total() const noexcept { return fbm + bm; }
    friend bool operator==(const BlockDims&, const BlockDims&) = default;
};

/// Second-level rule for the Bm-Bm block.
enum class BmScheme { stratonovich, ito };

struct LiftOptions {
    BmScheme bm_scheme = BmScheme::stratonovich;
    /// Largest j - i stored. 0 selects the full upper triangle for coarse grids with
    /// at most 512 points and a band of 16 otherwise.
    std::size_t window = 0;
};

/// Level-2 rough path over a coarse grid: first level Z_t and Z2_{t_i,t_j} for
/// 0 <= j - i <= window. Entry (a,b) of Z2_{s,t} is the iterated integral of dZ^a then dZ^b.
class RoughLift {
public:
    RoughLift() = default;
    RoughLift(Grid coarse, std::size_t fine_factor, BlockDims dims, Eigen::MatrixXd first_level,
              std::size_t window);

    const Grid& coarse_grid() const noexcept { return grid_; }
    std::size_t fine_factor() const noexcept { return fine_factor_; }
    const BlockDims& block_dims() const noexcept { return dims_; }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(z_.cols()); }
    std::size_t window() const noexcept { return window_; }
    std::size_t n_points() const noexcept { return static_cast<std::size_t>(z_.rows()); }

    const Eigen::MatrixXd& first_level() const noexcept { return z_; }
    Eigen::VectorXd increment(std::size_t i, std::size_t j) const;

    bool has_pair(std::size_t i, std::size_t j) const noexcept {
        return i <= j && j < n_points() && j - i <= window_;
    }
    Eigen::Map<const Eigen::MatrixXd> second_level(std::size_t i, std::size_t j) const;

    /// Copy with one second-level tensor replaced (fault injection, external data).
    RoughLift with_second_level(std::size_t i, std::size_t j, const Eigen::MatrixXd& value) const;

    /// Sub-lift on coordinates [offset, offset + count); e.g. block(0, d) is the fBm-only view.
    RoughLift block(std::size_t offset, std::size_t count) const;

    /// Overwrites Z2 for a stored pair. Used by the builders.
    void set_second_level(std::size_t i, std::size_t j, const Eigen::MatrixXd& value);

private:
    std::size_t slot(std::size_t i, std::size_t j) const;

    Grid grid_;
    std::size_t fine_factor_ = 1;
    BlockDims dims_;
    std::size_t window_ = 0;
    Eigen::MatrixXd z_;
    std::vector<double> z2_;
};

struct LiftDiagnostics {
    double chen_residual_max = 0.0;
    double chen_residual_relative = 0.0;
    double symmetry_residual_max = 0.0;
    double symmetry_residual_relative = 0.0;
    double holder_beta = 0.0;
    double first_level_norm = 0.0;
    double second_level_norm = 0.0;
    std::size_t triples_checked = 0;
    double tol = 0.0;
    bool chen_passed = true;
    bool symmetry_passed = true;
};

/// Joint lift of an fBm path B and a Bm path W sampled on coarse.refine(fine_factor).
/// B-B uses the piecewise-linear (geometric) lift, W-W Stratonovich mid-point sums
/// (or left-point sums when options.bm_scheme == ito), B-W left-point sums against dW,
/// and W-B = W (x) B - (B-W)^T.
RoughLift lift_mixed(const GaussianPath& fbm, const GaussianPath& bm, const Grid& coarse,
                     std::size_t fine_factor, const LiftOptions& options = {});

/// Canonical piecewise-linear lift of an arbitrary path, all coordinates treated as one block.
RoughLift lift_geometric(const Path& fine, const Grid& coarse, std::size_t fine_factor,
                         std::size_t window = 0);

/// Max Chen residual |Z2_st - Z2_su - Z2_ut - Z_su (x) Z_ut| over stored coarse triples
/// (strided down to about triple_budget triples). Relative values are scaled by the
/// largest second-level entry.
LiftDiagnostics check_chen(const RoughLift& lift, double tol = 1e-10,
                           std::size_t triple_budget = 4'000'000, double holder_beta = 0.3);

/// Max |Z2^{ab} + Z2^{ba} - Z^a Z^b| over stored pairs.
LiftDiagnostics check_geometric(const RoughLift& lift, double tol = 1e-10, double holder_beta = 0.3);

/// Both checks plus first/second-level Hoelder norms at exponent holder_beta.
LiftDiagnostics diagnose_lift(const RoughLift& lift, double tol = 1e-10, double holder_beta = 0.3);

} // namespace roughavg
