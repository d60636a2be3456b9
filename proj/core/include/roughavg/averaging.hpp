#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "roughavg/coefficients.hpp"
#include "roughavg/gaussian_paths.hpp"
#include "roughavg/path.hpp"
#include "roughavg/rde_solver.hpp"
#include "roughavg/rough_lift.hpp"

namespace roughavg {

/// Ergodic-average settings for the frozen dynamics.
struct FbarOptions {
    double burn_in = 5.0;
    double horizon = 50.0;
    std::size_t replicas = 64;
    double dt = 1e-3;
    std::uint64_t seed = 0;
    std::optional<Vec> phi0;  // defaults to zero
    std::size_t workers = 0;
};

struct FbarEstimate {
    Vec value;
    Vec std_error;  // across replica time averages
    std::size_t samples = 0;
};

/// Empirical stand-in for the invariant measure of the frozen dynamics at xi.
struct FrozenEnsemble {
    Vec xi;
    std::vector<Vec> samples;
    double burn_in = 0.0;
    double horizon = 0.0;
    std::size_t replicas = 0;
};

/// States of `replicas` frozen trajectories on [burn_in, horizon], recorded every `record_every` steps.
FrozenEnsemble sample_frozen_ensemble(const CoefficientSet& coeffs, const Vec& xi, const FbarOptions& options,
                                      std::size_t record_every = 1);

/// Time-and-replica average of f(xi, Y_t) for t in [burn_in, horizon]. Replica streams depend only on
/// (seed, replica), so estimates at neighbouring xi share their noise.
FbarEstimate estimate_fbar(const CoefficientSet& coeffs, const Vec& xi, const FbarOptions& options);

enum class FbarStrategy { on_the_fly, tabulated, analytic };

std::string to_string(FbarStrategy strategy);
FbarStrategy fbar_strategy_from_string(const std::string& s);

/// Box [lower, upper] with points_per_dim lattice points along each slow coordinate.
struct LatticeSpec {
    Vec lower;
    Vec upper;
    std::size_t points_per_dim = 64;
};

class AveragedDrift {
public:
    /// Estimates f-bar at every lattice point; queries use multilinear interpolation and throw
    /// DomainError outside the box.
    static AveragedDrift tabulate(const CoefficientSet& coeffs, const LatticeSpec& lattice,
                                  const FbarOptions& options);

    /// Fresh ergodic average per query, cached by exact argument.
    static AveragedDrift on_the_fly(const CoefficientSet& coeffs, const FbarOptions& options);

    /// Closed-form f-bar.
    static AveragedDrift analytic(std::function<Vec(const Vec&)> fbar, std::size_t m);

    Vec operator()(const Vec& xi) const;

    FbarStrategy strategy() const noexcept { return strategy_; }
    std::size_t dim() const noexcept { return m_; }
    const LatticeSpec& lattice() const noexcept { return lattice_; }
    const std::vector<Vec>& table() const noexcept { return table_; }
    const std::vector<Vec>& table_std_error() const noexcept { return table_se_; }

    nlohmann::json to_json() const;

private:
    struct Cache;

    Vec interpolate(const Vec& xi) const;

    FbarStrategy strategy_ = FbarStrategy::analytic;
    std::size_t m_ = 0;
    LatticeSpec lattice_;
    std::vector<Vec> table_;
    std::vector<Vec> table_se_;
    FbarOptions options_;
    std::shared_ptr<const CoefficientSet> coeffs_;
    std::function<Vec(const Vec&)> exact_;
    std::shared_ptr<Cache> cache_;
};

/// Rough Euler solution of dX = fbar(X) dt + sigma(X) dB using the fBm block of `lift`.
Path solve_averaged(const AveragedDrift& fbar, const CoefficientSet& coeffs, const RoughLift& lift, const Vec& x0);

/// s(delta) = floor(s / delta) delta.
double breakpoint(double s, double delta);

struct KhasminskiiPaths {
    Path x_hat;      // coarse grid
    Path y_hat;      // coarse grid
    Path y_hat_fast; // substep grid
};

/// Auxiliary processes with the slow argument frozen at breakpoints: Y-hat is driven by the same
/// W increments as `sol.y_fast`, X-hat integrates f(X_{s(delta)}, Y-hat) and reuses sigma(X^eps)
/// for the rough term against B.
KhasminskiiPaths khasminskii_auxiliary(const CoefficientSet& coeffs, const FastSlowSolution& sol, double delta,
                                       const RoughLift& lift, const GaussianPath& bm_fine);

struct MixingOptions {
    std::vector<double> lags{0.05, 0.1, 0.2};
    std::size_t replicas = 64;
    double burn_in = 2.0;
    double horizon = 22.0;
    double dt = 1e-3;
    std::uint64_t seed = 0;
    std::optional<Vec> phi0;
    std::size_t workers = 0;
    std::size_t component = 0;  // which coordinate of f to probe
};

struct MixingReport {
    std::vector<double> lags;       // includes lag 0 first
    std::vector<double> autocov;
    std::optional<double> fitted_rate;
    std::optional<double> beta1_half;
    double stationary_variance = 0.0;
    double stationary_mean = 0.0;
};

/// Autocovariance of f(xi, Y_s) along stationary frozen trajectories and a least-squares
/// exponential rate fitted to the positive values.
MixingReport mixing_probe(const CoefficientSet& coeffs, const Vec& xi, const MixingOptions& options);

nlohmann::json to_json(const MixingReport& report);

} // namespace roughavg
