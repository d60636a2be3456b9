#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "roughavg/averaging.hpp"
#include "roughavg/presets.hpp"

namespace roughavg {

/// delta(eps) = eps sqrt(-ln eps).
double khasminskii_delta(double eps);

struct ConvergenceSpec {
    Preset preset;
    double hurst = 0.4;
    double horizon = 1.0;
    std::size_t n_steps = 64;
    std::size_t fine_factor = 32;
    /// Fast substep as a fraction of eps; must not exceed 1/4.
    double substep_fraction = 1.0 / 32.0;
    std::vector<double> eps;
    std::optional<double> delta_override;
    std::size_t replicas = 128;
    std::uint64_t seed = 0;
    FbarStrategy fbar_strategy = FbarStrategy::tabulated;
    std::optional<LatticeSpec> lattice;  // preset lattice when unset
    FbarOptions fbar;
    bool khasminskii = true;
    double exclusion_budget = 0.01;
    std::size_t workers = 0;
};

/// Substep factor for eps on the coarse step dt, and the lift fine factor: the smallest
/// multiple of the substep factor that is at least the configured fine factor.
struct StepPlan {
    std::size_t substep_factor = 1;
    std::size_t fine_factor = 1;
};
StepPlan plan_steps(const ConvergenceSpec& spec, double eps);

struct ConvergenceRow {
    double eps = 0.0;
    double delta = 0.0;
    std::size_t replicas = 0;   // requested
    std::size_t n = 0;          // used
    std::size_t excluded = 0;
    double mean_sup_error = 0.0;
    double std_error = 0.0;
    /// sup_t of the replica mean of |Y - Y-hat|^2 on the substep grid (NaN when not computed).
    double y_gap = 0.0;
    std::size_t substep_factor = 0;
    std::size_t fine_factor = 0;
    double runtime_seconds = 0.0;
    std::vector<std::string> warnings;
};

struct ConvergenceReport {
    std::string preset;
    std::string schedule;  // "khasminskii" or "override"
    double hurst = 0.0;
    std::vector<ConvergenceRow> rows;

    std::size_t total_excluded() const;
    std::size_t total_replicas() const;
};

/// Seed of replica r at schedule position e.
std::uint64_t replica_seed(std::uint64_t master, std::size_t eps_index, std::size_t replica);

/// f-bar for the spec's strategy, built once and shared by every replica.
AveragedDrift build_fbar(const ConvergenceSpec& spec);

/// For each eps: sample (B, W), lift, solve X^eps and X-bar on the same B block, record
/// sup_t |X^eps - X-bar|. Diverged replicas (including f-bar queries outside the tabulated box)
/// are excluded and counted.
ConvergenceReport run_convergence(const ConvergenceSpec& spec);

/// Same, reusing a prebuilt f-bar.
ConvergenceReport run_convergence(const ConvergenceSpec& spec, const AveragedDrift& fbar);

struct DeltaScalingRow {
    double delta = 0.0;
    double sup_mean_sq_gap = 0.0;  // sup_t E|Y - Y-hat|^2
    double std_error = 0.0;        // at the maximizing time
    std::size_t n = 0;
};

/// sup_t E|Y^eps - Y-hat^eps|^2 at fixed eps for several delta on shared realizations.
std::vector<DeltaScalingRow> delta_scaling(const ConvergenceSpec& spec, double eps, const std::vector<double>& deltas);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

} // namespace roughavg
