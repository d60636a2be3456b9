#include "roughavg/convergence.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "roughavg/errors.hpp"
#include "roughavg/gaussian_paths.hpp"
#include "roughavg/parallel.hpp"
#include "roughavg/rde_solver.hpp"
#include "roughavg/rng.hpp"
#include "roughavg/rough_lift.hpp"

namespace roughavg {

namespace {

void validate(const ConvergenceSpec& spec) {
    require_supported_hurst(spec.hurst);
    if (spec.eps.empty()) throw ConfigError("eps schedule is empty", "eps_schedule");
    for (std::size_t i = 0; i < spec.eps.size(); ++i) {
        if (!(spec.eps[i] > 0.0 && spec.eps[i] < 1.0)) throw ConfigError("eps values must lie in (0, 1)", "eps_schedule");
        if (i > 0 && !(spec.eps[i] < spec.eps[i - 1])) throw ConfigError("eps schedule must be strictly decreasing", "eps_schedule");
    }
    if (spec.replicas < 2) throw ConfigError("at least 2 replicas are required", "replicas");
    if (spec.n_steps == 0) throw ConfigError("n_steps must be positive", "n_steps");
    if (spec.fine_factor == 0) throw ConfigError("fine_factor must be positive", "fine_factor");
    if (!(spec.horizon > 0.0)) throw ConfigError("horizon must be positive", "T");
    if (!(spec.substep_fraction > 0.0 && spec.substep_fraction <= 0.25)) {
        throw ConfigError("substep_fraction must lie in (0, 1/4]", "substep_fraction");
    }
    if (spec.delta_override && !(*spec.delta_override > 0.0)) throw ConfigError("delta must be positive", "delta");
    if (!(spec.exclusion_budget >= 0.0)) throw ConfigError("exclusion_budget must be nonnegative", "exclusion_budget");
}

struct ReplicaSetup {
    RoughLift lift;
    GaussianPath bm;
    FastSlowSolution sol;
};

ReplicaSetup simulate(const ConvergenceSpec& spec, const Grid& coarse, const StepPlan& plan, double eps,
                      std::uint64_t seed) {
    const CoefficientSet& c = spec.preset.coeffs;
    const Grid fine = coarse.refine(plan.fine_factor);
    const GaussianPath b = sample_fbm(spec.hurst, fine, seed, c.d);
    GaussianPath w = sample_bm(c.dp, fine, seed);
    LiftOptions lo;
    lo.window = 1;
    RoughLift lift = lift_mixed(b, w, coarse, plan.fine_factor, lo);
    FastSlowSolution sol = solve_fast_slow(c, eps, lift, w, spec.preset.x0, spec.preset.y0, plan.substep_factor, seed);
    return {std::move(lift), std::move(w), std::move(sol)};
}

double sup_distance(const Path& a, const Path& b) {
    return (a.values - b.values).rowwise().norm().maxCoeff();
}

std::vector<double> squared_gap(const Path& a, const Path& b) {
    const Eigen::VectorXd g = (a.values - b.values).rowwise().squaredNorm();
    return {g.data(), g.data() + g.size()};
}

// sup over time of the replica mean, with the standard error at the maximizing time
std::pair<double, double> sup_of_mean(const std::vector<std::vector<double>>& series) {
    const std::size_t n = series.size();
    const std::size_t len = series.front().size();
    std::vector<double> col(n);
    double best = -1.0;
    double best_se = 0.0;
    for (std::size_t t = 0; t < len; ++t) {
        for (std::size_t r = 0; r < n; ++r) col[r] = series[r][t];
        const double mean = tree_sum(col) / static_cast<double>(n);
        if (mean > best) {
            for (std::size_t r = 0; r < n; ++r) col[r] = (series[r][t] - mean) * (series[r][t] - mean);
            best = mean;
            best_se = n > 1 ? std::sqrt(tree_sum(col) / (static_cast<double>(n) * static_cast<double>(n - 1))) : 0.0;
        }
    }
    return {best, best_se};
}

} // namespace

double khasminskii_delta(double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("khasminskii_delta needs eps in (0, 1)");
    return eps * std::sqrt(-std::log(eps));
}

StepPlan plan_steps(const ConvergenceSpec& spec, double eps) {
    const double dt = spec.horizon / static_cast<double>(spec.n_steps);
    StepPlan plan;
    plan.substep_factor = std::max<std::size_t>(
        required_substep_factor(eps, dt),
        static_cast<std::size_t>(std::ceil(dt / (spec.substep_fraction * eps) * (1.0 - 1e-12))));
    plan.fine_factor = (spec.fine_factor + plan.substep_factor - 1) / plan.substep_factor * plan.substep_factor;
    return plan;
}

std::size_t ConvergenceReport::total_excluded() const {
    std::size_t n = 0;
    for (const auto& r : rows) n += r.excluded;
    return n;
}

std::size_t ConvergenceReport::total_replicas() const {
    std::size_t n = 0;
    for (const auto& r : rows) n += r.replicas;
    return n;
}

std::uint64_t replica_seed(std::uint64_t master, std::size_t eps_index, std::size_t replica) {
    return derive_seed(master, {tag(StreamTag::replica), eps_index, replica});
}

AveragedDrift build_fbar(const ConvergenceSpec& spec) {
    const Preset& p = spec.preset;
    switch (spec.fbar_strategy) {
    case FbarStrategy::analytic:
        if (!p.exact_fbar) throw ConfigError("preset '" + p.coeffs.name + "' has no closed-form f-bar", "fbar_strategy");
        return AveragedDrift::analytic(p.exact_fbar, p.coeffs.m);
    case FbarStrategy::tabulated: {
        FbarOptions o = spec.fbar;
        if (o.workers == 0) o.workers = spec.workers;
        return AveragedDrift::tabulate(p.coeffs, spec.lattice.value_or(p.lattice), o);
    }
    case FbarStrategy::on_the_fly:
        return AveragedDrift::on_the_fly(p.coeffs, spec.fbar);
    }
    throw ConfigError("unknown fbar strategy", "fbar_strategy");
}

ConvergenceReport run_convergence(const ConvergenceSpec& spec) {
    validate(spec);
    return run_convergence(spec, build_fbar(spec));
}

ConvergenceReport run_convergence(const ConvergenceSpec& spec, const AveragedDrift& fbar) {
    validate(spec);
    const Grid coarse(0.0, spec.horizon, spec.n_steps);
    ConvergenceReport report;
    report.preset = spec.preset.coeffs.name;
    report.schedule = spec.delta_override ? "override" : "khasminskii";
    report.hurst = spec.hurst;

    for (std::size_t e = 0; e < spec.eps.size(); ++e) {
        const auto start = std::chrono::steady_clock::now();
        const double eps = spec.eps[e];
        const double delta = spec.delta_override.value_or(khasminskii_delta(eps));
        const StepPlan plan = plan_steps(spec, eps);

        struct Outcome {
            bool ok = false;
            double error = 0.0;
            std::vector<double> gap;
            std::string warning;
        };
        std::vector<Outcome> out(spec.replicas);
        parallel_for(spec.replicas, [&](std::size_t r) {
            const std::uint64_t seed = replica_seed(spec.seed, e, r);
            try {
                const ReplicaSetup s = simulate(spec, coarse, plan, eps, seed);
                const Path xbar = solve_averaged(fbar, spec.preset.coeffs, s.lift, spec.preset.x0);
                out[r].error = sup_distance(s.sol.x, xbar);
                if (spec.khasminskii) {
                    const double d_eff = std::max(delta, coarse.dt());
                    const KhasminskiiPaths aux = khasminskii_auxiliary(spec.preset.coeffs, s.sol, d_eff, s.lift, s.bm);
                    out[r].gap = squared_gap(s.sol.y_fast, aux.y_hat_fast);
                }
                out[r].ok = std::isfinite(out[r].error);
                if (!out[r].ok) out[r].warning = "replica " + std::to_string(r) + ": non-finite error";
            } catch (const DivergenceError& ex) {
                out[r].warning = "replica " + std::to_string(r) + ": " + ex.what();
            } catch (const DomainError& ex) {
                out[r].warning = "replica " + std::to_string(r) + ": " + ex.what();
            }
        }, spec.workers);

        ConvergenceRow row;
        row.eps = eps;
        row.delta = delta;
        row.replicas = spec.replicas;
        row.substep_factor = plan.substep_factor;
        row.fine_factor = plan.fine_factor;
        std::vector<double> errors;
        std::vector<std::vector<double>> gaps;
        for (auto& o : out) {
            if (!o.ok) {
                ++row.excluded;
                row.warnings.push_back(o.warning);
                continue;
            }
            errors.push_back(o.error);
            if (spec.khasminskii) gaps.push_back(std::move(o.gap));
        }
        row.n = errors.size();
        if (row.n > 0) {
            const double n = static_cast<double>(row.n);
            row.mean_sup_error = tree_sum(errors) / n;
            std::vector<double> sq(errors.size());
            for (std::size_t i = 0; i < errors.size(); ++i) sq[i] = (errors[i] - row.mean_sup_error) * (errors[i] - row.mean_sup_error);
            row.std_error = row.n > 1 ? std::sqrt(tree_sum(sq) / (n * (n - 1.0))) : 0.0;
        } else {
            row.mean_sup_error = std::numeric_limits<double>::quiet_NaN();
            row.std_error = std::numeric_limits<double>::quiet_NaN();
        }
        row.y_gap = (spec.khasminskii && !gaps.empty()) ? sup_of_mean(gaps).first : std::numeric_limits<double>::quiet_NaN();
        row.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        report.rows.push_back(std::move(row));
    }
    return report;
}

std::vector<DeltaScalingRow> delta_scaling(const ConvergenceSpec& spec, double eps, const std::vector<double>& deltas) {
    require_supported_hurst(spec.hurst);
    if (deltas.empty()) throw ConfigError("delta list is empty", "deltas");
    if (!(eps > 0.0 && eps <= 1.0)) throw ConfigError("eps must lie in (0, 1]", "eps_schedule");
    if (spec.replicas < 2) throw ConfigError("at least 2 replicas are required", "replicas");
    const Grid coarse(0.0, spec.horizon, spec.n_steps);
    for (double d : deltas) {
        if (d < coarse.dt() * (1.0 - 1e-9)) throw ConfigError("every delta must be at least the coarse step", "deltas");
    }
    const StepPlan plan = plan_steps(spec, eps);
    std::vector<std::vector<std::vector<double>>> gaps(deltas.size(), std::vector<std::vector<double>>(spec.replicas));
    parallel_for(spec.replicas, [&](std::size_t r) {
        const ReplicaSetup s = simulate(spec, coarse, plan, eps, replica_seed(spec.seed, 0, r));
        for (std::size_t k = 0; k < deltas.size(); ++k) {
            const KhasminskiiPaths aux = khasminskii_auxiliary(spec.preset.coeffs, s.sol, deltas[k], s.lift, s.bm);
            gaps[k][r] = squared_gap(s.sol.y_fast, aux.y_hat_fast);
        }
    }, spec.workers);
    std::vector<DeltaScalingRow> rows;
    for (std::size_t k = 0; k < deltas.size(); ++k) {
        const auto [sup, se] = sup_of_mean(gaps[k]);
        rows.push_back({deltas[k], sup, se, spec.replicas});
    }
    return rows;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw ConfigError("slope needs at least two paired points", "slope");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0 && y[i] > 0.0)) throw DomainError("log-log slope needs positive data");
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double n = static_cast<double>(x.size());
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace roughavg
