// roughavg: experiment driver for fast-slow rough differential equations.
//
// Exit codes: 0 success, 2 validation error, 3 divergence beyond the exclusion budget.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "roughavg/averaging.hpp"
#include "roughavg/convergence.hpp"
#include "roughavg/errors.hpp"
#include "roughavg/experiment.hpp"
#include "roughavg/gaussian_paths.hpp"
#include "roughavg/io.hpp"
#include "roughavg/presets.hpp"
#include "roughavg/rde_solver.hpp"
#include "roughavg/rng.hpp"
#include "roughavg/rough_lift.hpp"
#include "roughavg/xcheck.hpp"

namespace {

using namespace roughavg;
namespace fs = std::filesystem;

constexpr int kExitValidation = 2;
constexpr int kExitDivergence = 3;

struct SampleArgs {
    std::string kind = "fbm";
    std::size_t dim = 1;
    std::string policy = "automatic";
};

struct LiftArgs {
    std::string bm_scheme = "stratonovich";
    double holder_beta = 0.3;
    bool write_bundle = false;
};

struct XcheckArgs {
    std::string which = "both";
    std::size_t quad_points = 2048;
    std::size_t smooth_points = 400;
    std::size_t oracle_refine = 10;
};

struct SolveArgs {
    std::optional<double> eps;
    std::size_t substep_factor = 0;
};

struct PointArgs {
    std::vector<double> xi;
    std::vector<double> lags{0.05, 0.1, 0.2};
};

struct ReportArgs {
    std::string input;
};

Vec as_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

std::vector<double> as_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

SamplerPolicy policy_from_string(const std::string& s) {
    if (s == "automatic") return SamplerPolicy::automatic;
    if (s == "circulant") return SamplerPolicy::circulant;
    if (s == "cholesky") return SamplerPolicy::cholesky;
    throw ConfigError("unknown sampler policy '" + s + "'", "policy");
}

int cmd_sample(const ExperimentConfig& cfg, const SampleArgs& args) {
    cfg.validate();
    ManifestWriter out(cfg, "sample");
    const Grid grid(0.0, cfg.horizon, cfg.n_steps);
    const ProcessKind kind = process_kind_from_string(args.kind);
    if (kind == ProcessKind::deterministic) throw ConfigError("kind must be fbm or bm", "kind");
    const GaussianPath path = kind == ProcessKind::fbm
                                  ? sample_fbm(cfg.hurst, grid, cfg.seed, args.dim, policy_from_string(args.policy))
                                  : sample_bm(args.dim, grid, cfg.seed);
    out.write("path.csv", path_to_csv(path.path));
    out.write("path.json", path_header(path).dump(2) + "\n");
    out.finish();
    std::cout << path_header(path).dump(2) << '\n';
    return 0;
}

int cmd_lift_check(const ExperimentConfig& cfg, const LiftArgs& args) {
    cfg.validate();
    ManifestWriter out(cfg, "lift-check");
    const Preset preset = make_preset(cfg.preset);
    const Grid coarse(0.0, cfg.horizon, cfg.n_steps);
    const Grid fine = coarse.refine(cfg.fine_factor);
    const GaussianPath b = sample_fbm(cfg.hurst, fine, cfg.seed, preset.coeffs.d);
    const GaussianPath w = sample_bm(preset.coeffs.dp, fine, cfg.seed);
    LiftOptions lo;
    if (args.bm_scheme == "ito") lo.bm_scheme = BmScheme::ito;
    else if (args.bm_scheme != "stratonovich") throw ConfigError("bm_scheme must be stratonovich or ito", "bm_scheme");
    const RoughLift lift = lift_mixed(b, w, coarse, cfg.fine_factor, lo);
    LiftDiagnostics chen = check_chen(lift, cfg.chen_tol, 4'000'000, args.holder_beta);
    const LiftDiagnostics sym = check_geometric(lift, cfg.symmetry_tol, args.holder_beta);
    const LiftDiagnostics all = diagnose_lift(lift, cfg.chen_tol, args.holder_beta);
    nlohmann::json j;
    j["chen_residual_max"] = chen.chen_residual_max;
    j["chen_residual_relative"] = chen.chen_residual_relative;
    j["chen_passed"] = chen.chen_passed;
    j["triples_checked"] = chen.triples_checked;
    j["symmetry_residual_max"] = sym.symmetry_residual_max;
    j["symmetry_residual_relative"] = sym.symmetry_residual_relative;
    j["symmetry_passed"] = sym.symmetry_passed;
    j["holder_beta"] = args.holder_beta;
    j["first_level_norm"] = all.first_level_norm;
    j["second_level_norm"] = all.second_level_norm;
    j["chen_tol"] = cfg.chen_tol;
    j["symmetry_tol"] = cfg.symmetry_tol;
    j["H"] = cfg.hurst;
    j["fine_factor"] = cfg.fine_factor;
    j["bm_scheme"] = args.bm_scheme;
    out.write("lift_check.json", j.dump(2) + "\n");
    if (args.write_bundle) {
        for (const auto& f : write_lift_bundle(lift, out.dir())) out.record(f);
    }
    out.finish();
    std::cout << j.dump(2) << '\n';
    return 0;
}

int cmd_xcheck(const ExperimentConfig& cfg, const XcheckArgs& args) {
    cfg.validate();
    if (args.which != "smooth" && args.which != "fbm" && args.which != "both") {
        throw ConfigError("case must be smooth, fbm or both", "case");
    }
    ManifestWriter out(cfg, "integrate-xcheck");
    nlohmann::json j = nlohmann::json::object();
    if (args.which != "fbm") j["smooth"] = xcheck_smooth(args.smooth_points, args.oracle_refine).to_json();
    if (args.which != "smooth") j["fbm"] = xcheck_fbm(cfg.hurst, args.quad_points, cfg.seed).to_json();
    out.write("xcheck.json", j.dump(2) + "\n");
    out.finish();
    std::cout << j.dump(2) << '\n';
    return 0;
}

int cmd_solve(const ExperimentConfig& cfg, const SolveArgs& args) {
    cfg.validate();
    const double eps = args.eps.value_or(cfg.eps_schedule.front());
    if (!(eps > 0.0 && eps <= 1.0)) throw ConfigError("eps must lie in (0, 1]", "eps");
    ManifestWriter out(cfg, "solve");
    const Preset preset = make_preset(cfg.preset);
    ConvergenceSpec spec = cfg.convergence_spec();
    StepPlan plan = plan_steps(spec, std::min(eps, 0.999999));
    if (args.substep_factor != 0) {
        plan.substep_factor = args.substep_factor;
        plan.fine_factor = (cfg.fine_factor + plan.substep_factor - 1) / plan.substep_factor * plan.substep_factor;
    }
    const Grid coarse(0.0, cfg.horizon, cfg.n_steps);
    const Grid fine = coarse.refine(plan.fine_factor);
    const GaussianPath b = sample_fbm(cfg.hurst, fine, cfg.seed, preset.coeffs.d);
    const GaussianPath w = sample_bm(preset.coeffs.dp, fine, cfg.seed);
    LiftOptions lo;
    lo.window = 1;
    const RoughLift lift = lift_mixed(b, w, coarse, plan.fine_factor, lo);
    const FastSlowSolution sol =
        solve_fast_slow(preset.coeffs, eps, lift, w, preset.x0, preset.y0, plan.substep_factor, cfg.seed);

    Path joint(coarse, preset.coeffs.m + preset.coeffs.n);
    joint.values.leftCols(static_cast<Eigen::Index>(preset.coeffs.m)) = sol.x.values;
    joint.values.rightCols(static_cast<Eigen::Index>(preset.coeffs.n)) = sol.y.values;
    std::string csv = path_to_csv(joint);
    // rename x_{m+1}.. columns to y_*
    std::string header = "t";
    for (std::size_t i = 0; i < preset.coeffs.m; ++i) header += ",x_" + std::to_string(i + 1);
    for (std::size_t i = 0; i < preset.coeffs.n; ++i) header += ",y_" + std::to_string(i + 1);
    csv.replace(0, csv.find('\n'), header);
    out.write("solution.csv", csv);
    nlohmann::json meta = {{"preset", cfg.preset},    {"eps", eps},
                           {"H", cfg.hurst},          {"T", cfg.horizon},
                           {"n_steps", cfg.n_steps},  {"fine_factor", plan.fine_factor},
                           {"substep_factor", plan.substep_factor}, {"seed", cfg.seed},
                           {"x_final", as_std(sol.x.at(cfg.n_steps))}, {"y_final", as_std(sol.y.at(cfg.n_steps))}};
    out.write("solution.json", meta.dump(2) + "\n");
    out.finish();
    std::cout << meta.dump(2) << '\n';
    return 0;
}

FbarOptions fbar_options(const ExperimentConfig& cfg, StreamTag stream) {
    FbarOptions o;
    o.burn_in = cfg.fbar_burn_in;
    o.horizon = cfg.fbar_horizon;
    o.replicas = cfg.fbar_replicas;
    o.dt = cfg.fbar_dt;
    o.seed = derive_seed(cfg.seed, {tag(stream)});
    o.workers = cfg.workers;
    return o;
}

int cmd_fbar(const ExperimentConfig& cfg, const PointArgs& args) {
    cfg.validate();
    ManifestWriter out(cfg, "fbar");
    const Preset preset = make_preset(cfg.preset);
    nlohmann::json j;
    if (!args.xi.empty()) {
        if (args.xi.size() != preset.coeffs.m) throw ConfigError("xi must have m entries", "xi");
        const FbarEstimate est = estimate_fbar(preset.coeffs, as_vec(args.xi), fbar_options(cfg, StreamTag::fbar));
        j = {{"xi", args.xi}, {"value", as_std(est.value)}, {"std_error", as_std(est.std_error)}, {"samples", est.samples}};
        if (preset.exact_fbar) j["exact"] = as_std(preset.exact_fbar(as_vec(args.xi)));
    } else {
        j = build_fbar(cfg.convergence_spec()).to_json();
    }
    out.write("fbar.json", j.dump(2) + "\n");
    out.finish();
    std::cout << j.dump(2) << '\n';
    return 0;
}

int cmd_probe(const ExperimentConfig& cfg, const PointArgs& args) {
    cfg.validate();
    ManifestWriter out(cfg, "probe");
    const Preset preset = make_preset(cfg.preset);
    const Vec xi = args.xi.empty() ? preset.x0 : as_vec(args.xi);
    if (static_cast<std::size_t>(xi.size()) != preset.coeffs.m) throw ConfigError("xi must have m entries", "xi");
    MixingOptions o;
    o.lags = args.lags;
    o.replicas = cfg.replicas;
    o.seed = derive_seed(cfg.seed, {tag(StreamTag::probe)});
    o.workers = cfg.workers;
    nlohmann::json j = to_json(mixing_probe(preset.coeffs, xi, o));
    j["xi"] = as_std(xi);
    j["preset"] = cfg.preset;
    out.write("probe.json", j.dump(2) + "\n");
    out.finish();
    std::cout << j.dump(2) << '\n';
    return 0;
}

int cmd_converge(const ExperimentConfig& cfg) {
    const RunManifest m = run(cfg);
    std::cout << read_text(fs::path(cfg.output_dir) / "report.csv");
    if (m.divergence_budget_exceeded) {
        std::cerr << "divergence: excluded replicas exceed the budget of " << cfg.exclusion_budget << '\n';
        return kExitDivergence;
    }
    return 0;
}

int cmd_report(const ExperimentConfig& cfg, const ReportArgs& args) {
    const fs::path input = args.input.empty() ? fs::path(cfg.output_dir) : fs::path(args.input);
    const ConvergenceReport report = report_from_json(nlohmann::json::parse(read_text(input / "report.json")));
    const auto files = emit_plots_data(report, input);
    // keep the run directory's manifest complete
    const fs::path manifest_file = input / "manifest.json";
    if (fs::exists(manifest_file)) {
        nlohmann::json m = nlohmann::json::parse(read_text(manifest_file));
        auto& listed = m["files"];
        for (const auto& f : files) {
            const std::string rel = fs::relative(f, input).generic_string();
            if (std::find(listed.begin(), listed.end(), rel) == listed.end()) listed.push_back(rel);
        }
        write_text(manifest_file, m.dump(2) + "\n");
    }
    std::cout << report_to_csv(report);
    return report.total_excluded() > 0 &&
                   static_cast<double>(report.total_excluded()) >
                       cfg.exclusion_budget * static_cast<double>(report.total_replicas())
               ? kExitDivergence
               : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fast-slow rough differential equations: sampling, lifts, solvers and averaging experiments"};
    app.set_config("--config", "", "TOML/INI configuration file; flags override its values");
    app.require_subcommand(1);
    app.set_version_flag("--version", roughavg::version());
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    ExperimentConfig cfg;
    std::optional<double> delta;
    std::optional<double> lattice_lower;
    std::optional<double> lattice_upper;
    std::string fbar_strategy = "tabulated";
    app.add_option("--preset", cfg.preset, "coefficient preset (remark13, averaging, ou, degenerate)");
    app.add_option("--H,--hurst", cfg.hurst, "Hurst index in (1/3, 1/2]");
    app.add_option("--T,--horizon", cfg.horizon, "time horizon");
    app.add_option("--n_steps", cfg.n_steps, "coarse steps");
    app.add_option("--fine_factor", cfg.fine_factor, "fine steps per coarse step for the lift");
    app.add_option("--substep_fraction", cfg.substep_fraction, "fast substep as a fraction of eps (<= 1/4)");
    app.add_option("--eps_schedule", cfg.eps_schedule, "strictly decreasing eps values")
        ->delimiter(',')
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    app.add_option("--delta", delta, "override delta(eps)");
    app.add_option("--replicas", cfg.replicas, "Monte Carlo replicas");
    app.add_option("--seed", cfg.seed, "master seed");
    app.add_option("-o,--output_dir", cfg.output_dir, "output directory");
    app.add_option("--chen_tol", cfg.chen_tol, "relative Chen tolerance");
    app.add_option("--symmetry_tol", cfg.symmetry_tol, "relative symmetry tolerance");
    app.add_option("--exclusion_budget", cfg.exclusion_budget, "allowed fraction of diverged replicas");
    app.add_option("--workers", cfg.workers, "worker threads (0: hardware concurrency)");
    app.add_option("--khasminskii", cfg.khasminskii, "also build the auxiliary fast process");
    app.add_option("--fbar_strategy", fbar_strategy, "tabulated, on_the_fly or analytic");
    app.add_option("--fbar_burn_in", cfg.fbar_burn_in, "frozen-dynamics burn-in time");
    app.add_option("--fbar_horizon", cfg.fbar_horizon, "time-average window after burn-in");
    app.add_option("--fbar_replicas", cfg.fbar_replicas, "frozen-dynamics replicas per point");
    app.add_option("--fbar_dt", cfg.fbar_dt, "frozen-dynamics step");
    app.add_option("--lattice_points", cfg.lattice_points, "f-bar lattice points per slow dimension");
    app.add_option("--lattice_lower", lattice_lower, "lattice lower bound (default: preset box)");
    app.add_option("--lattice_upper", lattice_upper, "lattice upper bound (default: preset box)");

    SampleArgs sample_args;
    auto* sample = app.add_subcommand("sample", "sample an fBm or Bm path");
    sample->add_option("--kind", sample_args.kind, "fbm or bm");
    sample->add_option("--dim", sample_args.dim, "path dimension");
    sample->add_option("--policy", sample_args.policy, "automatic, circulant or cholesky");

    LiftArgs lift_args;
    auto* lift = app.add_subcommand("lift-check", "build a mixed lift and print its diagnostics");
    lift->add_option("--bm_scheme", lift_args.bm_scheme, "stratonovich or ito");
    lift->add_option("--holder_beta", lift_args.holder_beta, "Hoelder exponent for the norm estimates");
    lift->add_flag("--write_bundle", lift_args.write_bundle, "also write the lift as CSV");

    XcheckArgs xcheck_args;
    auto* xcheck = app.add_subcommand("integrate-xcheck", "fractional-calculus vs compensated Riemann integral");
    xcheck->add_option("--case", xcheck_args.which, "smooth, fbm or both");
    xcheck->add_option("--quad_points", xcheck_args.quad_points, "cells for the fBm triplet");
    xcheck->add_option("--smooth_points", xcheck_args.smooth_points, "cells for the smooth triplet");
    xcheck->add_option("--oracle_refine", xcheck_args.oracle_refine, "Riemann refinement factor over the quadrature grid");

    SolveArgs solve_args;
    auto* solve = app.add_subcommand("solve", "solve the fast-slow system once");
    solve->add_option("--eps", solve_args.eps, "scale separation (default: first schedule value)");
    solve->add_option("--substep_factor", solve_args.substep_factor, "fast substeps per coarse step (0: automatic)");

    PointArgs fbar_args;
    auto* fbar = app.add_subcommand("fbar", "estimate f-bar at a point or tabulate it");
    fbar->add_option("--xi", fbar_args.xi, "slow state; omit to tabulate")->delimiter(',');

    PointArgs probe_args;
    auto* probe = app.add_subcommand("probe", "mixing probe of the frozen dynamics");
    probe->add_option("--xi", probe_args.xi, "slow state (default: preset X0)")->delimiter(',');
    probe->add_option("--lags", probe_args.lags, "comma-separated lags")->delimiter(',');

    auto* converge = app.add_subcommand("converge", "averaging convergence experiment");

    ReportArgs report_args;
    auto* report = app.add_subcommand("report", "regenerate plot series from a run directory");
    report->add_option("--input", report_args.input, "run directory (default: output_dir)");

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        cfg.delta = delta;
        cfg.lattice_lower = lattice_lower;
        cfg.lattice_upper = lattice_upper;
        cfg.fbar_strategy = fbar_strategy_from_string(fbar_strategy);
        if (*sample) return cmd_sample(cfg, sample_args);
        if (*lift) return cmd_lift_check(cfg, lift_args);
        if (*xcheck) return cmd_xcheck(cfg, xcheck_args);
        if (*solve) return cmd_solve(cfg, solve_args);
        if (*fbar) return cmd_fbar(cfg, fbar_args);
        if (*probe) return cmd_probe(cfg, probe_args);
        if (*converge) return cmd_converge(cfg);
        if (*report) return cmd_report(cfg, report_args);
    } catch (const ConfigError& e) {
        std::cerr << "validation error";
        if (!e.field().empty()) std::cerr << " [" << e.field() << "]";
        std::cerr << ": " << e.what() << '\n';
        return kExitValidation;
    } catch (const DomainError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const DivergenceError& e) {
        std::cerr << "divergence: " << e.what() << '\n';
        return kExitDivergence;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "validation error [input]: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kExitValidation;
}
