#include "roughavg/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <algorithm>

#include "roughavg/errors.hpp"
#include "roughavg/io.hpp"
#include "roughavg/presets.hpp"
#include "roughavg/rng.hpp"

#ifndef ROUGHAVG_VERSION
#define ROUGHAVG_VERSION "0.0.0"
#endif

namespace roughavg {

namespace fs = std::filesystem;

std::string version() { return ROUGHAVG_VERSION; }

void ExperimentConfig::validate() const {
    if (!(hurst > 1.0 / 3.0 && hurst <= 0.5)) {
        throw ConfigError("H = " + format_double(hurst) + " is outside the supported range (1/3, 1/2]", "H");
    }
    if (!(horizon > 0.0)) throw ConfigError("T must be positive", "T");
    if (n_steps == 0) throw ConfigError("n_steps must be positive", "n_steps");
    if (fine_factor == 0) throw ConfigError("fine_factor must be positive", "fine_factor");
    if (!(substep_fraction > 0.0 && substep_fraction <= 0.25)) {
        throw ConfigError("substep_fraction must lie in (0, 1/4]", "substep_fraction");
    }
    if (eps_schedule.empty()) throw ConfigError("eps_schedule must not be empty", "eps_schedule");
    for (std::size_t i = 0; i < eps_schedule.size(); ++i) {
        const double e = eps_schedule[i];
        if (!(e > 0.0 && e < 1.0)) throw ConfigError("eps_schedule values must lie in (0, 1)", "eps_schedule");
        if (i > 0 && !(e < eps_schedule[i - 1])) throw ConfigError("eps_schedule must be strictly decreasing", "eps_schedule");
    }
    if (delta && !(*delta > 0.0)) throw ConfigError("delta must be positive", "delta");
    if (replicas < 2) throw ConfigError("replicas must be at least 2", "replicas");
    if (!(chen_tol > 0.0)) throw ConfigError("chen_tol must be positive", "chen_tol");
    if (!(symmetry_tol > 0.0)) throw ConfigError("symmetry_tol must be positive", "symmetry_tol");
    if (!(exclusion_budget >= 0.0 && exclusion_budget <= 1.0)) {
        throw ConfigError("exclusion_budget must lie in [0, 1]", "exclusion_budget");
    }
    if (!(fbar_horizon > fbar_burn_in && fbar_burn_in >= 0.0)) throw ConfigError("fbar_horizon must exceed fbar_burn_in", "fbar_horizon");
    if (fbar_replicas == 0) throw ConfigError("fbar_replicas must be positive", "fbar_replicas");
    if (!(fbar_dt > 0.0)) throw ConfigError("fbar_dt must be positive", "fbar_dt");
    if (lattice_points < 2) throw ConfigError("lattice_points must be at least 2", "lattice_points");
    if (lattice_lower && lattice_upper && !(*lattice_upper > *lattice_lower)) {
        throw ConfigError("lattice_upper must exceed lattice_lower", "lattice_upper");
    }
    const auto names = preset_names();
    if (std::find(names.begin(), names.end(), preset) == names.end()) {
        throw ConfigError("unknown preset '" + preset + "'", "preset");
    }
}

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["preset"] = preset;
    j["H"] = hurst;
    j["T"] = horizon;
    j["n_steps"] = n_steps;
    j["fine_factor"] = fine_factor;
    j["substep_fraction"] = substep_fraction;
    j["eps_schedule"] = eps_schedule;
    j["delta"] = delta ? nlohmann::json(*delta) : nlohmann::json(nullptr);
    j["replicas"] = replicas;
    j["seed"] = seed;
    j["output_dir"] = output_dir;
    j["chen_tol"] = chen_tol;
    j["symmetry_tol"] = symmetry_tol;
    j["exclusion_budget"] = exclusion_budget;
    j["workers"] = workers;
    j["khasminskii"] = khasminskii;
    j["fbar_strategy"] = to_string(fbar_strategy);
    j["fbar_burn_in"] = fbar_burn_in;
    j["fbar_horizon"] = fbar_horizon;
    j["fbar_replicas"] = fbar_replicas;
    j["fbar_dt"] = fbar_dt;
    j["lattice_points"] = lattice_points;
    j["lattice_lower"] = lattice_lower ? nlohmann::json(*lattice_lower) : nlohmann::json(nullptr);
    j["lattice_upper"] = lattice_upper ? nlohmann::json(*lattice_upper) : nlohmann::json(nullptr);
    return j;
}

std::string ExperimentConfig::hash() const {
    nlohmann::json j = to_json();
    j.erase("output_dir");
    j.erase("workers");
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : j.dump()) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ConvergenceSpec ExperimentConfig::convergence_spec() const {
    validate();
    ConvergenceSpec spec;
    spec.preset = make_preset(preset);
    spec.hurst = hurst;
    spec.horizon = horizon;
    spec.n_steps = n_steps;
    spec.fine_factor = fine_factor;
    spec.substep_fraction = substep_fraction;
    spec.eps = eps_schedule;
    spec.delta_override = delta;
    spec.replicas = replicas;
    spec.seed = seed;
    spec.fbar_strategy = fbar_strategy;
    LatticeSpec lattice = spec.preset.lattice;
    lattice.points_per_dim = lattice_points;
    if (lattice_lower) lattice.lower.setConstant(*lattice_lower);
    if (lattice_upper) lattice.upper.setConstant(*lattice_upper);
    spec.lattice = lattice;
    spec.fbar.burn_in = fbar_burn_in;
    spec.fbar.horizon = fbar_horizon;
    spec.fbar.replicas = fbar_replicas;
    spec.fbar.dt = fbar_dt;
    spec.fbar.seed = derive_seed(seed, {tag(StreamTag::fbar)});
    spec.khasminskii = khasminskii;
    spec.exclusion_budget = exclusion_budget;
    spec.workers = workers;
    return spec;
}

nlohmann::json RunManifest::to_json() const {
    nlohmann::json j;
    j["command"] = command;
    j["config_hash"] = config_hash;
    j["version"] = version;
    j["started"] = started;
    j["finished"] = finished.empty() ? nlohmann::json(nullptr) : nlohmann::json(finished);
    j["files"] = files;
    auto seeds_json = nlohmann::json::array();
    for (const auto& s : seeds) seeds_json.push_back({{"eps_index", s.eps_index}, {"replica", s.replica}, {"seed", s.seed}});
    j["seeds"] = std::move(seeds_json);
    j["complete"] = complete;
    j["divergence_budget_exceeded"] = divergence_budget_exceeded;
    if (!extra.empty()) j["extra"] = extra;
    return j;
}

std::string utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

ManifestWriter::ManifestWriter(const ExperimentConfig& config, std::string command) : dir_(config.output_dir) {
    manifest_.command = std::move(command);
    manifest_.config_hash = config.hash();
    manifest_.version = version();
    manifest_.started = utc_now();
    manifest_.files.push_back("manifest.json");
    fs::create_directories(dir_);
    write("config.json", config.to_json().dump(2) + "\n");
}

fs::path ManifestWriter::write(const std::string& relative, const std::string& content) {
    const fs::path file = dir_ / relative;
    write_text(file, content);
    record(file);
    return file;
}

void ManifestWriter::record(const fs::path& file) {
    const std::string rel = fs::relative(file, dir_).generic_string();
    if (std::find(manifest_.files.begin(), manifest_.files.end(), rel) == manifest_.files.end()) {
        manifest_.files.push_back(rel);
    }
    flush();
}

void ManifestWriter::finish() {
    manifest_.finished = utc_now();
    manifest_.complete = true;
    flush();
}

void ManifestWriter::flush() const {
    write_text(dir_ / "manifest.json", manifest_.to_json().dump(2) + "\n");
}

RunManifest run(const ExperimentConfig& config) {
    config.validate();
    ManifestWriter writer(config, "converge");
    const ConvergenceSpec spec = config.convergence_spec();
    for (std::size_t e = 0; e < spec.eps.size(); ++e)
        for (std::size_t r = 0; r < spec.replicas; ++r)
            writer.manifest().seeds.push_back({e, r, replica_seed(spec.seed, e, r)});

    const AveragedDrift fbar = build_fbar(spec);
    writer.write("fbar.json", fbar.to_json().dump(2) + "\n");
    const ConvergenceReport report = run_convergence(spec, fbar);
    writer.write("report.csv", report_to_csv(report));
    writer.write("report.json", report_to_json(report).dump(2) + "\n");
    for (const auto& f : emit_plots_data(report, writer.dir())) writer.record(f);

    auto runtimes = nlohmann::json::array();
    for (const auto& row : report.rows) {
        runtimes.push_back({{"eps", row.eps}, {"runtime_seconds", row.runtime_seconds}});
        if (static_cast<double>(row.excluded) > spec.exclusion_budget * static_cast<double>(row.replicas)) {
            writer.manifest().divergence_budget_exceeded = true;
        }
    }
    writer.manifest().extra["runtime"] = std::move(runtimes);
    writer.finish();
    return writer.manifest();
}

} // namespace roughavg
