#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "roughavg/averaging.hpp"
#include "roughavg/convergence.hpp"

namespace roughavg {

std::string version();

struct ExperimentConfig {
    std::string preset = "averaging";
    double hurst = 0.4;
    double horizon = 1.0;
    std::size_t n_steps = 64;
    std::size_t fine_factor = 32;
    double substep_fraction = 1.0 / 32.0;
    std::vector<double> eps_schedule{0.1, 0.03, 0.01};
    std::optional<double> delta;
    std::size_t replicas = 128;
    std::uint64_t seed = 20210701;
    std::string output_dir = "roughavg_out";
    double chen_tol = 1e-10;
    double symmetry_tol = 1e-10;
    double exclusion_budget = 0.01;
    std::size_t workers = 0;
    bool khasminskii = true;

    FbarStrategy fbar_strategy = FbarStrategy::tabulated;
    double fbar_burn_in = 2.0;
    double fbar_horizon = 20.0;
    std::size_t fbar_replicas = 32;
    double fbar_dt = 2e-3;
    std::size_t lattice_points = 64;
    std::optional<double> lattice_lower;
    std::optional<double> lattice_upper;

    /// Throws ConfigError naming the offending field.
    void validate() const;

    nlohmann::json to_json() const;

    /// FNV-1a of the canonical JSON form; output_dir and workers are excluded.
    std::string hash() const;

    ConvergenceSpec convergence_spec() const;
};

struct SeedRecord {
    std::size_t eps_index = 0;
    std::size_t replica = 0;
    std::uint64_t seed = 0;
};

struct RunManifest {
    std::string command;
    std::string config_hash;
    std::string version;
    std::string started;
    std::string finished;
    std::vector<std::string> files;  // relative to the output directory
    std::vector<SeedRecord> seeds;
    bool complete = false;
    bool divergence_budget_exceeded = false;
    nlohmann::json extra = nlohmann::json::object();

    nlohmann::json to_json() const;
};

/// UTC timestamp in ISO 8601.
std::string utc_now();

/// Records emitted files and keeps <output_dir>/manifest.json current: it is written as incomplete
/// on construction and rewritten on every update.
class ManifestWriter {
public:
    ManifestWriter(const ExperimentConfig& config, std::string command);

    const std::filesystem::path& dir() const noexcept { return dir_; }
    RunManifest& manifest() noexcept { return manifest_; }

    /// Writes `content` to dir()/relative and records it.
    std::filesystem::path write(const std::string& relative, const std::string& content);
    void record(const std::filesystem::path& file);
    void finish();

private:
    void flush() const;

    std::filesystem::path dir_;
    RunManifest manifest_;
};

/// Full pipeline: f-bar, per-eps replicas (sample, lift, solve, average), report CSV/JSON, plot
/// series and manifest. Returns the manifest; `divergence_budget_exceeded` is set when any
/// row excludes more than the configured fraction of replicas.
RunManifest run(const ExperimentConfig& config);

} // namespace roughavg
