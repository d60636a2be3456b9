#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "roughavg/convergence.hpp"
#include "roughavg/gaussian_paths.hpp"
#include "roughavg/path.hpp"
#include "roughavg/rough_lift.hpp"

namespace roughavg {

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

/// Columns t, x_1..x_d.
std::string path_to_csv(const Path& path);

/// kind, H, seed, method and grid of a sampled path.
nlohmann::json path_header(const GaussianPath& path);

/// Writes `content` to `file`, creating parent directories.
void write_text(const std::filesystem::path& file, const std::string& content);

std::string read_text(const std::filesystem::path& file);

/// First level as <prefix>_level1.csv (t, z_1..z_D) and second level as <prefix>_level2.csv with
/// rows i, j, z2_11, z2_12, ... (row-major). Returns the written files.
std::vector<std::filesystem::path> write_lift_bundle(const RoughLift& lift, const std::filesystem::path& dir,
                                                     const std::string& prefix = "lift");

/// Columns eps, delta, mean, stderr, n, excluded, replicas, y_gap, substep_factor, fine_factor.
std::string report_to_csv(const ConvergenceReport& report);

/// Report without run-time measurements, so identical runs serialize identically.
nlohmann::json report_to_json(const ConvergenceReport& report);
ConvergenceReport report_from_json(const nlohmann::json& j);

/// eps_series.csv (eps, delta, mean, stderr, n, excluded) and delta_series.csv (delta, y_gap, n).
/// Throws ConfigError and writes nothing for an empty report.
std::vector<std::filesystem::path> emit_plots_data(const ConvergenceReport& report, const std::filesystem::path& dir);

} // namespace roughavg
