#include "roughavg/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "roughavg/errors.hpp"

namespace roughavg {

namespace fs = std::filesystem;

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string path_to_csv(const Path& path) {
    std::ostringstream out;
    out << "t";
    for (std::size_t j = 0; j < path.dim(); ++j) out << ",x_" << j + 1;
    out << '\n';
    for (std::size_t k = 0; k < path.n_points(); ++k) {
        out << format_double(path.grid.time(k));
        for (std::size_t j = 0; j < path.dim(); ++j) {
            out << ',' << format_double(path.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)));
        }
        out << '\n';
    }
    return out.str();
}

nlohmann::json path_header(const GaussianPath& path) {
    nlohmann::json j;
    j["kind"] = to_string(path.kind);
    j["H"] = path.hurst;
    j["seed"] = path.seed;
    j["method"] = to_string(path.method);
    j["dim"] = path.dim();
    j["grid"] = {{"t_start", path.grid().t_start()}, {"t_end", path.grid().t_end()}, {"n_steps", path.grid().n_steps()}};
    return j;
}

void write_text(const fs::path& file, const std::string& content) {
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open " + file.string() + " for writing", "output_dir");
    out << content;
    if (!out) throw ConfigError("failed writing " + file.string(), "output_dir");
}

std::string read_text(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + file.string(), "input");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<fs::path> write_lift_bundle(const RoughLift& lift, const fs::path& dir, const std::string& prefix) {
    const fs::path level1 = dir / (prefix + "_level1.csv");
    const fs::path level2 = dir / (prefix + "_level2.csv");
    write_text(level1, path_to_csv(Path(lift.coarse_grid(), lift.first_level())));

    const std::size_t dim = lift.dim();
    std::ostringstream out;
    out << "i,j";
    for (std::size_t a = 0; a < dim; ++a)
        for (std::size_t b = 0; b < dim; ++b) out << ",z2_" << a + 1 << '_' << b + 1;
    out << '\n';
    for (std::size_t i = 0; i < lift.n_points(); ++i) {
        for (std::size_t j = i + 1; j < lift.n_points() && lift.has_pair(i, j); ++j) {
            const auto z2 = lift.second_level(i, j);
            out << i << ',' << j;
            for (Eigen::Index a = 0; a < z2.rows(); ++a)
                for (Eigen::Index b = 0; b < z2.cols(); ++b) out << ',' << format_double(z2(a, b));
            out << '\n';
        }
    }
    write_text(level2, out.str());
    return {level1, level2};
}

std::string report_to_csv(const ConvergenceReport& report) {
    std::ostringstream out;
    out << "eps,delta,mean,stderr,n,excluded,replicas,y_gap,substep_factor,fine_factor\n";
    for (const auto& r : report.rows) {
        out << format_double(r.eps) << ',' << format_double(r.delta) << ',' << format_double(r.mean_sup_error) << ','
            << format_double(r.std_error) << ',' << r.n << ',' << r.excluded << ',' << r.replicas << ','
            << format_double(r.y_gap) << ',' << r.substep_factor << ',' << r.fine_factor << '\n';
    }
    return out.str();
}

namespace {

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

double number_or_nan(const nlohmann::json& j) {
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

} // namespace

nlohmann::json report_to_json(const ConvergenceReport& report) {
    nlohmann::json j;
    j["preset"] = report.preset;
    j["schedule"] = report.schedule;
    j["H"] = report.hurst;
    auto rows = nlohmann::json::array();
    for (const auto& r : report.rows) {
        rows.push_back({{"eps", r.eps},
                        {"delta", r.delta},
                        {"replicas", r.replicas},
                        {"n", r.n},
                        {"excluded", r.excluded},
                        {"mean_sup_error", number_or_null(r.mean_sup_error)},
                        {"std_error", number_or_null(r.std_error)},
                        {"y_gap", number_or_null(r.y_gap)},
                        {"substep_factor", r.substep_factor},
                        {"fine_factor", r.fine_factor},
                        {"warnings", r.warnings}});
    }
    j["rows"] = std::move(rows);
    j["total_excluded"] = report.total_excluded();
    return j;
}

ConvergenceReport report_from_json(const nlohmann::json& j) {
    try {
        ConvergenceReport report;
        report.preset = j.at("preset").get<std::string>();
        report.schedule = j.at("schedule").get<std::string>();
        report.hurst = j.at("H").get<double>();
        for (const auto& r : j.at("rows")) {
            ConvergenceRow row;
            row.eps = r.at("eps").get<double>();
            row.delta = r.at("delta").get<double>();
            row.replicas = r.at("replicas").get<std::size_t>();
            row.n = r.at("n").get<std::size_t>();
            row.excluded = r.at("excluded").get<std::size_t>();
            row.mean_sup_error = number_or_nan(r.at("mean_sup_error"));
            row.std_error = number_or_nan(r.at("std_error"));
            row.y_gap = number_or_nan(r.at("y_gap"));
            row.substep_factor = r.value("substep_factor", std::size_t{0});
            row.fine_factor = r.value("fine_factor", std::size_t{0});
            row.warnings = r.value("warnings", std::vector<std::string>{});
            report.rows.push_back(std::move(row));
        }
        return report;
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigError(std::string("malformed report: ") + ex.what(), "report");
    }
}

std::vector<fs::path> emit_plots_data(const ConvergenceReport& report, const fs::path& dir) {
    if (report.rows.empty()) throw ConfigError("cannot emit plot data for an empty report", "report");
    std::ostringstream eps;
    eps << "eps,delta,mean,stderr,n,excluded\n";
    std::ostringstream delta;
    delta << "delta,y_gap,n\n";
    for (const auto& r : report.rows) {
        eps << format_double(r.eps) << ',' << format_double(r.delta) << ',' << format_double(r.mean_sup_error) << ','
            << format_double(r.std_error) << ',' << r.n << ',' << r.excluded << '\n';
        delta << format_double(r.delta) << ',' << format_double(r.y_gap) << ',' << r.n << '\n';
    }
    const fs::path a = dir / "eps_series.csv";
    const fs::path b = dir / "delta_series.csv";
    write_text(a, eps.str());
    write_text(b, delta.str());
    return {a, b};
}

} // namespace roughavg
