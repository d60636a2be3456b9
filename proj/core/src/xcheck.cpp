#include "roughavg/xcheck.hpp"

#include <cmath>

#include "roughavg/gaussian_paths.hpp"
#include "roughavg/rough_lift.hpp"

namespace roughavg {

namespace {

std::vector<double> to_vector(const Vec& v) { return {v.data(), v.data() + v.size()}; }

void fill_gaps(XcheckReport& r) {
    r.abs_gap = (r.frac - r.riemann).norm();
    r.rel_gap = r.abs_gap / std::max(r.riemann.norm(), 1e-300);
}

Vec scalar(double v) { return Vec::Constant(1, v); }

} // namespace

nlohmann::json XcheckReport::to_json() const {
    nlohmann::json j;
    j["name"] = name;
    j["frac"] = to_vector(frac);
    j["riemann"] = to_vector(riemann);
    j["exact"] = exact ? nlohmann::json(to_vector(*exact)) : nlohmann::json(nullptr);
    j["abs_gap"] = abs_gap;
    j["rel_gap"] = rel_gap;
    j["alpha"] = alpha;
    j["beta"] = beta;
    j["quad_points"] = quad_points;
    j["riemann_points"] = riemann_points;
    return j;
}

XcheckReport xcheck_smooth(std::size_t quad_points, std::size_t oracle_refine, double beta) {
    auto x = [](double t) { return scalar(std::sin(t)); };
    auto w = [](double t) { return scalar(std::cos(t)); };
    // int_s^t (sin r - sin s) d cos r
    auto v = [](double s, double t) {
        const double sq = (t - s) / 2.0 - (std::sin(2.0 * t) - std::sin(2.0 * s)) / 4.0;
        return Mat::Constant(1, 1, -sq + std::sin(s) * (std::cos(s) - std::cos(t)));
    };
    MatrixField sigma;
    sigma.value = [](const Vec& u) { return Mat::Constant(1, 1, u(0)); };
    sigma.jacobian = [](const Vec&) { return MatJacobian{Mat::Constant(1, 1, 1.0)}; };

    const TripletView coarse = triplet_from_functions(Grid(0.0, 1.0, quad_points), x, w, v, beta);
    const TripletView fine = triplet_from_functions(Grid(0.0, 1.0, quad_points * oracle_refine), x, w, v, beta);
    const FracResult fr = frac_integral(coarse, sigma, 0.0, 1.0);

    XcheckReport r;
    r.name = "smooth";
    r.frac = fr.value;
    r.riemann = riemann_integral(fine, sigma, 0.0, 1.0);
    r.exact = scalar(-(0.5 - std::sin(2.0) / 4.0));
    r.alpha = fr.alpha;
    r.beta = beta;
    r.quad_points = quad_points;
    r.riemann_points = quad_points * oracle_refine;
    fill_gaps(r);
    return r;
}

XcheckReport xcheck_fbm(double hurst, std::size_t quad_points, std::uint64_t seed, std::optional<double> beta) {
    const double b = beta.value_or(hurst - 0.05);
    const Grid grid(0.0, 1.0, quad_points);
    const GaussianPath path = sample_fbm(hurst, grid, seed);
    const RoughLift lift = lift_geometric(path.path, grid, 1, quad_points);
    const TripletView tv = triplet_from_lift(lift, b);

    MatrixField sigma;
    sigma.value = [](const Vec& u) { return Mat::Constant(1, 1, std::sin(u(0))); };
    sigma.jacobian = [](const Vec& u) { return MatJacobian{Mat::Constant(1, 1, std::cos(u(0)))}; };
    const FracResult fr = frac_integral(tv, sigma, 0.0, 1.0);

    XcheckReport r;
    r.name = "fbm";
    r.frac = fr.value;
    r.riemann = riemann_integral(tv, sigma, 0.0, 1.0);
    // geometric 1D lift: int sin(B) dB = 1 - cos(B_1)
    r.exact = scalar(1.0 - std::cos(path.values()(static_cast<Eigen::Index>(quad_points), 0)));
    r.alpha = fr.alpha;
    r.beta = b;
    r.quad_points = quad_points;
    r.riemann_points = quad_points;
    fill_gaps(r);
    return r;
}

} // namespace roughavg
