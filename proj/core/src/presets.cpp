#include "roughavg/presets.hpp"

#include <cmath>

#include "roughavg/errors.hpp"

namespace roughavg {

namespace {

Vec scalar(double v) { return Vec::Constant(1, v); }
Mat scalar_mat(double v) { return Mat::Constant(1, 1, v); }

CoefficientSet scalar_base(std::string name) {
    CoefficientSet c;
    c.name = std::move(name);
    c.m = c.n = c.d = c.dp = 1;
    c.g = [](const Vec& xi, const Vec& phi) { return scalar(xi(0) - 8.0 * phi(0)); };
    c.h = [](const Vec&, const Vec&) { return scalar_mat(1.0); };
    c.h_phi_jacobian = [](const Vec&, const Vec&) { return MatJacobian{scalar_mat(0.0)}; };
    c.sigma = [](const Vec& xi) { return scalar_mat(1.0 / std::sqrt(1.0 + xi(0) * xi(0))); };
    c.sigma_jacobian = [](const Vec& xi) {
        const double q = 1.0 + xi(0) * xi(0);
        return MatJacobian{scalar_mat(-xi(0) / (q * std::sqrt(q)))};
    };
    c.beta1 = 16.0;
    return c;
}

LatticeSpec box(double lo, double hi, std::size_t points = 64) {
    return LatticeSpec{scalar(lo), scalar(hi), points};
}

} // namespace

Preset make_preset(const std::string& name) {
    Preset p;
    if (name == "remark13" || name == "averaging") {
        p.coeffs = scalar_base(name);
        p.coeffs.f = [](const Vec& xi, const Vec& phi) {
            return scalar(phi(0) / (1.0 + xi(0) * xi(0)) + std::sin(xi(0)));
        };
        p.x0 = scalar(1.0);
        p.y0 = scalar(0.0);
        p.lattice = box(-6.0, 8.0);
        if (name == "remark13") {
            p.coeffs.h = [](const Vec& xi, const Vec& phi) { return scalar_mat(std::sin(xi(0)) + std::sin(phi(0))); };
            p.coeffs.h_phi_jacobian = [](const Vec&, const Vec& phi) { return MatJacobian{scalar_mat(std::cos(phi(0)))}; };
            // 2<dphi, dg~> <= -16 + 3 and |dh|^2 <= 1
            p.coeffs.beta1 = 12.0;
            p.description = "g = xi - 8 phi, h = sin xi + sin phi, f = phi/(1+xi^2) + sin xi, sigma = (1+xi^2)^(-1/2)";
        } else {
            p.exact_fbar = [](const Vec& xi) { return scalar(xi(0) / (8.0 * (1.0 + xi(0) * xi(0))) + std::sin(xi(0))); };
            p.description = "g = xi - 8 phi, h = 1, f = phi/(1+xi^2) + sin xi, sigma = (1+xi^2)^(-1/2)";
        }
        return p;
    }
    if (name == "ou") {
        p.coeffs = scalar_base(name);
        p.coeffs.f = [](const Vec&, const Vec& phi) { return scalar(phi(0)); };
        p.coeffs.sigma = [](const Vec&) { return scalar_mat(0.0); };
        p.coeffs.sigma_jacobian = [](const Vec&) { return MatJacobian{scalar_mat(0.0)}; };
        p.x0 = scalar(8.0);
        p.y0 = scalar(1.0);
        p.lattice = box(0.0, 16.0);
        p.exact_fbar = [](const Vec& xi) { return scalar(xi(0) / 8.0); };
        p.description = "f = phi, g = xi - 8 phi, h = 1, sigma = 0";
        return p;
    }
    if (name == "degenerate") {
        p.coeffs = scalar_base(name);
        p.coeffs.f = [](const Vec& xi, const Vec&) { return scalar(std::sin(xi(0))); };
        p.x0 = scalar(1.0);
        p.y0 = scalar(0.0);
        p.lattice = box(-6.0, 8.0);
        p.exact_fbar = [](const Vec& xi) { return scalar(std::sin(xi(0))); };
        p.description = "f = sin xi, g = xi - 8 phi, h = 1, sigma = (1+xi^2)^(-1/2)";
        return p;
    }
    throw ConfigError("unknown preset '" + name + "'", "preset");
}

std::vector<std::string> preset_names() { return {"remark13", "averaging", "ou", "degenerate"}; }

} // namespace roughavg
