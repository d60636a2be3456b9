#include "roughavg/coefficients.hpp"

#include <cmath>
#include <string>

#include "roughavg/errors.hpp"

namespace roughavg {

namespace {

void require_shape(const Mat& a, std::size_t rows, std::size_t cols, const char* what) {
    if (static_cast<std::size_t>(a.rows()) != rows || static_cast<std::size_t>(a.cols()) != cols) {
        throw ConfigError(std::string(what) + " returned a " + std::to_string(a.rows()) + "x" +
                              std::to_string(a.cols()) + " value, expected " + std::to_string(rows) + "x" +
                              std::to_string(cols),
                          "coefficients");
    }
}

void require_size(const Vec& a, std::size_t size, const char* what) {
    if (static_cast<std::size_t>(a.size()) != size) {
        throw ConfigError(std::string(what) + " returned a vector of size " + std::to_string(a.size()) +
                              ", expected " + std::to_string(size),
                          "coefficients");
    }
}

} // namespace

MatJacobian finite_difference_jacobian(const std::function<Mat(const Vec&)>& map, const Vec& u) {
    MatJacobian jac;
    jac.reserve(static_cast<std::size_t>(u.size()));
    Vec probe = u;
    for (Eigen::Index k = 0; k < u.size(); ++k) {
        const double step = kFiniteDifferenceStep * (1.0 + std::abs(u(k)));
        probe(k) = u(k) + step;
        const Mat up = map(probe);
        probe(k) = u(k) - step;
        const Mat down = map(probe);
        probe(k) = u(k);
        jac.push_back((up - down) / (2.0 * step));
    }
    return jac;
}

Mat finite_difference_vector_jacobian(const std::function<Vec(const Vec&)>& map, const Vec& u) {
    Vec probe = u;
    Mat jac;
    for (Eigen::Index k = 0; k < u.size(); ++k) {
        const double step = kFiniteDifferenceStep * (1.0 + std::abs(u(k)));
        probe(k) = u(k) + step;
        const Vec up = map(probe);
        probe(k) = u(k) - step;
        const Vec down = map(probe);
        probe(k) = u(k);
        if (k == 0) jac.resize(up.size(), u.size());
        jac.col(k) = (up - down) / (2.0 * step);
    }
    return jac;
}

MatJacobian MatrixField::jacobian_at(const Vec& u) const {
    if (jacobian) return jacobian(u);
    return finite_difference_jacobian(value, u);
}

Vec CoefficientSet::eval_f(const Vec& xi, const Vec& phi) const {
    Vec out = f(xi, phi);
    require_size(out, m, "f");
    return out;
}

Mat CoefficientSet::eval_sigma(const Vec& xi) const {
    Mat out = sigma(xi);
    require_shape(out, m, d, "sigma");
    return out;
}

Vec CoefficientSet::eval_g(const Vec& xi, const Vec& phi) const {
    Vec out = g(xi, phi);
    require_size(out, n, "g");
    return out;
}

Mat CoefficientSet::eval_h(const Vec& xi, const Vec& phi) const {
    Mat out = h(xi, phi);
    require_shape(out, n, dp, "h");
    return out;
}

MatJacobian CoefficientSet::eval_sigma_jacobian(const Vec& xi) const {
    if (sigma_jacobian) return sigma_jacobian(xi);
    return finite_difference_jacobian(sigma, xi);
}

MatJacobian CoefficientSet::eval_h_phi_jacobian(const Vec& xi, const Vec& phi) const {
    if (h_phi_jacobian) return h_phi_jacobian(xi, phi);
    return finite_difference_jacobian(std::function<Mat(const Vec&)>([&](const Vec& p) { return h(xi, p); }), phi);
}

MatrixField CoefficientSet::sigma_field() const {
    MatrixField field;
    field.value = sigma;
    if (sigma_jacobian) field.jacobian = sigma_jacobian;
    return field;
}

Vec ito_correction(const CoefficientSet& coeffs, const Vec& xi, const Vec& phi) {
    Vec out = coeffs.eval_g(xi, phi);
    const Mat hv = coeffs.eval_h(xi, phi);
    const MatJacobian jac = coeffs.eval_h_phi_jacobian(xi, phi);
    for (std::size_t l = 0; l < coeffs.n; ++l) {
        const auto li = static_cast<Eigen::Index>(l);
        for (Eigen::Index j = 0; j < hv.cols(); ++j) out += 0.5 * hv(li, j) * jac[l].col(j);
    }
    return out;
}

Vec levy_correction(const Mat& v, const MatJacobian& jac, const Eigen::Ref<const Mat>& z2) {
    Vec out = Vec::Zero(v.rows());
    for (std::size_t k = 0; k < jac.size(); ++k) {
        const Vec weight = z2.transpose() * v.row(static_cast<Eigen::Index>(k)).transpose();
        out += jac[k] * weight;
    }
    return out;
}

} // namespace roughavg
