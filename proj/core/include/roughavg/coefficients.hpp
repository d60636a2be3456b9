#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace roughavg {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Partial derivatives of a matrix-valued map: entry k is d/du_k of the matrix.
using MatJacobian = std::vector<Mat>;

/// Relative central-difference step used when no analytic Jacobian is supplied.
inline constexpr double kFiniteDifferenceStep = 1e-5;

/// Central differences with step 1e-5 * (1 + |u_k|) per coordinate.
MatJacobian finite_difference_jacobian(const std::function<Mat(const Vec&)>& map, const Vec& u);
Mat finite_difference_vector_jacobian(const std::function<Vec(const Vec&)>& map, const Vec& u);

/// Matrix-valued coefficient u -> V(u) (rows: state, cols: driver) with optional Jacobian.
struct MatrixField {
    std::function<Mat(const Vec&)> value;
    std::function<MatJacobian(const Vec&)> jacobian;

    Mat operator()(const Vec& u) const { return value(u); }
    MatJacobian jacobian_at(const Vec& u) const;
};

/// Drift f, slow diffusion sigma, fast drift g and fast diffusion h of the fast-slow system
///   dX = f(X,Y) dt + sigma(X) dB,   dY = g(X,Y)/eps dt + h(X,Y)/sqrt(eps) dW.
struct CoefficientSet {
    std::string name;
    std::size_t m = 1;   // slow state
    std::size_t n = 1;   // fast state
    std::size_t d = 1;   // fBm dimension
    std::size_t dp = 1;  // Bm dimension

    std::function<Vec(const Vec&, const Vec&)> f;
    std::function<Mat(const Vec&)> sigma;
    std::function<Vec(const Vec&, const Vec&)> g;
    std::function<Mat(const Vec&, const Vec&)> h;

    // Optional analytic Jacobians: d sigma / d xi_k and d h / d phi_k.
    std::function<MatJacobian(const Vec&)> sigma_jacobian;
    std::function<MatJacobian(const Vec&, const Vec&)> h_phi_jacobian;

    /// Dissipativity constant of the frozen dynamics when known.
    std::optional<double> beta1;

    Vec eval_f(const Vec& xi, const Vec& phi) const;
    Mat eval_sigma(const Vec& xi) const;
    Vec eval_g(const Vec& xi, const Vec& phi) const;
    Mat eval_h(const Vec& xi, const Vec& phi) const;
    MatJacobian eval_sigma_jacobian(const Vec& xi) const;
    MatJacobian eval_h_phi_jacobian(const Vec& xi, const Vec& phi) const;

    MatrixField sigma_field() const;
};

/// Stratonovich-to-Ito drift: g(xi,phi) + 1/2 sum_j sum_l h_{l,j} d_{phi_l} h_{.,j}(xi,phi).
Vec ito_correction(const CoefficientSet& coeffs, const Vec& xi, const Vec& phi);

/// Second-order rough Euler increment sum_{l,j} (D_{V_l} V_j)(u) Z2^{l j}.
Vec levy_correction(const Mat& v, const MatJacobian& jac, const Eigen::Ref<const Mat>& z2);

} // namespace roughavg
