#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "roughavg/coefficients.hpp"
#include "roughavg/grid.hpp"
#include "roughavg/path.hpp"
#include "roughavg/rough_lift.hpp"

namespace roughavg {

/// Controlled path (x, x') with respect to a driver X: x_t - x_s = x'_s X_{s,t} + r_{s,t}.
/// x has one m-vector per grid point, x' one m x d matrix per grid point.
struct ControlledPath {
    Grid grid;
    Eigen::MatrixXd x;
    std::vector<Mat> x_dagger;

    std::size_t dim() const noexcept { return static_cast<std::size_t>(x.cols()); }
};

/// Matrix-valued controlled integrand Y (m x d per grid point) with Gubinelli derivative:
/// derivative[k][l] is the m x d direction-l derivative at grid point k.
struct ControlledIntegrand {
    Grid grid;
    std::vector<Mat> values;
    std::vector<std::vector<Mat>> derivative;
};

/// The solution-controlled path of an RDE: x' = sigma(x).
ControlledPath solution_controlled(const Path& x, const MatrixField& sigma);

/// (sigma(x), D sigma(x) x') as a controlled integrand.
ControlledIntegrand compose(const ControlledPath& cp, const MatrixField& sigma);

/// Compensated Riemann sum of int_a^b Y dX: sum_k [ Y_k X_{k,k+1} + sum_{l,j} Y'^{(l)}_k(., j) X2^{lj}_{k,k+1} ]
/// over the coarse partition of [a, b] taken every `stride` points. Returns an m-vector.
Vec rough_integral(const ControlledIntegrand& y, const RoughLift& lift, double a, double b,
                   std::size_t stride = 1, bool with_correction = true);

/// m x d matrix of int_a^b x^i dX^j = lim sum_k [ x^i_k X^j_{k,k+1} + sum_l x'^{il}_k X2^{lj}_{k,k+1} ].
Mat rough_integral(const ControlledPath& cp, const RoughLift& lift, double a, double b,
                   std::size_t stride = 1, bool with_correction = true);

/// Triplet (x, omega, v) on a uniform grid with v_{s,t} stored for every pair s <= t
/// (m x d each) and the Hoelder exponent beta the data is assumed to have.
class TripletView {
public:
    TripletView(Grid grid, Eigen::MatrixXd x, Eigen::MatrixXd omega, double beta);

    const Grid& grid() const noexcept { return grid_; }
    const Eigen::MatrixXd& x() const noexcept { return x_; }
    const Eigen::MatrixXd& omega() const noexcept { return omega_; }
    double beta() const noexcept { return beta_; }
    std::size_t m() const noexcept { return static_cast<std::size_t>(x_.cols()); }
    std::size_t d() const noexcept { return static_cast<std::size_t>(omega_.cols()); }
    std::size_t n_points() const noexcept { return static_cast<std::size_t>(x_.rows()); }

    Eigen::Map<const Mat> v(std::size_t i, std::size_t j) const;
    void set_v(std::size_t i, std::size_t j, const Mat& value);

    /// Max of |v_{s,u} + v_{u,t} + (x_u - x_s) (x) (omega_t - omega_u) - v_{s,t}| over sampled triples.
    double chen_defect(std::size_t triple_budget = 200'000) const;

private:
    std::size_t slot(std::size_t i, std::size_t j) const;

    Grid grid_;
    Eigen::MatrixXd x_;
    Eigen::MatrixXd omega_;
    double beta_;
    std::vector<double> v_;
};

/// Triplet (Z, Z, Z2) from a lift that stores every coarse pair.
TripletView triplet_from_lift(const RoughLift& lift, double beta);

/// Triplet from continuous-time functions evaluated on the grid.
TripletView triplet_from_functions(const Grid& grid, const std::function<Vec(double)>& x,
                                   const std::function<Vec(double)>& omega,
                                   const std::function<Mat(double, double)>& v, double beta);

/// Compensated Riemann sum of int_a^b sigma(x) d omega for a triplet:
///   sum_k [ sigma(x_k) omega_{k,k+1} + sum_{l,j} d_l sigma_{., j}(x_k) v^{l j}_{k,k+1} ].
Vec riemann_integral(const TripletView& tv, const MatrixField& sigma, double a, double b, std::size_t stride = 1);

struct AlphaWindow {
    double lower = 0.0;
    double upper = 0.0;
    double midpoint() const noexcept { return 0.5 * (lower + upper); }
};

/// Open interval of admissible fractional orders: max(1 - beta, 1/2) < alpha < min(2 beta, (lambda beta + 1)/2).
AlphaWindow admissible_alpha(double beta, double lambda = 1.0);

struct FracOptions {
    std::optional<double> alpha;      // defaults to the midpoint of the admissible window
    double lambda = 1.0;              // Hoelder exponent of the derivative of sigma
    std::size_t quad_points = 0;      // cells on [a, b]; 0 uses every grid cell
};

struct FracResult {
    Vec value;
    Vec first_term;
    Vec second_term;
    double alpha = 0.0;
    double beta = 0.0;
    std::size_t quad_points = 0;
};

/// Fractional-calculus value of int_a^b sigma(x_r) d omega_r built from the compensated
/// fractional derivative of sigma(x) and the extended fractional derivative of v. Inner
/// singular integrals use product integration of the power kernel against the
/// piecewise-linear interpolant of grid data. Throws DomainError naming the violated
/// constraint when alpha is outside the admissible window.
FracResult frac_integral(const TripletView& tv, const MatrixField& sigma, double a, double b,
                         const FracOptions& options = {});

} // namespace roughavg
