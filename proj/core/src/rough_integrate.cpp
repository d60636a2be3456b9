#include "roughavg/rough_integrate.hpp"

#include <algorithm>
#include <string>

#include "roughavg/errors.hpp"

namespace roughavg {

namespace {

using Index = Eigen::Index;

Index idx(std::size_t i) { return static_cast<Index>(i); }

void require_same_grid(const Grid& a, const Grid& b) {
    if (!(a == b)) throw ConfigError("integrand and driver are not on the same coarse grid", "grid");
}

std::pair<std::size_t, std::size_t> partition(const Grid& grid, double a, double b, std::size_t stride) {
    if (stride == 0) throw ConfigError("partition stride must be positive", "stride");
    const std::size_t ia = grid.index_of(a);
    const std::size_t ib = grid.index_of(b);
    if (ia > ib) throw DomainError("rough_integral requires a <= b");
    if ((ib - ia) % stride != 0) throw ConfigError("stride does not divide the interval", "stride");
    return {ia, ib};
}

} // namespace

ControlledPath solution_controlled(const Path& x, const MatrixField& sigma) {
    ControlledPath cp;
    cp.grid = x.grid;
    cp.x = x.values;
    cp.x_dagger.reserve(x.n_points());
    for (std::size_t k = 0; k < x.n_points(); ++k) cp.x_dagger.push_back(sigma(x.at(k)));
    return cp;
}

ControlledIntegrand compose(const ControlledPath& cp, const MatrixField& sigma) {
    ControlledIntegrand y;
    y.grid = cp.grid;
    const std::size_t n = static_cast<std::size_t>(cp.x.rows());
    if (cp.x_dagger.size() != n) throw ConfigError("Gubinelli derivative length mismatch", "controlled_path");
    y.values.reserve(n);
    y.derivative.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const Vec xk = cp.x.row(idx(k)).transpose();
        const Mat s = sigma(xk);
        const MatJacobian jac = sigma.jacobian_at(xk);
        const Mat& xd = cp.x_dagger[k];
        std::vector<Mat> deriv(static_cast<std::size_t>(xd.cols()), Mat::Zero(s.rows(), s.cols()));
        for (Index l = 0; l < xd.cols(); ++l)
            for (std::size_t q = 0; q < jac.size(); ++q) deriv[static_cast<std::size_t>(l)] += jac[q] * xd(idx(q), l);
        y.values.push_back(s);
        y.derivative.push_back(std::move(deriv));
    }
    return y;
}

Vec rough_integral(const ControlledIntegrand& y, const RoughLift& lift, double a, double b,
                   std::size_t stride, bool with_correction) {
    require_same_grid(y.grid, lift.coarse_grid());
    const auto [ia, ib] = partition(y.grid, a, b, stride);
    if (y.values.empty()) throw ConfigError("empty integrand", "integrand");
    Vec total = Vec::Zero(y.values.front().rows());
    for (std::size_t k = ia; k < ib; k += stride) {
        const Mat& yk = y.values[k];
        if (static_cast<std::size_t>(yk.cols()) != lift.dim()) {
            throw ConfigError("integrand width does not match the driver dimension", "integrand");
        }
        total += yk * lift.increment(k, k + stride);
        if (!with_correction) continue;
        const auto z2 = lift.second_level(k, k + stride);
        for (std::size_t l = 0; l < y.derivative[k].size(); ++l) {
            total += y.derivative[k][l] * z2.row(idx(l)).transpose();
        }
    }
    return total;
}

Mat rough_integral(const ControlledPath& cp, const RoughLift& lift, double a, double b,
                   std::size_t stride, bool with_correction) {
    require_same_grid(cp.grid, lift.coarse_grid());
    const auto [ia, ib] = partition(cp.grid, a, b, stride);
    Mat total = Mat::Zero(cp.x.cols(), idx(lift.dim()));
    for (std::size_t k = ia; k < ib; k += stride) {
        total += cp.x.row(idx(k)).transpose() * lift.increment(k, k + stride).transpose();
        if (with_correction) total += cp.x_dagger[k] * lift.second_level(k, k + stride);
    }
    return total;
}

TripletView::TripletView(Grid grid, Eigen::MatrixXd x, Eigen::MatrixXd omega, double beta)
    : grid_(grid), x_(std::move(x)), omega_(std::move(omega)), beta_(beta) {
    if (static_cast<std::size_t>(x_.rows()) != grid_.n_points() ||
        static_cast<std::size_t>(omega_.rows()) != grid_.n_points()) {
        throw ConfigError("triplet paths must have one row per grid point", "triplet");
    }
    if (!(beta_ > 0.0 && beta_ <= 1.0)) throw DomainError("triplet beta must lie in (0, 1]");
    const std::size_t n = n_points();
    v_.assign(n * (n + 1) / 2 * m() * d(), 0.0);
}

std::size_t TripletView::slot(std::size_t i, std::size_t j) const {
    const std::size_t n = n_points();
    if (i > j || j >= n) throw ConfigError("triplet pair out of range", "triplet");
    // row-major packed upper triangle: row r holds n - r entries
    const std::size_t row_start = i * n - (i * (i - 1)) / 2;
    return (row_start + (j - i)) * m() * d();
}

Eigen::Map<const Mat> TripletView::v(std::size_t i, std::size_t j) const {
    return Eigen::Map<const Mat>(v_.data() + slot(i, j), idx(m()), idx(d()));
}

void TripletView::set_v(std::size_t i, std::size_t j, const Mat& value) {
    if (static_cast<std::size_t>(value.rows()) != m() || static_cast<std::size_t>(value.cols()) != d()) {
        throw ConfigError("v has the wrong shape", "triplet");
    }
    Eigen::Map<Mat>(v_.data() + slot(i, j), idx(m()), idx(d())) = value;
}

double TripletView::chen_defect(std::size_t triple_budget) const {
    const std::size_t n = n_points();
    const std::size_t total = n * n * n / 6 + 1;
    const std::size_t stride = std::max<std::size_t>(1, total / std::max<std::size_t>(1, triple_budget));
    std::size_t counter = 0;
    double worst = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t t = s + 2; t < n; ++t) {
            for (std::size_t u = s + 1; u < t; ++u) {
                if ((counter++ % stride) != 0) continue;
                const Vec dx = (x_.row(idx(u)) - x_.row(idx(s))).transpose();
                const Vec dw = (omega_.row(idx(t)) - omega_.row(idx(u))).transpose();
                const double r = (v(s, u) + v(u, t) + dx * dw.transpose() - v(s, t)).cwiseAbs().maxCoeff();
                worst = std::max(worst, r);
            }
        }
    }
    return worst;
}

Vec riemann_integral(const TripletView& tv, const MatrixField& sigma, double a, double b, std::size_t stride) {
    const auto [ia, ib] = partition(tv.grid(), a, b, stride);
    Vec total = Vec::Zero(idx(tv.m()));
    for (std::size_t k = ia; k < ib; k += stride) {
        const Vec xk = tv.x().row(idx(k)).transpose();
        const Vec dw = (tv.omega().row(idx(k + stride)) - tv.omega().row(idx(k))).transpose();
        total += sigma(xk) * dw;
        const MatJacobian jac = sigma.jacobian_at(xk);
        const auto v = tv.v(k, k + stride);
        for (std::size_t l = 0; l < jac.size(); ++l) total += jac[l] * v.row(idx(l)).transpose();
    }
    return total;
}

TripletView triplet_from_lift(const RoughLift& lift, double beta) {
    if (lift.window() + 1 < lift.n_points()) {
        throw ConfigError("triplet_from_lift needs the full upper triangle of second-level values", "window");
    }
    TripletView tv(lift.coarse_grid(), lift.first_level(), lift.first_level(), beta);
    for (std::size_t i = 0; i < lift.n_points(); ++i)
        for (std::size_t j = i; j < lift.n_points(); ++j) tv.set_v(i, j, lift.second_level(i, j));
    return tv;
}

TripletView triplet_from_functions(const Grid& grid, const std::function<Vec(double)>& x,
                                   const std::function<Vec(double)>& omega,
                                   const std::function<Mat(double, double)>& v, double beta) {
    const std::size_t n = grid.n_points();
    const Vec x0 = x(grid.time(0));
    const Vec w0 = omega(grid.time(0));
    Eigen::MatrixXd xs(idx(n), x0.size());
    Eigen::MatrixXd ws(idx(n), w0.size());
    for (std::size_t k = 0; k < n; ++k) {
        xs.row(idx(k)) = x(grid.time(k)).transpose();
        ws.row(idx(k)) = omega(grid.time(k)).transpose();
    }
    TripletView tv(grid, xs, ws, beta);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) tv.set_v(i, j, i == j ? Mat::Zero(x0.size(), w0.size()) : v(grid.time(i), grid.time(j)));
    return tv;
}

} // namespace roughavg
