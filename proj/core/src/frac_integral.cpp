#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "roughavg/errors.hpp"
#include "roughavg/rough_integrate.hpp"

namespace roughavg {

namespace {

using Index = Eigen::Index;

// int_lo^hi u^{-q} du
double power_moment(double q, double lo, double hi) {
    if (std::abs(q - 1.0) < 1e-14) return std::log(hi / lo);
    if (lo == 0.0) return std::pow(hi, 1.0 - q) / (1.0 - q);
    return std::pow(lo, 1.0 - q) * std::expm1((1.0 - q) * std::log1p((hi - lo) / lo)) / (1.0 - q);
}

// Product-integration weights for int u^{-p} N(u) du over cells [(j-1)h, jh] with N linear on
// each cell: `far[j]` multiplies N(jh), `near[j]` multiplies N((j-1)h). For p >= 1 the
// integrand numerator must vanish at u = 0, so near[1] is left at zero.
struct PowerWeights {
    std::vector<double> far;
    std::vector<double> near;

    PowerWeights(double p, double h, std::size_t cells) : far(cells + 2, 0.0), near(cells + 2, 0.0) {
        for (std::size_t j = 1; j <= cells; ++j) {
            const double lo = h * static_cast<double>(j - 1);
            const double hi = h * static_cast<double>(j);
            const double m1 = power_moment(p - 1.0, lo, hi) - (lo > 0.0 ? lo * power_moment(p, lo, hi) : 0.0);
            far[j] = m1 / h;
            if (j == 1 && p >= 1.0) continue;
            near[j] = power_moment(p, lo, hi) - m1 / h;
        }
    }
};

// Dense row-major block of `comps` doubles per node.
struct NodeField {
    std::size_t comps = 0;
    std::vector<double> data;
    NodeField(std::size_t nodes, std::size_t c) : comps(c), data(nodes * c, 0.0) {}
    double* at(std::size_t k) { return data.data() + k * comps; }
    const double* at(std::size_t k) const { return data.data() + k * comps; }
};

// out = int_{r_0}^{r_i} numer(theta) (r_i - theta)^{-p} d theta on nodes 0..i.
template <class Numer>
void left_inner(std::size_t i, const PowerWeights& w, std::size_t comps, Numer&& numer, double* out,
                std::vector<double>& scratch) {
    std::fill(out, out + comps, 0.0);
    for (std::size_t k = 0; k < i; ++k) {
        const double weight = w.far[i - k] + (k >= 1 ? w.near[i - k + 1] : 0.0);
        numer(k, scratch.data());
        for (std::size_t c = 0; c < comps; ++c) out[c] += weight * scratch[c];
    }
}

// out = int_{r_i}^{r_N} numer(s) (s - r_i)^{-p} ds on nodes i..N.
template <class Numer>
void right_inner(std::size_t i, std::size_t cells, const PowerWeights& w, std::size_t comps, Numer&& numer,
                 double* out, std::vector<double>& scratch) {
    std::fill(out, out + comps, 0.0);
    for (std::size_t k = i + 1; k <= cells; ++k) {
        const double weight = w.far[k - i] + (k < cells ? w.near[k - i + 1] : 0.0);
        numer(k, scratch.data());
        for (std::size_t c = 0; c < comps; ++c) out[c] += weight * scratch[c];
    }
}

// int_a^b (r - a)^{-p} G(r) dr with G piecewise linear through the nodes.
Vec outer_left(const std::vector<Vec>& g, const PowerWeights& w, std::size_t cells) {
    Vec total = Vec::Zero(g.front().size());
    for (std::size_t k = 0; k <= cells; ++k) {
        const double weight = (k >= 1 ? w.far[k] : 0.0) + (k < cells ? w.near[k + 1] : 0.0);
        total += weight * g[k];
    }
    return total;
}

} // namespace

AlphaWindow admissible_alpha(double beta, double lambda) {
    AlphaWindow win;
    win.lower = std::max(1.0 - beta, 0.5);
    win.upper = std::min({2.0 * beta, 0.5 * (lambda * beta + 1.0), 1.0});
    if (!(win.lower < win.upper)) {
        throw DomainError("no admissible fractional order for beta = " + std::to_string(beta));
    }
    return win;
}

FracResult frac_integral(const TripletView& tv, const MatrixField& sigma, double a, double b,
                         const FracOptions& options) {
    const double beta = tv.beta();
    const AlphaWindow win = admissible_alpha(beta, options.lambda);
    const double alpha = options.alpha.value_or(win.midpoint());
    {
        std::ostringstream why;
        if (!(alpha > 1.0 - beta)) why << "alpha must exceed 1 - beta = " << 1.0 - beta;
        else if (!(alpha < 2.0 * beta)) why << "alpha must be below 2 beta = " << 2.0 * beta;
        else if (!(alpha < 0.5 * (options.lambda * beta + 1.0)))
            why << "alpha must be below (lambda beta + 1)/2 = " << 0.5 * (options.lambda * beta + 1.0);
        else if (!(alpha > 0.5)) why << "alpha must exceed 1/2 so that 2 alpha - 1 lies in (0,1)";
        if (!why.str().empty()) throw DomainError(why.str());
    }

    const Grid& grid = tv.grid();
    const std::size_t ia = grid.index_of(a);
    const std::size_t ib = grid.index_of(b);
    if (ib <= ia) throw DomainError("frac_integral requires a < b");
    std::size_t cells = options.quad_points == 0 ? ib - ia : options.quad_points;
    if ((ib - ia) % cells != 0) throw ConfigError("quad_points must divide the number of grid cells in [a, b]", "quad_points");
    const std::size_t stride = (ib - ia) / cells;
    const double h = grid.dt() * static_cast<double>(stride);
    const std::size_t nodes = cells + 1;
    const std::size_t m = tv.m();
    const std::size_t d = tv.d();
    const std::size_t md = m * d;
    auto node = [&](std::size_t k) { return ia + k * stride; };

    // sigma and its derivative at the nodes
    std::vector<Mat> sig(nodes);
    std::vector<MatJacobian> jac(nodes);
    std::vector<Vec> xs(nodes), ws(nodes);
    for (std::size_t k = 0; k < nodes; ++k) {
        xs[k] = tv.x().row(static_cast<Index>(node(k))).transpose();
        ws[k] = tv.omega().row(static_cast<Index>(node(k))).transpose();
        sig[k] = sigma(xs[k]);
        jac[k] = sigma.jacobian_at(xs[k]);
        if (static_cast<std::size_t>(sig[k].rows()) != m || static_cast<std::size_t>(sig[k].cols()) != d) {
            throw ConfigError("sigma must map R^m to m x d matrices matching the triplet", "sigma");
        }
    }

    const double g_1ma = std::tgamma(1.0 - alpha);
    const double g_a = std::tgamma(alpha);
    const double g_22a = std::tgamma(2.0 - 2.0 * alpha);
    const PowerWeights w_left_comp(alpha + 1.0, h, cells);
    const PowerWeights w_right(2.0 - alpha, h, cells);
    const PowerWeights w_left_grad(2.0 * alpha, h, cells);
    const PowerWeights w_outer1(alpha, h, cells);
    const PowerWeights w_outer2(2.0 * alpha - 1.0, h, cells);
    std::vector<double> scratch(std::max(md, d) + 1);
    std::vector<double> inner(std::max(md, d) + 1);

    // (r - a)^alpha times the compensated fractional derivative of sigma(x)
    std::vector<Mat> comp(nodes, Mat::Zero(static_cast<Index>(m), static_cast<Index>(d)));
    comp[0] = sig[0] / g_1ma;
    for (std::size_t i = 1; i < nodes; ++i) {
        auto numer = [&](std::size_t k, double* out) {
            Eigen::Map<Mat> o(out, static_cast<Index>(m), static_cast<Index>(d));
            o = sig[i] - sig[k];
            const Vec dx = xs[i] - xs[k];
            for (std::size_t l = 0; l < m; ++l) o -= jac[k][l] * dx(static_cast<Index>(l));
        };
        left_inner(i, w_left_comp, md, numer, inner.data(), scratch);
        const double ri = h * static_cast<double>(i);
        comp[i] = (sig[i] + alpha * std::pow(ri, alpha) * Eigen::Map<Mat>(inner.data(), static_cast<Index>(m), static_cast<Index>(d))) / g_1ma;
    }

    // right fractional derivative of omega - omega(b), without the (-1)^{1-alpha} phase
    std::vector<Vec> rw(nodes, Vec::Zero(static_cast<Index>(d)));
    for (std::size_t i = 0; i + 1 < nodes; ++i) {
        auto numer = [&](std::size_t k, double* out) {
            Eigen::Map<Vec>(out, static_cast<Index>(d)) = ws[i] - ws[k];
        };
        right_inner(i, cells, w_right, d, numer, inner.data(), scratch);
        const double gap = h * static_cast<double>(cells - i);
        rw[i] = ((ws[i] - ws[cells]) / std::pow(gap, 1.0 - alpha) +
                 (1.0 - alpha) * Eigen::Map<Vec>(inner.data(), static_cast<Index>(d))) / g_a;
    }

    std::vector<Vec> g1(nodes);
    for (std::size_t k = 0; k < nodes; ++k) g1[k] = comp[k] * rw[k];
    const Vec first = -outer_left(g1, w_outer1, cells);

    // extended fractional derivative of v, then its right fractional derivative
    std::vector<Mat> vcal(nodes, Mat::Zero(static_cast<Index>(m), static_cast<Index>(d)));
    for (std::size_t i = 0; i + 1 < nodes; ++i) {
        auto numer = [&](std::size_t k, double* out) {
            Eigen::Map<Mat>(out, static_cast<Index>(m), static_cast<Index>(d)) = tv.v(node(i), node(k));
        };
        right_inner(i, cells, w_right, md, numer, inner.data(), scratch);
        const double gap = h * static_cast<double>(cells - i);
        vcal[i] = (Mat(tv.v(node(i), node(cells))) / std::pow(gap, 1.0 - alpha) +
                   (1.0 - alpha) * Eigen::Map<Mat>(inner.data(), static_cast<Index>(m), static_cast<Index>(d))) / g_a;
    }
    std::vector<Mat> rv(nodes, Mat::Zero(static_cast<Index>(m), static_cast<Index>(d)));
    for (std::size_t i = 0; i + 1 < nodes; ++i) {
        auto numer = [&](std::size_t k, double* out) {
            Eigen::Map<Mat>(out, static_cast<Index>(m), static_cast<Index>(d)) = vcal[i] - vcal[k];
        };
        right_inner(i, cells, w_right, md, numer, inner.data(), scratch);
        const double gap = h * static_cast<double>(cells - i);
        rv[i] = ((vcal[i] - vcal[cells]) / std::pow(gap, 1.0 - alpha) +
                 (1.0 - alpha) * Eigen::Map<Mat>(inner.data(), static_cast<Index>(m), static_cast<Index>(d))) / g_a;
    }

    // (r - a)^{2 alpha - 1} times the left derivative of order 2 alpha - 1 of grad sigma(x)
    std::vector<Vec> g2(nodes, Vec::Zero(static_cast<Index>(m)));
    for (std::size_t i = 0; i < nodes; ++i) {
        const double ri = h * static_cast<double>(i);
        for (std::size_t l = 0; l < m; ++l) {
            Mat lj = jac[i][l];
            if (i > 0) {
                auto numer = [&](std::size_t k, double* out) {
                    Eigen::Map<Mat>(out, static_cast<Index>(m), static_cast<Index>(d)) = jac[i][l] - jac[k][l];
                };
                left_inner(i, w_left_grad, md, numer, inner.data(), scratch);
                lj += (2.0 * alpha - 1.0) * std::pow(ri, 2.0 * alpha - 1.0) *
                      Eigen::Map<Mat>(inner.data(), static_cast<Index>(m), static_cast<Index>(d));
            }
            lj /= g_22a;
            g2[i] += lj * rv[i].row(static_cast<Index>(l)).transpose();
        }
    }
    const Vec second = outer_left(g2, w_outer2, cells);

    FracResult result;
    result.first_term = first;
    result.second_term = second;
    result.value = first + second;
    result.alpha = alpha;
    result.beta = beta;
    result.quad_points = cells;
    return result;
}

} // namespace roughavg
