#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "roughavg/errors.hpp"
#include "roughavg/gaussian_paths.hpp"
#include "roughavg/rough_integrate.hpp"
#include "roughavg/rough_lift.hpp"
#include "test_support.hpp"

using namespace roughavg;
using roughavg::testing::mat1;

namespace {

Path smooth_path(const Grid& g, double (*fn)(double)) {
    Path p(g, 1);
    for (std::size_t k = 0; k < g.n_points(); ++k) p.values(static_cast<Eigen::Index>(k), 0) = fn(g.time(k));
    return p;
}

MatrixField identity_field() {
    return MatrixField{[](const Vec&) { return mat1(1.0); }, [](const Vec&) { return MatJacobian{mat1(0.0)}; }};
}

// Integrand x with x' = 1 for a scalar driver x.
ControlledPath self_controlled(const RoughLift& lift) {
    Path x(lift.coarse_grid(), lift.first_level());
    return solution_controlled(x, identity_field());
}

} // namespace

TEST(RoughIntegral, IdentityIntegrandTelescopes) {
    const Grid coarse(0.0, 1.0, 64);
    const auto b = sample_fbm(0.4, coarse.refine(8), 1, 2);
    const RoughLift lift = lift_geometric(b.path, coarse, 8);
    ControlledIntegrand y;
    y.grid = coarse;
    y.values.assign(coarse.n_points(), Mat::Identity(2, 2));
    y.derivative.assign(coarse.n_points(), std::vector<Mat>(2, Mat::Zero(2, 2)));
    const Vec v = rough_integral(y, lift, 0.25, 0.75);
    const Vec expected = lift.increment(16, 48);
    EXPECT_NEAR((v - expected).norm(), 0.0, 1e-14);
}

TEST(RoughIntegral, SmoothDriverChainRule) {
    const Grid coarse(0.0, 1.0, 200);
    const RoughLift lift = lift_geometric(smooth_path(coarse.refine(4), [](double t) { return std::sin(t); }), coarse, 4);
    const Mat v = rough_integral(self_controlled(lift), lift, 0.0, 1.0);
    EXPECT_NEAR(v(0, 0), 0.5 * std::sin(1.0) * std::sin(1.0), 1e-6);
    EXPECT_NEAR(v(0, 0), 0.354036, 1e-6);
}

TEST(RoughIntegral, StratonovichBrownianChainRule) {
    const Grid coarse(0.0, 1.0, 1024);
    const auto w = sample_bm(1, coarse.refine(4), 17);
    const RoughLift lift = lift_geometric(w.path, coarse, 4, 1);
    const Mat v = rough_integral(self_controlled(lift), lift, 0.0, 1.0);
    const double wt = lift.first_level()(1024, 0);
    EXPECT_NEAR(v(0, 0), 0.5 * wt * wt, 1e-10);
}

TEST(RoughIntegral, Additive) {
    const Grid coarse(0.0, 1.0, 64);
    const auto b = sample_fbm(0.4, coarse.refine(4), 2);
    const RoughLift lift = lift_geometric(b.path, coarse, 4);
    const MatrixField sigma{[](const Vec& x) { return mat1(std::cos(x(0))); },
                            [](const Vec& x) { return MatJacobian{mat1(-std::sin(x(0)))}; }};
    const ControlledIntegrand y = compose(self_controlled(lift), sigma);
    const Vec whole = rough_integral(y, lift, 0.0, 1.0);
    const Vec parts = rough_integral(y, lift, 0.0, 0.375) + rough_integral(y, lift, 0.375, 1.0);
    EXPECT_NEAR(whole(0), parts(0), 1e-13);
}

TEST(RoughIntegral, LinearInIntegrand) {
    const Grid coarse(0.0, 1.0, 32);
    const auto b = sample_fbm(0.45, coarse.refine(4), 3);
    const RoughLift lift = lift_geometric(b.path, coarse, 4);
    const ControlledPath cp = self_controlled(lift);
    const MatrixField s1{[](const Vec& x) { return mat1(std::sin(x(0))); },
                         [](const Vec& x) { return MatJacobian{mat1(std::cos(x(0)))}; }};
    const MatrixField s2{[](const Vec& x) { return mat1(x(0) * x(0)); },
                         [](const Vec& x) { return MatJacobian{mat1(2 * x(0))}; }};
    const MatrixField combo{[&](const Vec& x) { return Mat(2.0 * s1(x) - 3.0 * s2(x)); },
                            [&](const Vec& x) { return MatJacobian{2.0 * s1.jacobian_at(x)[0] - 3.0 * s2.jacobian_at(x)[0]}; }};
    const double lhs = rough_integral(compose(cp, combo), lift, 0.0, 1.0)(0);
    const double rhs = 2.0 * rough_integral(compose(cp, s1), lift, 0.0, 1.0)(0) -
                       3.0 * rough_integral(compose(cp, s2), lift, 0.0, 1.0)(0);
    EXPECT_NEAR(lhs, rhs, 1e-12);
}

TEST(RoughIntegral, CorrectionTermIsNeededForFbm) {
    const Grid fine(0.0, 1.0, 1u << 14);
    const auto b = sample_fbm(0.35, fine, 21);
    std::vector<double> with, without;
    for (std::size_t n : {1u << 8, 1u << 10, 1u << 12, 1u << 14}) {
        const Grid coarse(0.0, 1.0, n);
        const RoughLift lift = lift_geometric(b.path, coarse, (1u << 14) / n, 1);
        with.push_back(rough_integral(self_controlled(lift), lift, 0.0, 1.0)(0, 0));
        without.push_back(rough_integral(self_controlled(lift), lift, 0.0, 1.0, 1, false)(0, 0));
    }
    for (std::size_t k = 1; k < with.size(); ++k) {
        EXPECT_NEAR(with[k], with[k - 1], 1e-10);
        // left-point sums drift by about half the added quadratic variation
        EXPECT_GT(std::abs(without[k] - without[k - 1]), 0.1);
    }
}

TEST(RoughIntegral, StrideCoarsensPartition) {
    const Grid coarse(0.0, 1.0, 64);
    const auto b = sample_fbm(0.4, coarse.refine(4), 2);
    const RoughLift lift = lift_geometric(b.path, coarse, 4, 0);
    const ControlledPath cp = self_controlled(lift);
    const double full = rough_integral(cp, lift, 0.0, 1.0, 1)(0, 0);
    const double coarse4 = rough_integral(cp, lift, 0.0, 1.0, 4)(0, 0);
    EXPECT_NEAR(full, coarse4, 1e-12);
}

TEST(RoughIntegral, RejectsIntervalOffGrid) {
    const Grid coarse(0.0, 1.0, 8);
    const auto b = sample_fbm(0.4, coarse.refine(2), 2);
    const RoughLift lift = lift_geometric(b.path, coarse, 2);
    EXPECT_THROW(rough_integral(self_controlled(lift), lift, 0.0, 0.3), ConfigError);
}
