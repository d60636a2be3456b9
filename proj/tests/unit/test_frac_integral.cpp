#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "roughavg/errors.hpp"
#include "roughavg/rough_integrate.hpp"
#include "roughavg/xcheck.hpp"
#include "test_support.hpp"

using namespace roughavg;
using roughavg::testing::mat1;
using roughavg::testing::vec1;

namespace {

// x = sin, omega = cos with v_{s,t} = int_s^t (sin r - sin s) d cos r in closed form.
TripletView smooth_triplet(std::size_t n, double beta = 0.45) {
    auto v = [](double s, double t) {
        const double a = -((t - s) / 2.0 - (std::sin(2 * t) - std::sin(2 * s)) / 4.0);
        return mat1(a - std::sin(s) * (std::cos(t) - std::cos(s)));
    };
    return triplet_from_functions(Grid(0.0, 1.0, n), [](double t) { return vec1(std::sin(t)); },
                                  [](double t) { return vec1(std::cos(t)); }, v, beta);
}

MatrixField linear_field() {
    return MatrixField{[](const Vec& x) { return mat1(x(0)); }, [](const Vec&) { return MatJacobian{mat1(1.0)}; }};
}

} // namespace

TEST(AdmissibleAlpha, Window) {
    const AlphaWindow w = admissible_alpha(0.45);
    EXPECT_DOUBLE_EQ(w.lower, 0.55);
    EXPECT_DOUBLE_EQ(w.upper, 0.725);
    EXPECT_DOUBLE_EQ(w.midpoint(), 0.6375);
    EXPECT_THROW(admissible_alpha(0.3), DomainError);
}

TEST(FracIntegral, ConstantIntegrand) {
    const TripletView tv = smooth_triplet(3200);
    const MatrixField c{[](const Vec&) { return mat1(2.5); }, [](const Vec&) { return MatJacobian{mat1(0.0)}; }};
    const FracResult r = frac_integral(tv, c, 0.0, 1.0);
    EXPECT_NEAR(r.value(0), 2.5 * (std::cos(1.0) - 1.0), 1e-6);
    EXPECT_NEAR(r.second_term(0), 0.0, 1e-15);
}

TEST(FracIntegral, SmoothTripletMatchesClosedForm) {
    const TripletView tv = smooth_triplet(400);
    const FracResult r = frac_integral(tv, linear_field(), 0.0, 1.0);
    const double exact = -(0.5 - 0.25 * std::sin(2.0));
    EXPECT_NEAR(r.value(0), exact, 1e-3 * std::abs(exact));
    EXPECT_NEAR(r.value(0), r.first_term(0) + r.second_term(0), 1e-15);
}

TEST(FracIntegral, SmoothCrossCheck) {
    const XcheckReport rep = xcheck_smooth(400, 10);
    EXPECT_LE(rep.rel_gap, 1e-3);
    ASSERT_TRUE(rep.exact.has_value());
    EXPECT_NEAR(rep.riemann(0), (*rep.exact)(0), 1e-5);
}

TEST(FracIntegral, FbmCrossCheck) {
    const XcheckReport rep = xcheck_fbm(0.45, 2048, 1);
    EXPECT_LE(rep.rel_gap, 1e-2);
    EXPECT_EQ(rep.quad_points, 2048u);
}

TEST(FracIntegral, GapShrinksWithQuadraturePoints) {
    std::vector<double> ns, gaps;
    const double exact = -(0.5 - 0.25 * std::sin(2.0));
    for (std::size_t n : {50u, 100u, 200u, 400u}) {
        const FracResult r = frac_integral(smooth_triplet(n), linear_field(), 0.0, 1.0);
        ns.push_back(static_cast<double>(n));
        gaps.push_back(std::abs(r.value(0) - exact));
    }
    EXPECT_LT(roughavg::testing::slope(ns, gaps), 0.0);
}

TEST(FracIntegral, IndependentOfAlpha) {
    const TripletView tv = smooth_triplet(400);
    FracOptions lo, hi;
    lo.alpha = 0.58;
    hi.alpha = 0.7;
    const double a = frac_integral(tv, linear_field(), 0.0, 1.0, lo).value(0);
    const double b = frac_integral(tv, linear_field(), 0.0, 1.0, hi).value(0);
    EXPECT_NEAR(a, b, 1e-3 * std::abs(a));
}

TEST(FracIntegral, LinearInIntegrand) {
    const TripletView tv = smooth_triplet(200);
    const MatrixField s{[](const Vec& x) { return mat1(std::sin(x(0))); },
                        [](const Vec& x) { return MatJacobian{mat1(std::cos(x(0)))}; }};
    const MatrixField combo{[](const Vec& x) { return mat1(3.0 * std::sin(x(0)) - x(0)); },
                            [](const Vec& x) { return MatJacobian{mat1(3.0 * std::cos(x(0)) - 1.0)}; }};
    const double lhs = frac_integral(tv, combo, 0.0, 1.0).value(0);
    const double rhs = 3.0 * frac_integral(tv, s, 0.0, 1.0).value(0) - frac_integral(tv, linear_field(), 0.0, 1.0).value(0);
    EXPECT_NEAR(lhs, rhs, 1e-12);
}

TEST(FracIntegral, RejectsInadmissibleAlpha) {
    const TripletView tv = smooth_triplet(50);
    FracOptions o;
    o.alpha = 0.5;
    EXPECT_THROW(frac_integral(tv, linear_field(), 0.0, 1.0, o), DomainError);
    o.alpha = 0.95;
    EXPECT_THROW(frac_integral(tv, linear_field(), 0.0, 1.0, o), DomainError);
}

TEST(FracIntegral, QuadPointsMustDivideCells) {
    const TripletView tv = smooth_triplet(100);
    FracOptions o;
    o.quad_points = 30;
    EXPECT_THROW(frac_integral(tv, linear_field(), 0.0, 1.0, o), ConfigError);
    o.quad_points = 50;
    EXPECT_NO_THROW(frac_integral(tv, linear_field(), 0.0, 1.0, o));
}

TEST(TripletView, ChenDefectOfExactData) {
    EXPECT_LE(smooth_triplet(64).chen_defect(), 1e-14);
}
