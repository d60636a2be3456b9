#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "roughavg/errors.hpp"
#include "roughavg/gaussian_paths.hpp"
#include "roughavg/presets.hpp"
#include "roughavg/rde_solver.hpp"
#include "roughavg/rough_lift.hpp"
#include "test_support.hpp"

using namespace roughavg;
using roughavg::testing::mat1;
using roughavg::testing::moments;
using roughavg::testing::vec1;

namespace {

RoughLift zero_lift(const Grid& coarse) { return lift_geometric(Path(coarse, 1), coarse, 1, 1); }

RdeSystem linear_drift(double a) {
    RdeSystem s;
    s.drift = [a](const Vec& u) { return Vec(a * u); };
    s.diffusion = MatrixField{[](const Vec&) { return mat1(0.0); }, [](const Vec&) { return MatJacobian{mat1(0.0)}; }};
    return s;
}

struct Coupled {
    RoughLift lift;
    GaussianPath b;
    GaussianPath w;
};

Coupled coupled_drivers(const Grid& coarse, std::size_t fine_factor, std::uint64_t seed, double h = 0.4) {
    const Grid fine = coarse.refine(fine_factor);
    Coupled c{{}, sample_fbm(h, fine, seed), sample_bm(1, fine, seed + 7)};
    c.lift = lift_mixed(c.b, c.w, coarse, fine_factor);
    return c;
}

} // namespace

TEST(SolveRde, ZeroFieldsKeepInitialState) {
    const Grid coarse(0.0, 1.0, 32);
    const Path u = solve_rde(linear_drift(0.0), zero_lift(coarse), vec1(1.7));
    for (std::size_t k = 0; k < u.n_points(); ++k) EXPECT_EQ(u.values(static_cast<Eigen::Index>(k), 0), 1.7);
}

TEST(SolveRde, ExponentialOde) {
    const Grid coarse(0.0, 1.0, 1u << 12);
    const Path u = solve_rde(linear_drift(1.0), zero_lift(coarse), vec1(1.0));
    EXPECT_NEAR(u.values(1 << 12, 0), std::exp(1.0), 1e-3);
}

TEST(SolveRde, FirstOrderOnPureDrift) {
    std::vector<double> dts, errs;
    for (std::size_t n : {256u, 512u, 1024u, 2048u}) {
        const Grid coarse(0.0, 1.0, n);
        const Path u = solve_rde(linear_drift(1.0), zero_lift(coarse), vec1(1.0));
        dts.push_back(coarse.dt());
        errs.push_back(std::abs(u.values(static_cast<Eigen::Index>(n), 0) - std::exp(1.0)));
    }
    EXPECT_NEAR(roughavg::testing::slope(dts, errs), 1.0, 0.05);
}

TEST(SolveRde, StratonovichGeometricBrownianMotion) {
    const std::size_t n = 1u << 14;
    const Grid coarse(0.0, 1.0, n);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const GaussianPath w = sample_bm(1, coarse, seed);
        const RoughLift lift = lift_geometric(w.path, coarse, 1, 1);
        RdeSystem s;
        s.drift = [](const Vec& u) { return Vec(Vec::Zero(u.size())); };
        s.diffusion = MatrixField{[](const Vec& u) { return mat1(u(0)); }, [](const Vec&) { return MatJacobian{mat1(1.0)}; }};
        const Path u = solve_rde(s, lift, vec1(1.0));
        const double exact = std::exp(w.values()(static_cast<Eigen::Index>(n), 0));
        EXPECT_NEAR(u.values(static_cast<Eigen::Index>(n), 0) / exact, 1.0, 1e-2);
    }
}

TEST(SolveRde, RejectsShapeMismatch) {
    const Grid coarse(0.0, 1.0, 8);
    RdeSystem s = linear_drift(1.0);
    s.diffusion.value = [](const Vec&) { return Mat(Mat::Zero(1, 3)); };
    EXPECT_THROW(solve_rde(s, zero_lift(coarse), vec1(1.0)), ConfigError);
}

TEST(SolveRde, DivergenceIsReported) {
    const Grid coarse(0.0, 1.0, 8);
    RdeSystem s = linear_drift(1.0);
    s.drift = [](const Vec& u) { return Vec(u.array().square() * 1e200); };
    EXPECT_THROW(solve_rde(s, zero_lift(coarse), vec1(1.0)), DivergenceError);
}

TEST(ItoCorrection, ConstantDiffusionLeavesDrift) {
    const CoefficientSet c = make_preset("averaging").coeffs;
    EXPECT_DOUBLE_EQ(ito_correction(c, vec1(0.3), vec1(-1.2))(0), c.eval_g(vec1(0.3), vec1(-1.2))(0));
}

TEST(ItoCorrection, LinearDiffusion) {
    CoefficientSet c = roughavg::testing::ou_system([](const Vec&, const Vec& phi) { return phi; });
    c.g = [](const Vec&, const Vec&) { return vec1(0.0); };
    c.h = [](const Vec&, const Vec& phi) { return mat1(phi(0)); };
    EXPECT_NEAR(ito_correction(c, vec1(0.0), vec1(0.8))(0), 0.4, 1e-9);
}

TEST(ItoCorrection, SineDiffusion) {
    const CoefficientSet c = make_preset("remark13").coeffs;
    for (double xi : {-1.0, 0.4}) {
        for (double phi : {0.0, 2.1}) {
            const double expected = xi - 8 * phi + 0.5 * (std::sin(xi) + std::sin(phi)) * std::cos(phi);
            EXPECT_NEAR(ito_correction(c, vec1(xi), vec1(phi))(0), expected, 1e-14);
        }
    }
}

TEST(ItoCorrection, FiniteDifferenceJacobianAgrees) {
    CoefficientSet c = make_preset("remark13").coeffs;
    const double analytic = ito_correction(c, vec1(0.7), vec1(1.1))(0);
    c.h_phi_jacobian = nullptr;
    EXPECT_NEAR(ito_correction(c, vec1(0.7), vec1(1.1))(0), analytic, 1e-9);
}

TEST(RequiredSubstep, QuarterEps) {
    EXPECT_EQ(required_substep_factor(0.01, 1.0 / 64.0), 7u);
    EXPECT_EQ(required_substep_factor(0.1, 0.025), 1u);
    EXPECT_THROW(required_substep_factor(0.0, 0.1), DomainError);
}

TEST(SolveFastSlow, OuFastMeanTracksSlowState) {
    const Preset p = make_preset("ou");
    const Grid coarse(0.0, 0.2, 20);
    std::vector<double> avgs;
    for (std::uint64_t seed = 0; seed < 16; ++seed) {
        const Coupled c = coupled_drivers(coarse, 32, 40 + seed);
        const FastSlowSolution sol = solve_fast_slow(p.coeffs, 0.01, c.lift, c.w, p.x0, p.y0, 32, seed);
        const auto& yf = sol.y_fast.values;
        const Eigen::Index half = yf.rows() / 2;
        avgs.push_back(yf.col(0).tail(yf.rows() - half).mean());
        EXPECT_EQ(sol.y.values(20, 0), yf(yf.rows() - 1, 0));
    }
    EXPECT_NEAR(moments(avgs).mean, 1.0, 0.05);
}

TEST(SolveFastSlow, SmallerEpsDecorrelatesFaster) {
    const Preset p = make_preset("averaging");
    const Grid coarse(0.0, 1.0, 50);
    const Coupled c = coupled_drivers(coarse, 64, 3);
    auto lag_corr = [&](double eps) {
        const FastSlowSolution sol = solve_fast_slow(p.coeffs, eps, c.lift, c.w, p.x0, p.y0, 64, 0);
        const Eigen::VectorXd y = sol.y_fast.values.col(0);
        const Eigen::Index lag = 16;  // physical lag 0.005
        const Eigen::Index start = y.size() / 5;
        const Eigen::Index len = y.size() - start - lag;
        const Eigen::VectorXd a = y.segment(start, len).array() - y.segment(start, len).mean();
        const Eigen::VectorXd b = y.segment(start + lag, len).array() - y.segment(start + lag, len).mean();
        return a.dot(b) / std::sqrt(a.squaredNorm() * b.squaredNorm());
    };
    EXPECT_LT(lag_corr(0.02), lag_corr(0.04));
}

TEST(SolveFastSlow, DeterministicRelaxation) {
    CoefficientSet c = roughavg::testing::ou_system([](const Vec&, const Vec&) { return vec1(0.0); });
    c.g = [](const Vec&, const Vec& phi) { return Vec(-phi); };
    c.h = [](const Vec&, const Vec&) { return mat1(0.0); };
    const double eps = 0.05;
    const Grid coarse(0.0, 0.5, 50);
    const Coupled d = coupled_drivers(coarse, 512, 1);
    const FastSlowSolution sol = solve_fast_slow(c, eps, d.lift, d.w, vec1(0.0), vec1(1.0), 512);
    double worst = 0.0;
    for (std::size_t k = 0; k < sol.y_fast.n_points(); ++k)
        worst = std::max(worst, std::abs(sol.y_fast.values(static_cast<Eigen::Index>(k), 0) -
                                         std::exp(-sol.y_fast.grid.time(k) / eps)));
    EXPECT_LT(worst, 1e-3);
}

TEST(SolveFastSlow, RejectsCoarseSubsteps) {
    const Preset p = make_preset("averaging");
    const Grid coarse(0.0, 1.0, 16);
    const Coupled c = coupled_drivers(coarse, 8, 1);
    EXPECT_THROW(solve_fast_slow(p.coeffs, 0.01, c.lift, c.w, p.x0, p.y0, 8), ConfigError);
    EXPECT_THROW(solve_fast_slow(p.coeffs, 0.5, c.lift, c.w, p.x0, p.y0, 3), ConfigError);
    EXPECT_THROW(solve_fast_slow(p.coeffs, 1.5, c.lift, c.w, p.x0, p.y0, 8), DomainError);
}

TEST(SolveFastSlow, DeterministicGivenDrivers) {
    const Preset p = make_preset("remark13");
    const Grid coarse(0.0, 1.0, 32);
    const Coupled c = coupled_drivers(coarse, 32, 5);
    const auto a = solve_fast_slow(p.coeffs, 0.05, c.lift, c.w, p.x0, p.y0, 32);
    const auto b = solve_fast_slow(p.coeffs, 0.05, c.lift, c.w, p.x0, p.y0, 32);
    EXPECT_TRUE(a.x.values == b.x.values);
    EXPECT_TRUE(a.y_fast.values == b.y_fast.values);
}

TEST(SolveFastSlow, FastSecondMomentBoundedAcrossEps) {
    const Preset p = make_preset("remark13");
    const Grid coarse(0.0, 1.0, 32);
    for (double eps : {0.1, 0.03, 0.01}) {
        const std::size_t q = 32 * ((required_substep_factor(eps / 8.0, coarse.dt()) + 31) / 32);
        Eigen::VectorXd second = Eigen::VectorXd::Zero(33);
        for (std::uint64_t r = 0; r < 10; ++r) {
            const Coupled c = coupled_drivers(coarse, q, 900 + r);
            const auto sol = solve_fast_slow(p.coeffs, eps, c.lift, c.w, p.x0, p.y0, q);
            second += sol.y.values.col(0).array().square().matrix() / 10.0;
        }
        EXPECT_LT(second.maxCoeff(), 1.0) << "eps=" << eps;
    }
}

TEST(SolveFrozen, OuStationaryLaw) {
    const CoefficientSet c = roughavg::testing::ou_system([](const Vec&, const Vec& phi) { return phi; });
    const double xi = 8.0;
    std::vector<double> means, seconds;
    for (std::uint64_t r = 0; r < 1000; ++r) {
        const Path y = solve_frozen(vec1(xi), vec1(0.0), c, 10.0, 10000, r);
        const Eigen::VectorXd tail = y.values.col(0).tail(9001);
        means.push_back(tail.mean());
        seconds.push_back(tail.array().square().mean());
    }
    const double mean = moments(means).mean;
    const double var = moments(seconds).mean - mean * mean;
    EXPECT_NEAR(mean, xi / 8.0, 0.02 * xi / 8.0);
    EXPECT_NEAR(var, 1.0 / 16.0, 0.05 / 16.0);
}

TEST(SolveFrozen, SynchronousCouplingContracts) {
    const CoefficientSet c = roughavg::testing::ou_system([](const Vec&, const Vec& phi) { return phi; });
    const Path a = solve_frozen(vec1(1.0), vec1(2.0), c, 0.5, 500, 4);
    const Path b = solve_frozen(vec1(1.0), vec1(-1.0), c, 0.5, 500, 4);
    for (std::size_t k : {100u, 300u, 500u}) {
        const double gap = a.values(static_cast<Eigen::Index>(k), 0) - b.values(static_cast<Eigen::Index>(k), 0);
        const double euler = std::pow(1.0 - 8.0 * a.grid.dt(), 2.0 * static_cast<double>(k));
        EXPECT_NEAR(gap * gap / 9.0, euler, 1e-9 * euler);
        EXPECT_NEAR(gap * gap / 9.0, std::exp(-16.0 * a.grid.time(k)), 0.05 * std::exp(-16.0 * a.grid.time(k)));
    }
}

TEST(SolveFrozen, ItoFormMatchesRoughSolveUnderRefinement) {
    // pure fast dynamics with state-dependent noise: rough solve against the Stratonovich
    // W lift versus Euler-Maruyama with the corrected drift on the same W
    const CoefficientSet c = make_preset("remark13").coeffs;
    const Vec xi = vec1(0.5);
    const std::size_t finest = 1u << 14;
    const GaussianPath w = sample_bm(1, Grid(0.0, 1.0, finest), 77);
    RdeSystem fast;
    fast.drift = [&](const Vec& phi) { return c.eval_g(xi, phi); };
    fast.diffusion = MatrixField{[&](const Vec& phi) { return c.eval_h(xi, phi); },
                                 [&](const Vec& phi) { return c.eval_h_phi_jacobian(xi, phi); }};
    std::vector<double> dts, gaps;
    for (std::size_t n : {1u << 8, 1u << 10, 1u << 12}) {
        const Grid coarse(0.0, 1.0, n);
        const RoughLift lift = lift_geometric(w.path, coarse, finest / n, 1);
        const Path rough = solve_rde(fast, lift, vec1(0.3));
        Eigen::MatrixXd dw(n, 1);
        for (std::size_t k = 0; k < n; ++k) dw(static_cast<Eigen::Index>(k), 0) = lift.increment(k, k + 1)(0);
        const Path ito = solve_frozen(xi, vec1(0.3), c, 1.0, dw);
        dts.push_back(coarse.dt());
        gaps.push_back((rough.values - ito.values).cwiseAbs().maxCoeff());
    }
    EXPECT_GT(roughavg::testing::slope(dts, gaps), 0.0);
    EXPECT_LT(gaps.back(), gaps.front());
}
