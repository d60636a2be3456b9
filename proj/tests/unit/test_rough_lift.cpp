#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "roughavg/errors.hpp"
#include "roughavg/gaussian_paths.hpp"
#include "roughavg/rough_lift.hpp"
#include "test_support.hpp"

using namespace roughavg;

namespace {

struct Drivers {
    GaussianPath b;
    GaussianPath w;
};

Drivers drivers(double h, const Grid& coarse, std::size_t fine_factor, std::uint64_t seed, std::size_t d = 1,
                std::size_t dp = 1) {
    const Grid fine = coarse.refine(fine_factor);
    return {sample_fbm(h, fine, seed, d), sample_bm(dp, fine, seed + 1)};
}

// Keeps every `stride`-th point of a fine path.
GaussianPath subsample(const GaussianPath& p, std::size_t stride) {
    const Grid& g = p.grid();
    GaussianPath out = p;
    out.path = Path(Grid(g.t_start(), g.t_end(), g.n_steps() / stride), p.dim());
    for (std::size_t k = 0; k < out.path.n_points(); ++k)
        out.path.values.row(static_cast<Eigen::Index>(k)) = p.values().row(static_cast<Eigen::Index>(k * stride));
    return out;
}

} // namespace

TEST(LiftMixed, ShapeAndFirstLevel) {
    const Grid coarse(0.0, 1.0, 16);
    const auto dr = drivers(0.4, coarse, 8, 1, 2, 3);
    const RoughLift lift = lift_mixed(dr.b, dr.w, coarse, 8);
    EXPECT_EQ(lift.dim(), 5u);
    EXPECT_EQ(lift.block_dims().fbm, 2u);
    EXPECT_EQ(lift.block_dims().bm, 3u);
    EXPECT_EQ(lift.n_points(), 17u);
    EXPECT_EQ(lift.window(), 16u);
    for (std::size_t k = 0; k <= 16; ++k) {
        EXPECT_EQ(lift.first_level()(static_cast<Eigen::Index>(k), 0), dr.b.values()(static_cast<Eigen::Index>(8 * k), 0));
        EXPECT_EQ(lift.first_level()(static_cast<Eigen::Index>(k), 4), dr.w.values()(static_cast<Eigen::Index>(8 * k), 2));
    }
}

TEST(LiftMixed, RejectsMismatchedGrids) {
    const Grid coarse(0.0, 1.0, 16);
    const auto dr = drivers(0.4, coarse, 8, 1);
    EXPECT_THROW(lift_mixed(dr.b, dr.w, coarse, 4), ConfigError);
    EXPECT_THROW(lift_mixed(dr.w, dr.b, coarse, 8), ConfigError);
}

TEST(LiftMixed, ZeroFbmGivesZeroBlocks) {
    const Grid coarse(0.0, 1.0, 8);
    const Grid fine = coarse.refine(16);
    GaussianPath zero{Path(fine, 1), ProcessKind::deterministic, 0.5, 0, SamplingMethod::given};
    const GaussianPath w = sample_bm(1, fine, 5);
    const RoughLift lift = lift_mixed(zero, w, coarse, 16);
    const RoughLift pure = lift_geometric(w.path, coarse, 16);
    for (std::size_t i = 0; i < 8; ++i) {
        for (std::size_t j = i; j <= 8; ++j) {
            const auto z2 = lift.second_level(i, j);
            EXPECT_EQ(z2(0, 0), 0.0);
            EXPECT_EQ(z2(0, 1), 0.0);
            EXPECT_EQ(z2(1, 0), 0.0);
            EXPECT_NEAR(z2(1, 1), pure.second_level(i, j)(0, 0), 1e-13);
        }
    }
}

TEST(LiftGeometric, PolynomialIteratedIntegrals) {
    const Grid coarse(0.0, 1.0, 1);
    const Grid fine = coarse.refine(2048);
    Path z(fine, 2);
    for (std::size_t k = 0; k < fine.n_points(); ++k) {
        const double t = fine.time(k);
        z.values(static_cast<Eigen::Index>(k), 0) = t;
        z.values(static_cast<Eigen::Index>(k), 1) = t * t;
    }
    const RoughLift lift = lift_geometric(z, coarse, 2048);
    const auto z2 = lift.second_level(0, 1);
    EXPECT_NEAR(z2(0, 1), 2.0 / 3.0, 1e-6);
    EXPECT_NEAR(z2(1, 0), 1.0 / 3.0, 1e-6);
    EXPECT_NEAR(z2(0, 0), 0.5, 1e-14);
    EXPECT_NEAR(z2(1, 1), 0.5, 1e-14);
}

TEST(CheckChen, FreshLiftsAreExact) {
    const Grid coarse(0.0, 1.0, 32);
    for (double h : {0.35, 0.4, 0.5}) {
        const auto dr = drivers(h, coarse, 32, 7, 2, 2);
        const auto diag = check_chen(lift_mixed(dr.b, dr.w, coarse, 32), 1e-12);
        EXPECT_TRUE(diag.chen_passed);
        EXPECT_LE(diag.chen_residual_relative, 1e-12);
        EXPECT_GT(diag.triples_checked, 0u);
    }
}

TEST(CheckChen, DetectsPerturbation) {
    const Grid coarse(0.0, 1.0, 16);
    const auto dr = drivers(0.4, coarse, 16, 3);
    const RoughLift lift = lift_mixed(dr.b, dr.w, coarse, 16);
    Eigen::MatrixXd z2 = lift.second_level(3, 9);
    z2(0, 1) += 1e-3;
    const auto diag = check_chen(lift.with_second_level(3, 9, z2), 1e-10);
    EXPECT_FALSE(diag.chen_passed);
    EXPECT_GE(diag.chen_residual_max, 1e-3 * 0.999);
}

TEST(CheckChen, StableUnderRefinement) {
    const Grid coarse(0.0, 1.0, 16);
    const auto fine = drivers(0.4, coarse, 128, 4);
    const auto a = check_chen(lift_mixed(subsample(fine.b, 4), subsample(fine.w, 4), coarse, 32));
    const auto b = check_chen(lift_mixed(fine.b, fine.w, coarse, 128));
    EXPECT_LE(a.chen_residual_relative, 1e-12);
    EXPECT_LE(b.chen_residual_relative, 1e-12);
}

TEST(CheckGeometric, StratonovichAndCrossBlocksAreSymmetric) {
    const Grid coarse(0.0, 1.0, 32);
    const auto dr = drivers(0.35, coarse, 32, 9, 2, 2);
    const auto diag = check_geometric(lift_mixed(dr.b, dr.w, coarse, 32), 1e-12);
    EXPECT_TRUE(diag.symmetry_passed);
    EXPECT_LE(diag.symmetry_residual_relative, 1e-12);
}

TEST(CheckGeometric, ItoBlockIsDetected) {
    const Grid coarse(0.0, 1.0, 16);
    const auto dr = drivers(0.4, coarse, 256, 10);
    LiftOptions ito;
    ito.bm_scheme = BmScheme::ito;
    const RoughLift strat = lift_mixed(dr.b, dr.w, coarse, 256);
    const RoughLift itol = lift_mixed(dr.b, dr.w, coarse, 256, ito);
    EXPECT_FALSE(check_geometric(itol, 1e-10).symmetry_passed);
    // Stratonovich minus Ito is half the fine quadratic variation, close to (t - s)/2
    const double gap = strat.second_level(0, 16)(1, 1) - itol.second_level(0, 16)(1, 1);
    EXPECT_NEAR(gap, 0.5, 4 * 0.5 * std::sqrt(2.0 / (16.0 * 256.0)));
    EXPECT_NEAR(strat.second_level(0, 16)(0, 1), itol.second_level(0, 16)(0, 1), 1e-15);
}

TEST(LiftMixed, DiagonalLevyAreaMean) {
    const Grid coarse(0.0, 1.0, 4);
    const double h = 0.4;
    const std::size_t reps = 4000;
    std::vector<double> vals(reps);
    for (std::size_t r = 0; r < reps; ++r) {
        const auto dr = drivers(h, coarse, 16, 100 + r);
        vals[r] = lift_mixed(dr.b, dr.w, coarse, 16).second_level(1, 3)(0, 0);
    }
    const auto m = roughavg::testing::moments(vals);
    EXPECT_NEAR(m.mean, 0.5 * std::pow(0.5, 2 * h), 3 * m.std_error);
}

TEST(LiftMixed, CrossAreaConvergesUnderRefinement) {
    const Grid coarse(0.0, 1.0, 4);
    double d8 = 0.0, d32 = 0.0;
    for (std::uint64_t r = 0; r < 40; ++r) {
        const auto dr = drivers(0.4, coarse, 128, 500 + r);
        const double ref = lift_mixed(dr.b, dr.w, coarse, 128).second_level(0, 4)(0, 1);
        const double a8 = lift_mixed(subsample(dr.b, 16), subsample(dr.w, 16), coarse, 8).second_level(0, 4)(0, 1);
        const double a32 = lift_mixed(subsample(dr.b, 4), subsample(dr.w, 4), coarse, 32).second_level(0, 4)(0, 1);
        d8 += (a8 - ref) * (a8 - ref);
        d32 += (a32 - ref) * (a32 - ref);
    }
    EXPECT_LT(d32, d8);
}

TEST(RoughLift, BlockView) {
    const Grid coarse(0.0, 1.0, 8);
    const auto dr = drivers(0.45, coarse, 8, 2, 2, 1);
    const RoughLift lift = lift_mixed(dr.b, dr.w, coarse, 8);
    const RoughLift bb = lift.block(0, 2);
    EXPECT_EQ(bb.dim(), 2u);
    EXPECT_EQ(bb.block_dims().fbm, 2u);
    EXPECT_EQ(bb.second_level(2, 5)(1, 0), lift.second_level(2, 5)(1, 0));
    EXPECT_THROW(lift.block(2, 3), ConfigError);
}

TEST(RoughLift, WindowLimitsStoredPairs) {
    const Grid coarse(0.0, 1.0, 16);
    const auto dr = drivers(0.4, coarse, 4, 2);
    LiftOptions o;
    o.window = 1;
    const RoughLift lift = lift_mixed(dr.b, dr.w, coarse, 4, o);
    EXPECT_TRUE(lift.has_pair(3, 4));
    EXPECT_FALSE(lift.has_pair(3, 5));
    EXPECT_THROW(lift.second_level(3, 5), ConfigError);
}
