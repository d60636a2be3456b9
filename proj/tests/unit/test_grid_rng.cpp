#include <gtest/gtest.h>

#include <set>
#include <vector>

#include "roughavg/errors.hpp"
#include "roughavg/grid.hpp"
#include "roughavg/parallel.hpp"
#include "roughavg/rng.hpp"

using namespace roughavg;

TEST(Grid, UniformTimes) {
    const Grid g(0.0, 2.0, 8);
    EXPECT_EQ(g.n_points(), 9u);
    EXPECT_DOUBLE_EQ(g.dt(), 0.25);
    EXPECT_DOUBLE_EQ(g.time(0), 0.0);
    EXPECT_DOUBLE_EQ(g.time(8), 2.0);
    EXPECT_DOUBLE_EQ(g.time(3), 0.75);
}

TEST(Grid, RejectsInvalidBounds) {
    EXPECT_THROW(Grid(-0.5, 1.0, 4), DomainError);
    EXPECT_THROW(Grid(1.0, 1.0, 4), DomainError);
    EXPECT_THROW(Grid(0.0, 1.0, 0), DomainError);
}

TEST(Grid, RefineNests) {
    const Grid coarse(0.0, 1.0, 16);
    const Grid fine = coarse.refine(8);
    EXPECT_EQ(fine.n_steps(), 128u);
    EXPECT_EQ(coarse.nesting_factor(fine), 8u);
    EXPECT_EQ(coarse.nesting_factor(Grid(0.0, 1.0, 20)), 0u);
    EXPECT_EQ(coarse.nesting_factor(Grid(0.0, 2.0, 32)), 0u);
}

TEST(Grid, IndexOf) {
    const Grid g(0.0, 1.0, 10);
    EXPECT_EQ(g.index_of(0.3), 3u);
    EXPECT_EQ(g.index_of(1.0), 10u);
    EXPECT_THROW(g.index_of(0.35), ConfigError);
}

TEST(Rng, DerivedSeedsAreDeterministicAndDistinct) {
    EXPECT_EQ(derive_seed(7, {1, 2}), derive_seed(7, {1, 2}));
    EXPECT_NE(derive_seed(7, {1, 2}), derive_seed(7, {2, 1}));
    EXPECT_NE(derive_seed(7, {1}), derive_seed(8, {1}));
    std::set<std::uint64_t> seen;
    for (std::uint64_t e = 0; e < 8; ++e)
        for (std::uint64_t r = 0; r < 256; ++r) seen.insert(derive_seed(42, {tag(StreamTag::replica), e, r}));
    EXPECT_EQ(seen.size(), 8u * 256u);
}

TEST(Rng, EnginesReproduce) {
    Engine a = make_engine(3, {tag(StreamTag::fbm)});
    Engine b = make_engine(3, {tag(StreamTag::fbm)});
    Engine c = make_engine(3, {tag(StreamTag::bm)});
    for (int i = 0; i < 16; ++i) {
        const auto x = a();
        EXPECT_EQ(x, b());
        EXPECT_NE(x, c());
    }
}

TEST(Parallel, TreeSumIsOrderIndependentOfWorkers) {
    std::vector<double> xs(1000);
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = 1.0 / static_cast<double>(i + 1);
    std::vector<double> out1(xs.size()), out8(xs.size());
    parallel_for(xs.size(), [&](std::size_t i) { out1[i] = xs[i] * xs[i]; }, 1);
    parallel_for(xs.size(), [&](std::size_t i) { out8[i] = xs[i] * xs[i]; }, 8);
    EXPECT_EQ(tree_sum(std::span<const double>(out1)), tree_sum(std::span<const double>(out8)));
}

TEST(Parallel, RethrowsTaskErrors) {
    EXPECT_THROW(parallel_for(
                     64, [](std::size_t i) { if (i == 17) throw DomainError("boom"); }, 4),
                 DomainError);
}
