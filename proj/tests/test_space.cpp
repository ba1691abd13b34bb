#include <gtest/gtest.h>

#include <random>

#include "capmeasure/space.hpp"
#include "capmeasure/space_io.hpp"
#include "support.hpp"

using namespace capmeasure;

namespace {

MetricMeasureSpace integer_line(std::size_t n) {
    std::vector<std::vector<double>> coords;
    for (std::size_t i = 0; i < n; ++i) coords.push_back({static_cast<double>(i)});
    return MetricMeasureSpace::from_coords(coords);
}

template <class F>
std::string error_text(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(Space, TwoPoints) {
    auto s = MetricMeasureSpace::from_matrix({{0, 1}, {1, 0}});
    EXPECT_EQ(s.size(), 2u);
    EXPECT_DOUBLE_EQ(s.total_measure(), 2.0);
}

TEST(Space, RejectsAsymmetricMatrix) {
    const auto msg = error_text([] { MetricMeasureSpace::from_matrix({{0, 1}, {2, 0}}); });
    EXPECT_NE(msg.find("asymmetric"), std::string::npos) << msg;
    EXPECT_NE(msg.find("0"), std::string::npos);
}

TEST(Space, RejectsBadWeightsAndZeroDistance) {
    EXPECT_NE(error_text([] { MetricMeasureSpace::from_matrix({{0, 1}, {1, 0}}, {1.0, 0.0}); }).find("weight"),
              std::string::npos);
    EXPECT_NE(error_text([] { MetricMeasureSpace::from_matrix({{0, 0}, {0, 0}}); }).find("zero distance"),
              std::string::npos);
}

TEST(Space, RejectsTriangleViolationWithIndices) {
    const auto msg = error_text([] { MetricMeasureSpace::from_matrix({{0, 1, 5}, {1, 0, 1}, {5, 1, 0}}); });
    EXPECT_NE(msg.find("triangle"), std::string::npos) << msg;
    EXPECT_NE(msg.find("2"), std::string::npos) << msg;
}

TEST(Space, IntegerLineWindow) {
    auto s = integer_line(5);
    EXPECT_DOUBLE_EQ(s.distance(0, 4), 4.0);
    // distances 1..4 fall in shells 1 (d=1), 2 (d=2,3), 3 (d=4)
    EXPECT_EQ(s.window().k_min, 1);
    EXPECT_EQ(s.window().k_max, 3);
}

TEST(Space, BallsAreOpen) {
    auto s = integer_line(5);
    EXPECT_EQ(s.ball(2, 1.5), (PointSet{1, 2, 3}));
    EXPECT_TRUE(s.ball(2, 0.0).empty());
    EXPECT_EQ(s.ball(2, 100.0).size(), 5u);
    EXPECT_EQ(s.ball(2, 1.0), (PointSet{2}));
}

TEST(Space, Annuli) {
    auto s = integer_line(5);
    EXPECT_EQ(s.annulus(0, 1), (PointSet{1}));
    EXPECT_EQ(s.annulus(0, 2), (PointSet{2, 3}));
    EXPECT_TRUE(s.annulus(0, 5).empty());
}

TEST(Space, DoublingConstant) {
    EXPECT_DOUBLE_EQ(doubling_constant(MetricMeasureSpace::from_matrix({{0}})), 1.0);
    EXPECT_DOUBLE_EQ(doubling_constant(MetricMeasureSpace::from_matrix({{0, 1}, {1, 0}})), 2.0);
    const double c = doubling_constant(grid1d(16));
    EXPECT_GE(c, 2.0);
    EXPECT_LE(c, 3.0);
}

TEST(Space, DoublingMatchesDirectEnumeration) {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 20; ++t) {
        auto s = gen::random_space(rng, 3 + rng() % 12);
        double direct = 1.0;
        for (std::size_t x = 0; x < s.size(); ++x)
            for (double r : s.candidate_radii()) direct = std::max(direct, s.ball_measure(x, 2 * r) / s.ball_measure(x, r));
        EXPECT_NEAR(doubling_constant(s), direct, 1e-12 * direct);
        EXPECT_GT(doubling_constant(s), 1.0);
    }
}

TEST(Generators, Grid1d) {
    auto s = grid1d(3);
    ASSERT_EQ(s.size(), 3u);
    EXPECT_DOUBLE_EQ(s.coords()[1][0], 0.5);
    EXPECT_DOUBLE_EQ(s.coords()[2][0], 1.0);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(s.weight(i), 1.0 / 3.0);
    EXPECT_NEAR(grid1d(64).total_measure(), 1.0, 1e-12);
}

TEST(Generators, Grid2dDistancesAreExact) {
    auto s = grid2d(4);
    EXPECT_EQ(s.size(), 16u);
    EXPECT_EQ(s.distance(0, 5), s.distance(1, 4));
    EXPECT_DOUBLE_EQ(s.distance(0, 15), std::sqrt(2.0));
    EXPECT_NEAR(s.total_measure(), 1.0, 1e-12);
}

TEST(Generators, Cantor) {
    auto c1 = cantor(1);
    EXPECT_EQ(c1.space.size(), 3u);
    EXPECT_EQ(*c1.distinguished, (PointSet{0, 2}));
    auto c2 = cantor(2);
    EXPECT_EQ(*c2.distinguished, (PointSet{0, 2, 6, 8}));
    // ternary-digit oracle on a wider ambient grid
    auto c3 = cantor(3, 4);
    PointSet oracle;
    for (std::size_t i = 0; i < 81; ++i) {
        const std::size_t d3 = i / 27, d2 = (i / 9) % 3, d1 = (i / 3) % 3;
        if (d3 != 1 && d2 != 1 && d1 != 1) oracle.push_back(i);
    }
    EXPECT_EQ(*c3.distinguished, oracle);
    EXPECT_EQ(cantor(4).distinguished->size(), 16u);
}

TEST(Generators, SizeLimits) {
    EXPECT_THROW(grid1d(5000), Error);
    EXPECT_THROW(grid2d(65), Error);
    EXPECT_THROW(cantor(8), Error);  // 3^8 points exceed the generator limit
    EXPECT_THROW(cantor(9), Error);
    EXPECT_NO_THROW(cantor(7));
}

TEST(SpaceProperties, BallsNestAndAnnuliPartition) {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 30; ++t) {
        auto s = gen::random_space(rng, 2 + rng() % 20);
        const auto radii = s.candidate_radii();
        for (std::size_t x = 0; x < s.size(); ++x) {
            for (std::size_t i = 0; i + 1 < radii.size(); ++i) EXPECT_TRUE(is_subset(s.ball(x, radii[i]), s.ball(x, radii[i + 1])));
            std::vector<int> hits(s.size(), 0);
            for (int k = s.window().k_min; k <= s.window().k_max; ++k)
                for (std::size_t y : s.annulus(x, k)) ++hits[y];
            for (std::size_t y = 0; y < s.size(); ++y) EXPECT_EQ(hits[y], y == x ? 0 : 1);
        }
    }
}

TEST(SpaceIo, RoundTripIsBitExact) {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 20; ++t) {
        auto s = t % 2 ? gen::random_space(rng, 1 + rng() % 10) : grid2d(3);
        auto back = space_from_string(emit(s));
        ASSERT_EQ(back.size(), s.size());
        for (std::size_t i = 0; i < s.size(); ++i) {
            EXPECT_EQ(back.weight(i), s.weight(i));
            for (std::size_t j = 0; j < s.size(); ++j) EXPECT_EQ(back.distance(i, j), s.distance(i, j));
        }
        EXPECT_EQ(emit(back), emit(s));
    }
}

TEST(SpaceIo, DescriptorErrorsNameTheField) {
    EXPECT_NE(error_text([] { space_from_string(R"({"metric":"matrix"})"); }).find("points"), std::string::npos);
    EXPECT_NE(error_text([] { space_from_string(R"({"points":2,"metric":"matrix"})"); }).find("matrix"), std::string::npos);
    auto s = space_from_string(R"({"points":2,"metric":"euclidean","coords":[[0],[3]]})");
    EXPECT_DOUBLE_EQ(s.distance(0, 1), 3.0);
    EXPECT_DOUBLE_EQ(s.weight(1), 1.0);
}
