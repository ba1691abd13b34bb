#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "capmeasure/gradient.hpp"
#include "support.hpp"

using namespace capmeasure;

namespace {

MetricMeasureSpace two_points() { return MetricMeasureSpace::from_matrix({{0, 1}, {1, 0}}); }

std::vector<double> tent(const MetricMeasureSpace& space, double center, double slope) {
    std::vector<double> phi(space.size());
    for (std::size_t i = 0; i < space.size(); ++i)
        phi[i] = std::max(0.0, 1.0 - slope * std::abs(space.coords()[i][0] - center));
    return phi;
}

PointSet support_of(std::span<const double> phi) {
    PointSet out;
    for (std::size_t i = 0; i < phi.size(); ++i)
        if (phi[i] != 0.0) out.push_back(i);
    return out;
}

std::vector<double> product(std::span<const double> u, std::span<const double> phi) {
    std::vector<double> out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i] * phi[i];
    return out;
}

GradientSequence sum(const GradientSequence& a, const GradientSequence& b) {
    GradientSequence out = pointwise_max(a, b);
    for (int k = out.window().k_min; k <= out.window().k_max; ++k)
        for (std::size_t x = 0; x < out.points(); ++x) out.ref(k, x) = a.at(k, x) + b.at(k, x);
    return out;
}

double uniform(std::mt19937_64& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

/// Random phi with a random support, and a Lipschitz bound at or above its constant.
std::pair<std::vector<double>, double> random_phi(std::mt19937_64& rng, const MetricMeasureSpace& s) {
    auto phi = gen::random_field(rng, s.size(), -2, 2);
    for (double& v : phi)
        if (rng() % 3 == 0) v = 0.0;
    return {phi, lipschitz_constant(s, phi) * uniform(rng, 1.0, 1.5)};
}

}  // namespace

TEST(Canonical, WorkedValues) {
    auto two = two_points();
    auto g = canonical_gradient(two, std::vector<double>{0, 1}, 0.5);
    for (int k = g.window().k_min; k <= g.window().k_max; ++k)
        for (std::size_t x = 0; x < 2; ++x) EXPECT_EQ(g.at(k, x), k == 1 ? 0.5 : 0.0);

    auto g3 = canonical_gradient(grid1d(3), std::vector<double>{0, 1, 0}, 0.5);
    const double half_step = 0.5 / std::sqrt(0.5);
    EXPECT_DOUBLE_EQ(g3.at(0, 0), half_step);
    EXPECT_DOUBLE_EQ(g3.at(0, 1), half_step);
    EXPECT_DOUBLE_EQ(g3.at(0, 2), half_step);
    EXPECT_EQ(g3.at(1, 0), 0.0);
    EXPECT_EQ(g3.at(1, 2), 0.0);
    EXPECT_TRUE(is_valid_gradient(grid1d(3), std::vector<double>{0, 1, 0}, 0.5, g3).valid);

    auto zero = canonical_gradient(grid1d(5), std::vector<double>(5, 3.0), 0.5);
    for (double v : zero.values()) EXPECT_EQ(v, 0.0);
}

TEST(Validity, ZeroAndUndersizedSequencesFail) {
    auto two = two_points();
    const std::vector<double> u{0, 1};
    auto zero = GradientSequence(two.window(), 2);
    auto check = is_valid_gradient(two, u, 0.5, zero);
    EXPECT_FALSE(check.valid);
    EXPECT_EQ(check.x, 0u);
    EXPECT_EQ(check.y, 1u);
    EXPECT_EQ(check.k, 1);
    EXPECT_DOUBLE_EQ(check.violation, 1.0);

    auto g = canonical_gradient(two, u, 0.5);
    EXPECT_FALSE(is_valid_gradient(two, u, 0.5, g.scaled(0.49)).valid);
    EXPECT_TRUE(is_valid_gradient(two, u, 0.5, g).valid);
}

TEST(ValidityProperties, CanonicalMaxAndScaling) {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 1000; ++t) {
        auto s = gen::random_space(rng, 2 + rng() % 14);
        const double sv = uniform(rng, 0.05, 0.95);
        auto u = gen::random_field(rng, s.size(), -3, 3);
        auto g = canonical_gradient(s, u, sv);
        ASSERT_TRUE(is_valid_gradient(s, u, sv, g).valid);
        auto other = canonical_gradient(s, gen::random_field(rng, s.size(), -3, 3), sv);
        EXPECT_TRUE(is_valid_gradient(s, u, sv, pointwise_max(g, other)).valid);
        EXPECT_TRUE(is_valid_gradient(s, u, sv, g.scaled(uniform(rng, 1.0, 4.0))).valid);
    }
}

TEST(Product, ConstantAndZeroCases) {
    auto s = grid1d(9);
    const double sv = 0.4;
    std::mt19937_64 rng(3);
    auto u = gen::random_field(rng, 9, -1, 1);
    auto g = canonical_gradient(s, u, sv);

    auto ones = product_gradient(s, u, g, std::vector<double>(9, 1.0), 0.0, sv);
    for (int k = g.window().k_min; k <= g.window().k_max; ++k) {
        for (std::size_t x = 0; x < 9; ++x) {
            EXPECT_EQ(ones.rho.at(k, x), g.at(k, x));
            EXPECT_DOUBLE_EQ(ones.h.at(k, x), g.at(k, x) + std::exp2(2.0 - sv * k) * std::abs(u[x]));
        }
    }

    const auto phi = tent(s, 0.5, 3.0);
    const std::vector<double> zero(9, 0.0);
    auto zg = product_gradient(s, zero, g, phi, lipschitz_constant(s, phi), sv);
    for (int k = g.window().k_min; k <= g.window().k_max; ++k) {
        for (std::size_t x = 0; x < 9; ++x) {
            const double expected = phi[x] != 0.0 ? g.at(k, x) : 0.0;
            EXPECT_EQ(zg.rho.at(k, x), expected);
            EXPECT_EQ(zg.h.at(k, x), expected);
        }
    }
}

TEST(Product, TentOnGridIsValid) {
    auto s = grid1d(9);
    std::mt19937_64 rng(5);
    const auto phi = tent(s, 0.5, 3.0);
    for (int t = 0; t < 20; ++t) {
        auto u = gen::random_field(rng, 9, -2, 2);
        auto g = canonical_gradient(s, u, 0.5);
        auto out = product_gradient(s, u, g, phi, 3.0, 0.5);
        const auto up = product(u, phi);
        EXPECT_TRUE(is_valid_gradient(s, up, 0.5, out.h).valid);
        EXPECT_TRUE(is_valid_gradient(s, up, 0.5, out.rho).valid);
    }
}

TEST(Product, RejectsSmallLipschitzBound) {
    auto s = grid1d(9);
    const auto phi = tent(s, 0.5, 3.0);
    const std::vector<double> u(9, 1.0);
    EXPECT_THROW(product_gradient(s, u, canonical_gradient(s, u, 0.5), phi, 2.9, 0.5), Error);
}

TEST(ProductProperties, RandomInstancesValid) {
    std::mt19937_64 rng(22);
    for (int t = 0; t < 200; ++t) {
        auto s = gen::random_space(rng, 2 + rng() % 14);
        const double sv = uniform(rng, 0.05, 0.95);
        auto u = gen::random_field(rng, s.size(), -3, 3);
        auto g = canonical_gradient(s, u, sv).scaled(uniform(rng, 1.0, 2.0));
        auto [phi, lip] = random_phi(rng, s);
        auto out = product_gradient(s, u, g, phi, lip, sv);
        const auto up = product(u, phi);
        EXPECT_TRUE(is_valid_gradient(s, up, sv, out.h).valid) << t;
        EXPECT_TRUE(is_valid_gradient(s, up, sv, out.rho).valid) << t;
    }
}

TEST(Lipschitz, WorkedValues) {
    auto two = two_points();
    auto zero = lipschitz_gradient(two, std::vector<double>{0, 0}, 1.0, 0.5, {});
    for (double v : zero.values()) EXPECT_EQ(v, 0.0);

    const std::vector<double> phi{1, 0};
    auto g = lipschitz_gradient(two, phi, 1.0, 0.5, {0});
    EXPECT_DOUBLE_EQ(g.at(1, 0), std::sqrt(2.0) / 2.0);
    EXPECT_DOUBLE_EQ(g.at(1, 1), std::sqrt(2.0) / 2.0);
    EXPECT_TRUE(is_valid_gradient(two, phi, 0.5, g).valid);

    auto s27 = grid1d(27);
    const auto t = tent(s27, 0.5, 4.0);
    EXPECT_TRUE(is_valid_gradient(s27, t, 0.5, lipschitz_gradient(s27, t, 4.0, 0.5, support_of(t))).valid);
}

TEST(Lipschitz, RejectsSupportMismatch) {
    auto two = two_points();
    EXPECT_THROW(lipschitz_gradient(two, std::vector<double>{1, 0}, 1.0, 0.5, {1}), Error);
    EXPECT_THROW(lipschitz_gradient(two, std::vector<double>{1, 0}, 0.5, 0.5, {0}), Error);
}

TEST(LipschitzProperties, RandomInstancesValid) {
    std::mt19937_64 rng(33);
    for (int t = 0; t < 200; ++t) {
        auto s = gen::random_space(rng, 2 + rng() % 14);
        const double sv = uniform(rng, 0.05, 0.95);
        auto [phi, lip] = random_phi(rng, s);
        PointSet f = support_of(phi);
        f = set_union(f, gen::random_subset(rng, s.size(), 0.2, false));
        EXPECT_TRUE(is_valid_gradient(s, phi, sv, lipschitz_gradient(s, phi, lip, sv, f)).valid) << t;
    }
}

TEST(Transform, ZeroAndSingleScale) {
    GradientSequence zero({-3, 1}, 4);
    const auto transformed = poincare_transform(zero, 0.25, 2.0);
    for (double v : transformed.values()) EXPECT_EQ(v, 0.0);

    for (double p : {0.5, 1.0, 2.0}) {
        const double sp = 0.3;
        const int j0 = -1;
        GradientSequence h({-4, 1}, 3);
        for (std::size_t x = 0; x < 3; ++x) h.ref(j0, x) = 1.0;
        auto g = poincare_transform(h, sp, p);
        EXPECT_EQ(g.window().k_min, -6);
        EXPECT_EQ(g.window().k_max, 1);
        for (int k = -6; k <= 1; ++k) {
            const double expected = k >= j0 - 2 ? std::exp2((j0 - k) * sp * std::min(1.0, p) / p) : 0.0;
            for (std::size_t x = 0; x < 3; ++x) EXPECT_NEAR(g.at(k, x), expected, 1e-14 * std::max(1.0, expected));
        }
    }
}

TEST(TransformProperties, SupportStaysWithinCoarserScales) {
    std::mt19937_64 rng(44);
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 1 + rng() % 6;
        const int lo = -static_cast<int>(rng() % 5);
        GradientSequence h({lo, lo + static_cast<int>(rng() % 5)}, n);
        for (int k = h.window().k_min; k <= h.window().k_max; ++k)
            for (std::size_t x = 0; x < n; ++x) h.ref(k, x) = rng() % 3 == 0 ? uniform(rng, 0, 2) : 0.0;
        auto g = poincare_transform(h, uniform(rng, 0.05, 0.5), uniform(rng, 0.3, 3.0));
        for (int k = g.window().k_min; k <= g.window().k_max; ++k) {
            for (std::size_t x = 0; x < n; ++x) {
                bool any = false;
                for (int j = h.window().k_min; j <= k + 2; ++j) any = any || h.at(j, x) != 0.0;
                if (!any) EXPECT_EQ(g.at(k, x), 0.0);
                else EXPECT_GT(g.at(k, x), 0.0);
            }
        }
    }
}

// With q = p, summing the geometric weights over k bounds the ratio by
// (2^{2 s'p'} / (1 - 2^{-s'p'}))^{1/p}.
TEST(TransformProperties, NormComparisonWithinGeometricBound) {
    std::mt19937_64 rng(55);
    for (int t = 0; t < 100; ++t) {
        auto s = gen::random_space(rng, 2 + rng() % 10);
        const double sp = uniform(rng, 0.05, 0.45);
        const double p = uniform(rng, 0.4, 3.0);
        auto h = canonical_gradient(s, gen::random_field(rng, s.size(), -1, 1), 0.5);
        auto g = poincare_transform(h, sp, p);
        const double pp = std::min(1.0, p);
        const double bound = std::pow(std::exp2(2 * sp * pp) / (1.0 - std::exp2(-sp * pp)), 1.0 / p);
        const double hn = mixed_norm(s, h, p, p);
        if (hn == 0.0) continue;
        EXPECT_LE(mixed_norm(s, g, p, p), bound * hn * (1 + 1e-12));
    }
}

TEST(Norms, WorkedValues) {
    auto one = MetricMeasureSpace::from_matrix({{0, 1}, {1, 0}});
    GradientSequence g({0, 1}, 2);
    g.ref(0, 0) = 3.0;
    g.ref(1, 0) = 4.0;
    EXPECT_DOUBLE_EQ(mixed_norm(one, g, 1.0, kInfinity, {0}), 4.0);
    EXPECT_DOUBLE_EQ(mixed_norm(one, g, 2.0, 2.0, {0}), 5.0);

    GradientSequence single({0, 1}, 2);
    single.ref(1, 0) = 2.0;
    single.ref(1, 1) = 3.0;
    EXPECT_DOUBLE_EQ(mixed_norm(one, single, 3.0, 0.7), lp_norm(one, std::vector<double>{2, 3}, 3.0));

    auto s = grid1d(5);
    EXPECT_DOUBLE_EQ(tl_norm(s, std::vector<double>(5, -2.0), GradientSequence(s.window(), 5), 2.0, 2.0), 2.0);
    EXPECT_EQ(tl_norm(s, std::vector<double>(5, 0.0), GradientSequence(s.window(), 5), 2.0, 2.0), 0.0);

    auto two = two_points();
    const std::vector<double> u{0, 1};
    EXPECT_DOUBLE_EQ(tl_norm(two, u, canonical_gradient(two, u, 0.5), 1.0, 1.0), 1.0 + (0.5 + 0.5));
}

TEST(NormProperties, HomogeneityAndTriangle) {
    std::mt19937_64 rng(66);
    for (int t = 0; t < 300; ++t) {
        auto s = gen::random_space(rng, 2 + rng() % 10);
        const double sv = uniform(rng, 0.1, 0.9);
        const double qs[] = {0.5, 1.0, 2.0, kInfinity};
        const double p = uniform(rng, 0.3, 3.0);
        const double q = qs[rng() % 4];
        auto u = gen::random_field(rng, s.size(), -2, 2);
        auto v = gen::random_field(rng, s.size(), -2, 2);
        auto g = canonical_gradient(s, u, sv);
        auto h = canonical_gradient(s, v, sv);

        const double lambda = uniform(rng, 0.1, 10.0);
        const double base = mixed_norm(s, g, p, q);
        EXPECT_NEAR(mixed_norm(s, g.scaled(lambda), p, q), lambda * base, 1e-12 * lambda * base);

        std::vector<double> w(s.size());
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = u[i] + v[i];
        const auto gh = sum(g, h);
        ASSERT_TRUE(is_valid_gradient(s, w, sv, gh).valid);
        if (p >= 1.0 && q >= 1.0) {
            EXPECT_LE(tl_norm(s, w, gh, p, q), (tl_norm(s, u, g, p, q) + tl_norm(s, v, h, p, q)) * (1 + 1e-12));
        } else if (p < 1.0 && q >= 1.0) {
            EXPECT_LE(std::pow(tl_norm(s, w, gh, p, q), p),
                      (std::pow(tl_norm(s, u, g, p, q), p) + std::pow(tl_norm(s, v, h, p, q), p)) * (1 + 1e-12));
        }
    }
}

TEST(MedianDeviation, MatchesDenseScan) {
    std::mt19937_64 rng(77);
    for (int t = 0; t < 200; ++t) {
        auto s = gen::random_space(rng, 2 + rng() % 8);
        auto u = gen::random_int_field(rng, s.size(), -3, 3);
        const auto all = gen::all_of(s.size());
        const double gamma = uniform(rng, 0.1, 0.5);
        const double exact = min_median_deviation(s, u, all, gamma);
        double scan = kInfinity;
        for (int i = -1200; i <= 1200; ++i) scan = std::min(scan, gamma_median_abs_dev(s, u, all, gamma, i / 400.0));
        EXPECT_NEAR(exact, scan, 1e-12);
    }
    auto two = two_points();
    EXPECT_DOUBLE_EQ(min_median_deviation(two, std::vector<double>{0, 1}, {0, 1}, 0.5), 0.5);
}

TEST(PoincareCheck, WorkedCases) {
    auto s = grid1d(16);
    const std::vector<double> flat(16, 2.0);
    auto zero = poincare_check(s, flat, poincare_transform(canonical_gradient(s, flat, 0.5), 0.25, 2.0), 0.5, 0.5, 2.0);
    EXPECT_EQ(zero.max_ratio, 0.0);

    std::vector<double> step(16, 0.0);
    for (std::size_t i = 8; i < 16; ++i) step[i] = 1.0;
    auto g = poincare_transform(canonical_gradient(s, step, 0.5), 0.25, 2.0);
    auto table = poincare_check(s, step, g, 0.5, 0.5, 2.0);
    EXPECT_TRUE(std::isfinite(table.max_ratio));
    EXPECT_GT(table.max_ratio, 0.0);

    std::vector<double> step10(step);
    for (double& v : step10) v *= 10.0;
    auto table10 = poincare_check(s, step10, g.scaled(10.0), 0.5, 0.5, 2.0);
    ASSERT_EQ(table.rows.size(), table10.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) EXPECT_NEAR(table.rows[i].ratio, table10.rows[i].ratio, 1e-12);
}
