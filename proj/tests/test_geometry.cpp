#include <catch_amalgamated.hpp>

#include <random>

#include <grushin/geometry.hpp>

using namespace grushin;
using Catch::Approx;

namespace
{

point pt(std::initializer_list<double> a, std::initializer_list<double> b) { return {real_vec(a), real_vec(b)}; }

point random_point(int d1, int d2, std::mt19937_64& rng, double half = 10)
{
    std::uniform_real_distribution<double> u(-half, half);
    point p{real_vec(d1), real_vec(d2)};
    for (int j = 0; j < d1; ++j) p.x1[j] = u(rng);
    for (int j = 0; j < d2; ++j) p.x2[j] = u(rng);
    return p;
}

} // namespace

TEST_CASE("dilations")
{
    const point x = pt({1}, {1});
    CHECK(dilate(x, 1) == x);
    CHECK(dilate(x, 2) == pt({2}, {4}));
    std::mt19937_64 rng(7);
    for (int i = 0; i < 100; ++i) {
        const point p = random_point(2, 2, rng);
        const point q = dilate(dilate(p, 1.7), 1 / 1.7);
        for (int j = 0; j < 2; ++j) {
            CHECK(std::abs(q.x1[j] - p.x1[j]) <= 1e-15 * std::abs(p.x1[j]) + 1e-15);
            CHECK(std::abs(q.x2[j] - p.x2[j]) <= 2e-15 * std::abs(p.x2[j]) + 1e-15);
        }
    }
    CHECK_THROWS(dilate(x, 0));
}

TEST_CASE("distance surrogate")
{
    CHECK(dist_surrogate(pt({0.3}, {2}), pt({0.3}, {2})) == 0);
    CHECK(dist_surrogate(pt({0}, {0}), pt({1}, {1})) == 2);
    CHECK(dist_surrogate(pt({1}, {0}), pt({1}, {4})) == 2);
    CHECK(std::isinf(partial_distance_2(pt({0}, {0}), pt({0}, {1}))));
    CHECK(dist_surrogate(pt({0}, {0}), pt({0}, {4})) == 2);

    std::mt19937_64 rng(11);
    for (int i = 0; i < 2000; ++i) {
        const int d1 = 1 + i % 3, d2 = 1 + (i / 3) % 3;
        const point x = random_point(d1, d2, rng), y = random_point(d1, d2, rng);
        CHECK(dist_surrogate(x, y) == dist_surrogate(y, x));
        for (double s : {0.5, 2.0, 4.0}) {
            CHECK(dist_surrogate(dilate(x, s), dilate(y, s)) == s * dist_surrogate(x, y));
        }
        CHECK(dist_surrogate(dilate(x, 1.3), dilate(y, 1.3)) == Approx(1.3 * dist_surrogate(x, y)).epsilon(1e-14));
    }
}

TEST_CASE("ball volume model")
{
    CHECK(ball_volume_estimate(pt({0}, {0}), 1) == 1);
    CHECK(ball_volume_estimate(pt({3}, {0}), 1) == 3);
    CHECK(ball_volume_estimate(pt({0, 3}, {0, 0}), 1) == 9);
    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i) {
        const point y = random_point(1 + i % 2, 1 + i % 3, rng);
        const int q = y.d1() + 2 * y.d2();
        for (double s : {0.5, 2.0}) {
            CHECK(ball_volume_estimate(dilate(y, s), s * 0.7) == std::pow(s, q) * ball_volume_estimate(y, 0.7));
        }
    }
    // Monte-Carlo volumes of surrogate balls are comparable to the model
    for (double ya : {0.0, 2.0, 8.0}) {
        const point y = pt({ya}, {0});
        const double ratio = ball_volume_monte_carlo(y, 1, 200000, 5) / ball_volume_estimate(y, 1);
        CHECK(ratio > 0.25);
        CHECK(ratio < 8);
    }
}

TEST_CASE("weight")
{
    CHECK(weight(pt({5}, {1}), pt({2}, {1})) == 1);
    CHECK(weight(pt({0}, {3}), pt({2}, {0})) == 2);
    // R scaling is dilation-consistent: w_R(x, y) = w(delta_R x, delta_R y)
    std::mt19937_64 rng(19);
    for (int i = 0; i < 200; ++i) {
        const point x = random_point(2, 1, rng), y = random_point(2, 1, rng);
        CHECK(weight(x, y, 2) == Approx(weight(dilate(x, 2), dilate(y, 2))).epsilon(1e-14));
    }
}

TEST_CASE("weight is controlled by the distance surrogate")
{
    for (int d1 = 1; d1 <= 2; ++d1) {
        for (int d2 = 1; d2 <= 2; ++d2) {
            const auto s = sample_weight_bounds(d1, d2, d1 == 1 && d2 == 1 ? 1000000 : 200000, 100 + d1 * 10 + d2);
            INFO("d1=" << d1 << " d2=" << d2 << " C=" << s.constant);
            CHECK(s.min_weight >= 1);
            CHECK(s.constant_1 <= 1);
            CHECK(s.constant_2 <= 1);
            CHECK(s.constant <= 4);
        }
    }
}

TEST_CASE("weight integral")
{
    CHECK_THROWS_AS(weight_integral_check(pt({0}, {0}), 0, 0), refusal);
    CHECK_THROWS_AS(weight_integral_check(pt({0}, {0}), 3, 0.5), refusal);

    const auto base = weight_integral_check(pt({0}, {0}), 1.0, 0.4);
    weight_integral_options big;
    big.cutoff *= 2;
    const auto enlarged = weight_integral_check(pt({0}, {0}), 1.0, 0.4, big);
    INFO(base.ratio << " " << enlarged.ratio);
    CHECK(std::isfinite(base.ratio));
    CHECK(std::abs(enlarged.ratio - base.ratio) < 0.05 * base.ratio);

    weight_integral_options fine;
    fine.order = 20;
    CHECK(weight_integral_check(pt({0}, {0}), 1.0, 0.4, fine).ratio == Approx(base.ratio).epsilon(1e-3));

    double lo = base.ratio, hi = base.ratio;
    for (double ya : {2.0, 8.0}) {
        const double v = weight_integral_check(pt({ya}, {0}), 1.0, 0.4).ratio;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    INFO(lo << " " << hi);
    CHECK(hi / lo < 10);

    // higher dimensions run and stay finite
    const auto d22 = weight_integral_check(pt({1, 0}, {0, 0}), 2.5, 0.5);
    CHECK(std::isfinite(d22.ratio));
    CHECK(d22.ratio > 0);
}

TEST_CASE("weight integral against a closed form")
{
    // r = 0 on the degenerate line y' = 0, d1 = d2 = 1, large alpha:
    // the integrand only depends on dist, which is |x'| + min(|z|^{1/2}, |z|/|x'|)
    const double alpha = 3;
    const auto got = weight_integral_check(pt({0}, {0}), alpha, 0);
    // independent nested quadrature on the quarter plane, times 4
    auto inner = [&](double xa) {
        auto f = [&](double z) {
            const double d = xa + std::min(std::sqrt(z), xa > 0 ? z / xa : 1e300);
            return std::pow(1 + d, -2 * alpha);
        };
        std::vector<double> br{0};
        for (double b = 1e-4; b < 1e9; b *= 1.3) br.push_back(b);
        if (xa > 0) {
            br.push_back(xa * xa);
            std::sort(br.begin(), br.end());
        }
        return quadrature::composite(br, 10).integrate(f);
    };
    std::vector<double> br{0};
    for (double b = 1e-3; b < 1e4; b *= 1.3) br.push_back(b);
    const double oracle = 4 * quadrature::composite(br, 10).integrate(inner);
    CHECK(got.integral == Approx(oracle).epsilon(2e-3));
}
