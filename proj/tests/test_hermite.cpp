#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include <grushin/hermite.hpp>

using namespace grushin;
using namespace grushin::hermite;
using Catch::Approx;

namespace
{

// Explicit Hermite polynomial sum, independent of the recurrence.
double explicit_hermite_function(int n, double t)
{
    long double poly = 0;
    long double fact_n = std::tgammal(n + 1.0L);
    for (int m = 0; 2 * m <= n; ++m) {
        const long double term = fact_n / (std::tgammal(m + 1.0L) * std::tgammal(n - 2 * m + 1.0L)) *
                                 std::pow(2.0L * t, static_cast<long double>(n - 2 * m));
        poly += (m % 2 == 0 ? term : -term);
    }
    const long double norm = std::sqrt(std::pow(2.0L, static_cast<long double>(n)) * fact_n * std::sqrt(std::acos(-1.0L)));
    return static_cast<double>(poly * std::exp(-0.5L * t * t) / norm);
}

// Plain long-double recurrence; long double has enough range for |t| <= 40.
std::vector<long double> long_double_values(int n, long double t)
{
    std::vector<long double> v(static_cast<std::size_t>(n + 1));
    v[0] = std::pow(std::acos(-1.0L), -0.25L) * std::exp(-0.5L * t * t);
    if (n >= 1) v[1] = std::sqrt(2.0L) * t * v[0];
    for (int l = 1; l < n; ++l) {
        v[static_cast<std::size_t>(l + 1)] = std::sqrt(2.0L / (l + 1)) * t * v[static_cast<std::size_t>(l)] -
                                             std::sqrt(static_cast<long double>(l) / (l + 1)) * v[static_cast<std::size_t>(l - 1)];
    }
    return v;
}

// Brute-force enumeration of all n in N^d with |n|_1 = ell.
double brute_level_sum(int d, int ell, const std::vector<double>& u)
{
    double total = 0;
    multi_index lo(d, 0), hi(d, ell);
    for_each_in_box(lo, hi, [&](const multi_index& n) {
        if (norm1(n) != ell) return;
        double p = 1;
        for (int i = 0; i < d; ++i) {
            const double h = explicit_hermite_function(n[i], u[static_cast<std::size_t>(i)]);
            p *= h * h;
        }
        total += p;
    });
    return total;
}

} // namespace

TEST_CASE("hermite_eval base values")
{
    CHECK(hermite_function(0, 0.0) == Approx(0.7511255444649425).epsilon(1e-14));
    CHECK(hermite_function(1, 0.0) == 0.0);
    CHECK(hermite_function(-1, 0.3) == 0.0);
}

TEST_CASE("hermite_eval matches the explicit polynomial formula")
{
    for (int n = 0; n <= 20; ++n) {
        for (double t : {-4.5, -1.2, 0.0, 0.37, 2.0, 5.0}) {
            const double ref = explicit_hermite_function(n, t);
            CHECK(hermite_function(n, t) == Approx(ref).margin(1e-13).epsilon(1e-11));
        }
    }
}

TEST_CASE("hermite_eval stays finite and accurate for large degree and argument")
{
    for (double t : {-40.0, -25.0, 0.5, 31.0, 40.0}) {
        const auto v = hermite_values(500, t);
        const auto ref = long_double_values(500, t);
        for (int l = 0; l <= 500; l += 7) {
            REQUIRE(std::isfinite(v[static_cast<std::size_t>(l)]));
            const long double r = ref[static_cast<std::size_t>(l)];
            if (std::abs(r) > 1e-300L) {
                CHECK(std::abs(v[static_cast<std::size_t>(l)] - static_cast<double>(r)) <= 1e-9 * std::abs(static_cast<double>(r)));
            }
        }
    }
    // deep in the Gaussian tail, where e^{-t^2/2} alone underflows a double
    const auto v = hermite_values(120, 39.0);
    CHECK(v[120] > 0.0);
}

TEST_CASE("hermite_table agrees with per-point evaluation")
{
    const auto table = hermite_eval(30, {-3.0, 0.0, 1.5});
    for (std::size_t k = 0; k < 3; ++k) {
        const auto v = hermite_values(30, table.points()[k]);
        for (int l = 0; l <= 30; ++l) CHECK(table(l, k) == v[static_cast<std::size_t>(l)]);
    }
}

TEST_CASE("h_10 has unit norm under a 200-node Gauss-Hermite rule")
{
    const auto rule = gauss_hermite_rule(200);
    double s = 0;
    for (auto [t, w] : rule) {
        const double h = hermite_function(10, t);
        s += w * h * h;
    }
    CHECK(std::abs(s - 1.0) < 1e-8);
}

TEST_CASE("Gram matrix of h_0..h_60 is the identity")
{
    const int lmax = 60;
    SECTION("400-node Gauss-Hermite")
    {
        const auto rule = gauss_hermite_rule(400);
        std::vector<std::vector<double>> vals;
        for (auto [t, w] : rule) vals.push_back(hermite_values(lmax, t));
        double worst = 0;
        for (int j = 0; j <= lmax; ++j) {
            for (int k = 0; k <= j; ++k) {
                double s = 0;
                for (std::size_t i = 0; i < rule.size(); ++i) {
                    s += rule[i].second * vals[i][static_cast<std::size_t>(j)] * vals[i][static_cast<std::size_t>(k)];
                }
                worst = std::max(worst, std::abs(s - (j == k ? 1.0 : 0.0)));
            }
        }
        CHECK(worst < 1e-8);
    }
    SECTION("trapezoidal oracle")
    {
        const double h = 0.02;
        double worst = 0;
        std::vector<std::vector<double>> vals;
        for (double t = -25; t <= 25 + 1e-12; t += h) vals.push_back(hermite_values(lmax, t));
        for (int j = 0; j <= lmax; j += 3) {
            for (int k = 0; k <= j; k += 2) {
                double s = 0;
                for (const auto& v : vals) s += h * v[static_cast<std::size_t>(j)] * v[static_cast<std::size_t>(k)];
                worst = std::max(worst, std::abs(s - (j == k ? 1.0 : 0.0)));
            }
        }
        CHECK(worst < 1e-10);
    }
}

TEST_CASE("hermite_derivative")
{
    CHECK(hermite_derivative(0, 0.0) == 0.0);
    CHECK(hermite_derivative(1, 0.0) == Approx(std::sqrt(2.0) * std::pow(pi, -0.25)).epsilon(1e-14));
    const double step = 1e-5;
    const double fd = (hermite_function(5, 1.3 + step) - hermite_function(5, 1.3 - step)) / (2 * step);
    CHECK(std::abs(hermite_derivative(5, 1.3) - fd) < 1e-6);
}

TEST_CASE("three-term derivative identity residual is tiny for l <= 200, |t| <= 25")
{
    double worst = 0;
    for (int l = 0; l <= 200; ++l) {
        for (double t = -25; t <= 25; t += 0.37) {
            const double r = derivative_identity_residual(l, t);
            worst = std::max(worst, std::abs(r) / (1 + std::abs(hermite_function(l, t))));
        }
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("a_coeff")
{
    CHECK(a_coeff(2) == Approx(std::sqrt(2.0)));
    CHECK(a_coeff(1) == 0.0);
    CHECK(a_coeff(0) == 0.0);
    CHECK(a_coeff(-3) == 0.0);
    CHECK(a_coeff(6) == Approx(std::sqrt(30.0)));
}

TEST_CASE("scaled_tensor_eval")
{
    const std::vector<double> xi1{1.0};
    CHECK(scaled_tensor_eval(multi_index{0}, std::vector<double>{0.0}, xi1) == Approx(std::pow(pi, -0.25)));
    CHECK(scaled_tensor_eval(multi_index{-1}, std::vector<double>{0.7}, xi1) == 0.0);

    const std::vector<double> xi{0.0, 4.0};
    const double direct = std::pow(4.0, 2.0 / 4) * explicit_hermite_function(2, 2 * 0.5) * explicit_hermite_function(0, 2 * -1.0);
    CHECK(std::abs(scaled_tensor_eval(multi_index{2, 0}, std::vector<double>{0.5, -1.0}, xi) - direct) < 1e-12);

    SECTION("homogeneity under xi -> s xi")
    {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> us(0.25, 4.0), uu(-2.0, 2.0);
        for (int trial = 0; trial < 50; ++trial) {
            const double s = us(rng);
            const multi_index n{trial % 5, (trial / 5) % 4};
            const std::vector<double> u{uu(rng), uu(rng)};
            const std::vector<double> base{uu(rng), uu(rng), 0.5};
            std::vector<double> scaled(base);
            for (double& x : scaled) x *= s;
            const double r = norm2(scaled);
            const double expected = std::pow(r, 0.5) * explicit_hermite_function(n[0], std::sqrt(r) * u[0]) *
                                    explicit_hermite_function(n[1], std::sqrt(r) * u[1]);
            CHECK(scaled_tensor_eval(n, u, scaled) == Approx(expected).margin(1e-13).epsilon(1e-10));
        }
    }
}

TEST_CASE("level_sum")
{
    CHECK(level_sum(1, 0, std::vector<double>{0.0}) == Approx(1 / std::sqrt(pi)).epsilon(1e-14));
    CHECK(std::abs(level_sum(2, 1, std::vector<double>{0.0, 0.0})) < 1e-16);
    const std::vector<double> u{1.0, -0.5};
    CHECK(std::abs(level_sum(2, 3, u) - brute_level_sum(2, 3, u)) < 1e-12);

    SECTION("nonnegative and equal to brute force")
    {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> uu(-3.0, 3.0);
        for (int d = 1; d <= 3; ++d) {
            for (int ell = 0; ell <= 12; ++ell) {
                std::vector<double> p(static_cast<std::size_t>(d));
                for (double& x : p) x = uu(rng);
                const double v = level_sum(d, ell, p);
                CHECK(v >= 0.0);
                CHECK(v == Approx(brute_level_sum(d, ell, p)).margin(1e-13).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("check_level_sum_bounds reports finite empirical constants")
{
    std::vector<double> radii;
    for (double r = 0; r <= 30; r += 0.25) radii.push_back(r);
    const auto one = check_level_sum_bounds(1, 100, radii);
    CHECK(one.pass());
    for (const auto& b : one.bounds) {
        INFO(b.name);
        CHECK(std::isfinite(b.sup_ratio));
        CHECK(b.sup_ratio > 0);
    }
    std::vector<double> radii2;
    for (double r = 0; r <= 20; r += 0.5) radii2.push_back(r);
    const auto two = check_level_sum_bounds(2, 60, radii2);
    CHECK(two.pass());

    // u^2 = 4[l], l = 10: below the fitted Gaussian envelope
    const double b = bracket(1, 10);
    const double u = std::sqrt(4 * b);
    const auto& g = one.bounds[1];
    CHECK(level_sum(1, 10, std::vector<double>{u}) <= g.sup_ratio * std::exp(-g.decay_rate * u * u) * (1 + 1e-9));
}
