#include <catch_amalgamated.hpp>

#include <random>

#include <grushin/diffops.hpp>

using namespace grushin;
using Catch::Approx;

namespace
{

lattice_symbol<double> poly_symbol(int power)
{
    return {1, multi_index{-100}, multi_index{100},
            [power](const multi_index& n, const real_vec&) { return std::pow(static_cast<double>(n[0]), power); }};
}

// integer-valued symbol supported in [0, box]^d1
lattice_symbol<surd> random_integer_symbol(int d1, int box, std::mt19937_64& rng)
{
    std::uniform_int_distribution<int> v(-9, 9);
    auto table = std::make_shared<std::map<multi_index, std::int64_t>>();
    for_each_in_box(multi_index(d1, 0), multi_index(d1, box), [&](const multi_index& n) { (*table)[n] = v(rng); });
    return {d1, multi_index(d1, 0), multi_index(d1, box),
            [table](const multi_index& n, const real_vec&) { return surd(table->at(n)); }};
}

const real_vec no_xi{0.0};

} // namespace

TEST_CASE("surd arithmetic is exact")
{
    const surd a = surd::sqrt_of(72); // 6 sqrt 2
    CHECK(a == surd(6) * surd::sqrt_of(2));
    CHECK(surd::sqrt_of(6) * surd::sqrt_of(10) == surd(2) * surd::sqrt_of(15));
    CHECK(surd::sqrt_of(2) * surd::sqrt_of(2) == surd(2));
    CHECK((surd::sqrt_of(3) - surd::sqrt_of(3)) == surd{});
    CHECK(surd::sqrt_of(30).to_double() == Approx(std::sqrt(30.0)));
}

TEST_CASE("shift")
{
    const auto f = lattice_symbol<double>{1, multi_index{-50}, multi_index{50},
                                          [](const multi_index& n, const real_vec&) { return double(n[0]); }};
    const auto g = shift(f, multi_index{1});
    for (int n = -10; n <= 10; ++n) CHECK(g(multi_index{n}, no_xi) == n + 2);
    const auto id = shift(f, multi_index{0});
    CHECK(id(multi_index{7}, no_xi) == 7);

    const auto ind = lattice_symbol<double>{1, multi_index{0}, multi_index{0},
                                            [](const multi_index&, const real_vec&) { return 1.0; }};
    const auto moved = shift(ind, multi_index{-1});
    CHECK(moved(multi_index{2}, no_xi) == 1.0);
    CHECK(moved(multi_index{0}, no_xi) == 0.0);

    const auto back = shift(shift(f, multi_index{3}), multi_index{-3});
    for (int n = -10; n <= 10; ++n) CHECK(back(multi_index{n}, no_xi) == f(multi_index{n}, no_xi));
}

TEST_CASE("difference")
{
    const auto sq = difference(poly_symbol(2), multi_index{1});
    for (int n = -5; n <= 5; ++n) CHECK(sq(multi_index{n}, no_xi) == 4.0 * n - 4);

    const auto c = lattice_symbol<double>{1, multi_index{-100}, multi_index{100},
                                          [](const multi_index&, const real_vec&) { return 3.5; }};
    CHECK(difference(c, multi_index{1})(multi_index{0}, no_xi) == 0.0);
    CHECK(difference(c, multi_index{3})(multi_index{5}, no_xi) == 0.0);

    const auto cube = difference(poly_symbol(3), multi_index{2});
    for (int n = -5; n <= 5; ++n) {
        const double oracle = std::pow(n, 3) - 2 * std::pow(n - 2, 3) + std::pow(n - 4, 3);
        CHECK(cube(multi_index{n}, no_xi) == oracle);
    }
}

TEST_CASE("n_apply")
{
    const auto one = lattice_symbol<double>{1, multi_index{-100}, multi_index{100},
                                            [](const multi_index&, const real_vec&) { return 1.0; }};
    CHECK(n_apply(one, {0, 0, 0})(multi_index{2}, no_xi) == Approx(std::sqrt(2.0)));
    CHECK(n_apply(one, {0, 1, 0})(multi_index{-1}, no_xi) == 0.0);
    CHECK(n_apply(one, {0, 1, 0})(multi_index{-2}, no_xi) == 0.0);
    CHECK(n_apply(one, {0, 1, 1})(multi_index{4}, no_xi) == Approx(std::sqrt(30.0) - std::sqrt(12.0)));

    SECTION("closed form agrees with the recursion exactly")
    {
        for (int rho = -3; rho <= 3; ++rho) {
            for (int s = 0; s <= 4; ++s) {
                for (int n = -4; n <= 20; ++n) {
                    const n_factor f{0, rho, s};
                    CHECK(n_multiplier<surd>(f, multi_index{n}) == n_multiplier_recursive<surd>(f, multi_index{n}));
                }
            }
        }
    }
}

TEST_CASE("commutation relations hold exactly on random integer symbols")
{
    std::mt19937_64 rng(20240601);
    std::uniform_int_distribution<int> rho_d(-3, 3), s_d(0, 3), dim_d(1, 2);
    int checked = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int d1 = dim_d(rng);
        std::uniform_int_distribution<int> axis_d(0, d1 - 1);
        const auto f = random_integer_symbol(d1, 5, rng);
        const int j = axis_d(rng), l = axis_d(rng);
        const n_factor nf{l, rho_d(rng), s_d(rng)};
        const multi_index ej = multi_index::unit(d1, j);

        const auto lhs_tau = shift(n_apply(f, nf), ej);
        const auto rhs_tau = n_apply(shift(f, ej), n_factor{l, nf.rho + (j == l ? 1 : 0), nf.s});

        const auto lhs_delta = difference(n_apply(f, nf), ej);
        lattice_symbol<surd> rhs_delta;
        if (j == l) {
            const auto a = n_apply(f, n_factor{l, nf.rho, nf.s + 1});
            const auto b = n_apply(difference(f, ej), n_factor{l, nf.rho - 1, nf.s});
            rhs_delta = {d1, multi_index(d1, -4), multi_index(d1, 12),
                         [a, b](const multi_index& n, const real_vec& xi) { return a(n, xi) + b(n, xi); }};
        } else {
            rhs_delta = n_apply(difference(f, ej), nf);
        }
        const auto inv = shift(f, -ej);
        const auto df = difference(f, ej);

        bool ok = true;
        for_each_in_box(multi_index(d1, -4), multi_index(d1, 12), [&](const multi_index& n) {
            ok = ok && lhs_tau(n, no_xi) == rhs_tau(n, no_xi);
            ok = ok && lhs_delta(n, no_xi) == rhs_delta(n, no_xi);
            ok = ok && df(n, no_xi) == f(n, no_xi) - inv(n, no_xi);
        });
        CHECK(ok);
        ++checked;
    }
    CHECK(checked == 1000);
}

TEST_CASE("shift_difference_stencil reproduces tau^a~ delta^a")
{
    const auto f = poly_symbol(4);
    const multi_index at{1}, a{2};
    const auto composed = shift(difference(f, a), at);
    for (int n = -3; n <= 6; ++n) {
        double v = 0;
        shift_difference_stencil(at, a, [&](std::int64_t w, const multi_index& m) { v += w * f(multi_index{n} + m, no_xi); });
        CHECK(v == composed(multi_index{n}, no_xi));
    }
}
