#include <catch_amalgamated.hpp>

#include <grushin/expansion.hpp>

using namespace grushin;
using namespace grushin::expansion;
using Catch::Approx;

TEST_CASE("beta = 0 gives the identity term")
{
    const auto terms = expand_derivative(1, multi_index{0});
    REQUIRE(terms.size() == 1);
    CHECK(terms[0].factors.empty());
    CHECK(terms[0].coeff == rational(1));
    CHECK(norm1(terms[0].r) == 0);
    CHECK(audit(terms[0], multi_index{0}).empty());
}

TEST_CASE("first derivative: five families")
{
    SECTION("r = 0: the two rho-sums are empty")
    {
        auto fam = first_derivative_families(multi_index{0}, 1, 0);
        CHECK(fam[1].size() == 1);
        REQUIRE(fam[2].size() == 1);
        CHECK(fam[3].empty());
        CHECK(fam[4].empty());
        REQUIRE(fam[5].size() == 1);
        // N_{1,1,0} tau delta f with r + e_1
        CHECK(fam[2][0].factors == n_product{{0, 1, 0}});
        CHECK(fam[2][0].alpha == multi_index{1});
        CHECK(fam[2][0].alpha_tilde == multi_index{1});
        CHECK(fam[2][0].r == multi_index{1});
        // N_{1,0,0} delta f with r - e_1
        CHECK(fam[5][0].factors == n_product{{0, 0, 0}});
        CHECK(fam[5][0].alpha == multi_index{1});
        CHECK(fam[5][0].alpha_tilde == multi_index{0});
        CHECK(fam[5][0].r == multi_index{-1});
        CHECK(expand_derivative(1, multi_index{1}).size() == 3);
    }
    SECTION("r = 2 and r = -1 populate all five")
    {
        auto fam = first_derivative_families(multi_index{2}, 1, 0);
        CHECK(fam[3].size() == 2);
        CHECK(fam[4].size() == 2);
        CHECK(fam[3][0].coeff == rational(-1, 4));
        auto neg = first_derivative_families(multi_index{-1}, 1, 0);
        CHECK(neg[3].size() == 1);
        CHECK(neg[3][0].factors == n_product{{0, 1, 1}});
        CHECK(neg[3][0].coeff == rational(1, 4));
        CHECK(neg[4][0].factors == n_product{{0, 0, 1}});
        CHECK(neg[4][0].coeff == rational(-1, 4));
    }
}

TEST_CASE("all emitted terms pass the structural audit")
{
    for (int d1 = 1; d1 <= 2; ++d1) {
        for (int d2 = 1; d2 <= 2; ++d2) {
            for_each_in_box(multi_index(d2, 0), multi_index(d2, 4), [&](const multi_index& beta) {
                if (norm1(beta) > 4) return;
                const auto terms = expand_derivative(d1, beta);
                CHECK(!terms.empty());
                for (const auto& t : terms) {
                    const auto bad = audit(t, beta);
                    INFO("d1=" << d1 << " d2=" << d2 << " |beta|=" << norm1(beta));
                    CHECK(bad.empty());
                }
            });
        }
    }
}

TEST_CASE("expansion cap is enforced")
{
    CHECK_THROWS_AS(expand_derivative(1, multi_index{5}), refusal);
    CHECK_THROWS_AS(expand_derivative(1, multi_index{3, 2}), refusal);
}

TEST_CASE("term counts are reproducible")
{
    const auto a = expand_derivative(2, multi_index{1, 1});
    const auto b = expand_derivative(2, multi_index{1, 1});
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(to_json(a[i], multi_index{1, 1}) == to_json(b[i], multi_index{1, 1}));
}

TEST_CASE("expansion matches finite differences of the Hermite sum")
{
    const auto samples = random_samples(1, 1, 6, 3);
    SECTION("beta = 0")
    {
        const auto f = random_exponential_symbol(1, 1, 6, 3, 1);
        CHECK(verify_expansion(multi_index{0}, f, samples).max_relative_error < 1e-14);
    }
    SECTION("beta = e_1")
    {
        const auto f = random_exponential_symbol(1, 1, 6, 3, 2);
        CHECK(verify_expansion(multi_index{1}, f, samples).max_relative_error < 1e-5);
    }
    SECTION("beta = 2 e_1")
    {
        const auto f = random_exponential_symbol(1, 1, 6, 3, 3);
        CHECK(verify_expansion(multi_index{2}, f, samples).max_relative_error < 1e-5);
    }
    SECTION("beta = (1,1), d2 = 2")
    {
        const auto f = random_exponential_symbol(1, 2, 6, 3, 4);
        const auto s2 = random_samples(1, 2, 6, 5);
        CHECK(verify_expansion(multi_index{1, 1}, f, s2).max_relative_error < 1e-4);
    }
    SECTION("nonzero base shift exercises the rho-sums")
    {
        const auto f = random_exponential_symbol(2, 1, 5, 2, 6);
        const auto s = random_samples(2, 1, 4, 7);
        for (const multi_index r : {multi_index{2, -1}, multi_index{-2, 1}}) {
            CHECK(verify_expansion(multi_index{1}, f, s, {}, &r).max_relative_error < 1e-5);
        }
    }
    SECTION("third and fourth order")
    {
        const auto f = random_exponential_symbol(1, 1, 4, 2, 8);
        const auto s = random_samples(1, 1, 3, 9);
        CHECK(verify_expansion(multi_index{3}, f, s, {1e-2}).max_relative_error < 1e-3);
        CHECK(verify_expansion(multi_index{4}, f, s, {3e-2}).max_relative_error < 1e-2);
    }
}

TEST_CASE("finite-difference error shrinks at fourth order")
{
    const auto f = random_exponential_symbol(1, 1, 5, 3, 10);
    const auto s = random_samples(1, 1, 4, 11);
    const double e1 = verify_expansion(multi_index{1}, f, s, {4e-2}).max_relative_error;
    const double e2 = verify_expansion(multi_index{1}, f, s, {2e-2}).max_relative_error;
    INFO(e1 << " " << e2);
    CHECK(e1 / e2 > 12.0);
    CHECK(e1 / e2 < 20.0);
}

TEST_CASE("discrete differences as averages of derivatives")
{
    const std::vector<multi_index> grid{multi_index{-3}, multi_index{0}, multi_index{3}, multi_index{5}, multi_index{11}};
    CHECK(discrete_to_continuous_check({{polynomial_factor({0, 1})}}, multi_index{1}, multi_index{0}, grid).max_discrepancy < 1e-13);
    {
        // t^2, n = 3: 9 - 1 = 8
        const auto r = discrete_to_continuous_check({{polynomial_factor({0, 0, 1})}}, multi_index{1}, multi_index{0}, {multi_index{3}});
        CHECK(r.max_discrepancy < 1e-12);
    }
    CHECK(discrete_to_continuous_check({{sine_factor(1, 0)}}, multi_index{2}, multi_index{1}, {multi_index{5}}).max_discrepancy < 1e-6);
    CHECK(discrete_to_continuous_check({{exp_factor(0.3)}}, multi_index{3}, multi_index{2}, grid).max_discrepancy < 1e-6);
    const separable_extension two{{sine_factor(0.7, 0.2), polynomial_factor({1, -2, 0, 0.5})}};
    std::vector<multi_index> g2;
    for_each_in_box(multi_index{-2, -2}, multi_index{4, 4}, [&](const multi_index& n) { g2.push_back(n); });
    CHECK(discrete_to_continuous_check(two, multi_index{2, 2}, multi_index{1, 0}, g2).max_discrepancy < 1e-6);
    const auto mc = discrete_to_continuous_check({{sine_factor(0.5, 0)}}, multi_index{5}, multi_index{1}, {multi_index{4}});
    CHECK(mc.method == "Monte-Carlo");
    CHECK(mc.max_discrepancy < 5e-2);
}

TEST_CASE("coefficient bounds of composition products")
{
    const auto one = [](const multi_index&) { return 1.0; };
    {
        const auto r = coefficient_bound_check({{0, 0, 0}}, multi_index{-5}, multi_index{50}, one);
        CHECK(r.violations.empty());
        CHECK(n_product_multiplier<double>({{0, 0, 0}}, multi_index{0}) == 0.0);
    }
    {
        const auto r = coefficient_bound_check({{0, 1, 1}}, multi_index{-5}, multi_index{1000}, one);
        CHECK(r.violations.empty());
        CHECK(std::isfinite(r.empirical_constant));
        CHECK(r.empirical_constant < 10);
    }
    CHECK(n_product_multiplier<surd>({{0, 0, 0}, {0, 1, 0}}, multi_index{6}) ==
          surd::sqrt_of(30) * surd::sqrt_of(56));
    for (const n_product& p : {n_product{{0, -2, 2}, {0, 1, 0}}, n_product{{0, 3, 3}}, n_product{{0, 0, 1}, {1, -1, 2}}}) {
        const int d1 = p.back().axis + 1;
        const auto r = coefficient_bound_check(p, multi_index(d1, -6), multi_index(d1, d1 == 1 ? 400 : 60), one);
        CHECK(r.violations.empty());
        CHECK(std::isfinite(r.empirical_constant));
    }
}

TEST_CASE("term JSON carries the documented fields")
{
    const auto terms = expand_derivative(1, multi_index{2});
    const auto j = to_json(terms.front(), multi_index{2});
    for (const char* key : {"beta_iota", "alpha_iota", "alpha_tilde_iota", "r_iota", "theta", "n_product", "audit"}) {
        CHECK(j.contains(key));
    }
    CHECK(j["audit"] == "pass");
}
