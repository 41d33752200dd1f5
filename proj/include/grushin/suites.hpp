#ifndef GRUSHIN_SUITES_HPP
#define GRUSHIN_SUITES_HPP

// Identity suites for the Hermite layer, the difference calculus and the derivative expansion,
// reported in the same form as the estimate checks.

#include <map>
#include <memory>
#include <random>

#include "diffops.hpp"
#include "estimates.hpp"
#include "expansion.hpp"
#include "hermite.hpp"

namespace grushin::suites
{

/// Three-term derivative identity for l <= 200, |t| <= 25 and the Gram matrix of h_0..h_60.
inline estimate_report hermite_identities(double residual_tol = 1e-10, double gram_tol = 1e-8)
{
    estimate_report rep;
    rep.id = "hermite_identities";
    rep.param("max_degree", 200);
    rep.param("t_range", 25);
    rep.param("gram_degree", 60);
    rep.rule = "derivative identity residual <= residual_tol, Gram matrix within gram_tol of the identity";
    double worst = 0;
    for (int l = 0; l <= 200; ++l) {
        for (double t = -25; t <= 25; t += 0.37) {
            const double r = hermite::derivative_identity_residual(l, t);
            worst = std::max(worst, std::abs(r) / (1 + std::abs(hermite::hermite_function(l, t))));
        }
    }
    const int lmax = 60;
    const auto rule = hermite::gauss_hermite_rule(400);
    std::vector<std::vector<double>> vals;
    for (auto [t, w] : rule) vals.push_back(hermite::hermite_values(lmax, t));
    double gram = 0;
    for (int j = 0; j <= lmax; ++j) {
        for (int k = 0; k <= j; ++k) {
            double s = 0;
            for (std::size_t i = 0; i < rule.size(); ++i) {
                s += rule[i].second * vals[i][static_cast<std::size_t>(j)] * vals[i][static_cast<std::size_t>(k)];
            }
            gram = std::max(gram, std::abs(s - (j == k ? 1.0 : 0.0)));
        }
    }
    rep.diag("max_residual", worst);
    rep.diag("max_gram_deviation", gram);
    rep.empirical_constant = std::max(worst, gram);
    rep.pass = worst <= residual_tol && gram <= gram_tol;
    return rep;
}

namespace detail
{

inline lattice_symbol<surd> random_integer_symbol(int d1, int box, std::mt19937_64& rng)
{
    std::uniform_int_distribution<int> v(-9, 9);
    auto table = std::make_shared<std::map<multi_index, std::int64_t>>();
    for_each_in_box(multi_index(d1, 0), multi_index(d1, box), [&](const multi_index& n) { (*table)[n] = v(rng); });
    return {d1, multi_index(d1, 0), multi_index(d1, box),
            [table](const multi_index& n, const real_vec&) { return surd(table->at(n)); }};
}

} // namespace detail

/// tau/delta/N commutation relations on random integer symbols (exact arithmetic) and the
/// discrete-difference versus derivative-average identity on smooth extensions.
inline estimate_report difference_calculus(std::uint64_t seed, int trials = 1000, double d2c_tol = 1e-6)
{
    estimate_report rep;
    rep.id = "difference_calculus";
    rep.param("seed", std::to_string(seed));
    rep.param("trials", trials);
    rep.rule = "every commutation relation exact; smooth-extension discrepancy <= d2c_tol";
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> rho_d(-3, 3), s_d(0, 3), dim_d(1, 2);
    const real_vec no_xi{0.0};
    int failures = 0;
    for (int trial = 0; trial < trials; ++trial) {
        const int d1 = dim_d(rng);
        std::uniform_int_distribution<int> axis_d(0, d1 - 1);
        const auto f = detail::random_integer_symbol(d1, 5, rng);
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
        failures += ok ? 0 : 1;
    }

    using namespace expansion;
    const std::vector<multi_index> grid{multi_index{-3}, multi_index{0}, multi_index{3}, multi_index{5}, multi_index{11}};
    std::vector<multi_index> g2;
    for_each_in_box(multi_index{-2, -2}, multi_index{4, 4}, [&](const multi_index& n) { g2.push_back(n); });
    double d2c = 0;
    d2c = std::max(d2c, discrete_to_continuous_check({{polynomial_factor({0, 1})}}, multi_index{1}, multi_index{0}, grid).max_discrepancy);
    d2c = std::max(d2c, discrete_to_continuous_check({{polynomial_factor({1, -2, 0, 0.5})}}, multi_index{3}, multi_index{1}, grid).max_discrepancy);
    d2c = std::max(d2c, discrete_to_continuous_check({{sine_factor(1, 0)}}, multi_index{2}, multi_index{1}, grid).max_discrepancy);
    d2c = std::max(d2c, discrete_to_continuous_check({{exp_factor(0.3)}}, multi_index{3}, multi_index{2}, grid).max_discrepancy);
    d2c = std::max(d2c, discrete_to_continuous_check({{sine_factor(0.7, 0.2), polynomial_factor({1, -2, 0, 0.5})}},
                                                     multi_index{2, 2}, multi_index{1, 0}, g2)
                            .max_discrepancy);
    rep.diag("commutation_failures", failures);
    rep.diag("max_d2c_discrepancy", d2c);
    rep.empirical_constant = d2c;
    rep.pass = failures == 0 && d2c <= d2c_tol;
    return rep;
}

/// verify_expansion for every beta with |beta|_1 <= max_order on (1,1), (2,1), (1,2) with random
/// symbols, and the structural audit of every emitted term.
inline estimate_report expansion_identity(std::uint64_t seed, int symbols = 50, int max_order = 2, double tol = 1e-5)
{
    using namespace expansion;
    estimate_report rep;
    rep.id = "expansion_identity";
    rep.param("seed", std::to_string(seed));
    rep.param("symbols", symbols);
    rep.param("max_order", max_order);
    rep.rule = "verify_expansion relative error <= tol; every term passes the audit";
    rep.columns = {"d1", "d2", "beta_norm", "max_relative_error", "terms"};
    double worst = 0;
    int audit_failures = 0;
    std::uint64_t k = seed;
    for (auto [d1, d2] : {std::pair{1, 1}, std::pair{2, 1}, std::pair{1, 2}}) {
        for_each_in_box(multi_index(d2, 0), multi_index(d2, max_order), [&](const multi_index& beta) {
            if (norm1(beta) > max_order) return;
            for (const auto& t : expand_derivative(d1, beta)) audit_failures += audit(t, beta).empty() ? 0 : 1;
            double e = 0;
            std::size_t terms = 0;
            for (int s = 0; s < symbols; ++s) {
                const auto f = random_exponential_symbol(d1, d2, 4, 2, ++k);
                const auto pts = random_samples(d1, d2, 2, ++k);
                const auto r = verify_expansion(beta, f, pts, {norm1(beta) <= 1 ? 1e-4 : 1e-3});
                e = std::max(e, r.max_relative_error);
                terms = r.term_count;
            }
            worst = std::max(worst, e);
            rep.rows.push_back({static_cast<double>(d1), static_cast<double>(d2), static_cast<double>(norm1(beta)), e,
                                static_cast<double>(terms)});
        });
    }
    rep.diag("max_relative_error", worst);
    rep.diag("audit_failures", audit_failures);
    rep.empirical_constant = worst;
    rep.pass = worst <= tol && audit_failures == 0;
    return rep;
}

} // namespace grushin::suites

#endif // GRUSHIN_SUITES_HPP
