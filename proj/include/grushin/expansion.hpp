#ifndef GRUSHIN_EXPANSION_HPP
#define GRUSHIN_EXPANSION_HPP

// Term rewriting for xi-derivatives of Hermite sums
//   d^beta/dxi^beta sum_n m(n,xi) h~_n(y',xi) h~_n(x',xi)
// as a finite sum of terms
//   Theta(xi) * [N tau^alpha~ delta^alpha d^beta' m](n,xi) * h~_{n+2r}(y',xi) h~_n(x',xi).

#include <map>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "core.hpp"
#include "diffops.hpp"
#include "hermite.hpp"
#include "quadrature.hpp"

namespace grushin::expansion
{

inline constexpr int default_beta_cap = 4;

/// Theta(xi) = coeff * xi^gamma * |xi|^(2p).
struct theta_shape
{
    multi_index gamma;
    int p = 0;

    int degree() const { return norm1(gamma) + 2 * p; }

    double eval(const real_vec& xi) const
    {
        double v = std::pow(norm2(xi) * norm2(xi), p);
        for (int k = 0; k < gamma.size(); ++k) v *= std::pow(xi[k], gamma[k]);
        return v;
    }

    friend bool operator==(const theta_shape&, const theta_shape&) = default;
    friend auto operator<=>(const theta_shape&, const theta_shape&) = default;
};

struct expansion_term
{
    multi_index beta_iota;   // in N^d2
    multi_index alpha;       // in N^d1
    multi_index alpha_tilde; // in N^d1
    multi_index r;           // in Z^d1
    theta_shape theta;
    n_product factors; // sorted
    rational coeff{1};

    auto key() const { return std::make_tuple(beta_iota, alpha, alpha_tilde, r, theta, factors); }
};

inline expansion_term identity_term(int d1, int d2)
{
    expansion_term t;
    t.beta_iota = multi_index(d2, 0);
    t.alpha = multi_index(d1, 0);
    t.alpha_tilde = multi_index(d1, 0);
    t.r = multi_index(d1, 0);
    t.theta = {multi_index(d2, 0), 0};
    return t;
}

namespace detail
{

struct partial_op
{
    n_product factors;
    multi_index alpha_tilde;
    multi_index alpha;
};

// delta_j (N tau^at delta^a): absorb into a j-factor or pass through.
inline std::vector<partial_op> push_delta(int j, const partial_op& op)
{
    std::vector<partial_op> out;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < op.factors.size(); ++i) {
        if (op.factors[i].axis == j) idx.push_back(i);
    }
    for (std::size_t q = 0; q < idx.size(); ++q) {
        partial_op next = op;
        for (std::size_t b = 0; b < q; ++b) next.factors[idx[b]].rho -= 1;
        next.factors[idx[q]].s += 1;
        out.push_back(std::move(next));
    }
    partial_op pass = op;
    for (std::size_t i : idx) pass.factors[i].rho -= 1;
    pass.alpha[j] += 1;
    out.push_back(std::move(pass));
    return out;
}

inline partial_op push_tau(int j, partial_op op)
{
    for (auto& f : op.factors) {
        if (f.axis == j) f.rho += 1;
    }
    op.alpha_tilde[j] += 1;
    return op;
}

inline void prepend(partial_op& op, n_factor f) { op.factors.push_back(f); }

} // namespace detail

/// Terms produced by one d/dxi_k step, tagged by origin:
/// 0 = derivative of Theta, 1 = d_k on the symbol, 2..5 = the four shift families.
struct tagged_term
{
    int family;
    expansion_term term;
};

inline std::vector<tagged_term> derivative_step(const expansion_term& t, int k)
{
    std::vector<tagged_term> out;
    const int d1 = t.alpha.size();

    // product rule on Theta
    if (t.theta.gamma[k] > 0) {
        expansion_term u = t;
        u.coeff = t.coeff * rational(t.theta.gamma[k]);
        u.theta.gamma[k] -= 1;
        out.push_back({0, u});
    }
    if (t.theta.p != 0) {
        expansion_term u = t;
        u.coeff = t.coeff * rational(2 * t.theta.p);
        u.theta.gamma[k] += 1;
        u.theta.p -= 1;
        out.push_back({0, u});
    }
    {
        expansion_term u = t;
        u.beta_iota[k] += 1;
        out.push_back({1, u});
    }

    const detail::partial_op base{t.factors, t.alpha_tilde, t.alpha};
    auto emit = [&](int family, const detail::partial_op& op, int rshift_axis, int rshift, rational c) {
        expansion_term u = t;
        u.factors = op.factors;
        std::sort(u.factors.begin(), u.factors.end());
        u.alpha = op.alpha;
        u.alpha_tilde = op.alpha_tilde;
        u.r[rshift_axis] += rshift;
        u.theta.gamma[k] += 1;
        u.theta.p -= 1;
        u.coeff = t.coeff * c * rational(1, 4);
        out.push_back({family, u});
    };

    for (int j = 0; j < d1; ++j) {
        // N_{j,1,0} tau_j delta_j f, r -> r + e_j
        for (auto op : detail::push_delta(j, base)) {
            op = detail::push_tau(j, op);
            detail::prepend(op, {j, 1, 0});
            emit(2, op, j, 1, 1);
        }
        const int rj = t.r[j];
        const int eps = rj >= 0 ? 1 : -1;
        const int lo = 1 - std::max(-rj, 0), hi = std::max(rj, 0);
        for (int rho = lo; rho <= hi; ++rho) {
            // -eps N_{j,rho+1,1} f, r -> r + e_j
            detail::partial_op op = base;
            detail::prepend(op, {j, rho + 1, 1});
            emit(3, op, j, 1, -eps);
            // +eps N_{j,rho,1} f, r -> r - e_j
            op = base;
            detail::prepend(op, {j, rho, 1});
            emit(4, op, j, -1, eps);
        }
        // N_{j,0,0} delta_j f, r -> r - e_j
        for (auto op : detail::push_delta(j, base)) {
            detail::prepend(op, {j, 0, 0});
            emit(5, op, j, -1, 1);
        }
    }
    return out;
}

/// Sums coefficients of terms with identical structure; drops zeros; sorted output.
inline std::vector<expansion_term> canonicalize(const std::vector<expansion_term>& terms)
{
    std::map<decltype(std::declval<expansion_term>().key()), std::size_t> seen;
    std::vector<expansion_term> merged;
    for (const auto& t : terms) {
        auto it = seen.find(t.key());
        if (it == seen.end()) {
            merged.push_back(t);
            seen.emplace(merged.back().key(), merged.size() - 1);
        } else {
            merged[it->second].coeff = merged[it->second].coeff + t.coeff;
        }
    }
    std::vector<expansion_term> out;
    for (auto& t : merged) {
        if (!t.coeff.is_zero()) out.push_back(std::move(t));
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.key() < b.key(); });
    return out;
}

/// Applies d^beta (axis by axis, in increasing order) to a list of terms.
inline std::vector<expansion_term> expand(std::vector<expansion_term> terms, const multi_index& beta,
                                          int cap = default_beta_cap)
{
    if (!nonnegative(beta)) throw std::invalid_argument("expand: beta must be nonnegative");
    if (norm1(beta) > cap) throw refusal("expand: |beta|_1 exceeds the configured cap");
    for (int k = 0; k < beta.size(); ++k) {
        for (int step = 0; step < beta[k]; ++step) {
            std::vector<expansion_term> next;
            for (const auto& t : terms) {
                for (auto& tt : derivative_step(t, k)) next.push_back(std::move(tt.term));
            }
            terms = canonicalize(next);
        }
    }
    return terms;
}

inline std::vector<expansion_term> expand_derivative(int d1, const multi_index& beta, int cap = default_beta_cap)
{
    return expand({identity_term(d1, beta.size())}, beta, cap);
}

/// The terms of a single d/dxi_k step from the identity term with shift r, grouped by family.
inline std::map<int, std::vector<expansion_term>> first_derivative_families(const multi_index& r, int d2, int k)
{
    expansion_term t = identity_term(r.size(), d2);
    t.r = r;
    std::map<int, std::vector<expansion_term>> fam;
    for (int f = 1; f <= 5; ++f) fam[f];
    for (auto& tt : derivative_step(t, k)) fam[tt.family].push_back(tt.term);
    return fam;
}

/// Structural audit of one term against properties (i)-(vi); returns violated items.
inline std::vector<std::string> audit(const expansion_term& t, const multi_index& beta)
{
    std::vector<std::string> bad;
    const int b = norm1(beta);
    const int d1 = t.alpha.size();
    if (!nonnegative(t.beta_iota) || !leq(t.beta_iota, beta)) bad.push_back("(i) beta_iota <= beta");
    if (!nonnegative(t.alpha) || !nonnegative(t.alpha_tilde) || norm1(t.alpha) + norm1(t.beta_iota) > b) {
        bad.push_back("(ii) |alpha| + |beta_iota| <= |beta|");
    }
    if (b > 0 && norm1(t.alpha) + norm1(t.beta_iota) == 0) bad.push_back("(iii) nontrivial alpha or beta_iota");
    if (norm1(t.r) > b) bad.push_back("(iv) |r| <= |beta|");
    if (!nonnegative(t.theta.gamma) || t.theta.degree() != norm1(t.beta_iota) - b) {
        bad.push_back("(v) Theta homogeneous of degree |beta_iota| - |beta|");
    }
    if (static_cast<int>(t.factors.size()) > b - norm1(t.beta_iota)) bad.push_back("(vi) number of N factors");
    for (int j = 0; j < d1; ++j) {
        int u = 0, ssum = 0, lowest = 0;
        for (const auto& f : t.factors) {
            if (f.axis != j) continue;
            ++u;
            ssum += f.s;
            if (f.s < 0 || f.rho > b || f.rho < f.s - b) bad.push_back("(vi) rho range");
            lowest = std::max(lowest, 1 - f.rho);
        }
        if (ssum != u - t.alpha[j]) bad.push_back("(vi) sum of s");
        if (lowest < t.alpha[j] - t.alpha_tilde[j]) bad.push_back("(vi) max{0, 1 - rho} >= alpha - alpha~");
    }
    return bad;
}

inline nlohmann::json to_json(const expansion_term& t, const multi_index& beta)
{
    auto vec = [](const multi_index& m) { return std::vector<int>(m.begin(), m.end()); };
    nlohmann::json factors = nlohmann::json::array();
    for (const auto& f : t.factors) factors.push_back({{"j", f.axis + 1}, {"rho", f.rho}, {"s", f.s}});
    const auto bad = audit(t, beta);
    return {{"beta_iota", vec(t.beta_iota)},
            {"alpha_iota", vec(t.alpha)},
            {"alpha_tilde_iota", vec(t.alpha_tilde)},
            {"r_iota", vec(t.r)},
            {"theta",
             {{"coeff", t.coeff.str()},
              {"xi_exponents", vec(t.theta.gamma)},
              {"abs_xi_squared_power", t.theta.p},
              {"degree", t.theta.degree()}}},
            {"n_product", factors},
            {"audit", bad.empty() ? nlohmann::json("pass") : nlohmann::json(bad)}};
}

// ---------------------------------------------------------------------------
// Numerical evaluation

/// Symbol with analytic xi-derivatives: deriv(n, xi, beta) = d^beta_xi f(n, xi).
/// Vanishes for n outside [lo, hi].
struct smooth_symbol
{
    int d1 = 1, d2 = 1;
    multi_index lo, hi;
    std::function<complex(const multi_index&, const real_vec&, const multi_index&)> deriv;

    complex operator()(const multi_index& n, const real_vec& xi, const multi_index& beta) const
    {
        if (!leq(lo, n) || !leq(n, hi)) return 0.0;
        return deriv(n, xi, beta);
    }
};

/// f(n, xi) = sum_q c_q(n) exp(i <omega_q, xi>) with random complex c_q on the box [0, box]^d1.
inline smooth_symbol random_exponential_symbol(int d1, int d2, int box, int modes, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uc(-1.0, 1.0), uw(-2.0, 2.0);
    auto omegas = std::make_shared<std::vector<real_vec>>();
    for (int q = 0; q < modes; ++q) {
        real_vec w(d2);
        for (int k = 0; k < d2; ++k) w[k] = uw(rng);
        omegas->push_back(w);
    }
    auto coeffs = std::make_shared<std::map<multi_index, std::vector<complex>>>();
    for_each_in_box(multi_index(d1, 0), multi_index(d1, box), [&](const multi_index& n) {
        std::vector<complex> c(static_cast<std::size_t>(modes));
        for (auto& v : c) v = complex(uc(rng), uc(rng));
        (*coeffs)[n] = c;
    });
    smooth_symbol s;
    s.d1 = d1;
    s.d2 = d2;
    s.lo = multi_index(d1, 0);
    s.hi = multi_index(d1, box);
    s.deriv = [omegas, coeffs](const multi_index& n, const real_vec& xi, const multi_index& beta) {
        const auto& c = coeffs->at(n);
        complex acc = 0;
        for (std::size_t q = 0; q < omegas->size(); ++q) {
            const real_vec& w = (*omegas)[q];
            double phase = 0;
            complex pre = c[q];
            for (int k = 0; k < xi.size(); ++k) {
                phase += w[k] * xi[k];
                pre *= std::pow(complex(0, w[k]), beta[k]);
            }
            acc += pre * std::exp(complex(0, phase));
        }
        return acc;
    };
    return s;
}

struct sample_point
{
    real_vec x1; // x'
    real_vec y1; // y'
    real_vec xi;
};

namespace detail
{

// h_l(sqrt|xi| u_j) for l <= lmax, per axis.
inline std::vector<std::vector<double>> axis_tables(const real_vec& u, double abs_xi, int lmax)
{
    std::vector<std::vector<double>> t;
    for (int j = 0; j < u.size(); ++j) t.push_back(hermite::hermite_values(lmax, std::sqrt(abs_xi) * u[j]));
    return t;
}

inline double tensor_from_tables(const std::vector<std::vector<double>>& t, const multi_index& n)
{
    double p = 1;
    for (int j = 0; j < n.size(); ++j) {
        if (n[j] < 0 || n[j] >= static_cast<int>(t[static_cast<std::size_t>(j)].size())) return 0;
        p *= t[static_cast<std::size_t>(j)][static_cast<std::size_t>(n[j])];
    }
    return p;
}

// 4th-order central stencils for derivatives of order 1..4: offsets and weights (times h^-order).
inline std::vector<std::pair<int, double>> central_stencil(int order)
{
    switch (order) {
    case 0: return {{0, 1.0}};
    case 1: return {{-2, 1.0 / 12}, {-1, -8.0 / 12}, {1, 8.0 / 12}, {2, -1.0 / 12}};
    case 2: return {{-2, -1.0 / 12}, {-1, 16.0 / 12}, {0, -30.0 / 12}, {1, 16.0 / 12}, {2, -1.0 / 12}};
    case 3: return {{-3, 1.0 / 8}, {-2, -1.0}, {-1, 13.0 / 8}, {1, -13.0 / 8}, {2, 1.0}, {3, -1.0 / 8}};
    case 4:
        return {{-3, -1.0 / 6}, {-2, 2.0}, {-1, -13.0 / 2}, {0, 28.0 / 3}, {1, -13.0 / 2}, {2, 2.0}, {3, -1.0 / 6}};
    default: throw refusal("central_stencil: derivative order above 4");
    }
}

} // namespace detail

/// Value of sum_n g(n, xi) h~_{n+2r}(y', xi) h~_n(x', xi) for the n-range where g may be nonzero.
template <typename G>
complex hermite_pair_sum(const G& g, const multi_index& nlo, const multi_index& nhi, const multi_index& r,
                         const sample_point& p, const real_vec& xi, int lmax)
{
    const double a = norm2(xi);
    const auto tx = detail::axis_tables(p.x1, a, lmax);
    const auto ty = detail::axis_tables(p.y1, a, lmax);
    const int d1 = nlo.size();
    multi_index lo = nlo;
    for (int j = 0; j < d1; ++j) lo[j] = std::max({lo[j], 0, -2 * r[j]});
    complex acc = 0;
    for_each_in_box(lo, nhi, [&](const multi_index& n) {
        const double hx = detail::tensor_from_tables(tx, n);
        if (hx == 0) return;
        const double hy = detail::tensor_from_tables(ty, n + 2 * r);
        if (hy == 0) return;
        acc += g(n) * hx * hy;
    });
    return acc * std::pow(a, 0.5 * d1);
}

/// Right-hand side contribution of a single term.
inline complex evaluate_term(const expansion_term& t, const smooth_symbol& f, const sample_point& p, int lmax)
{
    multi_index nlo = f.lo - 2 * t.alpha_tilde;
    multi_index nhi = f.hi - 2 * t.alpha_tilde + 2 * t.alpha;
    auto g = [&](const multi_index& n) {
        complex v = 0;
        shift_difference_stencil(t.alpha_tilde, t.alpha, [&](std::int64_t w, const multi_index& m) {
            v += static_cast<double>(w) * f(n + m, p.xi, t.beta_iota);
        });
        return v * n_product_multiplier<double>(t.factors, n);
    };
    return t.coeff.to_double() * t.theta.eval(p.xi) * hermite_pair_sum(g, nlo, nhi, t.r, p, p.xi, lmax);
}

struct verify_options
{
    double step_ratio = 1e-4; // FD step relative to |xi|
};

struct verify_result
{
    double max_relative_error = 0; // max_i |lhs_i - rhs_i| / max_i |lhs_i|
    double max_abs_error = 0;
    double lhs_scale = 0;
    std::size_t term_count = 0;
};

/// Checks d^beta_xi of sum_n f h~_{n+2r}(y') h~_n(x') against the expanded sum
/// applied to the base term with shift r (r = 0 gives the plain kernel sum).
inline verify_result verify_expansion(const multi_index& beta, const smooth_symbol& f,
                                      const std::vector<sample_point>& samples, const verify_options& opt = {},
                                      const multi_index* base_shift = nullptr)
{
    expansion_term base = identity_term(f.d1, f.d2);
    if (base_shift) base.r = *base_shift;
    const auto terms = expand({base}, beta);
    const int lmax = std::max(0, *std::max_element(f.hi.begin(), f.hi.end())) + 4 * norm1(beta) + 2 * norm1(base.r) + 8;

    std::vector<complex> lhs(samples.size()), rhs(samples.size());
    parallel_for(samples.size(), [&](std::size_t i) {
        const sample_point& p = samples[i];
        const double h = opt.step_ratio * norm2(p.xi);
        const multi_index zero(f.d2, 0);
        auto plain = [&](const real_vec& xi) {
            auto g = [&](const multi_index& n) { return f(n, xi, zero); };
            return hermite_pair_sum(g, f.lo, f.hi, base.r, p, xi, lmax);
        };
        // tensor product of 1D stencils
        std::vector<std::vector<std::pair<int, double>>> st;
        for (int k = 0; k < f.d2; ++k) st.push_back(detail::central_stencil(beta[k]));
        complex d = 0;
        multi_index lo(f.d2, 0), hi(f.d2, 0);
        for (int k = 0; k < f.d2; ++k) hi[k] = static_cast<int>(st[static_cast<std::size_t>(k)].size()) - 1;
        for_each_in_box(lo, hi, [&](const multi_index& pick) {
            real_vec xi = p.xi;
            double w = 1;
            for (int k = 0; k < f.d2; ++k) {
                const auto& [off, wk] = st[static_cast<std::size_t>(k)][static_cast<std::size_t>(pick[k])];
                xi[k] += off * h;
                w *= wk;
            }
            d += w * plain(xi);
        });
        lhs[i] = d / std::pow(h, norm1(beta));
        complex s = 0;
        for (const auto& t : terms) s += evaluate_term(t, f, p, lmax);
        rhs[i] = s;
    });

    verify_result res;
    res.term_count = terms.size();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        res.lhs_scale = std::max(res.lhs_scale, std::abs(lhs[i]));
        res.max_abs_error = std::max(res.max_abs_error, std::abs(lhs[i] - rhs[i]));
    }
    res.max_relative_error = res.lhs_scale > 0 ? res.max_abs_error / res.lhs_scale : res.max_abs_error;
    return res;
}

/// Random sample points with |xi| in [xi_lo, xi_hi] and x', y' in [-spread, spread]^d1.
inline std::vector<sample_point> random_samples(int d1, int d2, int count, std::uint64_t seed, double xi_lo = 0.5,
                                                double xi_hi = 2.0, double spread = 1.5)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(-spread, spread), un(-1.0, 1.0), ur(xi_lo, xi_hi);
    std::vector<sample_point> out;
    for (int i = 0; i < count; ++i) {
        sample_point p{real_vec(d1), real_vec(d1), real_vec(d2)};
        for (int j = 0; j < d1; ++j) {
            p.x1[j] = ux(rng);
            p.y1[j] = ux(rng);
        }
        real_vec dir(d2);
        double nrm = 0;
        while (nrm < 0.1) {
            for (int k = 0; k < d2; ++k) dir[k] = un(rng);
            nrm = norm2(dir);
        }
        const double rad = ur(rng);
        for (int k = 0; k < d2; ++k) p.xi[k] = dir[k] / nrm * rad;
        out.push_back(p);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Discrete differences versus integrals of derivatives

/// One-variable factor of a separable smooth extension, with all derivatives.
struct factor_1d
{
    std::function<double(double, int)> deriv; // (t, order) -> d^order g(t)
};

inline factor_1d polynomial_factor(std::vector<double> coeffs)
{
    return {[coeffs](double t, int order) {
        double s = 0;
        for (std::size_t k = static_cast<std::size_t>(order); k < coeffs.size(); ++k) {
            double c = coeffs[k];
            for (int q = 0; q < order; ++q) c *= static_cast<double>(k - static_cast<std::size_t>(q));
            s += c * std::pow(t, static_cast<double>(k - static_cast<std::size_t>(order)));
        }
        return s;
    }};
}

inline factor_1d sine_factor(double omega, double phase)
{
    return {[omega, phase](double t, int order) { return std::pow(omega, order) * std::sin(omega * t + phase + order * pi / 2); }};
}

inline factor_1d exp_factor(double lambda)
{
    return {[lambda](double t, int order) { return std::pow(lambda, order) * std::exp(lambda * t); }};
}

/// f~(t) = prod_j g_j(t_j).
struct separable_extension
{
    std::vector<factor_1d> factors;

    double value(const real_vec& t) const { return derivative(t, multi_index(static_cast<int>(factors.size()), 0)); }
    double derivative(const real_vec& t, const multi_index& alpha) const
    {
        double p = 1;
        for (std::size_t j = 0; j < factors.size(); ++j) p *= factors[j].deriv(t[static_cast<int>(j)], alpha[static_cast<int>(j)]);
        return p;
    }
};

struct d2c_options
{
    int gl_order = 12;
    int max_tensor_order = 4; // |alpha|_1 above this uses Monte-Carlo
    std::size_t mc_samples = 100000;
    std::uint64_t seed = 1;
};

struct d2c_result
{
    double max_discrepancy = 0;
    std::string method;
};

/// Compares tau^at delta^a f(n) with 2^{|a|} int d^a f~(n - s) dnu(s), nu being the push-forward of
/// the uniform law on prod_j [0,1]^{a_j} under s_j = 2|s_j|_1 - 2 at_j.
inline d2c_result discrete_to_continuous_check(const separable_extension& ext, const multi_index& alpha,
                                               const multi_index& alpha_tilde, const std::vector<multi_index>& grid,
                                               const d2c_options& opt = {})
{
    if (!nonnegative(alpha)) throw std::invalid_argument("discrete_to_continuous_check: alpha must be nonnegative");
    const int d = alpha.size();
    const int total = norm1(alpha);
    d2c_result res;

    // sample sets on [0,1]^total with weights summing to 1
    std::vector<std::vector<double>> pts;
    std::vector<double> wts;
    if (total <= opt.max_tensor_order) {
        res.method = "tensor Gauss-Legendre";
        const auto rule = quadrature::gauss_legendre(opt.gl_order, 0.0, 1.0);
        if (total == 0) {
            pts.push_back({});
            wts.push_back(1.0);
        } else {
            std::vector<int> idx(static_cast<std::size_t>(total), 0);
            while (true) {
                std::vector<double> p(static_cast<std::size_t>(total));
                double w = 1;
                for (int i = 0; i < total; ++i) {
                    p[static_cast<std::size_t>(i)] = rule.nodes[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
                    w *= rule.weights[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
                }
                pts.push_back(std::move(p));
                wts.push_back(w);
                int ax = total - 1;
                while (ax >= 0 && ++idx[static_cast<std::size_t>(ax)] == opt.gl_order) idx[static_cast<std::size_t>(ax--)] = 0;
                if (ax < 0) break;
            }
        }
    } else {
        res.method = "Monte-Carlo";
        std::mt19937_64 rng(opt.seed);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (std::size_t s = 0; s < opt.mc_samples; ++s) {
            std::vector<double> p(static_cast<std::size_t>(total));
            for (double& v : p) v = u(rng);
            pts.push_back(std::move(p));
            wts.push_back(1.0 / static_cast<double>(opt.mc_samples));
        }
    }

    for (const auto& n : grid) {
        double lhs = 0;
        shift_difference_stencil(alpha_tilde, alpha, [&](std::int64_t w, const multi_index& m) {
            real_vec t(d);
            for (int j = 0; j < d; ++j) t[j] = n[j] + m[j];
            lhs += static_cast<double>(w) * ext.value(t);
        });
        double rhs = 0;
        for (std::size_t q = 0; q < pts.size(); ++q) {
            real_vec t(d);
            int off = 0;
            for (int j = 0; j < d; ++j) {
                double s = 0;
                for (int i = 0; i < alpha[j]; ++i) s += pts[q][static_cast<std::size_t>(off + i)];
                off += alpha[j];
                t[j] = n[j] - (2 * s - 2 * alpha_tilde[j]);
            }
            rhs += wts[q] * ext.derivative(t, alpha);
        }
        rhs *= std::pow(2.0, total);
        res.max_discrepancy = std::max(res.max_discrepancy, std::abs(lhs - rhs));
    }
    return res;
}

// ---------------------------------------------------------------------------
// Coefficient bounds for composition products

struct coefficient_bound_report
{
    std::vector<multi_index> violations; // points where the product should vanish but does not
    double empirical_constant = 0;       // sup |N f| / (|f| prod (2|n_j|+1)^{u_j - sum s})
};

inline coefficient_bound_report coefficient_bound_check(const n_product& prod, const multi_index& lo,
                                                        const multi_index& hi,
                                                        const std::function<double(const multi_index&)>& f)
{
    const int d1 = lo.size();
    std::vector<int> vanish_below(static_cast<std::size_t>(d1), std::numeric_limits<int>::min());
    std::vector<int> exponent(static_cast<std::size_t>(d1), 0);
    for (const auto& fac : prod) {
        vanish_below[static_cast<std::size_t>(fac.axis)] = std::max(vanish_below[static_cast<std::size_t>(fac.axis)], 2 * (1 - fac.rho));
        exponent[static_cast<std::size_t>(fac.axis)] += 1 - fac.s;
    }
    coefficient_bound_report rep;
    for_each_in_box(lo, hi, [&](const multi_index& n) {
        const double fv = f(n);
        const double v = n_product_multiplier<double>(prod, n) * fv;
        bool must_vanish = false;
        for (int j = 0; j < d1; ++j) must_vanish = must_vanish || n[j] < vanish_below[static_cast<std::size_t>(j)];
        if (must_vanish) {
            if (v != 0) rep.violations.push_back(n);
            return;
        }
        if (fv == 0) return;
        double env = std::abs(fv);
        for (int j = 0; j < d1; ++j) env *= std::pow(2.0 * std::abs(n[j]) + 1, exponent[static_cast<std::size_t>(j)]);
        rep.empirical_constant = std::max(rep.empirical_constant, std::abs(v) / env);
    });
    return rep;
}

} // namespace grushin::expansion

#endif // GRUSHIN_EXPANSION_HPP
