#ifndef GRUSHIN_DIFFOPS_HPP
#define GRUSHIN_DIFFOPS_HPP

// Shift, difference and weighted-multiplication operators acting on the
// Hermite index of symbols f(n, xi), n in Z^d1.

#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <vector>

#include "core.hpp"
#include "hermite.hpp"

namespace grushin
{

/// Exact finite sum  sum_k c_k sqrt(k)  over squarefree k with integer c_k.
/// Closed under +, -, * and comparison is exact because square roots of
/// distinct squarefree integers are linearly independent over Q.
class surd
{
public:
    surd() = default;
    surd(std::int64_t c)
    {
        if (c != 0) terms_[1] = c;
    }

    /// sqrt(v) for v >= 0, reduced to k*sqrt(squarefree).
    static surd sqrt_of(std::int64_t v)
    {
        if (v < 0) throw std::domain_error("surd: negative radicand");
        surd s;
        if (v == 0) return s;
        std::int64_t outside = 1, inside = 1, rest = v;
        for (std::int64_t p = 2; p * p <= rest; ++p) {
            int e = 0;
            while (rest % p == 0) {
                rest /= p;
                ++e;
            }
            for (int i = 0; i < e / 2; ++i) outside *= p;
            if (e % 2) inside *= p;
        }
        inside *= rest;
        s.terms_[inside] = outside;
        return s;
    }

    const std::map<std::int64_t, std::int64_t>& terms() const { return terms_; }

    double to_double() const
    {
        double s = 0;
        for (auto [k, c] : terms_) s += static_cast<double>(c) * std::sqrt(static_cast<double>(k));
        return s;
    }

    friend surd operator+(surd a, const surd& b)
    {
        for (auto [k, c] : b.terms_) a.add(k, c);
        return a;
    }
    friend surd operator-(surd a, const surd& b)
    {
        for (auto [k, c] : b.terms_) a.add(k, -c);
        return a;
    }
    friend surd operator-(const surd& a) { return surd{} - a; }
    surd& operator+=(const surd& b) { return *this = *this + b; }
    surd& operator-=(const surd& b) { return *this = *this - b; }

    friend surd operator*(const surd& a, const surd& b)
    {
        surd r;
        for (auto [ka, ca] : a.terms_) {
            for (auto [kb, cb] : b.terms_) {
                // sqrt(ka kb) = g sqrt((ka/g)(kb/g)), g = gcd, result squarefree
                const std::int64_t g = std::gcd(ka, kb);
                r.add((ka / g) * (kb / g), ca * cb * g);
            }
        }
        return r;
    }
    surd& operator*=(const surd& b) { return *this = *this * b; }

    friend bool operator==(const surd&, const surd&) = default;

    friend std::ostream& operator<<(std::ostream& os, const surd& s)
    {
        if (s.terms_.empty()) return os << "0";
        bool first = true;
        for (auto [k, c] : s.terms_) {
            if (!first) os << " + ";
            first = false;
            os << c;
            if (k != 1) os << "*sqrt(" << k << ")";
        }
        return os;
    }

private:
    void add(std::int64_t k, std::int64_t c)
    {
        if (c == 0) return;
        auto [it, inserted] = terms_.try_emplace(k, c);
        if (!inserted) {
            it->second += c;
            if (it->second == 0) terms_.erase(it);
        }
    }

    std::map<std::int64_t, std::int64_t> terms_;
};

/// Value types usable with the operators: the a_l coefficients in that type.
template <typename V>
struct value_traits;

template <>
struct value_traits<double>
{
    static double a(long ell) { return hermite::a_coeff(ell); }
};

template <>
struct value_traits<complex>
{
    static complex a(long ell) { return hermite::a_coeff(ell); }
};

template <>
struct value_traits<surd>
{
    static surd a(long ell) { return ell > 0 ? surd::sqrt_of(ell * (ell - 1)) : surd{}; }
};

/// A function Z^d1 x R^d2 -> V together with a box in Z^d1 outside which it vanishes.
template <typename V>
struct lattice_symbol
{
    using eval_fn = std::function<V(const multi_index&, const real_vec&)>;

    int d1 = 1;
    multi_index lo, hi;
    eval_fn fn;

    V operator()(const multi_index& n, const real_vec& xi) const
    {
        if (!fn) return V{};
        for (int j = 0; j < d1; ++j) {
            if (n[j] < lo[j] || n[j] > hi[j]) return V{};
        }
        return fn(n, xi);
    }

    static lattice_symbol zero(int d1)
    {
        return {d1, multi_index(d1, 0), multi_index(d1, -1), {}};
    }
};

/// tau^alpha f(n) = f(n + 2 alpha), alpha in Z^d1.
template <typename V>
lattice_symbol<V> shift(const lattice_symbol<V>& f, const multi_index& alpha)
{
    lattice_symbol<V> g = f;
    g.lo = f.lo - 2 * alpha;
    g.hi = f.hi - 2 * alpha;
    g.fn = [f, alpha](const multi_index& n, const real_vec& xi) { return f(n + 2 * alpha, xi); };
    return g;
}

/// delta^alpha f, delta_j f(n) = f(n) - f(n - 2 e_j), alpha in N^d1.
template <typename V>
lattice_symbol<V> difference(const lattice_symbol<V>& f, const multi_index& alpha)
{
    if (!nonnegative(alpha)) throw std::invalid_argument("difference: negative exponent");
    lattice_symbol<V> g = f;
    for (int j = 0; j < f.d1; ++j) {
        for (int k = 0; k < alpha[j]; ++k) {
            const lattice_symbol<V> prev = g;
            const multi_index step = multi_index::unit(f.d1, j, 2);
            g.hi[j] += 2;
            g.fn = [prev, step](const multi_index& n, const real_vec& xi) { return prev(n, xi) - prev(n - step, xi); };
        }
    }
    return g;
}

/// N_{j,rho,s} as a record; axis is 0-based.
struct n_factor
{
    int axis = 0;
    int rho = 0;
    int s = 0;

    friend bool operator==(const n_factor&, const n_factor&) = default;
    friend auto operator<=>(const n_factor&, const n_factor&) = default;
};

/// Multiplier of N_{j,rho,s} at n via the defining recursion in s.
template <typename V>
V n_multiplier_recursive(const n_factor& f, const multi_index& n)
{
    if (f.s < 0) throw std::invalid_argument("n_factor: negative s");
    if (f.s == 0) return value_traits<V>::a(static_cast<long>(n[f.axis]) + 2 * f.rho);
    return n_multiplier_recursive<V>({f.axis, f.rho, f.s - 1}, n) - n_multiplier_recursive<V>({f.axis, f.rho - 1, f.s - 1}, n);
}

/// Multiplier of N_{j,rho,s} at n in closed form (tau_j^rho delta_j^s w)(n), w(n) = a_{n_j}.
template <typename V>
V n_multiplier(const n_factor& f, const multi_index& n)
{
    if (f.s < 0) throw std::invalid_argument("n_factor: negative s");
    V acc{};
    for (int k = 0; k <= f.s; ++k) {
        const V term = V(static_cast<std::int64_t>(binomial(f.s, k))) *
                       value_traits<V>::a(static_cast<long>(n[f.axis]) + 2 * (f.rho - k));
        if (k % 2 == 0)
            acc += term;
        else
            acc -= term;
    }
    return acc;
}

/// N_{j,rho,s} f.
template <typename V>
lattice_symbol<V> n_apply(const lattice_symbol<V>& f, const n_factor& factor)
{
    lattice_symbol<V> g = f;
    g.fn = [f, factor](const multi_index& n, const real_vec& xi) { return n_multiplier<V>(factor, n) * f(n, xi); };
    return g;
}

/// Composition product of N factors, all multiplication operators (so they commute).
using n_product = std::vector<n_factor>;

template <typename V>
V n_product_multiplier(const n_product& p, const multi_index& n)
{
    V acc(std::int64_t{1});
    for (const auto& f : p) acc = acc * n_multiplier<V>(f, n);
    return acc;
}

/// (tau^shift delta^alpha g)(n) expressed through samples of g.
/// Calls visit(weight, m) for each n-offset m with g(n + m) weighted by an integer.
template <typename Visit>
void shift_difference_stencil(const multi_index& shift_alpha, const multi_index& alpha, Visit&& visit)
{
    const int d = alpha.size();
    multi_index lo(d, 0);
    for_each_in_box(lo, alpha, [&](const multi_index& k) {
        std::int64_t w = 1;
        for (int j = 0; j < d; ++j) {
            w *= static_cast<std::int64_t>(binomial(alpha[j], k[j]));
            if (k[j] % 2) w = -w;
        }
        visit(w, 2 * (shift_alpha - k));
    });
}

inline std::string to_string(const n_factor& f)
{
    std::ostringstream os;
    os << "N(" << f.axis + 1 << "," << f.rho << "," << f.s << ")";
    return os.str();
}

} // namespace grushin

#endif // GRUSHIN_DIFFOPS_HPP
