#ifndef GRUSHIN_MULTIPLIERS_HPP
#define GRUSHIN_MULTIPLIERS_HPP

#include <fftw3.h>

#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "core.hpp"
#include "quadrature.hpp"

namespace grushin
{

/// Spectral multiplier F: R -> C. When `bounded`, F vanishes outside [lo, hi].
struct multiplier1d
{
    std::function<complex(double)> fn;
    double lo = 0;
    double hi = 0;
    bool bounded = false;
    std::string tag;

    complex operator()(double lambda) const
    {
        if (bounded && (lambda < lo || lambda > hi)) return 0.0;
        return fn(lambda);
    }
};

namespace multipliers
{

// heat multipliers are cut where e^{-t lambda} drops below this
inline constexpr double heat_floor = 1e-14;

inline multiplier1d zero()
{
    return {[](double) { return complex(0); }, 0, 0, true, "zero"};
}

inline multiplier1d one()
{
    return {[](double) { return complex(1); }, 0, 0, false, "one"};
}

inline multiplier1d heat(double t)
{
    if (t < 0) throw std::invalid_argument("heat: t must be nonnegative");
    if (t == 0) return one();
    return {[t](double l) { return complex(std::exp(-t * l)); }, 0, -std::log(heat_floor) / t, true,
            "heat(t=" + std::to_string(t) + ")"};
}

/// (1 - t lambda)_+^kappa on lambda >= 0.
inline multiplier1d bochner_riesz(double kappa, double t)
{
    if (kappa < 0 || t < 0) throw std::invalid_argument("bochner_riesz: kappa and t must be nonnegative");
    if (t == 0) return one();
    return {[kappa, t](double l) {
                const double v = 1 - t * l;
                return complex(v > 0 ? std::pow(v, kappa) : 0.0);
            },
            0, 1 / t, true, "bochner_riesz(kappa=" + std::to_string(kappa) + ",t=" + std::to_string(t) + ")"};
}

/// lambda^{i tau0} for lambda > 0.
inline multiplier1d mihlin_oscillation(double tau0)
{
    return {[tau0](double l) { return l > 0 ? std::exp(complex(0, tau0 * std::log(l))) : complex(0); }, 0, 0, false,
            "mihlin_oscillation(tau0=" + std::to_string(tau0) + ")"};
}

/// exp(1 - 1/(1-u^2)) with u the affine map of (a, b) onto (-1, 1); peak value 1.
inline multiplier1d smooth_bump(double a, double b)
{
    if (!(a < b)) throw std::invalid_argument("smooth_bump: need a < b");
    return {[a, b](double l) {
                const double u = (2 * l - a - b) / (b - a);
                if (std::abs(u) >= 1) return complex(0);
                return complex(std::exp(1 - 1 / (1 - u * u)));
            },
            a, b, true, "smooth_bump(" + std::to_string(a) + "," + std::to_string(b) + ")"};
}

/// e^{-t lambda} - e^{-2 t lambda}: vanishes at 0, peaks at ln 2 / t, cut like the heat multiplier.
inline multiplier1d heat_bump(double t)
{
    if (!(t > 0)) throw std::invalid_argument("heat_bump: t must be positive");
    return {[t](double l) { return complex(std::exp(-t * l) - std::exp(-2 * t * l)); }, 0, -std::log(heat_floor) / t, true,
            "heat_bump(t=" + std::to_string(t) + ")"};
}

/// exp(-(lambda - c)^2 / (2 w^2)), cut where it drops below 1e-16 (and at 0).
inline multiplier1d gaussian_bump(double c, double w)
{
    if (!(w > 0)) throw std::invalid_argument("gaussian_bump: width must be positive");
    const double reach = w * std::sqrt(2 * std::log(1e16));
    return {[c, w](double l) { return complex(std::exp(-(l - c) * (l - c) / (2 * w * w))); }, std::max(0.0, c - reach),
            c + reach, true, "gaussian_bump(" + std::to_string(c) + "," + std::to_string(w) + ")"};
}

inline multiplier1d product(const multiplier1d& f, const multiplier1d& g)
{
    multiplier1d h;
    h.fn = [f, g](double l) { return f(l) * g(l); };
    h.bounded = f.bounded || g.bounded;
    if (f.bounded && g.bounded) {
        h.lo = std::max(f.lo, g.lo);
        h.hi = std::max(h.lo, std::min(f.hi, g.hi));
    } else if (f.bounded) {
        h.lo = f.lo;
        h.hi = f.hi;
    } else {
        h.lo = g.lo;
        h.hi = g.hi;
    }
    h.tag = f.tag + "*" + g.tag;
    return h;
}

inline multiplier1d scaled(const multiplier1d& f, complex c)
{
    multiplier1d h = f;
    h.fn = [f, c](double l) { return c * f(l); };
    return h;
}

/// F_(r)(lambda) = F(r lambda).
inline multiplier1d dilated(const multiplier1d& f, double r)
{
    if (!(r > 0)) throw std::invalid_argument("dilated: r must be positive");
    multiplier1d h = f;
    h.fn = [f, r](double l) { return f(r * l); };
    h.lo = f.lo / r;
    h.hi = f.hi / r;
    h.tag = f.tag + "(" + std::to_string(r) + " .)";
    return h;
}

/// Piecewise-linear interpolation of samples (lambda, F), zero outside the sampled range.
inline multiplier1d sampled(std::vector<double> lambdas, std::vector<complex> values)
{
    if (lambdas.size() < 2 || lambdas.size() != values.size()) throw std::invalid_argument("sampled: need >= 2 samples");
    for (std::size_t i = 1; i < lambdas.size(); ++i) {
        if (!(lambdas[i] > lambdas[i - 1])) throw std::invalid_argument("sampled: lambdas must increase");
    }
    const double lo = lambdas.front(), hi = lambdas.back();
    auto xs = std::make_shared<std::vector<double>>(std::move(lambdas));
    auto ys = std::make_shared<std::vector<complex>>(std::move(values));
    return {[xs, ys](double l) {
                auto it = std::upper_bound(xs->begin(), xs->end(), l);
                if (it == xs->begin()) return (*ys)[0];
                if (it == xs->end()) return ys->back();
                const std::size_t i = static_cast<std::size_t>(it - xs->begin());
                const double w = (l - (*xs)[i - 1]) / ((*xs)[i] - (*xs)[i - 1]);
                return (1 - w) * (*ys)[i - 1] + w * (*ys)[i];
            },
            lo, hi, true, "sampled"};
}

/// CSV rows "lambda,re,im" (a header line is skipped if present).
inline multiplier1d load_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open multiplier file " + path);
    std::vector<double> xs;
    std::vector<complex> ys;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        double l, re, im = 0;
        if (!(row >> l >> re)) continue; // header
        row >> im;
        xs.push_back(l);
        ys.push_back({re, im});
    }
    auto m = sampled(std::move(xs), std::move(ys));
    m.tag = "csv:" + path;
    return m;
}

} // namespace multipliers

// ---------------------------------------------------------------------------
// Sobolev norms

struct sobolev_options
{
    int points = 1 << 14;
    double tail_tolerance = 1e-12;      // |F| near the window edges, relative to max |F|
    double spectral_tolerance = 1e-10; // weighted energy fraction in the top quarter of frequencies
    double energy_floor = 1e-28;       // unresolved energy below this (absolute) is ignored
};

namespace detail
{

inline std::mutex& fftw_plan_mutex()
{
    static std::mutex m;
    return m;
}

} // namespace detail

/// ( (1/2pi) int (1 + tau^2)^s |F^(tau)|^2 dtau )^{1/2} for F sampled on [lo, hi] (periodically
/// extended), F^(tau) = int F(lambda) e^{-i tau lambda} dlambda. s = 0 gives the L2 norm.
inline double sobolev_norm(const std::function<complex(double)>& f, double s, double lo, double hi,
                           const sobolev_options& opt = {})
{
    if (s < 0) throw std::invalid_argument("sobolev_norm: negative order");
    const int n = opt.points;
    const double h = (hi - lo) / n;
    fftw_complex* buf = fftw_alloc_complex(static_cast<std::size_t>(n));
    double peak = 0;
    for (int k = 0; k < n; ++k) {
        const complex v = f(lo + k * h);
        buf[k][0] = v.real();
        buf[k][1] = v.imag();
        peak = std::max(peak, std::abs(v));
    }
    if (peak == 0) {
        fftw_free(buf);
        return 0;
    }
    const int edge = std::max(1, n / 100);
    for (int k = 0; k < edge; ++k) {
        for (int idx : {k, n - 1 - k}) {
            if (std::hypot(buf[idx][0], buf[idx][1]) > opt.tail_tolerance * peak) {
                fftw_free(buf);
                throw numerical_failure("sobolev_norm: multiplier not negligible at the window edge");
            }
        }
    }
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
        plan = fftw_plan_dft_1d(n, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
        fftw_destroy_plan(plan);
    }
    std::vector<double> terms(static_cast<std::size_t>(n));
    double high = 0;
    for (int m = 0; m < n; ++m) {
        const int freq = m < n / 2 ? m : m - n;
        const double tau = 2 * pi * freq / (n * h);
        const double e = std::pow(1 + tau * tau, s) * (buf[m][0] * buf[m][0] + buf[m][1] * buf[m][1]);
        terms[static_cast<std::size_t>(m)] = e;
        if (std::abs(freq) > 3 * n / 8) high += e;
    }
    fftw_free(buf);
    const double total = pairwise_sum<double>(terms);
    if (high > opt.spectral_tolerance * total && h / n * high > opt.energy_floor) {
        throw numerical_failure("sobolev_norm: grid does not resolve the multiplier (high-frequency energy)");
    }
    return std::sqrt(h / n * total);
}

/// Window for a bounded multiplier: support plus half its length on each side.
inline double sobolev_norm(const multiplier1d& f, double s, const sobolev_options& opt = {})
{
    if (!f.bounded) throw refusal("sobolev_norm: unbounded support needs an explicit window");
    if (f.hi <= f.lo) return 0;
    const double pad = 0.5 * (f.hi - f.lo);
    return sobolev_norm([&f](double l) { return f(l); }, s, f.lo - pad, f.hi + pad, opt);
}

/// The fixed cutoff eta: smooth, supported in [1/2, 2], peak 1 at 5/4.
inline double eta(double lambda)
{
    if (lambda <= 0.5 || lambda >= 2) return 0;
    return std::exp(-1 / ((lambda - 0.5) * (2 - lambda)) + 1 / 0.5625);
}

/// sup over t in t_grid of || eta F(t .) ||_{W_2^s}.
inline double local_sobolev_norm(const multiplier1d& f, double s, const std::vector<double>& t_grid,
                                 const sobolev_options& opt = {})
{
    std::vector<double> vals(t_grid.size());
    parallel_for(t_grid.size(), [&](std::size_t i) {
        const double t = t_grid[i];
        vals[i] = sobolev_norm([&](double l) { return eta(l) * f(t * l); }, s, 0.375, 2.125, opt);
    });
    return vals.empty() ? 0 : *std::max_element(vals.begin(), vals.end());
}

/// Log grid with 129 points per decade covering [inf supp / 2, 2 sup supp].
inline std::vector<double> default_t_grid(const multiplier1d& f, int per_decade = 129)
{
    if (!f.bounded || f.hi <= 0) throw refusal("default_t_grid: needs bounded support");
    const double lo = f.lo > 0 ? f.lo / 2 : f.hi * 1e-3;
    return logspace(lo, 2 * f.hi, per_decade);
}

// ---------------------------------------------------------------------------
// Truncation and joint symbols

/// Smooth step: 0 for s <= 0, 1 for s >= 1.
inline double smooth_step(double s)
{
    if (s <= 0) return 0;
    if (s >= 1) return 1;
    const double a = std::exp(-1 / s), b = std::exp(-1 / (1 - s));
    return a / (a + b);
}

/// chi(t) = S(log2 t + 1) - S(log2 t): supported in [1/2, 2], sum_{k in Z} chi(2^-k t) = 1.
inline double chi(double t)
{
    if (t <= 0.5 || t >= 2) return 0;
    const double l = std::log2(t);
    return smooth_step(l + 1) - smooth_step(l);
}

/// Reparametrized symbol m(n, xi) on Z^d1 x R^d2. Two forms:
/// level form m = level(|n|_1, |xi|) (functions of L and truncations), or a general form.
struct joint_symbol
{
    int d1 = 1, d2 = 1;
    std::function<complex(int, double)> level;
    std::function<std::pair<int, int>(double)> level_range; // levels where level(.,rho) may be nonzero
    std::function<complex(const multi_index&, const real_vec&)> general;
    int n_cap = 0; // general form: support box [0, n_cap]^d1
    double xi_min = 0, xi_max = 0;
    double lambda_max = 0; // bound for |xi| <n> on the support
    /// lim_{xi -> 0} of the inner Hermite sum, i.e. the kernel of the symbol's xi = 0 slice at (x', y').
    std::function<complex(const real_vec&, const real_vec&)> zero_limit;
    std::string tag;

    bool is_level() const { return static_cast<bool>(level); }

    complex operator()(const multi_index& n, const real_vec& xi) const
    {
        if (!nonnegative(n)) return 0.0;
        if (is_level()) return level(norm1(n), norm2(xi));
        if (!general) return 0.0;
        return general(n, xi);
    }
};

/// Kernel of F(-Delta) on R^d1 at distance r: (2 pi)^{-d1} int F(|eta|^2) e^{i eta.v} d eta.
inline complex euclidean_kernel(const multiplier1d& f, int d1, double r)
{
    if (!f.bounded) throw refusal("euclidean_kernel: needs bounded support");
    const double ka = std::sqrt(std::max(0.0, f.lo)), kb = std::sqrt(std::max(0.0, f.hi));
    if (kb <= ka) return 0.0;
    // uniform panels, geometrically graded towards both ends (endpoint singularities)
    std::vector<double> breaks;
    const int uniform = 48 + static_cast<int>(std::ceil((kb - ka) * r / pi));
    for (int i = 0; i <= uniform; ++i) breaks.push_back(ka + (kb - ka) * i / uniform);
    const double w = (kb - ka) / uniform;
    std::vector<double> extra;
    for (int j = 1; j <= 40; ++j) {
        extra.push_back(ka + w * std::ldexp(1.0, -j));
        extra.push_back(kb - w * std::ldexp(1.0, -j));
    }
    breaks.insert(breaks.end(), extra.begin(), extra.end());
    std::sort(breaks.begin(), breaks.end());
    const auto rule = quadrature::composite(breaks, 12);
    complex s = 0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const double k = rule.nodes[i];
        double radial;
        switch (d1) {
        case 1: radial = std::cos(k * r) / pi; break;
        case 2: radial = std::cyl_bessel_j(0.0, k * r) * k / (2 * pi); break;
        case 3: radial = (r == 0 ? 1.0 : std::sin(k * r) / (k * r)) * k * k / (2 * pi * pi); break;
        default: throw refusal("euclidean_kernel: d1 must be 1, 2 or 3");
        }
        s += rule.weights[i] * f(k * k) * radial;
    }
    return s;
}

/// m(n, xi) = G(|xi|(2n + 1), xi) on N^d1, 0 elsewhere.
inline joint_symbol reparametrize(std::function<complex(const real_vec&, const real_vec&)> g, int d1, int d2,
                                  int n_cap, double xi_min, double xi_max)
{
    joint_symbol m;
    m.d1 = d1;
    m.d2 = d2;
    m.n_cap = n_cap;
    m.xi_min = xi_min;
    m.xi_max = xi_max;
    m.lambda_max = xi_max * (2 * n_cap + d1);
    m.general = [g, d1](const multi_index& n, const real_vec& xi) {
        if (!nonnegative(n)) return complex(0);
        real_vec lam(d1);
        const double a = norm2(xi);
        for (int j = 0; j < d1; ++j) lam[j] = a * (2 * n[j] + 1);
        return g(lam, xi);
    };
    m.tag = "general";
    return m;
}

/// Symbol of F(L): m(n, xi) = F(|xi| <n>), <n> = 2|n|_1 + d1.
inline joint_symbol spectral_symbol(const multiplier1d& f, int d1, int d2)
{
    if (!f.bounded) throw refusal("spectral_symbol: multiplier must have bounded support");
    joint_symbol m;
    m.d1 = d1;
    m.d2 = d2;
    m.level = [f, d1](int ell, double rho) { return f(rho * (2 * ell + d1)); };
    m.level_range = [f, d1](double rho) {
        if (rho <= 0) return std::pair<int, int>{0, -1};
        const int lo = std::max(0, static_cast<int>(std::ceil((f.lo / rho - d1) / 2)));
        const int hi = static_cast<int>(std::floor((f.hi / rho - d1) / 2));
        return std::pair<int, int>{lo, hi};
    };
    m.xi_min = 0;
    m.xi_max = f.hi / d1;
    m.lambda_max = f.hi;
    m.zero_limit = [f, d1](const real_vec& x1, const real_vec& y1) { return euclidean_kernel(f, d1, norm2(x1 - y1)); };
    m.tag = "F(L) " + f.tag;
    return m;
}

/// Truncated symbol F_M: m(n, xi) = F(|xi| <n>) chi(<n> / M).
inline joint_symbol truncated_symbol(const multiplier1d& f, double big_m, int d1, int d2)
{
    if (!f.bounded) throw refusal("truncated_symbol: multiplier must have bounded support");
    if (big_m < 1) throw std::invalid_argument("truncated_symbol: M must be >= 1");
    joint_symbol m;
    m.d1 = d1;
    m.d2 = d2;
    m.level = [f, big_m, d1](int ell, double rho) {
        const double br = 2 * ell + d1;
        const double c = chi(br / big_m);
        return c == 0 ? complex(0) : f(rho * br) * c;
    };
    m.level_range = [f, big_m, d1](double rho) {
        // <n> in (M/2, 2M) and rho <n> in [lo, hi]
        double blo = big_m / 2, bhi = 2 * big_m;
        if (rho > 0) {
            blo = std::max(blo, f.lo / rho);
            bhi = std::min(bhi, f.hi / rho);
        }
        const int lo = std::max(0, static_cast<int>(std::ceil((blo - d1) / 2)));
        const int hi = static_cast<int>(std::floor((bhi - d1) / 2));
        return std::pair<int, int>{lo, hi};
    };
    m.xi_min = f.lo / (2 * big_m);
    m.xi_max = std::min(f.hi / d1, 2 * f.hi / big_m);
    m.lambda_max = f.hi;
    m.tag = "F_M " + f.tag + " M=" + std::to_string(big_m);
    return m;
}

struct dyadic_piece
{
    int k;
    joint_symbol symbol;
};

/// Pieces F_{2^k}, k in N, that can be nonzero for |xi| in [xi_lo, xi_hi].
inline std::vector<dyadic_piece> dyadic_pieces(const multiplier1d& f, int d1, int d2, double xi_lo, double xi_hi)
{
    if (!f.bounded) throw refusal("dyadic_pieces: multiplier must have bounded support");
    if (!(xi_lo > 0 && xi_hi >= xi_lo)) throw std::invalid_argument("dyadic_pieces: need 0 < xi_lo <= xi_hi");
    std::vector<dyadic_piece> out;
    if (f.hi <= 0) return out;
    // <n> in (M/2, 2M), |xi| <n> in [lo, hi]
    const int k_lo = std::max(0, static_cast<int>(std::ceil(std::log2(std::max(f.lo, 1e-300) / xi_hi))) - 1);
    const int k_hi = static_cast<int>(std::floor(std::log2(f.hi / xi_lo))) + 1;
    for (int k = k_lo; k <= k_hi; ++k) out.push_back({k, truncated_symbol(f, std::ldexp(1.0, k), d1, d2)});
    return out;
}

} // namespace grushin

#endif // GRUSHIN_MULTIPLIERS_HPP
