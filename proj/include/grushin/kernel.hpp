#ifndef GRUSHIN_KERNEL_HPP
#define GRUSHIN_KERNEL_HPP

#include <boost/math/special_functions/bessel.hpp>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "geometry.hpp"
#include "hermite.hpp"
#include "multipliers.hpp"

namespace grushin
{

// ---------------------------------------------------------------------------
// Target grids

/// Tensor grid in x' times a list of x'' - y'' representatives.
/// In radial mode z[i] = s e_1 stands for the sphere |x'' - y''| = s and z_weight[i]
/// carries the lattice multiplicity of that radius.
struct slice_grid
{
    std::vector<std::vector<double>> x1_axes;
    std::vector<double> x1_steps;
    std::vector<real_vec> z;
    std::vector<double> z_weight;
    bool radial = false;
    bool uniform_radii = false; // radial reps s_j = j z_step with radial quadrature weights
    double z_step = 0;
    double z_half_width = 0;

    int d1() const { return static_cast<int>(x1_axes.size()); }
    int d2() const { return z.empty() ? 0 : z.front().size(); }

    std::size_t x1_count() const
    {
        std::size_t n = 1;
        for (const auto& a : x1_axes) n *= a.size();
        return n;
    }

    double x1_cell() const
    {
        double c = 1;
        for (double h : x1_steps) c *= h;
        return c;
    }

    real_vec x1_at(std::size_t flat) const
    {
        real_vec v(d1());
        for (int j = d1() - 1; j >= 0; --j) {
            const std::size_t n = x1_axes[static_cast<std::size_t>(j)].size();
            v[j] = x1_axes[static_cast<std::size_t>(j)][flat % n];
            flat /= n;
        }
        return v;
    }
};

/// center + k step for |k step| <= half_width.
inline std::vector<double> centered_axis(double center, double half_width, double step)
{
    if (!(step > 0) || half_width < 0) throw std::invalid_argument("centered_axis: bad step or width");
    const int k = static_cast<int>(std::floor(half_width / step + 1e-9));
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(2 * k + 1));
    for (int i = -k; i <= k; ++i) v.push_back(center + i * step);
    return v;
}

/// Lattice step Z^d2 inside [-half, half]^d2, grouped by radius.
inline void radial_z_lattice(int d2, double step, double half, std::vector<real_vec>& z, std::vector<double>& w)
{
    const int k = static_cast<int>(std::floor(half / step + 1e-9));
    std::map<long, long> count;
    for_each_in_box(multi_index(d2, -k), multi_index(d2, k), [&](const multi_index& m) {
        long q = 0;
        for (int c : m) q += static_cast<long>(c) * c;
        ++count[q];
    });
    z.clear();
    w.clear();
    for (const auto& [q, c] : count) {
        z.push_back(real_vec::unit(d2, 0, step * std::sqrt(static_cast<double>(q))));
        w.push_back(static_cast<double>(c) * std::pow(step, d2));
    }
}

/// Radii s_j = j step, j <= half / step, weighted for int_{R^d2} f(|z|) dz: trapezoid in s against
/// |S^{d2-1}| s^{d2-1}. For d2 = 1, 3 this is spectrally accurate for smooth even f. For d2 = 2 the
/// integrand s f(s) is odd and the Euler-Maclaurin terms
///   h^2 f(0) / 12 - h^4 f''(0) / 240 + h^6 f''''(0) / 6048
/// are added, with f'', f'''' from symmetric differences on s = 0, h, 2h.
inline void radial_z_uniform(int d2, double step, double half, std::vector<real_vec>& z, std::vector<double>& w)
{
    const int k = static_cast<int>(std::floor(half / step + 1e-9));
    const double sphere = d2 == 1 ? 2.0 : (d2 == 2 ? 2 * pi : 4 * pi);
    z.clear();
    w.clear();
    for (int j = 0; j <= k; ++j) {
        const double s = j * step;
        z.push_back(real_vec::unit(d2, 0, s));
        w.push_back(j == 0 ? (d2 == 1 ? step : 0.0) : sphere * std::pow(s, d2 - 1) * step);
    }
    if (d2 == 2) {
        const double h2 = sphere * step * step;
        if (k >= 2) {
            // f''(0) ~ (-2 f2 + 32 f1 - 30 f0) / (12 h^2), f''''(0) ~ (2 f2 - 8 f1 + 6 f0) / h^4
            w[0] += h2 * (1.0 / 12 + 30.0 / 2880 + 6.0 / 6048);
            w[1] += h2 * (-32.0 / 2880 - 8.0 / 6048);
            w[2] += h2 * (2.0 / 2880 + 2.0 / 6048);
        } else {
            w[0] += h2 / 12;
        }
    }
}

inline void full_z_lattice(int d2, double step, double half, std::vector<real_vec>& z, std::vector<double>& w)
{
    const int k = static_cast<int>(std::floor(half / step + 1e-9));
    z.clear();
    w.clear();
    for_each_in_box(multi_index(d2, -k), multi_index(d2, k), [&](const multi_index& m) {
        real_vec v(d2);
        for (int j = 0; j < d2; ++j) v[j] = step * m[j];
        z.push_back(v);
        w.push_back(std::pow(step, d2));
    });
}

struct grid_options
{
    double x1_half_width = 0; // 0: automatic
    double x1_step = 0;       // 0: pi / (4 sqrt(lambda_max))
    double z_half_width = 0;  // 0: automatic
    double z_step = 0;        // 0: pi / (2 xi_max), pi / (4 xi_max) for radial quadrature
    double reach = 24;        // automatic boxes cover control distance reach / sqrt(lambda_max)
    bool radial = true;       // radial z representatives (level symbols only)
    bool radial_quadrature = true; // d2 >= 2: uniform radii and a radial xi rule instead of the lattice
};

/// Radius in x' outside which every Hermite product of the symbol's support is negligible:
/// level l at scale rho turns at |x'| = sqrt((2l + d1) / rho) and decays like an Airy tail after that.
inline double hermite_reach(const joint_symbol& m)
{
    if (!(m.xi_min > 0) || !m.is_level()) return 0;
    double reach = 0;
    for (int i = 0; i <= 64; ++i) {
        const double rho = m.xi_min * std::pow(m.xi_max / m.xi_min, i / 64.0);
        const int hi = m.level_range(rho).second;
        if (hi < 0) continue;
        const double br = 2 * hi + m.d1;
        reach = std::max(reach, std::sqrt(br / rho) + 5 / std::sqrt(rho) * std::pow(br, -1.0 / 6));
    }
    return reach;
}

/// Grid for a slice of `m` at y. With xi_min > 0 the x' box is centred at 0 with radius
/// hermite_reach(m); symbols reaching xi = 0 are localized near y and get a box centred at y'.
/// The z box is a control-distance scale D = reach / sqrt(lambda_max) times the x' reach, so for
/// symbols reaching xi = 0 the box contains {dist(., y) < D}.
inline slice_grid auto_grid(const joint_symbol& m, const point& y, const grid_options& opt = {})
{
    const int d1 = m.d1, d2 = m.d2;
    if (y.d1() != d1 || y.d2() != d2) throw std::invalid_argument("auto_grid: dimension mismatch");
    const double lmax = m.lambda_max > 0 ? m.lambda_max : 1.0;
    const double xmax = m.xi_max > 0 ? m.xi_max : 1.0;
    const double scale = opt.reach / std::sqrt(lmax);
    slice_grid g;
    const double hx = opt.x1_step > 0 ? opt.x1_step : pi / (4 * std::sqrt(lmax));
    const double reach = hermite_reach(m);
    const bool at_origin = reach > 0 && opt.x1_half_width <= 0;
    double half = opt.x1_half_width;
    if (half <= 0) half = at_origin ? reach : scale;
    for (int j = 0; j < d1; ++j) {
        const double c = at_origin ? 0.0 : y.x1[j];
        g.x1_axes.push_back(centered_axis(c, half, hx));
        g.x1_steps.push_back(hx);
    }
    const double extent = at_origin ? half + norm2(y.x1) : half + 2 * norm2(y.x1);
    g.z_half_width = opt.z_half_width > 0 ? opt.z_half_width : scale * extent;
    g.radial = opt.radial && m.is_level();
    g.uniform_radii = g.radial && (d2 == 1 || opt.radial_quadrature);
    // the radial rule in s for d2 >= 2 only corrects the end point to finite order; sample finer
    g.z_step = opt.z_step > 0 ? opt.z_step : pi / ((g.uniform_radii && d2 >= 2 ? 4 : 2) * xmax);
    if (g.uniform_radii) {
        radial_z_uniform(d2, g.z_step, g.z_half_width, g.z, g.z_weight);
    } else if (g.radial) {
        radial_z_lattice(d2, g.z_step, g.z_half_width, g.z, g.z_weight);
    } else {
        full_z_lattice(d2, g.z_step, g.z_half_width, g.z, g.z_weight);
    }
    return g;
}

/// Explicit grid: x' axes centred at `x1_center`, z lattice of the given step and half width.
/// `uniform_radii` (with `radial`) selects radial quadrature nodes, see radial_z_uniform.
inline slice_grid make_grid(const real_vec& x1_center, double x1_half, double x1_step, int d2, double z_half, double z_step,
                            bool radial, bool uniform_radii = false)
{
    slice_grid g;
    for (int j = 0; j < x1_center.size(); ++j) {
        g.x1_axes.push_back(centered_axis(x1_center[j], x1_half, x1_step));
        g.x1_steps.push_back(x1_step);
    }
    g.z_step = z_step;
    g.z_half_width = z_half;
    g.radial = radial;
    g.uniform_radii = radial && (d2 == 1 || uniform_radii);
    if (g.uniform_radii) {
        radial_z_uniform(d2, z_step, z_half, g.z, g.z_weight);
    } else if (radial) {
        radial_z_lattice(d2, z_step, z_half, g.z, g.z_weight);
    } else {
        full_z_lattice(d2, z_step, z_half, g.z, g.z_weight);
    }
    return g;
}

// ---------------------------------------------------------------------------
// Slices

struct kernel_slice
{
    int d1 = 1, d2 = 1;
    point y;
    slice_grid grid;
    std::vector<complex> values; // values[ix * z.size() + iz]
    double xi_step = 0;
    int xi_radius = 0; // lattice nodes with |k| <= xi_radius
    double leakage = 0; // largest symbol value seen just outside the evaluated support, relative
    std::string tag;

    std::size_t size() const { return values.size(); }
    std::size_t z_count() const { return grid.z.size(); }
    point target(std::size_t i) const
    {
        const std::size_t nz = z_count();
        return {grid.x1_at(i / nz), y.x2 + grid.z[i % nz]};
    }
    double weight(std::size_t i) const { return grid.x1_cell() * grid.z_weight[i % z_count()]; }
};

struct engine_options
{
    double xi_step = 0;       // 0: 2 pi / (period_factor * 2 * z_half_width)
    double period_factor = 4; // x''-period over the width of the z box
    double leakage_tolerance = 1e-12;
    int level_cap = 1 << 15;
    bool box_sum = false; // sum level symbols over the full n-box instead of by levels (cross-check route)
    bool use_fft = true;  // d2 = 1 radial slices: FFT summation when the z nodes fit the lattice period
    int radial_order = 12; // Gauss-Legendre order per panel of the radial xi rule
    double radial_panel = 4 * pi; // panel width times the largest radius
    int radial_min_panels = 64;   // resolves the symbol itself in rho
};

namespace detail
{

/// q_j[i][a] = h_a(sqrt(rho) x_i) h_a(sqrt(rho) y_j) for a <= top.
inline std::vector<std::vector<double>> axis_products(const std::vector<double>& axis, double y, double sq, int top)
{
    const std::size_t n = static_cast<std::size_t>(top + 1);
    std::vector<double> hy(n), hx(n);
    hermite::hermite_values(sq * y, hy);
    std::vector<std::vector<double>> out(axis.size(), std::vector<double>(n));
    for (std::size_t i = 0; i < axis.size(); ++i) {
        hermite::hermite_values(sq * axis[i], hx);
        for (std::size_t a = 0; a < n; ++a) out[i][a] = hx[a] * hy[a];
    }
    return out;
}

/// sum over levels l in [lo, hi] of mu[l - lo] sum_{|n| = l} prod_j q_j[i_j][n_j], on the tensor grid.
inline std::vector<complex> level_contraction(const std::vector<std::vector<std::vector<double>>>& q,
                                              const std::vector<complex>& mu, int lo, int hi)
{
    const int d1 = static_cast<int>(q.size());
    const std::size_t top = static_cast<std::size_t>(hi + 1);
    // last axis: w[i][m] = sum_l mu_l q[i][l - m]
    const auto& ql = q.back();
    std::vector<complex> w(ql.size() * top, 0.0);
    std::size_t block = ql.size();
    for (std::size_t i = 0; i < ql.size(); ++i) {
        const std::size_t mmax = d1 == 1 ? 0 : static_cast<std::size_t>(hi);
        for (std::size_t m = 0; m <= mmax; ++m) {
            complex s = 0;
            for (int l = std::max(lo, static_cast<int>(m)); l <= hi; ++l) {
                s += mu[static_cast<std::size_t>(l - lo)] * ql[i][static_cast<std::size_t>(l) - m];
            }
            w[i * top + m] = s;
        }
    }
    // earlier axes: w'[(i_j, rest)][m] = sum_a q_j[i_j][a] w[rest][m + a]
    for (int j = d1 - 2; j >= 0; --j) {
        const auto& qj = q[static_cast<std::size_t>(j)];
        const bool last = j == 0;
        std::vector<complex> next(qj.size() * block * top, 0.0);
        for (std::size_t i = 0; i < qj.size(); ++i) {
            for (std::size_t r = 0; r < block; ++r) {
                const std::size_t mmax = last ? 0 : static_cast<std::size_t>(hi);
                for (std::size_t m = 0; m <= mmax; ++m) {
                    complex s = 0;
                    for (std::size_t a = 0; a + m < top; ++a) s += qj[i][a] * w[r * top + m + a];
                    next[(i * block + r) * top + m] = s;
                }
            }
        }
        w = std::move(next);
        block *= qj.size();
    }
    std::vector<complex> out(block);
    for (std::size_t r = 0; r < block; ++r) out[r] = w[r * top];
    return out;
}

/// sum over n in [0, cap]^d1 of vals[n] prod_j q_j[i_j][n_j], on the tensor grid.
inline std::vector<complex> box_contraction(const std::vector<std::vector<std::vector<double>>>& q,
                                            std::vector<complex> vals, int cap)
{
    const int d1 = static_cast<int>(q.size());
    const std::size_t n = static_cast<std::size_t>(cap + 1);
    // shape (outer, n, inner) -> (outer, grid_j, inner)
    std::size_t outer = 1;
    for (int j = 0; j < d1 - 1; ++j) outer *= n;
    std::size_t inner = 1;
    for (int j = d1 - 1; j >= 0; --j) {
        const auto& qj = q[static_cast<std::size_t>(j)];
        std::vector<complex> next(outer * qj.size() * inner, 0.0);
        for (std::size_t o = 0; o < outer; ++o) {
            for (std::size_t i = 0; i < qj.size(); ++i) {
                for (std::size_t a = 0; a < n; ++a) {
                    const double c = qj[i][a];
                    if (c == 0) continue;
                    const complex* src = &vals[(o * n + a) * inner];
                    complex* dst = &next[(o * qj.size() + i) * inner];
                    for (std::size_t r = 0; r < inner; ++r) dst[r] += c * src[r];
                }
            }
        }
        vals = std::move(next);
        inner *= qj.size();
        if (j > 0) outer /= n;
    }
    return vals;
}

struct amplitude_result
{
    std::vector<complex> values;
    double scale = 0; // max |symbol| used
    double leak = 0;  // max |symbol| just outside the evaluated range
};

/// A(x', xi) = |xi|^{d1/2} sum_n m(n, xi) h_n(|xi|^{1/2} x') h_n(|xi|^{1/2} y'), for xi != 0.
inline amplitude_result amplitude(const joint_symbol& m, const real_vec& xi, const point& y, const slice_grid& g,
                                  int level_cap, bool box_sum = false)
{
    const int d1 = m.d1;
    const double rho = norm2(xi);
    const double sq = std::sqrt(rho);
    amplitude_result out;
    int lo = 0, hi = -1;
    if (m.is_level()) {
        std::tie(lo, hi) = m.level_range(rho);
        lo = std::max(lo, 0);
    } else {
        hi = m.n_cap;
    }
    if (hi > level_cap) {
        throw numerical_failure("kernel engine: " + std::to_string(hi) + " levels needed at |xi| = " + std::to_string(rho) +
                                " exceed the cap " + std::to_string(level_cap));
    }
    if (hi < lo) {
        out.values.assign(g.x1_count(), 0.0);
        return out;
    }
    std::vector<std::vector<std::vector<double>>> q;
    for (int j = 0; j < d1; ++j) q.push_back(axis_products(g.x1_axes[static_cast<std::size_t>(j)], y.x1[j], sq, hi));
    const double pre = std::pow(rho, 0.5 * d1);
    if (m.is_level() && !box_sum) {
        std::vector<complex> mu;
        for (int l = lo; l <= hi; ++l) {
            mu.push_back(m.level(l, rho));
            out.scale = std::max(out.scale, std::abs(mu.back()));
        }
        for (int l : {lo - 1, hi + 1, hi + 2}) {
            if (l >= 0) out.leak = std::max(out.leak, std::abs(m.level(l, rho)));
        }
        out.values = level_contraction(q, mu, lo, hi);
    } else {
        std::vector<complex> vals;
        vals.reserve(static_cast<std::size_t>(std::pow(hi + 1, d1)));
        for_each_in_box(multi_index(d1, 0), multi_index(d1, hi), [&](const multi_index& n) {
            vals.push_back(m.is_level() && norm1(n) < lo ? complex(0) : m(n, xi));
            out.scale = std::max(out.scale, std::abs(vals.back()));
        });
        for (int j = 0; j < d1; ++j) {
            multi_index n(d1, 0);
            n[j] = hi + 1;
            out.leak = std::max(out.leak, std::abs(m(n, xi)));
        }
        out.values = box_contraction(q, std::move(vals), hi);
    }
    for (auto& v : out.values) v *= pre;
    return out;
}

inline std::vector<complex> zero_node(const joint_symbol& m, const point& y, const slice_grid& g)
{
    std::vector<complex> out(g.x1_count(), 0.0);
    if (m.xi_min > 0 || !m.zero_limit) return out;
    parallel_for(out.size(), [&](std::size_t i) { out[i] = m.zero_limit(g.x1_at(i), y.x1); });
    return out;
}

/// Symbol values beyond xi_max, relative to `scale`.
inline double outer_leakage(const joint_symbol& m)
{
    double leak = 0;
    if (!(m.xi_max > 0)) return 0;
    for (double f : {1.02, 1.25, 2.0}) {
        const double rho = f * m.xi_max;
        real_vec xi = real_vec::unit(m.d2, 0, rho);
        if (m.is_level()) {
            const int top = static_cast<int>(std::ceil((m.lambda_max / m.xi_max - m.d1) / 2)) + 2;
            for (int l = 0; l <= std::max(top, 0); ++l) leak = std::max(leak, std::abs(m.level(l, rho)));
        } else {
            for_each_in_box(multi_index(m.d1, 0), multi_index(m.d1, std::min(m.n_cap, 40)),
                            [&](const multi_index& n) { leak = std::max(leak, std::abs(m(n, xi))); });
        }
    }
    return leak;
}

} // namespace detail

namespace detail
{

/// Smallest 2^a 3^b 5^c >= n.
inline std::size_t fft_size(std::size_t n)
{
    for (std::size_t c = std::max<std::size_t>(n, 1);; ++c) {
        std::size_t r = c;
        for (std::size_t p : {2, 3, 5}) {
            while (r % p == 0) r /= p;
        }
        if (r == 1) return c;
    }
}

struct sweep_stats
{
    double scale = 0;
    double leak = 0;
};

/// Lattice rule: xi in h Z^d2, the x''-periodization of the kernel with period 2 pi / h.
inline sweep_stats lattice_sweep(const joint_symbol& m, const point& y, const slice_grid& g, double h, std::size_t fft_n,
                                 const engine_options& opt, std::vector<complex>& values)
{
    const int d2 = m.d2;
    const std::size_t nx = g.x1_count(), nz = g.z.size();
    const int kmax = static_cast<int>(std::floor(m.xi_max / h + 1e-9));
    const double norm = std::pow(h / (2 * pi), d2);
    sweep_stats st;
    if (g.radial) {
        // distinct |k|^2 with k_1 >= 0, and how often each (k_1, |k|^2) occurs
        struct node
        {
            long q;
            int k1;
            long count;
        };
        std::vector<node> nodes;
        for (int k1 = 0; k1 <= kmax; ++k1) {
            if (d2 == 1) {
                nodes.push_back({static_cast<long>(k1) * k1, k1, 1});
                continue;
            }
            std::map<long, long> c;
            for_each_in_box(multi_index(d2 - 1, -kmax), multi_index(d2 - 1, kmax), [&](const multi_index& r) {
                long q = static_cast<long>(k1) * k1;
                for (int v : r) q += static_cast<long>(v) * v;
                if (q <= static_cast<long>(kmax) * kmax) ++c[q];
            });
            for (const auto& [q, cnt] : c) nodes.push_back({q, k1, cnt});
        }
        std::sort(nodes.begin(), nodes.end(), [](const node& a, const node& b) { return std::tie(a.q, a.k1) < std::tie(b.q, b.k1); });
        std::vector<long> distinct;
        for (const auto& n : nodes) {
            if (distinct.empty() || distinct.back() != n.q) distinct.push_back(n.q);
        }

        const std::size_t nk = static_cast<std::size_t>(kmax + 1);
        std::vector<complex> b(nx * nk, 0.0); // b[ix][k1]
        const std::size_t batch = std::max<std::size_t>(1, 2 * worker_count());
        std::size_t cursor = 0;
        for (std::size_t start = 0; start < distinct.size(); start += batch) {
            const std::size_t stop = std::min(distinct.size(), start + batch);
            std::vector<amplitude_result> amps(stop - start);
            parallel_for(stop - start, [&](std::size_t i) {
                const long q = distinct[start + i];
                if (q == 0) {
                    amps[i].values = zero_node(m, y, g);
                } else {
                    const real_vec xi = real_vec::unit(d2, 0, h * std::sqrt(static_cast<double>(q)));
                    amps[i] = amplitude(m, xi, y, g, opt.level_cap);
                }
            });
            for (std::size_t i = 0; i < amps.size(); ++i) {
                st.scale = std::max(st.scale, amps[i].scale);
                st.leak = std::max(st.leak, amps[i].leak);
                const long q = distinct[start + i];
                for (; cursor < nodes.size() && nodes[cursor].q == q; ++cursor) {
                    const std::size_t k1 = static_cast<std::size_t>(nodes[cursor].k1);
                    const double c = static_cast<double>(nodes[cursor].count);
                    for (std::size_t ix = 0; ix < nx; ++ix) b[ix * nk + k1] += c * amps[i].values[ix];
                }
            }
        }
        if (fft_n > 0) {
            // K(j z_step) = norm sum_{|k| <= kmax} B(|k|) e^{2 pi i j k / N}
            const int n = static_cast<int>(fft_n);
            fftw_complex* probe = fftw_alloc_complex(fft_n);
            fftw_plan plan;
            {
                std::lock_guard<std::mutex> lock(fftw_plan_mutex());
                plan = fftw_plan_dft_1d(n, probe, probe, FFTW_BACKWARD, FFTW_ESTIMATE);
            }
            fftw_free(probe);
            parallel_for(nx, [&](std::size_t ix) {
                fftw_complex* buf = fftw_alloc_complex(fft_n);
                std::fill(reinterpret_cast<double*>(buf), reinterpret_cast<double*>(buf) + 2 * fft_n, 0.0);
                for (std::size_t k = 0; k < nk; ++k) {
                    const complex v = b[ix * nk + k];
                    buf[k][0] = v.real();
                    buf[k][1] = v.imag();
                    if (k > 0) {
                        buf[fft_n - k][0] = v.real();
                        buf[fft_n - k][1] = v.imag();
                    }
                }
                fftw_execute_dft(plan, buf, buf);
                for (std::size_t iz = 0; iz < nz; ++iz) values[ix * nz + iz] = norm * complex(buf[iz][0], buf[iz][1]);
                fftw_free(buf);
            });
            std::lock_guard<std::mutex> lock(fftw_plan_mutex());
            fftw_destroy_plan(plan);
        } else {
            // K(s e_1) = norm [B(0) + 2 sum_{k1 > 0} B(k1) cos(k1 h s)]
            parallel_for(nz, [&](std::size_t iz) {
                const double sz = g.z[iz][0];
                std::vector<double> c(nk);
                for (std::size_t k = 0; k < nk; ++k) c[k] = (k == 0 ? 1.0 : 2.0) * std::cos(static_cast<double>(k) * h * sz);
                for (std::size_t ix = 0; ix < nx; ++ix) {
                    complex acc = 0;
                    const complex* row = &b[ix * nk];
                    for (std::size_t k = 0; k < nk; ++k) acc += c[k] * row[k];
                    values[ix * nz + iz] = norm * acc;
                }
            });
        }
        return st;
    }

    std::vector<multi_index> ks;
    for_each_in_box(multi_index(d2, -kmax), multi_index(d2, kmax), [&](const multi_index& k) {
        long q = 0;
        for (int v : k) q += static_cast<long>(v) * v;
        if (q <= static_cast<long>(kmax) * kmax) ks.push_back(k);
    });
    std::vector<std::vector<complex>> amps(ks.size());
    std::vector<double> scales(ks.size()), leaks(ks.size());
    parallel_for(ks.size(), [&](std::size_t i) {
        real_vec xi(d2);
        for (int j = 0; j < d2; ++j) xi[j] = h * ks[i][j];
        if (ks[i] == multi_index(d2, 0)) {
            amps[i] = zero_node(m, y, g);
            return;
        }
        auto a = amplitude(m, xi, y, g, opt.level_cap, opt.box_sum);
        amps[i] = std::move(a.values);
        scales[i] = a.scale;
        leaks[i] = a.leak;
    });
    for (std::size_t i = 0; i < ks.size(); ++i) {
        st.scale = std::max(st.scale, scales[i]);
        st.leak = std::max(st.leak, leaks[i]);
    }
    parallel_for(nz, [&](std::size_t iz) {
        std::vector<complex> phase(ks.size());
        for (std::size_t i = 0; i < ks.size(); ++i) {
            double t = 0;
            for (int j = 0; j < d2; ++j) t += h * ks[i][j] * g.z[iz][j];
            phase[i] = std::polar(1.0, t);
        }
        for (std::size_t ix = 0; ix < nx; ++ix) {
            complex acc = 0;
            for (std::size_t i = 0; i < ks.size(); ++i) acc += phase[i] * amps[i][ix];
            values[ix * nz + iz] = norm * acc;
        }
    });
    return st;
}

/// int_{R^d2} e^{i rho s theta_1} d sigma(theta) / |.|: 2 cos, 2 pi J_0, 4 pi sinc.
inline double sphere_wave(int d2, double t)
{
    if (d2 == 1) return 2 * std::cos(t);
    if (d2 == 2) return 2 * pi * boost::math::detail::bessel_j0(t);
    return t == 0 ? 4 * pi : 4 * pi * std::sin(t) / t;
}

/// Radial rule: K(s e_1) = (2 pi)^{-d2} int_0^inf A(x', rho) rho^{d2-1} sphere_wave(rho s) d rho by
/// composite Gauss-Legendre in rho; panels of width radial_panel / s_max.
inline sweep_stats radial_sweep(const joint_symbol& m, const point& y, const slice_grid& g, const engine_options& opt,
                                std::vector<complex>& values, std::size_t& node_count)
{
    const int d2 = m.d2;
    const std::size_t nx = g.x1_count(), nz = g.z.size();
    const double lo = std::max(0.0, m.xi_min), hi = m.xi_max;
    double s_max = 0;
    for (const auto& z : g.z) s_max = std::max(s_max, norm2(z));
    const double width = s_max > 0 ? opt.radial_panel / s_max : hi - lo;
    const int panels = std::max(opt.radial_min_panels, static_cast<int>(std::ceil((hi - lo) / width)));
    std::vector<double> br;
    for (int i = 0; i <= panels; ++i) br.push_back(lo + (hi - lo) * i / panels);
    const auto rule = quadrature::composite(br, opt.radial_order);
    const std::size_t nr = rule.size();
    node_count = nr;

    std::vector<complex> at(nx * nr, 0.0); // at[ix][i], quadrature weight and measure folded in
    std::vector<double> scales(nr), leaks(nr);
    const double c = std::pow(2 * pi, -d2);
    parallel_for(nr, [&](std::size_t i) {
        const double rho = rule.nodes[i];
        auto a = amplitude(m, real_vec::unit(d2, 0, rho), y, g, opt.level_cap);
        scales[i] = a.scale;
        leaks[i] = a.leak;
        const double w = c * rule.weights[i] * std::pow(rho, d2 - 1);
        for (std::size_t ix = 0; ix < nx; ++ix) at[ix * nr + i] = w * a.values[ix];
    });
    sweep_stats st;
    for (std::size_t i = 0; i < nr; ++i) {
        st.scale = std::max(st.scale, scales[i]);
        st.leak = std::max(st.leak, leaks[i]);
    }
    parallel_for(nz, [&](std::size_t iz) {
        const double sz = norm2(g.z[iz]);
        std::vector<double> wave(nr);
        for (std::size_t i = 0; i < nr; ++i) wave[i] = sphere_wave(d2, rule.nodes[i] * sz);
        for (std::size_t ix = 0; ix < nx; ++ix) {
            complex acc = 0;
            const complex* row = &at[ix * nr];
            for (std::size_t i = 0; i < nr; ++i) acc += wave[i] * row[i];
            values[ix * nz + iz] = acc;
        }
    });
    return st;
}

} // namespace detail

/// K(x, y) on the grid by the Hermite expansion, with the n-sum exact over the symbol's support.
/// The xi-integral is either the trapezoid rule on the lattice xi_step Z^d2, i.e. exactly the
/// x''-periodization of the kernel with period 2 pi / xi_step (summed by FFT for d2 = 1 radial
/// slices), or, on grids with uniform radii and d2 >= 2, a radial Gauss-Legendre rule.
inline kernel_slice kernel_slice_eval(const joint_symbol& m, const point& y, const slice_grid& g,
                                      const engine_options& opt = {})
{
    const int d1 = m.d1, d2 = m.d2;
    if (y.d1() != d1 || y.d2() != d2 || g.d1() != d1 || g.d2() != d2) {
        throw std::invalid_argument("kernel_slice: dimension mismatch");
    }
    if (g.radial && !m.is_level()) throw refusal("kernel_slice: radial z representatives need a level symbol");
    kernel_slice out;
    out.d1 = d1;
    out.d2 = d2;
    out.y = y;
    out.grid = g;
    out.tag = m.tag;
    const std::size_t nx = g.x1_count(), nz = g.z.size();
    out.values.assign(nx * nz, 0.0);
    if (!(m.xi_max > 0) || (m.xi_min > m.xi_max)) return out;

    detail::sweep_stats st;
    if (g.radial && g.uniform_radii && d2 >= 2) {
        std::size_t nodes = 0;
        st = detail::radial_sweep(m, y, g, opt, out.values, nodes);
        out.xi_radius = static_cast<int>(nodes);
    } else {
        const bool fft_ok = opt.use_fft && d2 == 1 && g.radial && g.uniform_radii && g.z_step > 0;
        double h = opt.xi_step;
        std::size_t fft_n = 0;
        if (!(h > 0)) {
            if (!(g.z_half_width > 0)) throw std::invalid_argument("kernel_slice: no xi step and no z box");
            h = 2 * pi / (opt.period_factor * 2 * g.z_half_width);
            if (fft_ok) {
                fft_n = detail::fft_size(static_cast<std::size_t>(std::ceil(opt.period_factor * 2 * g.z_half_width / g.z_step)));
                h = 2 * pi / (static_cast<double>(fft_n) * g.z_step);
            }
        } else if (fft_ok) {
            const double r = 2 * pi / (h * g.z_step);
            if (std::abs(r - std::round(r)) < 1e-9 * r) fft_n = static_cast<std::size_t>(std::llround(r));
        }
        const int kmax = static_cast<int>(std::floor(m.xi_max / h + 1e-9));
        if (fft_n > 0 && (fft_n <= 2 * static_cast<std::size_t>(kmax) || fft_n < nz)) fft_n = 0;
        out.xi_step = h;
        out.xi_radius = kmax;
        st = detail::lattice_sweep(m, y, g, h, fft_n, opt, out.values);
    }
    const double leak = std::max(st.leak, detail::outer_leakage(m));
    out.leakage = st.scale > 0 ? leak / st.scale : (leak > 0 ? 1.0 : 0.0);
    if (st.scale > 0 && leak > opt.leakage_tolerance * st.scale) {
        std::ostringstream msg;
        msg << "kernel_slice: symbol leaks outside the evaluated support (relative " << leak / st.scale << ", tag " << m.tag
            << ")";
        throw numerical_failure(msg.str());
    }
    return out;
}

/// Slice on the automatic grid.
inline kernel_slice kernel_slice_eval(const joint_symbol& m, const point& y, const grid_options& gopt = {},
                                      const engine_options& opt = {})
{
    return kernel_slice_eval(m, y, auto_grid(m, y, gopt), opt);
}

/// K(x, y) at a single pair, on the lattice xi_step Z^d2.
inline complex kernel_at(const joint_symbol& m, const point& x, const point& y, double xi_step, engine_options opt = {})
{
    slice_grid g;
    for (int j = 0; j < m.d1; ++j) {
        g.x1_axes.push_back({x.x1[j]});
        g.x1_steps.push_back(1);
    }
    g.radial = m.is_level();
    const real_vec z = x.x2 - y.x2;
    g.z = {g.radial ? real_vec::unit(m.d2, 0, norm2(z)) : z};
    g.z_weight = {1};
    opt.xi_step = xi_step;
    return kernel_slice_eval(m, y, g, opt).values.front();
}

/// (2 pi)^{-d2} int sum_n |m(n, xi)|^2 |h~_n(y', xi)|^2 dxi: the squared L2 norm of K(., y) by
/// orthonormality of the Hermite functions. Composite Gauss-Legendre in |xi| (radial symbols).
inline double plancherel_mass(const joint_symbol& m, const point& y, int panels = 400, int order = 16)
{
    if (!m.is_level()) throw refusal("plancherel_mass: level symbols only");
    if (!(m.xi_min > 0)) throw refusal("plancherel_mass: needs a symbol vanishing near xi = 0");
    const int d1 = m.d1, d2 = m.d2;
    std::vector<double> br;
    for (int i = 0; i <= panels; ++i) br.push_back(m.xi_min + (m.xi_max - m.xi_min) * i / panels);
    const auto rule = quadrature::composite(br, order);
    std::vector<double> vals(rule.size());
    parallel_for(rule.size(), [&](std::size_t i) {
        const double rho = rule.nodes[i];
        auto [lo, hi] = m.level_range(rho);
        lo = std::max(lo, 0);
        if (hi < lo) return;
        std::vector<std::vector<std::vector<double>>> q;
        for (int j = 0; j < d1; ++j) {
            auto hv = hermite::hermite_values(hi, std::sqrt(rho) * y.x1[j]);
            for (double& v : hv) v *= v;
            q.push_back({hv});
        }
        std::vector<complex> mu;
        for (int l = lo; l <= hi; ++l) mu.push_back(std::norm(m.level(l, rho)));
        const double s = detail::level_contraction(q, mu, lo, hi).front().real();
        vals[i] = rule.weights[i] * std::pow(rho, 0.5 * d1 + d2 - 1) * s;
    });
    const double sphere = d2 == 1 ? 2.0 : (d2 == 2 ? 2 * pi : 4 * pi);
    return sphere * std::pow(2 * pi, -d2) * pairwise_sum<double>(vals);
}

// ---------------------------------------------------------------------------
// Full multipliers through dyadic pieces

struct full_kernel_result
{
    kernel_slice slice;
    std::vector<std::pair<int, double>> piece_norms; // (k, L2 norm of the piece on the grid)
};

/// K_{F(L)}(., y) = sum_k K_{F_{2^k}}(., y) plus the xi = 0 node of F. On the lattice xi_step Z^d2
/// pieces with 2^k > 2 sup supp F / xi_step vanish identically, which ends the sum.
inline full_kernel_result kernel_full(const multiplier1d& f, const point& y, const slice_grid& g, double xi_step,
                                      engine_options opt = {})
{
    const int d1 = y.d1(), d2 = y.d2();
    opt.xi_step = xi_step;
    full_kernel_result out;
    const auto whole = spectral_symbol(f, d1, d2);
    kernel_slice acc;
    acc.d1 = d1;
    acc.d2 = d2;
    acc.y = y;
    acc.grid = g;
    acc.xi_step = xi_step;
    acc.tag = "sum of dyadic pieces of " + f.tag;
    acc.values.assign(g.x1_count() * g.z.size(), 0.0);
    if (f.hi <= 0) {
        out.slice = std::move(acc);
        return out;
    }
    for (const auto& piece : dyadic_pieces(f, d1, d2, xi_step, whole.xi_max)) {
        const auto s = kernel_slice_eval(piece.symbol, y, g, opt);
        double e = 0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            acc.values[i] += s.values[i];
            e += s.weight(i) * std::norm(s.values[i]);
        }
        out.piece_norms.push_back({piece.k, std::sqrt(e)});
        acc.xi_radius = std::max(acc.xi_radius, s.xi_radius);
    }
    // xi = 0 node, weight (h / 2 pi)^d2
    const auto z0 = detail::zero_node(whole, y, g);
    const double c = std::pow(xi_step / (2 * pi), d2);
    const std::size_t nz = g.z.size();
    for (std::size_t ix = 0; ix < z0.size(); ++ix) {
        for (std::size_t iz = 0; iz < nz; ++iz) acc.values[ix * nz + iz] += c * z0[ix];
    }
    out.slice = std::move(acc);
    return out;
}

// ---------------------------------------------------------------------------
// Weighted norms

struct weight_spec
{
    enum class kind
    {
        l1,
        l2
    };
    kind type = kind::l1;
    double alpha = 0; // (1 + R dist)^alpha
    double gamma = 0; // w_R^gamma (l2 only)
    double big_r = 1;
    double z_power = 0; // |x'' - y''|^z_power, for the truncated estimates
    bool ball_factor = true; // l2: multiply by |B(y, 1/R)|^{1/2}
    std::string label;
};

struct norm_options
{
    bool check_boundary = true;
    double boundary_tolerance = 1e-3;
    double shell_fraction = 0.05; // outer shell: last 5% of every axis and of the z box
};

struct weighted_norm
{
    std::string label;
    double value = 0;
    double shell_fraction = 0; // share of the integrand in the outer shell
};

namespace detail
{

inline bool in_shell(const kernel_slice& s, std::size_t i, double frac)
{
    const auto& g = s.grid;
    const std::size_t nz = g.z.size();
    std::size_t flat = i / nz;
    for (int j = g.d1() - 1; j >= 0; --j) {
        const auto& ax = g.x1_axes[static_cast<std::size_t>(j)];
        const std::size_t n = ax.size();
        const std::size_t k = flat % n;
        flat /= n;
        const std::size_t band = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(frac * n / 2)));
        if (k < band || k + band >= n) return true;
    }
    const real_vec& z = g.z[i % nz];
    const double lim = (1 - frac) * g.z_half_width;
    for (double c : z) {
        if (std::abs(c) > lim) return true;
    }
    return false;
}

} // namespace detail

/// Quadrature values of ||(1 + R dist(., y))^alpha K||_1 and
/// |B(y, 1/R)|^{1/2} || w_R^gamma (1 + R dist(., y))^alpha K ||_2 (with an optional |x''-y''|^p factor).
inline std::vector<weighted_norm> weighted_norms(const kernel_slice& s, const std::vector<weight_spec>& specs,
                                                 const norm_options& opt = {})
{
    std::vector<weighted_norm> out;
    for (const auto& w : specs) {
        std::vector<double> parts(s.size()), shell(s.size(), 0.0);
        parallel_for(s.size(), [&](std::size_t i) {
            const point x = s.target(i);
            double f = std::abs(s.values[i]);
            if (w.alpha != 0) f *= std::pow(1 + w.big_r * dist_surrogate(x, s.y), w.alpha);
            if (w.z_power != 0) f *= std::pow(norm2(x.x2 - s.y.x2), w.z_power);
            if (w.type == weight_spec::kind::l2) {
                if (w.gamma != 0) f *= std::pow(weight(x, s.y, w.big_r), w.gamma);
                f *= f;
            }
            parts[i] = s.weight(i) * f;
            if (detail::in_shell(s, i, opt.shell_fraction)) shell[i] = parts[i];
        });
        const double total = pairwise_sum<double>(parts);
        const double edge = pairwise_sum<double>(shell);
        weighted_norm r;
        r.label = w.label;
        r.shell_fraction = total > 0 ? edge / total : 0;
        if (opt.check_boundary && r.shell_fraction > opt.boundary_tolerance) {
            std::ostringstream msg;
            msg << "weighted_norms: " << r.shell_fraction << " of the mass for '" << w.label
                << "' sits in the boundary shell; enlarge the grid";
            throw numerical_failure(msg.str());
        }
        if (w.type == weight_spec::kind::l1) {
            r.value = total;
        } else {
            r.value = std::sqrt(total);
            if (w.ball_factor) r.value *= std::sqrt(ball_volume_estimate(s.y, 1 / w.big_r));
        }
        out.push_back(r);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

/// CSV: x'_1..x'_d1, x''_1..x''_d2, re, im, weight. Radial slices list one representative per radius.
inline void write_csv(const kernel_slice& s, std::ostream& os)
{
    os << std::setprecision(17);
    for (int j = 0; j < s.d1; ++j) os << "x1_" << j + 1 << ",";
    for (int j = 0; j < s.d2; ++j) os << "x2_" << j + 1 << ",";
    os << "re,im,weight\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        const point x = s.target(i);
        for (double v : x.x1) os << v << ",";
        for (double v : x.x2) os << v << ",";
        os << s.values[i].real() << "," << s.values[i].imag() << "," << s.weight(i) << "\n";
    }
}

inline constexpr char slice_magic[8] = {'G', 'R', 'K', 'S', 'L', 'I', 'C', 'E'};

/// Binary layout: 8-byte magic "GRKSLICE", uint32 version (1), uint32 d1, uint32 d2, uint32 radial flag,
/// uint64 row count, then rows of (d1 + d2 + 3) little-endian float64: x', x'', re, im, weight.
inline void write_binary(const kernel_slice& s, std::ostream& os)
{
    static_assert(std::endian::native == std::endian::little, "binary slice format assumes a little-endian host");
    os.write(slice_magic, 8);
    const std::uint32_t header[4] = {1, static_cast<std::uint32_t>(s.d1), static_cast<std::uint32_t>(s.d2),
                                     s.grid.radial ? 1u : 0u};
    os.write(reinterpret_cast<const char*>(header), sizeof header);
    const std::uint64_t rows = s.size();
    os.write(reinterpret_cast<const char*>(&rows), sizeof rows);
    std::vector<double> row;
    for (std::size_t i = 0; i < s.size(); ++i) {
        row.clear();
        const point x = s.target(i);
        row.insert(row.end(), x.x1.begin(), x.x1.end());
        row.insert(row.end(), x.x2.begin(), x.x2.end());
        row.push_back(s.values[i].real());
        row.push_back(s.values[i].imag());
        row.push_back(s.weight(i));
        os.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(double)));
    }
}

struct slice_rows
{
    int d1 = 0, d2 = 0;
    bool radial = false;
    std::vector<point> x;
    std::vector<complex> values;
    std::vector<double> weights;
};

inline slice_rows read_binary(std::istream& is)
{
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, slice_magic, 8) != 0) throw std::runtime_error("read_binary: bad magic");
    std::uint32_t header[4];
    is.read(reinterpret_cast<char*>(header), sizeof header);
    std::uint64_t rows = 0;
    is.read(reinterpret_cast<char*>(&rows), sizeof rows);
    if (!is || header[0] != 1) throw std::runtime_error("read_binary: bad header");
    slice_rows out;
    out.d1 = static_cast<int>(header[1]);
    out.d2 = static_cast<int>(header[2]);
    out.radial = header[3] != 0;
    const std::size_t width = static_cast<std::size_t>(out.d1 + out.d2 + 3);
    std::vector<double> row(width);
    for (std::uint64_t r = 0; r < rows; ++r) {
        is.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(width * sizeof(double)));
        if (!is) throw std::runtime_error("read_binary: truncated");
        point p{real_vec(out.d1), real_vec(out.d2)};
        for (int j = 0; j < out.d1; ++j) p.x1[j] = row[static_cast<std::size_t>(j)];
        for (int j = 0; j < out.d2; ++j) p.x2[j] = row[static_cast<std::size_t>(out.d1 + j)];
        out.x.push_back(p);
        out.values.push_back({row[width - 3], row[width - 2]});
        out.weights.push_back(row[width - 1]);
    }
    return out;
}

} // namespace grushin

#endif // GRUSHIN_KERNEL_HPP
