#ifndef GRUSHIN_GRID_ORACLE_HPP
#define GRUSHIN_GRID_ORACLE_HPP

#include <lapacke.h>

#include <Eigen/Sparse>

#include "kernel.hpp"

namespace grushin
{

/// Second-order finite-difference discretization of -Delta_{x'} - |x'|^2 Delta_{x''} on
/// [-A, A]^{d1+d2} with Dirichlet boundary, N interior nodes per axis, h = 2A / (N + 1).
///
/// The matrix is D_{x'} + diag(|x'|^2) (x) D_{x''}. The x'' part is diagonalized by discrete sine
/// modes, so each mode k leaves the symmetric tridiagonal (d1 = 1) or separable (d1 = 2) problem
/// D_{x'} + mu_k |x'|^2, solved with LAPACK dstevr up to Lambda_max.
class grid_oracle
{
public:
    struct x2_mode
    {
        multi_index k;               // sine mode indices, 1..N
        double mu = 0;               // eigenvalue of D_{x''}
        std::vector<double> lambda;  // eigenvalues of the full matrix on this mode
        std::vector<std::vector<double>> phi; // matching x' eigenvectors, l2-normalized, N^d1 entries
    };

    /// `check_resolution` enforces h^2 Lambda_max <= 0.05; switch it off only to take the whole
    /// discrete spectrum (Lambda_max = inf) on small grids.
    grid_oracle(int d1, int d2, double half_width, double h, double lambda_max, bool check_resolution = true)
        : d1_(d1), d2_(d2), a_(half_width), h_(h), lambda_max_(lambda_max)
    {
        if (d1 < 1 || d2 < 1) throw std::invalid_argument("grid_oracle: dimensions must be positive");
        if (d1 + d2 > 3) throw refusal("grid_oracle: total dimension above 3 is out of memory scope");
        if (d1 > 2) throw refusal("grid_oracle: d1 <= 2");
        if (!(h > 0 && half_width > 0)) throw std::invalid_argument("grid_oracle: need A, h > 0");
        if (check_resolution && h * h * lambda_max > 0.05 + 1e-12) throw refusal("grid_oracle: h^2 Lambda_max must be <= 0.05");
        const double n_real = 2 * half_width / h - 1;
        n_ = static_cast<int>(std::lround(n_real));
        if (std::abs(n_real - n_) > 1e-9 || n_ < 3) throw std::invalid_argument("grid_oracle: 2A/h must be an integer >= 4");
        for (int i = 0; i < n_; ++i) nodes_.push_back(-a_ + (i + 1) * h_);
        build();
    }

    int d1() const { return d1_; }
    int d2() const { return d2_; }
    int n() const { return n_; }
    double h() const { return h_; }
    double half_width() const { return a_; }
    double lambda_max() const { return lambda_max_; }
    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<x2_mode>& modes() const { return modes_; }

    std::size_t eigenpair_count() const
    {
        std::size_t c = 0;
        for (const auto& m : modes_) c += m.lambda.size();
        return c;
    }

    double smallest_eigenvalue() const
    {
        double v = std::numeric_limits<double>::infinity();
        for (const auto& m : modes_) {
            for (double l : m.lambda) v = std::min(v, l);
        }
        return v;
    }

    std::vector<double> eigenvalues() const
    {
        std::vector<double> v;
        for (const auto& m : modes_) v.insert(v.end(), m.lambda.begin(), m.lambda.end());
        std::sort(v.begin(), v.end());
        return v;
    }

    /// Index of the node nearest to t.
    int nearest(double t) const
    {
        const long i = std::lround((t + a_) / h_) - 1;
        return static_cast<int>(std::clamp<long>(i, 0, n_ - 1));
    }

    point snap(const point& y) const
    {
        point p = y;
        for (auto& c : p.x1) c = nodes_[static_cast<std::size_t>(nearest(c))];
        for (auto& c : p.x2) c = nodes_[static_cast<std::size_t>(nearest(c))];
        return p;
    }

    /// The full matrix, assembled explicitly (for structural checks).
    Eigen::SparseMatrix<double> matrix() const
    {
        const int d = d1_ + d2_;
        std::size_t total = 1;
        for (int j = 0; j < d; ++j) total *= static_cast<std::size_t>(n_);
        std::vector<Eigen::Triplet<double>> trip;
        const double inv = 1 / (h_ * h_);
        for (std::size_t flat = 0; flat < total; ++flat) {
            multi_index idx(d);
            std::size_t f = flat;
            for (int j = d - 1; j >= 0; --j) {
                idx[j] = static_cast<int>(f % static_cast<std::size_t>(n_));
                f /= static_cast<std::size_t>(n_);
            }
            double r2 = 0;
            for (int j = 0; j < d1_; ++j) r2 += nodes_[static_cast<std::size_t>(idx[j])] * nodes_[static_cast<std::size_t>(idx[j])];
            double diag = 0;
            for (int j = 0; j < d; ++j) {
                const double c = j < d1_ ? inv : r2 * inv;
                diag += 2 * c;
                std::size_t stride = 1;
                for (int k = d - 1; k > j; --k) stride *= static_cast<std::size_t>(n_);
                if (idx[j] > 0) trip.emplace_back(static_cast<int>(flat), static_cast<int>(flat - stride), -c);
                if (idx[j] + 1 < n_) trip.emplace_back(static_cast<int>(flat), static_cast<int>(flat + stride), -c);
            }
            trip.emplace_back(static_cast<int>(flat), static_cast<int>(flat), diag);
        }
        Eigen::SparseMatrix<double> m(static_cast<int>(total), static_cast<int>(total));
        m.setFromTriplets(trip.begin(), trip.end());
        return m;
    }

    /// l2-normalized sine vector of mode k at node i.
    double sine(int k, int i) const
    {
        return std::sqrt(2.0 / (n_ + 1)) * std::sin(pi * k * (i + 1) / (n_ + 1));
    }

private:
    // eigenpairs of tridiag(-1, 2, -1)/h^2 + mu diag(x^2) with eigenvalue <= top
    void tridiagonal(double mu, double top, std::vector<double>& vals, std::vector<std::vector<double>>& vecs) const
    {
        const lapack_int n = n_;
        std::vector<double> d(static_cast<std::size_t>(n)), e(static_cast<std::size_t>(n));
        const double inv = 1 / (h_ * h_);
        for (int i = 0; i < n_; ++i) d[static_cast<std::size_t>(i)] = 2 * inv + mu * nodes_[static_cast<std::size_t>(i)] * nodes_[static_cast<std::size_t>(i)];
        for (int i = 0; i + 1 < n_; ++i) e[static_cast<std::size_t>(i)] = -inv;
        lapack_int found = 0;
        std::vector<double> w(static_cast<std::size_t>(n)), z(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
        std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
        const char range = std::isfinite(top) ? 'V' : 'A';
        const lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', range, n, d.data(), e.data(), -1.0, top, 0, 0, 0.0,
                                               &found, w.data(), z.data(), n, support.data());
        if (info != 0) throw numerical_failure("grid_oracle: dstevr failed with info " + std::to_string(info));
        vals.assign(w.begin(), w.begin() + found);
        vecs.clear();
        for (lapack_int c = 0; c < found; ++c) {
            vecs.emplace_back(z.begin() + c * n, z.begin() + (c + 1) * n);
        }
    }

    void build()
    {
        const double inv = 1 / (h_ * h_);
        auto mu1 = [&](int k) {
            const double s = std::sin(pi * k / (2.0 * (n_ + 1)));
            return 4 * inv * s * s;
        };
        for_each_in_box(multi_index(d2_, 1), multi_index(d2_, n_), [&](const multi_index& k) {
            double mu = 0;
            for (int v : k) mu += mu1(v);
            std::vector<double> vals;
            std::vector<std::vector<double>> vecs;
            tridiagonal(mu, lambda_max_, vals, vecs);
            if (vals.empty()) return;
            x2_mode m;
            m.k = k;
            m.mu = mu;
            if (d1_ == 1) {
                m.lambda = vals;
                m.phi = vecs;
            } else {
                // separable in x'_1, x'_2: pairs with lambda_a + lambda_b <= Lambda_max
                for (std::size_t a = 0; a < vals.size(); ++a) {
                    for (std::size_t b = 0; b < vals.size(); ++b) {
                        if (vals[a] + vals[b] > lambda_max_) continue;
                        m.lambda.push_back(vals[a] + vals[b]);
                        std::vector<double> v(static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_));
                        for (int i = 0; i < n_; ++i) {
                            for (int j = 0; j < n_; ++j) {
                                v[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j)] =
                                    vecs[a][static_cast<std::size_t>(i)] * vecs[b][static_cast<std::size_t>(j)];
                            }
                        }
                        m.phi.push_back(std::move(v));
                    }
                }
                if (m.lambda.empty()) return;
            }
            modes_.push_back(std::move(m));
        });
    }

    int d1_, d2_;
    double a_, h_, lambda_max_;
    int n_ = 0;
    std::vector<double> nodes_;
    std::vector<x2_mode> modes_;
};

struct oracle_options
{
    double tail_tolerance = 1e-10; // max |F| above Lambda_max relative to max |F| below
};

/// Joint function G(lambda, xi) of L and |T| = |-i grad_{x''}|; on the grid |xi| is sqrt(mu_k) of the
/// x'' sine mode.
using joint_function = std::function<complex(double, double)>;

/// K(x, y) = sum_i G(lambda_i, |xi_i|) phi_i(x) phi_i(y) / h^{d1+d2} over the computed eigenpairs, for
/// every node x; y is moved to the nearest node. Returned on a full (non-radial) slice grid.
/// G must vanish for lambda > support_top, which must lie inside the resolved spectrum.
inline kernel_slice oracle_kernel(const grid_oracle& o, const joint_function& g, double support_top, const point& y_in,
                                  const std::string& tag = "joint")
{
    if (support_top > o.lambda_max()) {
        throw numerical_failure("oracle_kernel: support reaches above Lambda_max");
    }
    const int d1 = o.d1(), d2 = o.d2();
    const point y = o.snap(y_in);
    const int n = o.n();
    kernel_slice s;
    s.d1 = d1;
    s.d2 = d2;
    s.y = y;
    s.tag = "oracle " + tag;
    for (int j = 0; j < d1; ++j) {
        s.grid.x1_axes.push_back(o.nodes());
        s.grid.x1_steps.push_back(o.h());
    }
    multi_index yi1(d1), yi2(d2);
    for (int j = 0; j < d1; ++j) yi1[j] = o.nearest(y.x1[j]);
    for (int j = 0; j < d2; ++j) yi2[j] = o.nearest(y.x2[j]);
    std::vector<multi_index> z_nodes;
    for_each_in_box(multi_index(d2, 0), multi_index(d2, n - 1), [&](const multi_index& k) {
        real_vec z(d2);
        for (int j = 0; j < d2; ++j) z[j] = o.nodes()[static_cast<std::size_t>(k[j])] - y.x2[j];
        s.grid.z.push_back(z);
        s.grid.z_weight.push_back(std::pow(o.h(), d2));
        z_nodes.push_back(k);
    });
    s.grid.radial = false;
    s.grid.z_step = o.h();
    s.grid.z_half_width = o.half_width() + norm_inf(y.x2.span());
    std::size_t y_flat = 0;
    for (int j = 0; j < d1; ++j) y_flat = y_flat * static_cast<std::size_t>(n) + static_cast<std::size_t>(yi1[j]);

    const std::size_t nx = s.grid.x1_count(), nz = s.grid.z.size();
    s.values.assign(nx * nz, 0.0);
    const double norm = std::pow(o.h(), -(d1 + d2));
    for (const auto& mode : o.modes()) {
        // x' profile of this mode: sum_m G(lambda_m, xi) phi_m(x') phi_m(y')
        const double xi = std::sqrt(mode.mu);
        std::vector<complex> prof(nx, 0.0);
        for (std::size_t m = 0; m < mode.lambda.size(); ++m) {
            const complex c = g(mode.lambda[m], xi) * mode.phi[m][y_flat];
            if (c == complex(0)) continue;
            for (std::size_t i = 0; i < nx; ++i) prof[i] += c * mode.phi[m][i];
        }
        double sy = 1;
        for (int j = 0; j < d2; ++j) sy *= o.sine(mode.k[j], yi2[j]);
        std::vector<double> sz(nz);
        for (std::size_t iz = 0; iz < nz; ++iz) {
            double v = sy;
            for (int j = 0; j < d2; ++j) v *= o.sine(mode.k[j], z_nodes[iz][j]);
            sz[iz] = v * norm;
        }
        for (std::size_t i = 0; i < nx; ++i) {
            if (prof[i] == complex(0)) continue;
            for (std::size_t iz = 0; iz < nz; ++iz) s.values[i * nz + iz] += prof[i] * sz[iz];
        }
    }
    return s;
}

/// Kernel of F(L). F must be negligible above Lambda_max (checked on [Lambda_max, 3 Lambda_max]).
inline kernel_slice oracle_kernel(const grid_oracle& o, const multiplier1d& f, const point& y,
                                  const oracle_options& opt = {})
{
    double inside = 0, tail = 0;
    for (int i = 0; i <= 2000 && std::isfinite(o.lambda_max()); ++i) {
        const double l = o.lambda_max() * i / 2000;
        inside = std::max(inside, std::abs(f(l)));
        tail = std::max(tail, std::abs(f(o.lambda_max() * (1 + 2.0 * i / 2000))));
    }
    if (inside > 0 && tail > opt.tail_tolerance * inside) {
        throw numerical_failure("oracle_kernel: multiplier is not negligible above Lambda_max (relative " +
                                std::to_string(tail / inside) + ")");
    }
    return oracle_kernel(
        o, [f](double l, double) { return f(l); }, -std::numeric_limits<double>::infinity(), y, f.tag);
}

/// G(lambda, xi) = F(lambda) chi(lambda / (M xi)): the truncation F_M written in terms of L and |T|.
inline joint_function truncated_joint(const multiplier1d& f, double big_m)
{
    return [f, big_m](double l, double xi) {
        if (!(xi > 0)) return complex(0);
        const double c = chi(l / (big_m * xi));
        return c == 0 ? complex(0) : c * f(l);
    };
}

} // namespace grushin

#endif // GRUSHIN_GRID_ORACLE_HPP
