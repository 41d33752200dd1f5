#ifndef GRUSHIN_HERMITE_HPP
#define GRUSHIN_HERMITE_HPP

// Hermite functions h_l (L^2-normalized eigenfunctions of the harmonic
// oscillator), their scaled tensor products, and the level sums H_{d,l}.

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "core.hpp"

namespace grushin::hermite
{

/// a_l = sqrt(l(l-1)) for l > 0, zero otherwise.
inline double a_coeff(long ell)
{
    if (ell <= 0) return 0.0;
    return std::sqrt(static_cast<double>(ell) * static_cast<double>(ell - 1));
}

namespace detail
{
inline const double pi_quarter_inv = std::pow(pi, -0.25);
inline constexpr double rescale_threshold = 0x1p256;
inline constexpr double rescale_factor = 0x1p-256;
inline constexpr int rescale_exponent = 256;
} // namespace detail

/// Writes h_0(t), ..., h_{out.size()-1}(t) into out.
///
/// Runs the normalized three-term recurrence
///   h_{l+1} = sqrt(2/(l+1)) t h_l - sqrt(l/(l+1)) h_{l-1}
/// on mantissas with the Gaussian factor and a base-2 exponent kept apart, so
/// nothing underflows for large |t| and nothing overflows for large l.
inline void hermite_values(double t, std::span<double> out)
{
    const std::size_t count = out.size();
    if (count == 0) return;
    const double log_gauss = -0.5 * t * t;
    int exponent = 0;

    auto scale_of = [&](int e) { return log_gauss + e * std::numbers::ln2; };
    double log_scale = scale_of(0);
    double factor = std::exp(log_scale);
    auto emit = [&](double mantissa) {
        if (mantissa == 0.0) return 0.0;
        if (log_scale > -600.0) return mantissa * factor;
        const double lg = std::log(std::abs(mantissa)) + log_scale;
        return lg < -745.0 ? 0.0 : std::copysign(std::exp(lg), mantissa);
    };

    double prev = 0.0;
    double cur = detail::pi_quarter_inv;
    out[0] = emit(cur);
    for (std::size_t l = 0; l + 1 < count; ++l) {
        const double ld = static_cast<double>(l);
        const double next = std::sqrt(2.0 / (ld + 1.0)) * t * cur - std::sqrt(ld / (ld + 1.0)) * prev;
        prev = cur;
        cur = next;
        if (std::abs(cur) > detail::rescale_threshold) {
            cur *= detail::rescale_factor;
            prev *= detail::rescale_factor;
            exponent += detail::rescale_exponent;
            log_scale = scale_of(exponent);
            factor = std::exp(log_scale);
        }
        out[l + 1] = emit(cur);
    }
}

inline std::vector<double> hermite_values(int max_degree, double t)
{
    std::vector<double> v(static_cast<std::size_t>(max_degree + 1));
    hermite_values(t, v);
    return v;
}

/// h_l(t); zero for l < 0.
inline double hermite_function(int ell, double t)
{
    if (ell < 0) return 0.0;
    return hermite_values(ell, t)[static_cast<std::size_t>(ell)];
}

/// Table of h_l(t_k) for 0 <= l <= max_degree over a batch of points.
class hermite_table
{
public:
    hermite_table(int max_degree, std::vector<double> points)
        : max_degree_(max_degree), points_(std::move(points)),
          values_(points_.size() * static_cast<std::size_t>(max_degree + 1))
    {
        if (max_degree < 0) throw std::invalid_argument("hermite_table: negative degree");
        const std::size_t stride = static_cast<std::size_t>(max_degree + 1);
        parallel_for(points_.size(), [&](std::size_t k) {
            hermite_values(points_[k], std::span<double>(values_.data() + k * stride, stride));
        });
    }

    int max_degree() const { return max_degree_; }
    const std::vector<double>& points() const { return points_; }
    double operator()(int ell, std::size_t point) const
    {
        return values_[point * static_cast<std::size_t>(max_degree_ + 1) + static_cast<std::size_t>(ell)];
    }
    std::span<const double> row(std::size_t point) const
    {
        const std::size_t stride = static_cast<std::size_t>(max_degree_ + 1);
        return {values_.data() + point * stride, stride};
    }

private:
    int max_degree_;
    std::vector<double> points_;
    std::vector<double> values_;
};

inline hermite_table hermite_eval(int max_degree, std::vector<double> points)
{
    return hermite_table(max_degree, std::move(points));
}

/// h'_l(t) = sqrt(2l) h_{l-1}(t) - t h_l(t); regular at t = 0.
inline double hermite_derivative(int ell, double t)
{
    if (ell < 0) return 0.0;
    const auto v = hermite_values(ell, t);
    const double lower = ell > 0 ? v[static_cast<std::size_t>(ell - 1)] : 0.0;
    return std::sqrt(2.0 * ell) * lower - t * v[static_cast<std::size_t>(ell)];
}

/// Residual of 2t h'_l = a_l h_{l-2} - a_{l+2} h_{l+2} - h_l at (l, t).
inline double derivative_identity_residual(int ell, double t)
{
    const auto v = hermite_values(ell + 2, t);
    auto h = [&](int k) { return k < 0 ? 0.0 : v[static_cast<std::size_t>(k)]; };
    return 2 * t * hermite_derivative(ell, t) - (a_coeff(ell) * h(ell - 2) - a_coeff(ell + 2) * h(ell + 2) - h(ell));
}

/// |xi|^{d1/4} prod_j h_{n_j}(|xi|^{1/2} u_j); zero when some n_j < 0.
inline double scaled_tensor_eval(const multi_index& n, std::span<const double> u, std::span<const double> xi)
{
    const double r = norm2(xi);
    if (!(r > 0)) throw std::invalid_argument("scaled_tensor_eval: xi must be nonzero");
    for (int j = 0; j < n.size(); ++j) {
        if (n[j] < 0) return 0.0;
    }
    const double sq = std::sqrt(r);
    double v = std::pow(r, n.size() / 4.0);
    for (int j = 0; j < n.size(); ++j) {
        v *= hermite_function(n[j], sq * u[static_cast<std::size_t>(j)]);
    }
    return v;
}

/// H_{d,l}(u) = sum over n in N^d with |n|_1 = l of prod_i h_{n_i}(u_i)^2,
/// by exact enumeration of the compositions of l.
inline double level_sum(int d, int ell, std::span<const double> u)
{
    if (d < 1 || static_cast<int>(u.size()) != d) throw std::invalid_argument("level_sum: bad dimension");
    if (ell < 0) return 0.0;
    std::vector<std::vector<double>> sq(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
        auto v = hermite_values(ell, u[static_cast<std::size_t>(i)]);
        for (double& x : v) x *= x;
        sq[static_cast<std::size_t>(i)] = std::move(v);
    }
    // partial[l] = sum over the first i axes with index sum l
    std::vector<double> partial(sq[0].begin(), sq[0].end());
    for (int i = 1; i < d; ++i) {
        std::vector<double> next(static_cast<std::size_t>(ell + 1), 0.0);
        for (int total = 0; total <= ell; ++total) {
            double s = 0;
            for (int k = 0; k <= total; ++k) {
                s += partial[static_cast<std::size_t>(total - k)] * sq[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
            }
            next[static_cast<std::size_t>(total)] = s;
        }
        partial = std::move(next);
    }
    return partial[static_cast<std::size_t>(ell)];
}

/// [l] = 2l + d.
inline int bracket(int d, int ell) { return 2 * ell + d; }

/// Gauss-Hermite nodes with weights for integrands that already carry the
/// Gaussian factor, i.e. sum_i w_i f(t_i) ~ int f(t) dt for f = h_j h_k.
/// Nodes from the Jacobi matrix (Golub-Welsch), polished by Newton on h_n;
/// weights w_i = 1 / (n h_{n-1}(t_i)^2).
inline std::vector<std::pair<double, double>> gauss_hermite_rule(int n)
{
    if (n < 1) throw std::invalid_argument("gauss_hermite_rule: n >= 1");
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd sub(std::max(n - 1, 0));
    for (int k = 1; k < n; ++k) sub[k - 1] = std::sqrt(k / 2.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    std::vector<std::pair<double, double>> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double t = solver.eigenvalues()[i];
        for (int it = 0; it < 5; ++it) {
            const auto v = hermite_values(n, t);
            const double deriv = std::sqrt(2.0 * n) * v[static_cast<std::size_t>(n - 1)] - t * v[static_cast<std::size_t>(n)];
            if (deriv == 0.0) break;
            const double dt = v[static_cast<std::size_t>(n)] / deriv;
            t -= dt;
            if (std::abs(dt) < 1e-15 * std::max(1.0, std::abs(t))) break;
        }
        const double hm = hermite_values(n - 1, t)[static_cast<std::size_t>(n - 1)];
        const double w = hm == 0.0 ? 0.0 : 1.0 / (n * hm * hm);
        out.emplace_back(t, w);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Empirical constants for the level-sum bounds.

struct bound_result
{
    std::string name;
    double sup_ratio = 0;    // sup over the grid of LHS / envelope
    double decay_rate = 0;   // c used in exponential envelopes (0 if none)
    double cap = 0;
    bool pass = true;
};

struct level_sum_bounds_report
{
    int d = 1;
    int max_level = 0;
    std::vector<bound_result> bounds;
    bool pass() const
    {
        return std::all_of(bounds.begin(), bounds.end(), [](const bound_result& b) { return b.pass; });
    }
};

struct level_sum_bounds_options
{
    double ratio_cap = 1e3;
    double refined_c = 2.0;     // c_{d,kappa} in the refined Gaussian envelope
};

namespace detail
{
// H_{d,l}(u) for all l <= max_level at once.
inline std::vector<double> level_sums_upto(int d, int max_level, std::span<const double> u)
{
    std::vector<std::vector<double>> sq(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
        auto v = hermite_values(max_level, u[static_cast<std::size_t>(i)]);
        for (double& x : v) x *= x;
        sq[static_cast<std::size_t>(i)] = std::move(v);
    }
    std::vector<double> partial = sq[0];
    for (int i = 1; i < d; ++i) {
        std::vector<double> next(static_cast<std::size_t>(max_level + 1), 0.0);
        for (int total = 0; total <= max_level; ++total) {
            double s = 0;
            for (int k = 0; k <= total; ++k) {
                s += partial[static_cast<std::size_t>(total - k)] * sq[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
            }
            next[static_cast<std::size_t>(total)] = s;
        }
        partial = std::move(next);
    }
    return partial;
}

// Points of a grid in R^d: scalar grid along the diagonal direction and
// along the first axis, which exercises both |u| and |u|_inf.
inline std::vector<std::vector<double>> probe_points(int d, const std::vector<double>& radii)
{
    std::vector<std::vector<double>> pts;
    for (double r : radii) {
        std::vector<double> axis(static_cast<std::size_t>(d), 0.0);
        axis[0] = r;
        pts.push_back(axis);
        if (d > 1) {
            std::vector<double> diag(static_cast<std::size_t>(d), r / std::sqrt(double(d)));
            pts.push_back(diag);
            std::vector<double> mixed(static_cast<std::size_t>(d), 0.3 * r);
            mixed[0] = r;
            pts.push_back(mixed);
        }
    }
    return pts;
}
} // namespace detail

/// Scans the level-sum bounds over l <= max_level and the given radii and
/// reports empirical constants. The decay rate c of the Gaussian envelopes is
/// half the rate c_d observed on a coarse pre-scan; the Gaussian bound is then
/// re-checked on a held-out grid offset from the pre-scan points.
inline level_sum_bounds_report check_level_sum_bounds(int d, int max_level, const std::vector<double>& radii,
                                                      const level_sum_bounds_options& opt = {})
{
    if (d < 1 || d > 3) throw std::invalid_argument("check_level_sum_bounds: d in {1,2,3}");
    level_sum_bounds_report rep;
    rep.d = d;
    rep.max_level = max_level;

    const auto pts = detail::probe_points(d, radii);
    std::vector<std::vector<double>> sums(pts.size());
    parallel_for(pts.size(), [&](std::size_t i) { sums[i] = detail::level_sums_upto(d, max_level, pts[i]); });

    auto uinf2 = [](const std::vector<double>& u) { double m = norm_inf(u); return m * m; };

    // polynomial envelope
    bound_result poly;
    poly.name = d == 1 ? "muckenhoupt: H <= C ([l]^(1/3) + |u^2-[l]|)^(-1/2)" : "higher: H <= C [l]^(d/2-1)";
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double u2 = pts[i][0] * pts[i][0];
        for (int l = 0; l <= max_level; ++l) {
            const double b = bracket(d, l);
            const double env = d == 1 ? std::pow(std::cbrt(b) + std::abs(u2 - b), -0.5) : std::pow(b, d / 2.0 - 1.0);
            poly.sup_ratio = std::max(poly.sup_ratio, sums[i][static_cast<std::size_t>(l)] / env);
        }
    }

    // Gaussian envelope: pre-scan decay rate on the region |u|_inf^2 >= 2[l]
    double cd = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double m2 = uinf2(pts[i]);
        for (int l = 0; l <= max_level; ++l) {
            if (m2 < 2.0 * bracket(d, l) || m2 == 0) continue;
            const double h = sums[i][static_cast<std::size_t>(l)];
            if (h <= 0) continue;
            cd = std::min(cd, -std::log(std::min(h, 1.0)) / m2);
        }
    }
    if (!std::isfinite(cd) || cd <= 0) cd = 1e-3;
    bound_result gauss;
    gauss.name = d == 1 ? "muckenhoupt: H <= C exp(-c u^2) for u^2 >= 2[l]"
                        : "higher: H <= C exp(-c |u|_inf^2) for |u|_inf^2 >= 2[l]";
    gauss.decay_rate = 0.5 * cd;
    std::vector<double> held_out;
    for (std::size_t k = 0; k + 1 < radii.size(); ++k) held_out.push_back(0.5 * (radii[k] + radii[k + 1]));
    const auto hpts = detail::probe_points(d, held_out);
    for (const auto& u : hpts) {
        const double m2 = uinf2(u);
        const auto s = detail::level_sums_upto(d, max_level, u);
        for (int l = 0; l <= max_level; ++l) {
            if (m2 < 2.0 * bracket(d, l)) continue;
            gauss.sup_ratio = std::max(gauss.sup_ratio, s[static_cast<std::size_t>(l)] * std::exp(gauss.decay_rate * m2));
        }
    }

    // refined sum bound with b_l = [l]: sum_{[l] <= x} H_{d,l}(u / sqrt([l])) <= C x^{d/2}
    bound_result refined;
    refined.name = "refined: sum_{[l]<=x} H(b_l^{-1/2} u) <= C x^{d/2}";
    bound_result refined_tail;
    refined_tail.name = "refined: sum_{[l]<=x} H(b_l^{-1/2} u) <= C exp(-|u|^2/(c x)) for |u| >= c x";
    refined_tail.decay_rate = opt.refined_c;
    for (const auto& u : pts) {
        double running = 0;
        const double un = norm2(u);
        for (int l = 0; l <= max_level; ++l) {
            const double b = bracket(d, l);
            std::vector<double> scaled(u);
            for (double& x : scaled) x /= std::sqrt(b);
            running += level_sum(d, l, scaled);
            const double x = b; // sum over [l'] <= x with x = [l]
            refined.sup_ratio = std::max(refined.sup_ratio, running / std::pow(x, d / 2.0));
            if (un >= opt.refined_c * x) {
                refined_tail.sup_ratio = std::max(refined_tail.sup_ratio, running * std::exp(un * un / (opt.refined_c * x)));
            }
        }
    }

    rep.bounds = {poly, gauss, refined, refined_tail};
    for (auto& b : rep.bounds) {
        b.cap = opt.ratio_cap;
        b.pass = std::isfinite(b.sup_ratio) && b.sup_ratio <= opt.ratio_cap;
    }
    return rep;
}

} // namespace grushin::hermite

#endif // GRUSHIN_HERMITE_HPP
