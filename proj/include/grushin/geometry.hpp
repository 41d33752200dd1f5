#ifndef GRUSHIN_GEOMETRY_HPP
#define GRUSHIN_GEOMETRY_HPP

#include <cmath>
#include <limits>
#include <random>

#include "core.hpp"
#include "quadrature.hpp"

namespace grushin
{

/// A point (x', x'') of R^d1 x R^d2.
struct point
{
    real_vec x1;
    real_vec x2;

    int d1() const { return x1.size(); }
    int d2() const { return x2.size(); }
    friend bool operator==(const point&, const point&) = default;
};

/// delta_r(x', x'') = (r x', r^2 x'').
inline point dilate(const point& x, double r)
{
    if (!(r > 0)) throw std::invalid_argument("dilate: r must be positive");
    return {r * x.x1, (r * r) * x.x2};
}

/// |x' - y'| + |x'' - y''|^{1/2}
inline double partial_distance_1(const point& x, const point& y)
{
    return norm2(x.x1 - y.x1) + std::sqrt(norm2(x.x2 - y.x2));
}

/// |x' - y'| + |x'' - y''| / (|x'| + |y'|); infinite on the degenerate line x' = y' = 0, x'' != y''.
inline double partial_distance_2(const point& x, const point& y)
{
    const double z = norm2(x.x2 - y.x2);
    const double a = norm2(x.x1) + norm2(y.x1);
    const double base = norm2(x.x1 - y.x1);
    if (z == 0) return base;
    if (a == 0) return std::numeric_limits<double>::infinity();
    return base + z / a;
}

/// min of the two partial distances; comparable to the control distance.
inline double dist_surrogate(const point& x, const point& y)
{
    return std::min(partial_distance_1(x, y), partial_distance_2(x, y));
}

/// Model volume r^{d1+d2} max{r, |y'|}^{d2} of the ball B(y, r).
inline double ball_volume_estimate(const point& y, double r)
{
    if (!(r > 0)) throw std::invalid_argument("ball_volume_estimate: r must be positive");
    const int d1 = y.d1(), d2 = y.d2();
    return std::pow(r, d1 + d2) * std::pow(std::max(r, norm2(y.x1)), d2);
}

/// Monte-Carlo volume of {x : dist_surrogate(x, y) < r}.
inline double ball_volume_monte_carlo(const point& y, double r, std::size_t samples, std::uint64_t seed)
{
    const int d1 = y.d1(), d2 = y.d2();
    // dist < r forces |x'-y'| < r and |x''-y''| < max(r^2, r (2|y'| + r))
    const double h1 = r, h2 = std::max(r * r, r * (2 * norm2(y.x1) + r));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1, 1);
    std::size_t hits = 0;
    point x{real_vec(d1), real_vec(d2)};
    for (std::size_t i = 0; i < samples; ++i) {
        for (int j = 0; j < d1; ++j) x.x1[j] = y.x1[j] + h1 * u(rng);
        for (int j = 0; j < d2; ++j) x.x2[j] = y.x2[j] + h2 * u(rng);
        if (dist_surrogate(x, y) < r) ++hits;
    }
    return std::pow(2 * h1, d1) * std::pow(2 * h2, d2) * static_cast<double>(hits) / static_cast<double>(samples);
}

/// w_R(x, y) = 1 + R^2 |x'' - y''| / (1 + R |y'|); R = 1 is the unscaled weight.
inline double weight(const point& x, const point& y, double big_r = 1)
{
    if (!(big_r > 0)) throw std::invalid_argument("weight: R must be positive");
    return 1 + big_r * big_r * norm2(x.x2 - y.x2) / (1 + big_r * norm2(y.x1));
}

struct weight_bound_sample
{
    double constant = 0;    // max w / (1 + dist)^2
    double constant_1 = 0;  // max w / (1 + d_1)^2
    double constant_2 = 0;  // max w / (1 + d_2)^2
    double min_weight = std::numeric_limits<double>::infinity();
    std::size_t samples = 0;
};

/// Uniform pairs in [-half_width, half_width]^{d1+d2}.
inline weight_bound_sample sample_weight_bounds(int d1, int d2, std::size_t samples, std::uint64_t seed,
                                                double half_width = 10)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-half_width, half_width);
    weight_bound_sample out;
    point x{real_vec(d1), real_vec(d2)}, y{real_vec(d1), real_vec(d2)};
    for (std::size_t i = 0; i < samples; ++i) {
        for (int j = 0; j < d1; ++j) {
            x.x1[j] = u(rng);
            y.x1[j] = u(rng);
        }
        for (int j = 0; j < d2; ++j) {
            x.x2[j] = u(rng);
            y.x2[j] = u(rng);
        }
        const double w = weight(x, y);
        const double a = partial_distance_1(x, y), b = partial_distance_2(x, y);
        const double m = std::min(a, b);
        out.constant = std::max(out.constant, w / ((1 + m) * (1 + m)));
        out.constant_1 = std::max(out.constant_1, w / ((1 + a) * (1 + a)));
        out.constant_2 = std::max(out.constant_2, w / ((1 + b) * (1 + b)));
        out.min_weight = std::min(out.min_weight, w);
    }
    out.samples = samples;
    return out;
}

// ---------------------------------------------------------------------------
// Weight integral

struct weight_integral_options
{
    double cutoff = 1e4; // |x' - y'| <= cutoff, |x'' - y''| <= cutoff^2
    int order = 12;
    int angular = 24; // Gauss-Legendre nodes in the polar angle (d1 >= 2)
};

struct weight_integral_result
{
    double integral = 0;
    double volume = 0; // ball_volume_estimate(y, 1)
    double ratio = 0;
};

/// int w(x,y)^{-2r} (1 + dist(x,y))^{-2 alpha} dx / |B(y,1)|, for r < d2/2 and alpha + 2r > (d1 + 2 d2)/2.
/// The integrand depends on x'' only through |x'' - y''| and on x' through |x' - y'| and the angle
/// between x' - y' and y', so the integral is done in polar coordinates around y.
inline weight_integral_result weight_integral_check(const point& y, double alpha, double r,
                                                    const weight_integral_options& opt = {})
{
    const int d1 = y.d1(), d2 = y.d2();
    if (d1 < 1 || d1 > 3 || d2 < 1 || d2 > 3) throw refusal("weight_integral_check: dimensions must be in 1..3");
    if (!(r >= 0 && alpha >= 0)) throw refusal("weight_integral_check: exponents must be nonnegative");
    if (!(r < 0.5 * d2)) throw refusal("weight_integral_check: needs r < d2/2");
    if (!(alpha + 2 * r > 0.5 * (d1 + 2 * d2))) throw refusal("weight_integral_check: needs alpha + 2r > (d1 + 2 d2)/2");

    const double ya = norm2(y.x1);
    const double sphere2 = d2 == 1 ? 2.0 : (d2 == 2 ? 2 * pi : 4 * pi);

    // angle between x' - y' and y': cos theta values with weights summing to the sphere area
    std::vector<std::pair<double, double>> angles;
    if (d1 == 1) {
        angles = {{1.0, 1.0}, {-1.0, 1.0}};
    } else {
        const auto g = quadrature::gauss_legendre(opt.angular, 0, pi);
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double th = g.nodes[i];
            const double wt = d1 == 2 ? 2 * g.weights[i] : 2 * pi * std::sin(th) * g.weights[i];
            angles.push_back({std::cos(th), wt});
        }
    }

    const auto rho_rule = quadrature::geometric_half_line(0.25, opt.cutoff, opt.order, 8);
    const auto s_rule = quadrature::geometric_half_line(0.1, opt.cutoff * opt.cutoff, opt.order, 8);

    std::vector<double> partial(rho_rule.size());
    parallel_for(rho_rule.size(), [&](std::size_t i) {
        const double rho = rho_rule.nodes[i];
        double acc = 0;
        for (const auto& [c, aw] : angles) {
            const double xa = std::sqrt(std::max(0.0, ya * ya + rho * rho + 2 * rho * ya * c));
            const double denom = xa + ya;
            double inner = 0;
            for (std::size_t k = 0; k < s_rule.size(); ++k) {
                const double s = s_rule.nodes[k];
                const double w = 1 + s / (1 + ya);
                const double da = rho + std::sqrt(s);
                const double db = denom > 0 ? rho + s / denom : (s == 0 ? rho : std::numeric_limits<double>::infinity());
                const double dist = std::min(da, db);
                const double radial = d2 == 1 ? 1.0 : std::pow(s, d2 - 1);
                inner += s_rule.weights[k] * radial * std::pow(w, -2 * r) * std::pow(1 + dist, -2 * alpha);
            }
            acc += aw * inner;
        }
        const double radial1 = d1 == 1 ? 1.0 : std::pow(rho, d1 - 1);
        partial[i] = rho_rule.weights[i] * radial1 * acc;
    });
    weight_integral_result out;
    out.integral = sphere2 * pairwise_sum<double>(partial);
    out.volume = ball_volume_estimate(y, 1);
    out.ratio = out.integral / out.volume;
    return out;
}

} // namespace grushin

#endif // GRUSHIN_GEOMETRY_HPP
