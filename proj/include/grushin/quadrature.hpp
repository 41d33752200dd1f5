#ifndef GRUSHIN_QUADRATURE_HPP
#define GRUSHIN_QUADRATURE_HPP

#include <cmath>
#include <vector>

#include "core.hpp"

namespace grushin::quadrature
{

struct rule
{
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }

    template <typename F>
    auto integrate(F&& f) const
    {
        decltype(f(0.0)) s{};
        for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(nodes[i]);
        return s;
    }
};

/// n-point Gauss-Legendre rule on [-1, 1], Newton iteration on P_n.
inline rule gauss_legendre(int n)
{
    rule r;
    r.nodes.resize(static_cast<std::size_t>(n));
    r.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) {
                p1 = x;
                p0 = 1;
            }
            dp = n * (x * p1 - p0) / (x * x - 1);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2 / ((1 - x * x) * dp * dp);
        r.nodes[static_cast<std::size_t>(i)] = -x;
        r.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
        r.weights[static_cast<std::size_t>(i)] = w;
        r.weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    if (n % 2 == 1) r.nodes[static_cast<std::size_t>(n / 2)] = 0;
    return r;
}

/// Gauss-Legendre rule mapped onto [a, b].
inline rule gauss_legendre(int n, double a, double b)
{
    rule r = gauss_legendre(n);
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    for (std::size_t i = 0; i < r.size(); ++i) {
        r.nodes[i] = c + h * r.nodes[i];
        r.weights[i] *= h;
    }
    return r;
}

/// Composite Gauss-Legendre over consecutive panels given by `breaks`.
inline rule composite(const std::vector<double>& breaks, int order)
{
    rule out;
    const rule ref = gauss_legendre(order);
    for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
        const double c = 0.5 * (breaks[p] + breaks[p + 1]), h = 0.5 * (breaks[p + 1] - breaks[p]);
        for (std::size_t i = 0; i < ref.size(); ++i) {
            out.nodes.push_back(c + h * ref.nodes[i]);
            out.weights.push_back(h * ref.weights[i]);
        }
    }
    return out;
}

/// Rule on [0, limit] with uniform panels of width `unit` up to `unit*first`
/// and geometrically doubling panels after that. Suited to integrands with
/// algebraic decay.
inline rule geometric_half_line(double unit, double limit, int order, int first = 4)
{
    std::vector<double> breaks{0.0};
    double x = 0;
    for (int i = 1; i <= first && x < limit; ++i) {
        x = std::min(limit, unit * i);
        breaks.push_back(x);
    }
    double width = unit;
    while (x < limit) {
        width *= 1.5;
        x = std::min(limit, x + width);
        breaks.push_back(x);
    }
    return composite(breaks, order);
}

} // namespace grushin::quadrature

#endif // GRUSHIN_QUADRATURE_HPP
