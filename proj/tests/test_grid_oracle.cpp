#include <catch_amalgamated.hpp>

#include <grushin/grid_oracle.hpp>

#include <Eigen/Dense>

using namespace grushin;
using Catch::Approx;

TEST_CASE("oracle matrix structure")
{
    for (auto [d1, d2] : {std::pair{1, 1}, std::pair{2, 1}, std::pair{1, 2}}) {
        const grid_oracle o(d1, d2, 2, 0.4, std::numeric_limits<double>::infinity(), false);
        const Eigen::SparseMatrix<double> m = o.matrix();
        const Eigen::SparseMatrix<double> t = m.transpose();
        CHECK((m - t).norm() == 0);
        CHECK(o.smallest_eigenvalue() > 0);

        // the separable eigenvalues are the whole spectrum of the assembled matrix
        const Eigen::MatrixXd dense(m);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
        const auto ours = o.eigenvalues();
        REQUIRE(ours.size() == static_cast<std::size_t>(dense.rows()));
        double worst = 0;
        for (std::size_t i = 0; i < ours.size(); ++i) {
            worst = std::max(worst, std::abs(ours[i] - es.eigenvalues()[static_cast<Eigen::Index>(i)]));
        }
        INFO("d1=" << d1 << " d2=" << d2);
        CHECK(worst < 1e-10 * es.eigenvalues().maxCoeff());
    }
}

TEST_CASE("oracle refusals")
{
    CHECK_THROWS_AS(grid_oracle(2, 2, 6, 0.5, 1), refusal);
    CHECK_THROWS_AS(grid_oracle(1, 1, 6, 0.5, 1), refusal); // h^2 Lambda > 0.05
    CHECK_THROWS_AS(grid_oracle(1, 1, 6, 0.7, 0.01), std::invalid_argument);
}

TEST_CASE("lowest eigenvalue under refinement")
{
    const grid_oracle coarse(1, 1, 6, 6.0 / 128, 5);
    const grid_oracle fine(1, 1, 6, 6.0 / 256, 5);
    const double a = coarse.smallest_eigenvalue(), b = fine.smallest_eigenvalue();
    CHECK(a > 0);
    CHECK(std::abs(a - b) <= 0.01 * b);
}

TEST_CASE("identity multiplier gives a discrete delta")
{
    const grid_oracle o(1, 1, 2, 0.25, std::numeric_limits<double>::infinity(), false);
    const point y{real_vec{0.5}, real_vec{-0.25}};
    const auto k = oracle_kernel(o, multipliers::one(), y);
    const double h2 = o.h() * o.h();
    double worst = 0;
    for (std::size_t i = 0; i < k.size(); ++i) {
        const double expect = k.target(i) == k.y ? 1 / h2 : 0;
        worst = std::max(worst, std::abs(k.values[i] - expect) * h2);
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("long-time heat kernel is the ground-state projection")
{
    const double h = 12.0 / 128;
    const grid_oracle o(1, 1, 6, h, 5);
    // spectral gap decides how long "long" is
    const auto ev = o.eigenvalues();
    REQUIRE(ev.size() > 1);
    const double t = 14 / (ev[1] - ev[0]);
    const point y{real_vec{0.3}, real_vec{0.1}};
    const auto k = oracle_kernel(o, multipliers::heat(t), y);

    // ground state from the mode holding the smallest eigenvalue
    const grid_oracle::x2_mode* ground = nullptr;
    for (const auto& m : o.modes()) {
        if (m.lambda.front() == ev[0]) ground = &m;
    }
    REQUIRE(ground != nullptr);
    const int n = o.n();
    const int yi1 = o.nearest(y.x1[0]), yi2 = o.nearest(y.x2[0]);
    double num = 0, den = 0;
    for (std::size_t i = 0; i < k.size(); ++i) {
        const std::size_t ix = i / k.z_count(), iz = i % k.z_count();
        const double phi_x = ground->phi[0][ix] * o.sine(ground->k[0], static_cast<int>(iz));
        const double phi_y = ground->phi[0][static_cast<std::size_t>(yi1)] * o.sine(ground->k[0], yi2);
        const double expect = std::exp(-t * ev[0]) * phi_x * phi_y / (h * h);
        num += std::norm(k.values[i] - expect);
        den += expect * expect;
    }
    CHECK(static_cast<std::size_t>(n) * n == k.size());
    CHECK(std::sqrt(num / den) < 1e-5);
}

TEST_CASE("oracle agrees with the Hermite engine")
{
    // heat-difference bump on [-6, 6]^2; the engine is evaluated on the oracle nodes
    const double h = 12.0 / 512;
    const auto f = multipliers::heat_bump(0.5);
    const grid_oracle o(1, 1, 6, h, 0.05 / (h * h));
    const auto k = oracle_kernel(o, f, point{real_vec{0.5}, real_vec{0.0}});
    engine_options opt;
    opt.period_factor = 8;
    const auto e = kernel_slice_eval(spectral_symbol(f, 1, 1), k.y, k.grid, opt);
    double num = 0, den = 0;
    for (std::size_t i = 0; i < k.size(); ++i) {
        num += std::norm(k.values[i] - e.values[i]);
        den += std::norm(k.values[i]);
    }
    CHECK(std::sqrt(num / den) < 2e-2);
}

TEST_CASE("oracle tail refusal")
{
    const grid_oracle small(1, 1, 6, 12.0 / 128, 5);
    const point y{real_vec{0.5}, real_vec{0.0}};
    CHECK_THROWS_AS(oracle_kernel(small, multipliers::heat_bump(0.5), y), numerical_failure);
    CHECK_THROWS_AS(oracle_kernel(small, truncated_joint(multipliers::smooth_bump(1, 8), 1), 8, y), numerical_failure);
}
