// Acceptance battery: one PASS/FAIL line per criterion, followed by the measured numbers.
// Exit status is nonzero when a criterion fails that is not listed in `documented_unattained`.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <random>
#include <set>
#include <sstream>

#include <grushin/grushin.hpp>

using namespace grushin;

namespace
{

constexpr std::uint64_t seed = 20240607;

// criteria that fail for reasons analysed in the decisions notes; they are still run and reported
const std::set<int> documented_unattained{7};

struct outcome
{
    bool pass = false;
    std::vector<std::string> lines;
};

std::string fmt(double v)
{
    std::ostringstream os;
    os << std::setprecision(4) << v;
    return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

point pt(std::initializer_list<double> a, std::initializer_list<double> b) { return {real_vec(a), real_vec(b)}; }

// ---------------------------------------------------------------------------

outcome hermite_suite()
{
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = suites::hermite_identities(1e-10, 1e-8);
    const double t = seconds_since(t0);
    return {r.pass && t < 30,
            {"max relative residual " + fmt(r.diagnostic("max_residual")) + ", Gram deviation " +
             fmt(r.diagnostic("max_gram_deviation")) + ", " + fmt(t) + " s"}};
}

outcome difference_suite()
{
    const auto r = suites::difference_calculus(seed, 1000, 1e-6);
    return {r.pass,
            {"commutation failures " + fmt(r.diagnostic("commutation_failures")) + " of 1000 trials, discrete/continuous " +
             "discrepancy " + fmt(r.diagnostic("max_d2c_discrepancy"))}};
}

outcome expansion_suite()
{
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = suites::expansion_identity(seed, 50, 2, 1e-5);
    const double t = seconds_since(t0);
    return {r.pass && t < 300,
            {"max relative error " + fmt(r.diagnostic("max_relative_error")) + ", audit failures " +
             fmt(r.diagnostic("audit_failures")) + ", " + fmt(t) + " s"}};
}

double relative_l2(const kernel_slice& a, const kernel_slice& b)
{
    double num = 0, den = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += std::norm(a.values[i] - b.values[i]);
        den += std::norm(a.values[i]);
    }
    return std::sqrt(num / den);
}

outcome oracle_equivalence()
{
    const auto t0 = std::chrono::steady_clock::now();
    const double h = 12.0 / 512;
    const grid_oracle o(1, 1, 6, h, 0.05 / (h * h));
    const point y = pt({0.5}, {0.0});
    engine_options opt;
    opt.period_factor = 8;
    auto compare = [&](const multiplier1d& f) {
        const auto k = oracle_kernel(o, f, y);
        const auto e = kernel_slice_eval(spectral_symbol(f, 1, 1), k.y, k.grid, opt);
        return relative_l2(k, e);
    };
    const double err = compare(multipliers::heat_bump(0.5));
    const double t = seconds_since(t0);
    outcome out{err <= 2e-2 && t < 300, {"heat bump e^{-l/2} - e^{-l}: relative L2 error " + fmt(err) + " on [-6,6]^2, " + fmt(t) + " s"}};
    try {
        out.lines.push_back("diagnostic, compact bump on [1,4]: relative L2 error " + fmt(compare(multipliers::smooth_bump(1, 4))) +
                            " (heavy x'' tails meet the Dirichlet box)");
    } catch (const std::exception& e) {
        out.lines.push_back(std::string("diagnostic, compact bump on [1,4]: ") + e.what());
    }
    return out;
}

outcome dilation_covariance()
{
    const std::vector<std::pair<point, point>> pairs = {{pt({0.7}, {0.3}), pt({0.5}, {0.0})},
                                                        {pt({-0.4}, {1.1}), pt({1.0}, {0.2})}};
    outcome out{true, {}};
    for (const auto& f : {multipliers::heat(1.0), multipliers::bochner_riesz(1.0, 1.0)}) {
        const bool heat = f.tag.starts_with("heat");
        const double step = 2 * pi / (heat ? 4096 : 262144);
        engine_options opt;
        opt.level_cap = 1 << 17;
        double worst = 0;
        for (double r : {0.5, 2.0}) {
            const auto lhs_symbol = spectral_symbol(multipliers::dilated(f, r * r), 1, 1);
            const auto rhs_symbol = spectral_symbol(f, 1, 1);
            for (const auto& [x, y] : pairs) {
                const complex lhs = kernel_at(lhs_symbol, x, y, step, opt);
                const complex rhs = std::pow(r, -3.0) * kernel_at(rhs_symbol, dilate(x, 1 / r), dilate(y, 1 / r), step, opt);
                worst = std::max(worst, std::abs(lhs - rhs) / std::abs(rhs));
            }
        }
        out.pass = out.pass && worst <= 1e-6;
        out.lines.push_back(std::string(heat ? "heat t=1" : "Bochner-Riesz kappa=1") + ": max relative residual " + fmt(worst) +
                            " over r in {1/2, 2}");
    }
    return out;
}

outcome plancherel_consistency()
{
    const auto f = multipliers::smooth_bump(1, 4);
    outcome out{true, {}};
    for (auto [d1, d2, big_m] : {std::tuple{1, 1, 1.0}, std::tuple{1, 1, 8.0}, std::tuple{2, 1, 2.0}, std::tuple{1, 2, 2.0},
                                 std::tuple{1, 2, 8.0}, std::tuple{1, 3, 2.0}}) {
        const auto m = truncated_symbol(f, big_m, d1, d2);
        point y{real_vec(d1), real_vec(d2)};
        y.x1[0] = 0.5;
        const auto s = kernel_slice_eval(m, y);
        double lhs = 0;
        for (std::size_t i = 0; i < s.size(); ++i) lhs += s.weight(i) * std::norm(s.values[i]);
        const double rhs = plancherel_mass(m, y);
        const double rel = std::abs(lhs - rhs) / rhs;
        out.pass = out.pass && rhs > 0 && rel <= 1e-6;
        out.lines.push_back("(" + std::to_string(d1) + "," + std::to_string(d2) + ") M=" + fmt(big_m) + ": relative gap " + fmt(rel));
    }
    return out;
}

outcome weighted_plancherel_stability()
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ua(1.0, 2.5), u01(0, 1);
    std::vector<std::pair<double, double>> bumps;
    for (int k = 0; k < 20; ++k) {
        const double a = ua(rng);
        bumps.push_back({a, a + 1 + (3 - a) * u01(rng)}); // support inside [1, 4], width >= 1
    }
    outcome out{true, {}};
    for (auto [d1, d2] : {std::pair{1, 1}, std::pair{1, 2}}) {
        estimate_config cfg;
        cfg.d1 = d1;
        cfg.d2 = d2;
        cfg.refine = true;
        cfg.y_spread_cap = std::numeric_limits<double>::infinity(); // the spread is judged over all bumps below
        const auto ys = default_y_list(d1, d2);
        // surrogate-ball volumes, for the diagnostic spread only
        std::vector<double> vol_ratio;
        for (const auto& y : ys) vol_ratio.push_back(ball_volume_monte_carlo(y, 1, 400000, seed) / ball_volume_estimate(y, 1));
        for (double r : {0.0, 0.4 * d2}) {
            const auto t0 = std::chrono::steady_clock::now();
            double lo = std::numeric_limits<double>::infinity(), hi = 0, lo_mc = lo, hi_mc = 0, change = 0;
            for (auto [a, b] : bumps) {
                const auto rep = check_weighted_plancherel(multipliers::smooth_bump(a, b), r, ys, cfg);
                for (std::size_t i = 0; i < rep.rows.size(); ++i) {
                    const double v = rep.rows[i][2];
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                    lo_mc = std::min(lo_mc, v * vol_ratio[i]);
                    hi_mc = std::max(hi_mc, v * vol_ratio[i]);
                }
                change = std::max(change, rep.diagnostic("refinement_change"));
            }
            const bool ok = hi / lo < 10 && change < 0.1;
            out.pass = out.pass && ok;
            out.lines.push_back("(" + std::to_string(d1) + "," + std::to_string(d2) + ") r=" + fmt(r) + ": ratio in [" + fmt(lo) +
                                ", " + fmt(hi) + "], spread " + fmt(hi / lo) + ", refinement change " + fmt(change) + ", " +
                                fmt(seconds_since(t0)) + " s" + (ok ? "" : "  <-- fails"));
            out.lines.push_back("    diagnostic: spread " + fmt(hi_mc / lo_mc) + " with Monte Carlo volumes of the surrogate ball");
        }
    }
    return out;
}

outcome l1_r_invariance()
{
    outcome out{true, {}};
    for (double alpha : {0.0, 0.5}) {
        estimate_config cfg;
        cfg.r_sweep = {0.25, 0.5, 1, 2, 4};
        const double beta = alpha + 0.5 * (cfg.d1 + cfg.d2) + 0.25;
        const auto rep = check_l1_estimate(multipliers::smooth_bump(1, 4), 1, alpha, beta, default_y_list(1, 1), cfg);
        const double sp = rep.diagnostic("R_spread");
        out.pass = out.pass && rep.pass && sp <= 4;
        std::string sups;
        for (double rr : cfg.r_sweep) sups += " " + fmt(rep.diagnostic("sup_ratio_R=" + std::to_string(rr)));
        out.lines.push_back("(1,1) alpha=" + fmt(alpha) + " beta=" + fmt(beta) + ": sup ratios over R = 1/4..4:" + sups +
                            ", spread " + fmt(sp));
    }
    return out;
}

outcome holder_audit()
{
    struct case_t
    {
        int d1, d2;
        double alpha, beta;
    };
    outcome out{true, {}};
    for (const auto& c : {case_t{1, 1, 0, 1.25}, case_t{1, 1, 0.5, 2.0}, case_t{1, 2, 0, 2.1}}) {
        estimate_config cfg;
        cfg.d1 = c.d1;
        cfg.d2 = c.d2;
        const auto s = choose_holder_split(c.d1, c.d2, c.alpha, c.beta);
        const auto rep = holder_chain_check(multipliers::smooth_bump(1, 4), 1, c.alpha, s.alpha_prime, s.r,
                                            default_y_list(c.d1, c.d2), cfg);
        const double worst = rep.diagnostic("max_ratio");
        out.pass = out.pass && worst <= 1.01;
        out.lines.push_back("(" + std::to_string(c.d1) + "," + std::to_string(c.d2) + ") alpha=" + fmt(c.alpha) + " beta=" + fmt(c.beta) +
                            " (eps=" + fmt(s.eps) + ", r=" + fmt(s.r) + ", alpha'=" + fmt(s.alpha_prime) + "): max lhs / product " +
                            fmt(worst));
    }
    return out;
}

outcome bochner_riesz_contrast()
{
    estimate_config cfg;
    const auto ys = default_y_list(1, 1);
    std::vector<double> ts;
    for (int k = -4; k <= 4; ++k) ts.push_back(std::ldexp(1.0, k));
    const auto above = check_bochner_riesz(1.0, ts, {1}, ys, cfg);
    const auto below = check_bochner_riesz(0.1, {1}, {1}, ys, cfg);
    const double sp = above.diagnostic("t_spread"), growth = below.diagnostic("reach_growth");
    const bool mono = below.diagnostic("reach_monotone") == 1;
    std::string seq;
    for (double r : cfg.br_reach_sweep) {
        std::ostringstream k;
        k << "sup_l1_reach=" << r;
        seq += " " + fmt(below.diagnostic(k.str()));
    }
    return {sp <= 3 && mono && growth >= 2,
            {"kappa=1: max/min of sup_y ||K||_1 over t = 2^-4..2^4 is " + fmt(sp) + " (values up to " + fmt(above.empirical_constant) + ")",
             "kappa=0.1: sup_y ||K||_1 at t=1 over growing boxes:" + seq + ", growth " + fmt(growth) + (mono ? ", monotone" : ", not monotone")}};
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

outcome determinism()
{
    run_config c;
    c.seed = seed;
    c.suite = {"lemmas", "plancherel", "truncated"};
    const auto base = std::filesystem::temp_directory_path() / "grushin_acceptance_determinism";
    std::filesystem::remove_all(base);
    for (const char* run : {"a", "b"}) write_run(run_suite(c), canonical_json(c), base / run);
    std::size_t files = 0, differ = 0;
    for (const auto& e : std::filesystem::recursive_directory_iterator(base / "a")) {
        if (!e.is_regular_file()) continue;
        ++files;
        const auto other = base / "b" / std::filesystem::relative(e.path(), base / "a");
        if (!std::filesystem::exists(other) || slurp(e.path()) != slurp(other)) ++differ;
    }
    std::size_t files_b = 0;
    for (const auto& e : std::filesystem::recursive_directory_iterator(base / "b")) files_b += e.is_regular_file() ? 1 : 0;
    std::filesystem::remove_all(base);
    return {files > 0 && differ == 0 && files == files_b,
            {fmt(static_cast<double>(files)) + " report files per run, " + fmt(static_cast<double>(differ)) + " differ"}};
}

} // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<outcome()>>> criteria = {
        {"Hermite identity suite", hermite_suite},
        {"difference-calculus suite", difference_suite},
        {"expansion identity", expansion_suite},
        {"kernel oracle equivalence", oracle_equivalence},
        {"dilation covariance", dilation_covariance},
        {"Plancherel consistency", plancherel_consistency},
        {"weighted Plancherel stability", weighted_plancherel_stability},
        {"L1 estimate R-invariance", l1_r_invariance},
        {"Hoelder chain audit", holder_audit},
        {"Bochner-Riesz contrast", bochner_riesz_contrast},
        {"determinism", determinism},
    };
    int unexpected = 0, failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        const auto t0 = std::chrono::steady_clock::now();
        outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, {std::string("exception: ") + e.what()}};
        }
        const bool known = documented_unattained.count(id) > 0;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << id << "] " << criteria[i].first << "  (" << fmt(seconds_since(t0)) << " s)"
                  << (!o.pass && known ? "  (documented)" : "") << "\n";
        for (const auto& l : o.lines) std::cout << "        " << l << "\n";
        std::cout.flush();
        if (!o.pass) {
            ++failed;
            if (!known) ++unexpected;
        }
    }
    std::cout << criteria.size() - static_cast<std::size_t>(failed) << " of " << criteria.size() << " criteria pass";
    if (failed > unexpected) std::cout << "; " << failed - unexpected << " documented failure(s)";
    std::cout << "\n";
    return unexpected == 0 ? 0 : 1;
}
