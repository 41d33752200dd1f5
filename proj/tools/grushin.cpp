// grushin: kernel slices, verification batteries and derivative expansions from the command line.
//
//   grushin kernel --d1 1 --d2 1 --family bochner-riesz --kappa 1 --t 1 --y 0.5,0 --out br
//   grushin verify --suite default --out run1
//   grushin verify --config run.json
//   grushin expand --d1 1 --beta 2
//
// Exit codes: 0 success, 1 a check failed its pass rule, 2 usage or configuration error.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include <grushin/grushin.hpp>

using namespace grushin;
using nlohmann::json;

namespace
{

constexpr int exit_failed = 1;
constexpr int exit_usage = 2;

std::vector<double> parse_list(const std::string& s)
{
    std::vector<double> out;
    std::stringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            throw config_error("not a number list: '" + s + "'");
        }
        if (used != tok.size()) throw config_error("not a number list: '" + s + "'");
        out.push_back(v);
    }
    return out;
}

json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw config_error(std::string("config ") + path + ": " + e.what());
    }
}

// multiplier flags shared by kernel and verify
struct multiplier_flags
{
    std::string family;
    double a = 1, b = 4, t = -1, kappa = 1, c = 2, w = 0.5, tau = 3;
    std::string path;

    void add(CLI::App* app, bool required)
    {
        auto* opt = app->add_option("--family", family, "multiplier family: zero, heat, heat-bump, bump, gaussian-bump, "
                                                        "bochner-riesz, mihlin-bump, csv");
        if (required) opt->required();
        app->add_option("--a", a, "bump support start");
        app->add_option("--b", b, "bump support end");
        app->add_option("--t", t, "time / scale parameter");
        app->add_option("--kappa", kappa, "Bochner-Riesz index");
        app->add_option("--c", c, "gaussian bump centre");
        app->add_option("--w", w, "gaussian bump width");
        app->add_option("--tau", tau, "oscillation frequency");
        app->add_option("--multiplier-file", path, "csv family: lambda,re[,im] samples");
    }

    json spec() const
    {
        json j{{"family", family}};
        if (family == "bump" || family == "mihlin-bump") {
            j["a"] = a;
            j["b"] = b;
        }
        if (family == "heat" || family == "heat-bump" || family == "bochner-riesz") j["t"] = t >= 0 ? t : (family == "heat-bump" ? 0.5 : 1.0);
        if (family == "bochner-riesz") j["kappa"] = kappa;
        if (family == "gaussian-bump") {
            j["c"] = c;
            j["w"] = w;
        }
        if (family == "mihlin-bump") j["tau"] = tau;
        if (family == "csv") j["path"] = path;
        return j;
    }
};

// ---------------------------------------------------------------------------

struct kernel_flags
{
    int d1 = 1, d2 = 1;
    multiplier_flags mult;
    std::string y;
    double reach = 24, x1_half = 0, x1_step = 0, z_half = 0, z_step = 0, xi_step = 0;
    bool full_z = false;
    std::string out = "kernel";
};

int cmd_kernel(const kernel_flags& k)
{
    if (k.d1 < 1 || k.d2 < 1 || k.d1 > 3 || k.d2 > 3) throw config_error("dims must lie in 1..3");
    const auto spec = k.mult.spec();
    const auto f = make_multiplier(spec);
    point y{real_vec(k.d1, 0.0), real_vec(k.d2, 0.0)};
    if (!k.y.empty()) {
        const auto v = parse_list(k.y);
        if (v.size() != static_cast<std::size_t>(k.d1 + k.d2)) throw config_error("--y needs d1 + d2 coordinates");
        for (int j = 0; j < k.d1; ++j) y.x1[j] = v[j];
        for (int j = 0; j < k.d2; ++j) y.x2[j] = v[k.d1 + j];
    }
    if (!f.bounded) throw config_error("kernel: the multiplier must have bounded support");
    const auto m = spectral_symbol(f, k.d1, k.d2);
    grid_options g;
    g.reach = k.reach;
    g.x1_half_width = k.x1_half;
    g.x1_step = k.x1_step;
    g.z_half_width = k.z_half;
    g.z_step = k.z_step;
    g.radial = !k.full_z;
    engine_options e;
    e.xi_step = k.xi_step;
    const auto slice = kernel_slice_eval(m, y, g, e);

    const std::filesystem::path base(k.out);
    if (base.has_parent_path()) std::filesystem::create_directories(base.parent_path());
    {
        std::ofstream os(base.string() + ".csv");
        write_csv(slice, os);
    }
    nlohmann::ordered_json meta;
    meta["tool"] = "grushin";
    meta["version"] = tool_version;
    nlohmann::ordered_json cfg;
    cfg["d1"] = k.d1;
    cfg["d2"] = k.d2;
    cfg["multiplier"] = spec;
    cfg["y"] = {{"x1", std::vector<double>(y.x1.begin(), y.x1.end())}, {"x2", std::vector<double>(y.x2.begin(), y.x2.end())}};
    cfg["grid"] = {{"reach", k.reach}, {"x1_half_width", k.x1_half}, {"x1_step", k.x1_step}, {"z_half_width", k.z_half},
                   {"z_step", k.z_step}, {"radial", !k.full_z}, {"xi_step", k.xi_step}};
    meta["config_hash"] = config_hash(cfg);
    meta["config"] = cfg;
    meta["symbol"] = slice.tag;
    meta["x1_nodes"] = slice.grid.x1_count();
    meta["z_nodes"] = slice.z_count();
    meta["radial"] = slice.grid.radial;
    meta["z_half_width"] = slice.grid.z_half_width;
    meta["xi_step"] = slice.xi_step;
    meta["leakage"] = slice.leakage;
    meta["columns"] = "x1_*, x2_*, re, im, weight (radial slices: one row per radius, weight includes multiplicity)";
    {
        std::ofstream os(base.string() + ".json");
        os << meta.dump(2) << "\n";
    }
    std::cout << "wrote " << base.string() << ".csv (" << slice.size() << " nodes) and " << base.string() << ".json\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct verify_flags
{
    std::string config;
    std::vector<std::string> suite;
    int d1 = 1, d2 = 1;
    std::uint64_t seed = 0;
    multiplier_flags mult;
    double r = -1, alpha = 0.5, beta = -1, big_r = 1, kappa_br = 1, reach = 24, l1_reach = 48;
    std::string y_radii, ms, t_grid, ps;
    bool refine = false;
    std::string out = "grushin-out";
};

int cmd_verify(CLI::App* sub, const verify_flags& v)
{
    // flags given on the command line, then the config file on top
    json j = json::object();
    auto given = [&](const char* name) { return sub->count(name) > 0; };
    if (given("--suite")) j["suite"] = v.suite;
    if (given("--d1")) j["d1"] = v.d1;
    if (given("--d2")) j["d2"] = v.d2;
    if (given("--seed")) j["seed"] = v.seed;
    if (given("--family")) j["multiplier"] = v.mult.spec();
    if (given("--r")) j["r"] = v.r;
    if (given("--alpha")) j["alpha"] = v.alpha;
    if (given("--beta")) j["beta"] = v.beta;
    if (given("--R")) j["R"] = v.big_r;
    if (given("--br-kappa")) j["kappa"] = v.kappa_br;
    if (given("--reach")) j["reach"] = v.reach;
    if (given("--l1-reach")) j["l1_reach"] = v.l1_reach;
    if (given("--y-radii")) j["y_radii"] = parse_list(v.y_radii);
    if (given("--M")) j["M"] = parse_list(v.ms);
    if (given("--t-grid")) j["t_grid"] = parse_list(v.t_grid);
    if (given("--p")) j["p"] = parse_list(v.ps);
    if (given("--refine")) j["refine"] = v.refine;
    if (given("--out")) j["output"] = v.out;
    if (!v.config.empty()) j.merge_patch(read_json_file(v.config));

    const auto cfg = run_config_from_json(j);
    const auto canonical = canonical_json(cfg);
    std::cout << "config " << config_hash(canonical) << ": d1=" << cfg.d1 << " d2=" << cfg.d2 << " seed=" << cfg.seed << "\n";

    std::vector<estimate_report> reports;
    bool all = true;
    for (const auto& id : expand_suite(cfg.suite, cfg.d1, cfg.d2)) {
        const auto t0 = std::chrono::steady_clock::now();
        auto rep = run_check(id, cfg);
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cout << (rep.pass ? "PASS " : "FAIL ") << rep.id << "  constant=" << rep.empirical_constant << "  (" << sec
                  << " s)\n";
        all = all && rep.pass;
        reports.push_back(std::move(rep));
    }
    write_run(reports, canonical, cfg.output);
    std::cout << (all ? "all checks passed" : "some checks failed") << "; reports in " << cfg.output << "\n";
    return all ? 0 : exit_failed;
}

// ---------------------------------------------------------------------------

int cmd_expand(int d1, const std::string& beta_s, int cap)
{
    if (d1 < 1 || d1 > 3) throw config_error("d1 must lie in 1..3");
    const auto b = parse_list(beta_s);
    if (b.empty() || b.size() > 3) throw config_error("--beta needs 1..3 entries (d2 = its length)");
    multi_index beta(static_cast<int>(b.size()), 0);
    for (std::size_t i = 0; i < b.size(); ++i) {
        if (b[i] < 0 || b[i] != std::floor(b[i])) throw config_error("--beta entries must be nonnegative integers");
        beta[static_cast<int>(i)] = static_cast<int>(b[i]);
    }
    if (norm1(beta) > cap) throw config_error("|beta|_1 exceeds the cap " + std::to_string(cap));
    const auto terms = expansion::expand_derivative(d1, beta, cap);
    json list = json::array();
    bool ok = true;
    for (const auto& t : terms) {
        list.push_back(expansion::to_json(t, beta));
        ok = ok && expansion::audit(t, beta).empty();
    }
    nlohmann::ordered_json out;
    out["d1"] = d1;
    out["d2"] = beta.size();
    out["beta"] = std::vector<int>(beta.begin(), beta.end());
    out["term_count"] = terms.size();
    out["audit"] = ok ? "pass" : "fail";
    out["terms"] = list;
    std::cout << out.dump(2) << "\n";
    return ok ? 0 : exit_failed;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Spectral multipliers of the Grushin operator: kernels, estimate checks, derivative expansions"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(tool_version));

    kernel_flags kf;
    auto* kernel = app.add_subcommand("kernel", "evaluate a kernel slice K_F(L)(., y) and write CSV + metadata JSON");
    kernel->add_option("--d1", kf.d1, "dimension of x'");
    kernel->add_option("--d2", kf.d2, "dimension of x''");
    kf.mult.add(kernel, true);
    kernel->add_option("--y", kf.y, "source point y as d1 + d2 comma separated numbers");
    kernel->add_option("--reach", kf.reach, "automatic box: control distance reach / sqrt(lambda_max)");
    kernel->add_option("--x1-half", kf.x1_half, "x' box half width (0: automatic)");
    kernel->add_option("--x1-step", kf.x1_step, "x' step (0: automatic)");
    kernel->add_option("--z-half", kf.z_half, "x'' box half width (0: automatic)");
    kernel->add_option("--z-step", kf.z_step, "x'' step (0: automatic)");
    kernel->add_option("--xi-step", kf.xi_step, "xi lattice step (0: automatic)");
    kernel->add_flag("--full-z", kf.full_z, "full x'' lattice instead of one node per radius");
    kernel->add_option("--out", kf.out, "output path prefix; writes <out>.csv and <out>.json");

    verify_flags vf;
    auto* verify = app.add_subcommand("verify", "run estimate checks and write report.json, report.csv, plotdata/");
    verify->add_option("--config", vf.config, "JSON config; its keys override the flags");
    verify->add_option("--suite", vf.suite, "check ids or groups (default, lemmas, lemmas-only)")->delimiter(',');
    verify->add_option("--d1", vf.d1);
    verify->add_option("--d2", vf.d2);
    verify->add_option("--seed", vf.seed);
    vf.mult.add(verify, false);
    verify->add_option("--r", vf.r, "weight exponent (default 0.8 d2 / 2)");
    verify->add_option("--alpha", vf.alpha, "distance weight exponent");
    verify->add_option("--beta", vf.beta, "Sobolev order (default alpha + (d1 + d2)/2 + 1/4)");
    verify->add_option("--R", vf.big_r, "dyadic scale of the L1 and Hoelder checks");
    verify->add_option("--br-kappa", vf.kappa_br, "Bochner-Riesz index of the bochner-riesz check");
    verify->add_option("--reach", vf.reach);
    verify->add_option("--l1-reach", vf.l1_reach);
    verify->add_option("--y-radii", vf.y_radii, "comma list of |y'|");
    verify->add_option("--M", vf.ms, "comma list of truncation parameters");
    verify->add_option("--t-grid", vf.t_grid, "comma list of Bochner-Riesz t values");
    verify->add_option("--p", vf.ps, "comma list of exponents p");
    verify->add_flag("--refine", vf.refine, "also evaluate on halved grids");
    verify->add_option("--out", vf.out, "output directory");

    int ex_d1 = 1, ex_cap = expansion::default_beta_cap;
    std::string ex_beta;
    auto* expand = app.add_subcommand("expand", "print the derivative expansion terms for d^beta_xi as JSON");
    expand->add_option("--d1", ex_d1);
    expand->add_option("--beta", ex_beta, "comma list, length d2")->required();
    expand->add_option("--cap", ex_cap, "largest allowed |beta|_1");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }

    try {
        if (*kernel) return cmd_kernel(kf);
        if (*verify) return cmd_verify(verify, vf);
        if (*expand) return cmd_expand(ex_d1, ex_beta, ex_cap);
    } catch (const config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const refusal& e) {
        std::cerr << "refused: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "failed: " << e.what() << "\n";
        return exit_failed;
    }
    return exit_usage;
}
