#ifndef GRUSHIN_RUN_HPP
#define GRUSHIN_RUN_HPP

// Run configuration for batch verification: multiplier specs, suite ids and the dispatch from a
// resolved configuration to a list of reports.

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "estimates.hpp"
#include "report.hpp"
#include "suites.hpp"

namespace grushin
{

class config_error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Multiplier specs: {"family": "...", parameters}

inline multiplier1d make_multiplier(const nlohmann::json& spec)
{
    if (!spec.is_object() || !spec.contains("family")) throw config_error("multiplier spec needs a family");
    const std::string fam = spec.at("family").get<std::string>();
    auto num = [&](const char* k, double def) { return spec.contains(k) ? spec.at(k).get<double>() : def; };
    try {
        if (fam == "zero") return multipliers::zero();
        if (fam == "heat") return multipliers::heat(num("t", 1));
        if (fam == "heat-bump") return multipliers::heat_bump(num("t", 0.5));
        if (fam == "bump") return multipliers::smooth_bump(num("a", 1), num("b", 4));
        if (fam == "gaussian-bump") return multipliers::gaussian_bump(num("c", 2), num("w", 0.5));
        if (fam == "bochner-riesz") return multipliers::bochner_riesz(num("kappa", 1), num("t", 1));
        if (fam == "mihlin-bump") {
            return multipliers::product(multipliers::mihlin_oscillation(num("tau", 3)),
                                        multipliers::smooth_bump(num("a", 1), num("b", 4)));
        }
        if (fam == "csv") {
            if (!spec.contains("path")) throw config_error("csv multiplier needs a path");
            return multipliers::load_csv(spec.at("path").get<std::string>());
        }
    } catch (const std::invalid_argument& e) {
        throw config_error(e.what());
    }
    throw config_error("unknown multiplier family '" + fam + "'");
}

inline const std::vector<std::string>& known_multiplier_families()
{
    static const std::vector<std::string> f{"zero", "heat", "heat-bump", "bump", "gaussian-bump", "bochner-riesz", "mihlin-bump", "csv"};
    return f;
}

// ---------------------------------------------------------------------------
// Suites

inline const std::vector<std::string>& known_checks()
{
    static const std::vector<std::string> c{"hermite",     "diffops", "expansion", "truncated",  "plancherel",
                                            "interpolated", "l1",      "holder",    "multiplier", "bochner-riesz"};
    return c;
}

/// Group names expand to check ids; individual ids pass through. Order follows known_checks().
inline std::vector<std::string> expand_suite(const std::vector<std::string>& suite, int d1, int d2)
{
    if (suite.empty()) throw config_error("empty suite");
    std::set<std::string> want;
    for (const auto& s : suite) {
        if (s == "lemmas-only") {
            want.insert({"hermite", "diffops"});
        } else if (s == "lemmas") {
            want.insert({"hermite", "diffops", "expansion"});
        } else if (s == "default") {
            for (const auto& c : known_checks()) {
                if (c == "multiplier" && d1 + d2 > 3) continue; // desk grids stop at dimension 3
                want.insert(c);
            }
        } else if (std::find(known_checks().begin(), known_checks().end(), s) != known_checks().end()) {
            want.insert(s);
        } else {
            throw config_error("unknown suite '" + s + "'");
        }
    }
    std::vector<std::string> out;
    for (const auto& c : known_checks()) {
        if (want.count(c)) out.push_back(c);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Run configuration

struct run_config
{
    int d1 = 1, d2 = 1;
    std::uint64_t seed = 20240607;
    std::vector<std::string> suite;
    nlohmann::json multiplier = {{"family", "bump"}, {"a", 1.0}, {"b", 4.0}};
    std::vector<double> y_radii{0, 0.5, 1, 2, 4, 8};
    double r = -1;      // weighted checks; < 0: 0.8 d2 / 2
    double alpha = 0.5;
    double beta = -1;   // < 0: alpha + (d1 + d2)/2 + 1/4
    double big_r = 1;
    std::vector<double> ms{4, 8, 16};
    double kappa = 1;
    std::vector<double> t_grid{0.0625, 0.125, 0.25, 0.5, 1, 2, 4, 8, 16};
    std::vector<double> ps{1.5, 2, 4};
    double reach = 24;
    double l1_reach = 48;
    bool refine = false;
    std::string output = "grushin-out";

    double resolved_r() const { return r >= 0 ? r : 0.4 * d2; }
    double resolved_beta() const { return beta >= 0 ? beta : alpha + 0.5 * (d1 + d2) + 0.25; }
};

/// Reads every known key; unknown keys are config errors so typos do not pass silently.
inline run_config run_config_from_json(const nlohmann::json& j)
{
    static const std::set<std::string> keys{"d1",    "d2",   "seed",   "suite", "multiplier", "y_radii", "r",
                                            "alpha", "beta", "R",      "M",     "kappa",      "t_grid",  "p",
                                            "reach", "l1_reach", "refine", "output"};
    if (!j.is_object()) throw config_error("config must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!keys.count(it.key())) throw config_error("unknown config key '" + it.key() + "'");
    }
    run_config c;
    try {
        auto get = [&](const char* k, auto& v) {
            if (j.contains(k) && !j.at(k).is_null()) v = j.at(k).get<std::decay_t<decltype(v)>>();
        };
        get("d1", c.d1);
        get("d2", c.d2);
        get("seed", c.seed);
        get("suite", c.suite);
        if (j.contains("multiplier")) c.multiplier = j.at("multiplier");
        get("y_radii", c.y_radii);
        get("r", c.r);
        get("alpha", c.alpha);
        get("beta", c.beta);
        get("R", c.big_r);
        get("M", c.ms);
        get("kappa", c.kappa);
        get("t_grid", c.t_grid);
        get("p", c.ps);
        get("reach", c.reach);
        get("l1_reach", c.l1_reach);
        get("refine", c.refine);
        get("output", c.output);
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("config: ") + e.what());
    }
    if (c.d1 < 1 || c.d2 < 1 || c.d1 > 3 || c.d2 > 3) throw config_error("dims must lie in 1..3");
    if (c.y_radii.empty()) throw config_error("y_radii must be nonempty");
    if (!(c.reach > 0 && c.l1_reach > 0)) throw config_error("reach and l1_reach must be positive");
    make_multiplier(c.multiplier); // validate early
    return c;
}

/// Resolved configuration without the output directory; its hash identifies a run.
inline nlohmann::ordered_json canonical_json(const run_config& c)
{
    nlohmann::ordered_json j;
    j["d1"] = c.d1;
    j["d2"] = c.d2;
    j["seed"] = c.seed;
    j["suite"] = expand_suite(c.suite, c.d1, c.d2);
    nlohmann::ordered_json m;
    m["family"] = c.multiplier.at("family");
    std::vector<std::string> rest; // sorted for a stable dump
    for (auto it = c.multiplier.begin(); it != c.multiplier.end(); ++it) {
        if (it.key() != "family") rest.push_back(it.key());
    }
    std::sort(rest.begin(), rest.end());
    for (const auto& k : rest) m[k] = c.multiplier.at(k);
    j["multiplier"] = m;
    j["y_radii"] = c.y_radii;
    j["r"] = c.resolved_r();
    j["alpha"] = c.alpha;
    j["beta"] = c.resolved_beta();
    j["R"] = c.big_r;
    j["M"] = c.ms;
    j["kappa"] = c.kappa;
    j["t_grid"] = c.t_grid;
    j["p"] = c.ps;
    j["reach"] = c.reach;
    j["l1_reach"] = c.l1_reach;
    j["refine"] = c.refine;
    return j;
}

inline estimate_config estimate_config_for(const run_config& c)
{
    estimate_config e;
    e.d1 = c.d1;
    e.d2 = c.d2;
    e.grid.reach = c.reach;
    e.l1_reach = c.l1_reach;
    e.refine = c.refine;
    return e;
}

/// Runs one check id. Refusals (hypotheses not met by the configuration) become config errors.
inline estimate_report run_check_unseeded(const std::string& id, const run_config& c)
{
    const auto cfg = estimate_config_for(c);
    const auto ys = default_y_list(c.d1, c.d2, c.y_radii);
    const double r = c.resolved_r(), beta = c.resolved_beta();
    try {
        if (id == "hermite") return suites::hermite_identities();
        if (id == "diffops") return suites::difference_calculus(c.seed);
        if (id == "expansion") return suites::expansion_identity(c.seed);
        const auto f = make_multiplier(c.multiplier);
        if (id == "truncated") return check_truncated_weighted_L2(f, c.ms, r, ys, cfg);
        if (id == "plancherel") return check_weighted_plancherel(f, r, ys, cfg);
        if (id == "interpolated") return check_interpolated_estimate(f, r, c.alpha, beta, ys, cfg);
        if (id == "l1") return check_l1_estimate(f, c.big_r, c.alpha, beta, ys, cfg);
        if (id == "holder") {
            const auto s = choose_holder_split(c.d1, c.d2, c.alpha, beta);
            return holder_chain_check(f, c.big_r, c.alpha, s.alpha_prime, s.r, ys, cfg);
        }
        if (id == "multiplier") return check_multiplier_theorem(f, c.ps, cfg);
        if (id == "bochner-riesz") return check_bochner_riesz(c.kappa, c.t_grid, c.ps, ys, cfg);
    } catch (const refusal& e) {
        throw config_error(std::string("refused: ") + e.what());
    }
    throw config_error("unknown check '" + id + "'");
}

/// run_check_unseeded with the seed recorded in every report.
inline estimate_report run_check(const std::string& id, const run_config& c)
{
    auto rep = run_check_unseeded(id, c);
    const bool has = std::any_of(rep.parameters.begin(), rep.parameters.end(), [](const auto& p) { return p.first == "seed"; });
    if (!has) rep.param("seed", std::to_string(c.seed));
    return rep;
}

inline std::vector<estimate_report> run_suite(const run_config& c)
{
    std::vector<estimate_report> out;
    for (const auto& id : expand_suite(c.suite, c.d1, c.d2)) out.push_back(run_check(id, c));
    return out;
}

} // namespace grushin

#endif // GRUSHIN_RUN_HPP
