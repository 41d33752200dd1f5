#ifndef GRUSHIN_REPORT_HPP
#define GRUSHIN_REPORT_HPP

// JSON / CSV serialization of estimate reports. Output depends only on the reports and the
// run configuration, so identical runs give identical bytes.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "estimates.hpp"

namespace grushin
{

inline constexpr const char* tool_version = "0.3.0";

/// FNV-1a 64 of the compact JSON dump, as 16 hex digits.
inline std::string config_hash(const nlohmann::ordered_json& config)
{
    const std::string s = config.dump();
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

inline nlohmann::ordered_json to_json(const estimate_report& r)
{
    nlohmann::ordered_json j;
    j["id"] = r.id;
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.parameters) params[k] = v;
    j["parameters"] = params;
    j["empirical_constant"] = r.empirical_constant;
    nlohmann::ordered_json diag = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.diagnostics) diag[k] = v;
    j["stability_diagnostics"] = diag;
    j["pass"] = r.pass;
    j["rule"] = r.rule;
    j["columns"] = r.columns;
    j["rows"] = r.rows;
    j["notes"] = r.notes;
    return j;
}

inline nlohmann::ordered_json run_document(const std::vector<estimate_report>& reports, const nlohmann::ordered_json& config)
{
    nlohmann::ordered_json doc;
    doc["tool"] = "grushin";
    doc["version"] = tool_version;
    doc["config_hash"] = config_hash(config);
    doc["config"] = config;
    bool all = true;
    nlohmann::ordered_json list = nlohmann::ordered_json::array();
    for (const auto& r : reports) {
        list.push_back(to_json(r));
        all = all && r.pass;
    }
    doc["pass"] = all;
    doc["reports"] = list;
    return doc;
}

namespace detail
{

inline std::string csv_number(double v)
{
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

inline std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

} // namespace detail

/// One line per report: id, pass, constant, parameters as k=v;k=v.
inline void write_summary_csv(const std::vector<estimate_report>& reports, const std::string& hash, std::ostream& os)
{
    os << "# grushin " << tool_version << " config " << hash << "\n";
    os << "estimate,pass,empirical_constant,parameters\n";
    for (const auto& r : reports) {
        std::string params;
        for (const auto& [k, v] : r.parameters) params += (params.empty() ? "" : ";") + k + "=" + v;
        os << detail::csv_field(r.id) << "," << (r.pass ? 1 : 0) << "," << detail::csv_number(r.empirical_constant) << ","
           << detail::csv_field(params) << "\n";
    }
}

/// Two-column CSV files (gnuplot: set datafile separator ","), the first row column against every
/// other column, one file per pair.
inline std::vector<std::string> write_plot_data(const std::vector<estimate_report>& reports, const std::string& hash,
                                                const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    std::vector<std::string> written;
    for (std::size_t k = 0; k < reports.size(); ++k) {
        const auto& r = reports[k];
        if (r.columns.size() < 2) continue;
        for (std::size_t c = 1; c < r.columns.size(); ++c) {
            std::ostringstream name;
            name << std::setw(2) << std::setfill('0') << k << "_" << r.id << "_" << r.columns[c] << ".csv";
            std::ofstream os(dir / name.str());
            os << "# grushin " << tool_version << " config " << hash << "\n";
            os << "# " << r.columns[0] << "," << r.columns[c] << "\n";
            for (const auto& row : r.rows) os << detail::csv_number(row[0]) << "," << detail::csv_number(row[c]) << "\n";
            written.push_back(name.str());
        }
    }
    return written;
}

/// report.json, report.csv and plotdata/ under `dir`.
inline void write_run(const std::vector<estimate_report>& reports, const nlohmann::ordered_json& config,
                      const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    const auto doc = run_document(reports, config);
    const std::string hash = doc["config_hash"];
    {
        std::ofstream os(dir / "report.json");
        os << doc.dump(2) << "\n";
    }
    {
        std::ofstream os(dir / "report.csv");
        write_summary_csv(reports, hash, os);
    }
    write_plot_data(reports, hash, dir / "plotdata");
}

} // namespace grushin

#endif // GRUSHIN_REPORT_HPP
