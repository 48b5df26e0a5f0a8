// Command-line study configuration and the CSV / table report writer.
//
// Configuration comes from flags and, optionally, a `key = value` file given
// with --config. Keys are the long flag names without dashes; flags override
// file values.

#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "verify.hpp"

namespace gwg {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int bad_config = 2;
inline constexpr int singular = 3;
inline constexpr int io_error = 4;
} // namespace exit_code

class ConfigError : public std::runtime_error
{
public:
    ConfigError(std::string key, const std::string& message)
        : std::runtime_error(key.empty() ? message : "'" + key + "': " + message), key_(std::move(key))
    {}

    const std::string& key() const { return key_; }

private:
    std::string key_;
};

/// Thrown by parse_config for --help; carries the usage text.
class HelpRequested : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct StudyConfig
{
    Signature                element{1, 1, 0};
    MeshFamily               mesh = MeshFamily::triangular;
    std::vector<std::size_t> levels;
    double                   rho = 1.0;
    double                   gamma = -1.0;
    std::string              solution = "cospi_cospi";
    double                   alpha = 0.5;
    std::string              output;   // empty: no CSV file
    SolverKind               solver = SolverKind::direct;
    bool                     manifest = false;
    bool                     zero_data = false;
};

namespace detail {

inline std::string
trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string>
split_commas(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(trim(item));
    return out;
}

inline long
parse_integer(const std::string& key, const std::string& text)
{
    std::size_t used = 0;
    long v = 0;
    try
    {
        v = std::stol(text, &used);
    }
    catch (const std::exception&)
    {
        throw ConfigError(key, "expected an integer, got '" + text + "'");
    }
    if (used != text.size())
        throw ConfigError(key, "expected an integer, got '" + text + "'");
    return v;
}

inline const std::vector<std::string>&
known_keys()
{
    static const std::vector<std::string> keys{"element", "mesh",   "levels",   "rho",
                                               "gamma",   "case",   "alpha",    "output",
                                               "solver",  "manifest", "zero-data"};
    return keys;
}

/// Reads `key = value` lines; '#' starts a comment.
inline std::vector<std::pair<std::string, std::string>>
read_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("config", "cannot open '" + path + "'");
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line))
    {
        lineno++;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("", path + ":" + std::to_string(lineno) + ": expected 'key = value'");
        auto key = trim(line.substr(0, eq));
        auto value = trim(line.substr(eq + 1));
        const auto& keys = known_keys();
        if (std::find(keys.begin(), keys.end(), key) == keys.end())
            throw ConfigError(key, "unknown configuration key (" + path + ":" + std::to_string(lineno) + ")");
        out.emplace_back(std::move(key), std::move(value));
    }
    return out;
}

} // namespace detail

/// Parses `args` (without the program name).
inline StudyConfig
parse_config(const std::vector<std::string>& args)
{
    // Locate --config first so file values can be placed before the flags.
    std::vector<std::string> merged;
    for (std::size_t i = 0; i < args.size(); i++)
    {
        std::string path;
        if (args[i] == "--config")
        {
            if (i + 1 >= args.size())
                throw ConfigError("config", "missing file name");
            path = args[i + 1];
        }
        else if (args[i].rfind("--config=", 0) == 0)
            path = args[i].substr(9);
        else
            continue;
        for (auto& [key, value] : detail::read_config_file(path))
            merged.push_back("--" + key + "=" + value);
    }
    merged.insert(merged.end(), args.begin(), args.end());

    std::string element = "", mesh = "tri", levels = "", solution = "cospi_cospi", solver = "direct";
    std::string config_path;
    StudyConfig cfg;

    CLI::App app{"Convergence studies for generalized weak Galerkin elements", "gwg_study"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.add_option("--element", element, "element family k,j,l (P_k / P_j / [P_l]^2)");
    app.add_option("--mesh", mesh, "tri or rect");
    app.add_option("--levels", levels, "comma-separated mesh labels 1/h, strictly increasing");
    app.add_option("--rho", cfg.rho, "stabilizer weight (>= 0)");
    app.add_option("--gamma", cfg.gamma, "stabilizer exponent");
    app.add_option("--case", solution, "cospi_cospi | cospi_sinpi | x2_cospi | lowreg");
    app.add_option("--alpha", cfg.alpha, "regularity parameter for lowreg, 0 < alpha <= 1");
    app.add_option("--output", cfg.output, "CSV output path");
    app.add_option("--solver", solver, "direct or cg");
    app.add_option("--config", config_path, "key = value configuration file");
    app.add_flag("--manifest", cfg.manifest, "write the resolved configuration as CSV comments");
    app.add_flag("--zero-data", cfg.zero_data, "solve with f = 0 and g = 0");

    std::vector<std::string> reversed(merged.rbegin(), merged.rend());
    try
    {
        app.parse(reversed);
    }
    catch (const CLI::CallForHelp&)
    {
        throw HelpRequested(app.help());
    }
    catch (const CLI::ParseError& err)
    {
        std::string key;
        const std::string msg = err.what();
        if (auto pos = msg.find("--"); pos != std::string::npos)
        {
            auto end = msg.find_first_of(" =:\n", pos);
            key = msg.substr(pos + 2, end == std::string::npos ? std::string::npos : end - pos - 2);
        }
        throw ConfigError(key, msg);
    }

    if (element.empty())
        throw ConfigError("element", "required (k,j,l)");
    auto parts = detail::split_commas(element);
    if (parts.size() != 3)
        throw ConfigError("element", "expected three comma-separated degrees, got '" + element + "'");
    int deg[3];
    for (int i = 0; i < 3; i++)
    {
        auto v = detail::parse_integer("element", parts[i]);
        if (v < 0 || v > 20)
            throw ConfigError("element", "degree out of range: " + parts[i]);
        deg[i] = int(v);
    }
    cfg.element = Signature(deg[0], deg[1], deg[2]);

    if (mesh == "tri")
        cfg.mesh = MeshFamily::triangular;
    else if (mesh == "rect")
        cfg.mesh = MeshFamily::rectangular;
    else
        throw ConfigError("mesh", "expected 'tri' or 'rect', got '" + mesh + "'");

    if (levels.empty())
        throw ConfigError("levels", "required (at least two mesh labels)");
    for (const auto& item : detail::split_commas(levels))
    {
        auto v = detail::parse_integer("levels", item);
        if (v < 1)
            throw ConfigError("levels", "mesh labels must be positive");
        if (!cfg.levels.empty() && std::size_t(v) <= cfg.levels.back())
            throw ConfigError("levels", "labels must be strictly increasing");
        cfg.levels.push_back(std::size_t(v));
    }
    if (cfg.levels.size() < 2)
        throw ConfigError("levels", "at least two levels are needed for rates");
    if (cfg.mesh == MeshFamily::rectangular)
        for (auto l : cfg.levels)
            if (l < 2 || (l & (l - 1)) != 0)
                throw ConfigError("levels", "rectangular labels must be powers of two >= 2");

    if (!(cfg.rho >= 0.0))
        throw ConfigError("rho", "must be non-negative");

    const std::vector<std::string> catalog{"cospi_cospi", "cospi_sinpi", "x2_cospi", "lowreg"};
    if (std::find(catalog.begin(), catalog.end(), solution) == catalog.end())
        throw ConfigError("case", "unknown solution '" + solution + "'");
    cfg.solution = solution;
    if (solution == "lowreg" && !(cfg.alpha > 0.0 && cfg.alpha <= 1.0))
        throw ConfigError("alpha", "lowreg needs 0 < alpha <= 1");

    if (solver == "direct")
        cfg.solver = SolverKind::direct;
    else if (solver == "cg")
        cfg.solver = SolverKind::cg;
    else
        throw ConfigError("solver", "expected 'direct' or 'cg', got '" + solver + "'");

    return cfg;
}

inline StudyConfig
parse_config(int argc, const char* const* argv)
{
    return parse_config(std::vector<std::string>(argv + 1, argv + argc));
}

namespace detail {

inline std::string
format_g17(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string
format_sci3(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2E", v);
    return buf;
}

inline std::string
format_rate(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::vector<std::pair<std::string, std::string>>
manifest_entries(const StudyConfig& cfg)
{
    std::string levels;
    for (auto l : cfg.levels)
        levels += (levels.empty() ? "" : ",") + std::to_string(l);
    return {
        {"element", std::to_string(cfg.element.k()) + "," + std::to_string(cfg.element.j()) + "," +
                        std::to_string(cfg.element.l())},
        {"mesh", cfg.mesh == MeshFamily::triangular ? "tri" : "rect"},
        {"levels", levels},
        {"rho", format_g17(cfg.rho)},
        {"gamma", format_g17(cfg.gamma)},
        {"case", cfg.solution},
        {"alpha", format_g17(cfg.alpha)},
        {"solver", cfg.solver == SolverKind::direct ? "direct" : "cg"},
        {"zero-data", cfg.zero_data ? "true" : "false"},
    };
}

} // namespace detail

inline const char* csv_header = "level,inv_h,energy_err,energy_rate,l2_err,l2_rate,edge_err,edge_rate";

/// One CSV row; `prev` supplies the rates (blank on the first row).
inline std::string
csv_row(std::size_t index, const LevelErrors& cur, const LevelErrors* prev)
{
    using detail::format_g17;
    auto rate = [&](double LevelErrors::*field) -> std::string {
        if (!prev)
            return "";
        return format_g17(convergence_rate(prev->*field, cur.*field, prev->h_max, cur.h_max));
    };
    return std::to_string(index) + "," + format_g17(cur.label) + "," + format_g17(cur.energy) + "," +
           rate(&LevelErrors::energy) + "," + format_g17(cur.l2) + "," + rate(&LevelErrors::l2) + "," +
           format_g17(cur.edge) + "," + rate(&LevelErrors::edge);
}

/// Runs the study: CSV rows are flushed level by level, the aligned table goes
/// to `out`, diagnostics to `err`. Returns an exit code.
inline int
run(const StudyConfig& cfg, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    std::ofstream csv;
    if (!cfg.output.empty())
    {
        csv.open(cfg.output);
        if (!csv)
        {
            err << "error: cannot open '" << cfg.output << "' for writing\n";
            return exit_code::io_error;
        }
        if (cfg.manifest)
            for (const auto& [k, v] : detail::manifest_entries(cfg))
                csv << "# " << k << " = " << v << '\n';
        csv << csv_header << '\n';
    }

    ManufacturedCase mcase = cases::by_name(cfg.solution, cfg.alpha);
    SchemeParameters params;
    params.rho = cfg.rho;
    params.gamma = cfg.gamma;

    char line[256];
    std::snprintf(line, sizeof line, "P_%d/P_%d/[P_%d]^2  %s mesh  rho=%g gamma=%g  u=%s\n",
                  cfg.element.k(), cfg.element.j(), cfg.element.l(),
                  cfg.mesh == MeshFamily::triangular ? "tri" : "rect", cfg.rho, cfg.gamma, cfg.solution.c_str());
    out << line;
    std::snprintf(line, sizeof line, "%6s  %10s %6s  %10s %6s  %10s %6s\n", "1/h", "energy", "rate", "L2(e0)",
                  "rate", "edge(eb)", "rate");
    out << line;

    std::vector<LevelErrors> done;
    bool io_failed = false;
    StudyOptions opts;
    opts.solver = cfg.solver;
    opts.zero_data = cfg.zero_data;
    opts.on_level = [&](const LevelErrors& lv) {
        const LevelErrors* prev = done.empty() ? nullptr : &done.back();
        if (csv.is_open())
        {
            csv << csv_row(done.size(), lv, prev) << '\n';
            csv.flush();
            if (!csv)
                io_failed = true;
        }
        auto r = [&](double LevelErrors::*field) {
            return prev ? detail::format_rate(convergence_rate(prev->*field, lv.*field, prev->h_max, lv.h_max))
                        : std::string("");
        };
        std::snprintf(line, sizeof line, "%6g  %10s %6s  %10s %6s  %10s %6s\n", lv.label,
                      detail::format_sci3(lv.energy).c_str(), r(&LevelErrors::energy).c_str(),
                      detail::format_sci3(lv.l2).c_str(), r(&LevelErrors::l2).c_str(),
                      detail::format_sci3(lv.edge).c_str(), r(&LevelErrors::edge).c_str());
        out << line << std::flush;
        done.push_back(lv);
    };

    try
    {
        run_convergence_study(mcase, cfg.mesh, cfg.levels, cfg.element, params, opts);
    }
    catch (const StudyFailure& failure)
    {
        err << "error: " << failure.what() << '\n';
        return exit_code::singular;
    }
    if (io_failed)
    {
        err << "error: writing '" << cfg.output << "' failed\n";
        return exit_code::io_error;
    }
    return exit_code::ok;
}

} // namespace gwg
