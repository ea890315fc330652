#pragma once

// Command-line front end: `helistrip <subcommand> [--flag value ...]`.
//
// Values come from an optional flat key=value file (--config) and then from
// flags, which win. Exit codes: 0 success, 1 numerical failure (the manifest
// is still written), 2 usage error.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "errors.hpp"
#include "geometry.hpp"
#include "grid.hpp"
#include "heun.hpp"
#include "numerov.hpp"
#include "report.hpp"
#include "stability.hpp"
#include "transverse.hpp"
#include "units.hpp"

namespace helistrip::cli {

inline constexpr std::string_view tool_name = "helistrip";
inline constexpr std::string_view tool_version = "0.1.0";

class UsageError : public Error {
  public:
    using Error::Error;
};

inline const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names{"potential", "solve", "dispersion", "heun-check", "stability",
                                                "surface"};
    return names;
}

/// Keys that take a value, shared by flags (--key) and config files.
inline const std::vector<std::string>& value_keys() {
    static const std::vector<std::string> keys{
        "L",       "n",     "D",           "C",    "k_x",  "points", "bc-left", "bc-right", "states",
        "output",  "format", "mass",       "hbar", "temperature", "Cstar",  "N",  "spin",  "n-values",
        "kx-values", "nx",  "nxi",        "tolerance", "max-points"};
    return keys;
}

/// Keys that are switches.
inline const std::vector<std::string>& switch_keys() {
    static const std::vector<std::string> keys{"dimensional", "wavefunctions", "refine"};
    return keys;
}

struct RunConfig {
    std::string subcommand;
    std::map<std::string, std::string> resolved; ///< every key that was set, after precedence

    std::optional<double> length;
    std::optional<double> twists;
    std::optional<double> width;
    std::optional<double> ratio;
    std::optional<double> kx;
    std::size_t points = default_grid_points;
    BoundaryCondition bc_left = BoundaryCondition::dirichlet;
    BoundaryCondition bc_right = BoundaryCondition::dirichlet;
    std::size_t states = 3;
    std::string output = "helistrip";
    std::string format = "csv";
    bool dimensional = false;
    double mass = constants::electron_mass;
    double hbar = constants::hbar;
    double temperature = 0.0;
    double cstar = 0.0;
    std::size_t electrons = 0;
    std::size_t spin = 2;
    std::vector<double> n_values{0, 1, 2, 3, 4};
    std::vector<double> kx_values;
    std::size_t nx = 65;
    std::size_t nxi = 17;
    bool wavefunctions = false;
    bool refine = false;
    double tolerance = default_refinement_tolerance;
    std::size_t max_points = default_max_points;
    std::size_t threads = 1;

    UnitSystem units() const { return dimensional ? UnitSystem::dimensional(hbar, mass) : UnitSystem::natural(); }
};

namespace detail {

inline std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline bool is_known_key(const std::string& key) {
    const auto& v = value_keys();
    const auto& s = switch_keys();
    return std::find(v.begin(), v.end(), key) != v.end() || std::find(s.begin(), s.end(), key) != s.end();
}

inline std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream file(path);
    if (!file) {
        throw UsageError("cannot read config file " + path);
    }
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t number = 0;
    while (std::getline(file, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw UsageError(path + ":" + std::to_string(number) + ": expected key=value");
        }
        const std::string key = trim(line.substr(0, eq));
        if (!is_known_key(key)) {
            throw UsageError(path + ":" + std::to_string(number) + ": unknown key '" + key + "'");
        }
        out[key] = trim(line.substr(eq + 1));
    }
    return out;
}

inline double to_double(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(v)) {
        throw UsageError("--" + key + ": '" + text + "' is not a finite number");
    }
    return v;
}

inline std::size_t to_count(const std::string& key, const std::string& text) {
    const double v = to_double(key, text);
    if (v < 0 || v != std::floor(v) || v > 1e15) {
        throw UsageError("--" + key + ": '" + text + "' is not a non-negative integer");
    }
    return static_cast<std::size_t>(v);
}

inline bool to_switch(const std::string& key, const std::string& text) {
    std::string t = trim(text);
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (t == "1" || t == "true" || t == "yes" || t == "on") {
        return true;
    }
    if (t == "0" || t == "false" || t == "no" || t == "off") {
        return false;
    }
    throw UsageError("--" + key + ": '" + text + "' is not a boolean");
}

inline std::vector<double> to_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        out.push_back(to_double(key, item));
    }
    if (out.empty()) {
        throw UsageError("--" + key + ": empty list");
    }
    return out;
}

inline std::size_t thread_budget() {
    const std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    const char* env = std::getenv("WAVEGUIDE_THREADS");
    if (env == nullptr || *env == '\0') {
        return hw;
    }
    const std::size_t requested = to_count("WAVEGUIDE_THREADS", env);
    if (requested == 0) {
        throw UsageError("WAVEGUIDE_THREADS must be at least 1");
    }
    return requested;
}

} // namespace detail

/// Parses `args` (without the program name). Throws UsageError.
inline RunConfig parse_config(const std::vector<std::string>& args) {
    if (args.empty()) {
        throw UsageError("missing subcommand; expected one of potential, solve, dispersion, heun-check, "
                         "stability, surface");
    }
    const auto& names = subcommands();
    if (std::find(names.begin(), names.end(), args.front()) == names.end()) {
        throw UsageError("unknown subcommand '" + args.front() + "'");
    }
    RunConfig cfg;
    cfg.subcommand = args.front();

    CLI::App app{"helistrip " + cfg.subcommand, std::string(tool_name)};
    std::map<std::string, std::string> flag_values;
    std::map<std::string, CLI::Option*> options;
    for (const auto& key : value_keys()) {
        options[key] = app.add_option("--" + key, flag_values[key]);
    }
    std::map<std::string, bool> switch_values;
    for (const auto& key : switch_keys()) {
        switch_values[key] = false;
        options[key] = app.add_flag("--" + key, switch_values[key]);
    }
    std::string config_path;
    app.add_option("--config", config_path);

    std::vector<std::string> rest(args.begin() + 1, args.end());
    std::reverse(rest.begin(), rest.end()); // CLI11 consumes the vector from the back
    try {
        app.parse(rest);
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    auto& resolved = cfg.resolved;
    if (!config_path.empty()) {
        resolved = detail::read_config_file(config_path);
    }
    for (const auto& key : value_keys()) {
        if (options[key]->count() > 0) {
            resolved[key] = flag_values[key];
        }
    }
    for (const auto& key : switch_keys()) {
        if (options[key]->count() > 0) {
            resolved[key] = "true";
        }
    }

    auto get = [&](const std::string& key) -> const std::string* {
        const auto it = resolved.find(key);
        return it == resolved.end() ? nullptr : &it->second;
    };
    using namespace detail;
    if (auto v = get("L")) cfg.length = to_double("L", *v);
    if (auto v = get("n")) cfg.twists = to_double("n", *v);
    if (auto v = get("D")) cfg.width = to_double("D", *v);
    if (auto v = get("C")) cfg.ratio = to_double("C", *v);
    if (auto v = get("k_x")) cfg.kx = to_double("k_x", *v);
    if (auto v = get("points")) cfg.points = to_count("points", *v);
    if (auto v = get("bc-left")) {
        try {
            cfg.bc_left = parse_boundary_condition(*v);
        } catch (const DomainError& e) {
            throw UsageError(std::string("--bc-left: ") + e.what());
        }
    }
    if (auto v = get("bc-right")) {
        try {
            cfg.bc_right = parse_boundary_condition(*v);
        } catch (const DomainError& e) {
            throw UsageError(std::string("--bc-right: ") + e.what());
        }
    }
    if (auto v = get("states")) cfg.states = to_count("states", *v);
    if (auto v = get("output")) cfg.output = *v;
    if (auto v = get("format")) cfg.format = *v;
    if (auto v = get("dimensional")) cfg.dimensional = to_switch("dimensional", *v);
    if (auto v = get("mass")) cfg.mass = to_double("mass", *v);
    if (auto v = get("hbar")) cfg.hbar = to_double("hbar", *v);
    if (auto v = get("temperature")) cfg.temperature = to_double("temperature", *v);
    if (auto v = get("Cstar")) cfg.cstar = to_double("Cstar", *v);
    if (auto v = get("N")) cfg.electrons = to_count("N", *v);
    if (auto v = get("spin")) cfg.spin = to_count("spin", *v);
    if (auto v = get("n-values")) cfg.n_values = to_list("n-values", *v);
    if (auto v = get("kx-values")) cfg.kx_values = to_list("kx-values", *v);
    if (auto v = get("nx")) cfg.nx = to_count("nx", *v);
    if (auto v = get("nxi")) cfg.nxi = to_count("nxi", *v);
    if (auto v = get("wavefunctions")) cfg.wavefunctions = to_switch("wavefunctions", *v);
    if (auto v = get("refine")) cfg.refine = to_switch("refine", *v);
    if (auto v = get("tolerance")) cfg.tolerance = to_double("tolerance", *v);
    if (auto v = get("max-points")) cfg.max_points = to_count("max-points", *v);
    if (cfg.subcommand == "heun-check" && !get("points")) {
        cfg.points = 8001;
    }

    // Validation.
    const bool needs_twist_count = cfg.subcommand != "stability";
    if (!cfg.length || !cfg.width || (needs_twist_count && !cfg.twists)) {
        std::string missing;
        for (const auto& [key, value] :
             {std::pair{"L", cfg.length}, std::pair{"n", needs_twist_count ? cfg.twists : 0.0}, std::pair{"D", cfg.width}}) {
            if (!value) {
                missing += missing.empty() ? "--" : ", --";
                missing += key;
            }
        }
        throw UsageError("missing required geometry: " + missing);
    }
    if (!(*cfg.length > 0) || !(*cfg.width > 0)) {
        throw UsageError("lengths must be positive: L = " + format_number(*cfg.length) +
                         ", D = " + format_number(*cfg.width));
    }
    if (cfg.twists && *cfg.twists < 0) {
        throw UsageError("twist count n must be non-negative");
    }
    if (cfg.points < 3) {
        throw UsageError("--points must be at least 3");
    }
    if (cfg.states == 0) {
        throw UsageError("--states must be at least 1");
    }
    if (cfg.format != "csv" && cfg.format != "json") {
        throw UsageError("--format must be csv or json, got '" + cfg.format + "'");
    }
    if (cfg.output.empty()) {
        throw UsageError("--output must not be empty");
    }
    if (cfg.spin == 0) {
        throw UsageError("--spin must be at least 1");
    }
    if (cfg.cstar < 0) {
        throw UsageError("--Cstar must be non-negative");
    }
    if (cfg.temperature < 0) {
        throw UsageError("--temperature must be non-negative");
    }
    if (!(cfg.mass > 0) || !(cfg.hbar > 0)) {
        throw UsageError("--mass and --hbar must be positive");
    }
    if (cfg.tolerance <= 0) {
        throw UsageError("--tolerance must be positive");
    }
    if (cfg.twists) {
        const double omega = 2.0 * constants::pi * *cfg.twists / *cfg.length;
        if (cfg.ratio && cfg.kx) {
            const double implied = *cfg.ratio * omega;
            if (omega == 0.0 || std::abs(*cfg.kx - implied) > 1e-12 * std::max(1.0, std::abs(*cfg.kx))) {
                throw UsageError("conflicting mode: k_x = " + format_number(*cfg.kx) + " and C = " +
                                 format_number(*cfg.ratio) + " (C * omega = " + format_number(implied) + ")");
            }
        }
        if (cfg.ratio && !cfg.kx && omega == 0.0) {
            throw UsageError("C = " + format_number(*cfg.ratio) + " needs a twisted strip; give k_x instead");
        }
    }
    if (cfg.subcommand == "stability") {
        for (double n : cfg.n_values) {
            if (n < 0) {
                throw UsageError("--n-values must be non-negative");
            }
        }
        if (std::find(cfg.n_values.begin(), cfg.n_values.end(), 0.0) == cfg.n_values.end()) {
            throw UsageError("--n-values must include 0 as the flat baseline");
        }
    }
    if (cfg.subcommand == "dispersion" && cfg.kx_values.empty()) {
        throw UsageError("dispersion needs --kx-values");
    }
    cfg.threads = detail::thread_budget();
    return cfg;
}

namespace detail {

inline StripGeometry geometry_of(const RunConfig& cfg) {
    return StripGeometry(*cfg.length, cfg.twists.value_or(0.0), *cfg.width);
}

inline TransverseMode mode_of(const RunConfig& cfg, const StripGeometry& geometry) {
    if (cfg.kx) {
        return TransverseMode::from_wavenumber(*cfg.kx, geometry);
    }
    if (cfg.ratio) {
        return TransverseMode::from_ratio(*cfg.ratio, geometry);
    }
    return TransverseMode::from_wavenumber(0.0, geometry);
}

inline TransverseGrid grid_of(const RunConfig& cfg) {
    return TransverseGrid(*cfg.width, cfg.points, cfg.bc_left, cfg.bc_right);
}

inline Json config_echo(const RunConfig& cfg) {
    Json echo = Json::object();
    for (const auto& [key, value] : cfg.resolved) {
        echo[key] = value;
    }
    Json derived = {{"subcommand", cfg.subcommand},
                    {"points", cfg.points},
                    {"bc_left", std::string(to_string(cfg.bc_left))},
                    {"bc_right", std::string(to_string(cfg.bc_right))},
                    {"states", cfg.states},
                    {"format", cfg.format},
                    {"units", cfg.dimensional ? "dimensional" : "natural"}};
    if (cfg.length && cfg.twists) {
        derived["omega"] = 2.0 * constants::pi * *cfg.twists / *cfg.length;
    }
    if (cfg.dimensional) {
        derived["mass"] = cfg.mass;
        derived["hbar"] = cfg.hbar;
    }
    return {{"given", std::move(echo)}, {"resolved", std::move(derived)}};
}

inline std::string data_path(const RunConfig& cfg, std::string_view suffix = "") {
    return cfg.output + std::string(suffix) + "." + cfg.format;
}

inline void emit(const RunConfig& cfg, const Table& table, std::string_view suffix = "") {
    write_text(data_path(cfg, suffix), cfg.format == "csv" ? table.to_csv() : dump(table.to_json()));
}

struct Outcome {
    Json results = Json::object();
    std::vector<std::string> files;
};

inline Outcome run_potential(const RunConfig& cfg, const StripGeometry& geometry, const TransverseMode& mode) {
    Outcome out;
    const auto table = potential_table(geometry, mode, cfg.points);
    emit(cfg, potential_csv(table));
    out.files.push_back(data_path(cfg));
    out.results["flat_fallback"] = table.flat_fallback;
    out.results["first_sign_change"] = first_sign_change(table) ? Json(*first_sign_change(table)) : Json(nullptr);
    if (!geometry.is_flat()) {
        out.results["landmarks"] = to_json(landmarks(geometry, mode));
    }
    return out;
}

inline Outcome run_solve(const RunConfig& cfg, const StripGeometry& geometry, const TransverseMode& mode,
                         Json& manifest) {
    Outcome out;
    TransverseGrid grid = grid_of(cfg);
    EigenSolution solution;
    if (cfg.refine) {
        auto converged = solve_converged(geometry, mode, grid, cfg.states, cfg.tolerance, cfg.max_points);
        manifest["refinement"] = {{"converged", converged.converged},
                                  {"refinements", converged.refinements},
                                  {"last_change", converged.last_change},
                                  {"absolute_tolerance", converged.tolerance}};
        if (!converged.converged) {
            throw NumericalError("grid refinement did not reach the tolerance before --max-points", 0);
        }
        solution = std::move(converged.solution);
        grid = converged.grid;
    } else {
        solution = solve_transverse(geometry, mode, grid, cfg.states);
    }
    manifest["grid"]["points_used"] = grid.points();
    manifest["grid"]["spacing"] = grid.spacing();

    const auto obs = observables(solution, geometry, grid);
    emit(cfg, spectrum_csv(solution, obs));
    out.files.push_back(data_path(cfg));
    if (cfg.wavefunctions) {
        emit(cfg, wavefunction_csv(solution, grid), ".wavefunctions");
        out.files.push_back(data_path(cfg, ".wavefunctions"));
    }

    // Oracle: Richardson-extrapolated matrix energies against Numerov roots.
    const auto extrapolated = extrapolated_energies(geometry, mode, grid, cfg.states);
    const auto shooting = numerov_eigenvalues(geometry, mode, grid, cfg.states);
    double worst = 0.0;
    for (std::size_t j = 0; j < cfg.states; ++j) {
        const double denom = std::max(std::abs(shooting[j]), 1e-10 * energy_scale(geometry));
        worst = std::max(worst, std::abs(extrapolated[j] - shooting[j]) / denom);
    }
    double max_residual = 0.0;
    for (double r : solution.residual_norms) {
        max_residual = std::max(max_residual, r);
    }
    const auto bound = bound_state_count(geometry, mode, grid);
    out.results = {{"energies", solution.energies},
                   {"max_residual_norm", max_residual},
                   {"bound_states",
                    {{"below_zero", bound.below_zero},
                     {"below_edge_potential", bound.below_tail},
                     {"edge_potential", bound.tail_value},
                     {"numerov_below_zero", bound.numerov_below_zero}}}};
    if (cfg.dimensional) {
        std::vector<double> joules;
        for (double e : solution.energies) {
            joules.push_back(cfg.units().from_natural(e));
        }
        out.results["energies_joule"] = joules;
    }
    manifest["oracle"] = {{"method", "numerov shooting vs Richardson-extrapolated matrix"},
                          {"numerov", shooting},
                          {"extrapolated", extrapolated},
                          {"max_relative_difference", worst}};
    return out;
}

inline Outcome run_dispersion(const RunConfig& cfg, const StripGeometry& geometry) {
    Outcome out;
    const auto table = dispersion(geometry, grid_of(cfg), cfg.kx_values, cfg.states, cfg.threads);
    emit(cfg, dispersion_csv(table, cfg.states));
    out.files.push_back(data_path(cfg));
    out.results["monotone_in_abs_kx"] = table.monotone_in_abs_kx;
    return out;
}

inline Outcome run_heun_check(const RunConfig& cfg, const StripGeometry& geometry, const TransverseMode& mode,
                              Json& manifest) {
    Outcome out;
    if (geometry.is_flat()) {
        throw DomainError("heun-check needs n > 0");
    }
    const auto grid = grid_of(cfg);
    const auto solution = solve_transverse(geometry, mode, grid, 1);
    const auto report = residual_chain(grid, solution.wavefunctions[0], solution.energies[0], geometry, mode);
    const auto json = to_json(report);
    write_text(cfg.output + ".json", dump(json));
    out.files.push_back(cfg.output + ".json");
    if (cfg.format == "csv") {
        std::vector<double> xi(grid.points());
        for (std::size_t i = 0; i < xi.size(); ++i) {
            xi[i] = grid.node(i);
        }
        const auto vars = to_heun_variables(xi, solution.wavefunctions[0], geometry);
        const auto form = make_normal_form(*mode.ratio(), solution.energies[0], geometry.omega(), report.selected,
                                           vars.zeta);
        write_text(cfg.output + ".csv", normal_form_csv(form, vars).to_csv());
        out.files.push_back(cfg.output + ".csv");
    }
    out.results = {{"selected_convention", std::string(to_string(report.selected))}, {"flags", report.flags}};
    manifest["flags"] = report.flags;
    manifest["tolerances"]["heun_near_singular_cutoff"] = heun_near_singular_cutoff;
    manifest["tolerances"]["heun_flag_factor"] = heun_flag_factor;
    return out;
}

inline Outcome run_stability(const RunConfig& cfg, Json& manifest) {
    Outcome out;
    const UnitSystem units = cfg.units();
    StabilityScenario scenario{StripGeometry(*cfg.length, 0.0, *cfg.width), cfg.cstar, cfg.electrons, cfg.spin,
                               cfg.temperature};
    std::vector<double> omegas;
    for (double n : cfg.n_values) {
        omegas.push_back(2.0 * constants::pi * n / *cfg.length);
    }
    const auto grid = grid_of(cfg);
    auto scan = total_energy_scan(scenario, omegas, grid, cfg.threads);
    if (units.is_dimensional()) {
        // C* is then in J m, so bring the electronic energies to joules too.
        for (auto& row : scan.rows) {
            row.electronic = units.from_natural(row.electronic);
            row.total = row.elastic + row.electronic;
        }
        std::size_t best = 0;
        for (std::size_t i = 1; i < scan.rows.size(); ++i) {
            if (scan.rows[i].total < scan.rows[best].total) {
                best = i;
            }
        }
        scan.omega_star = scan.rows[best].omega;
        scan.total_star = scan.rows[best].total;
        scan.total_flat = scan.rows.front().total;
        scan.twist_favoured = scan.total_star < scan.total_flat;
    }
    emit(cfg, scan_csv(scan));
    out.files.push_back(data_path(cfg));

    Json summary = {{"omega_star", scan.omega_star},
                    {"total_at_omega_star", scan.total_star},
                    {"total_at_zero", scan.total_flat},
                    {"twist_favoured", scan.twist_favoured},
                    {"filling",
                     {{"model", "T = 0 Fermi filling"},
                      {"kx_quantization", "periodic, kx = 2 pi j / L"},
                      {"spin_degeneracy", cfg.spin},
                      {"electrons", cfg.electrons}}}};
    if (units.is_dimensional() && cfg.temperature > 0.0) {
        const auto thermal = occupied_fraction_below_thermal(scenario, scan.omega_star, grid, units);
        summary["thermal"] = {{"temperature", cfg.temperature},
                              {"k_thermal", thermal.k_thermal},
                              {"k_fermi", thermal.k_fermi},
                              {"modes_in_window", thermal.modes},
                              {"fraction_below_omega_over_4", thermal.fraction},
                              {"omega", scan.omega_star}};
    }
    write_text(cfg.output + ".summary.json", dump(summary));
    out.files.push_back(cfg.output + ".summary.json");
    out.results = summary;
    manifest["grid"]["points_used"] = grid.points();
    return out;
}

inline Outcome run_surface(const RunConfig& cfg, const StripGeometry& geometry) {
    Outcome out;
    emit(cfg, surface_csv(sample_surface(geometry, cfg.nx, cfg.nxi)));
    out.files.push_back(data_path(cfg));
    return out;
}

} // namespace detail

/// Runs a parsed configuration. Writes `<output>.manifest.json` whatever happens.
inline int run(const RunConfig& cfg, std::ostream& err = std::cerr) {
    const auto start = std::chrono::steady_clock::now();
    Json manifest = {{"tool", {{"name", tool_name}, {"version", tool_version}}},
                     {"config", detail::config_echo(cfg)},
                     {"grid", {{"points", cfg.points}, {"width", *cfg.width}}},
                     {"tolerances",
                      {{"eigen_bisection", "machine precision"},
                       {"inverse_iteration_max_steps", max_inverse_iterations},
                       {"refinement_tolerance", cfg.tolerance},
                       {"max_points", cfg.max_points}}},
                     {"flags", Json::array()}};
    int code = 0;
    try {
        const auto geometry = detail::geometry_of(cfg);
        const auto mode = detail::mode_of(cfg, geometry);
        detail::Outcome outcome;
        if (cfg.subcommand == "potential") {
            outcome = detail::run_potential(cfg, geometry, mode);
        } else if (cfg.subcommand == "solve") {
            outcome = detail::run_solve(cfg, geometry, mode, manifest);
        } else if (cfg.subcommand == "dispersion") {
            outcome = detail::run_dispersion(cfg, geometry);
        } else if (cfg.subcommand == "heun-check") {
            outcome = detail::run_heun_check(cfg, geometry, mode, manifest);
        } else if (cfg.subcommand == "stability") {
            outcome = detail::run_stability(cfg, manifest);
        } else {
            outcome = detail::run_surface(cfg, geometry);
        }
        manifest["results"] = std::move(outcome.results);
        manifest["files"] = std::move(outcome.files);
        manifest["status"] = {{"exit_code", 0}};
    } catch (const Error& e) {
        code = 1;
        manifest["status"] = {{"exit_code", 1}, {"error", e.what()}};
        err << "error: " << e.what() << '\n';
    } catch (const std::exception& e) {
        code = 1;
        manifest["status"] = {{"exit_code", 1}, {"error", e.what()}};
        err << "error: " << e.what() << '\n';
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    manifest["runtime"] = {{"wall_clock_seconds", seconds}, {"threads", cfg.threads}};
    try {
        write_text(cfg.output + ".manifest.json", dump(manifest));
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        code = 1;
    }
    return code;
}

/// Full entry point: parse then run.
inline int main(const std::vector<std::string>& args, std::ostream& err = std::cerr) {
    RunConfig cfg;
    try {
        cfg = parse_config(args);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    }
    return run(cfg, err);
}

} // namespace helistrip::cli
