#pragma once

// CSV and JSON emission. CSV numbers use 17 significant digits so a double
// survives the round trip; JSON objects come out with sorted keys.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "geometry.hpp"
#include "heun.hpp"
#include "stability.hpp"
#include "transverse.hpp"

namespace helistrip {

using Json = nlohmann::json;

inline std::string format_number(double value) {
    if (std::isnan(value)) {
        return "nan";
    }
    if (std::isinf(value)) {
        return value > 0 ? "inf" : "-inf";
    }
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

inline std::string format_number(std::optional<double> value) { return value ? format_number(*value) : ""; }

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row) {
        if (row.size() != header.size()) {
            throw Error("table row width does not match the header");
        }
        rows.push_back(std::move(row));
    }

    std::string to_csv() const {
        std::string out;
        auto line = [&](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (i > 0) {
                    out += ',';
                }
                out += cells[i];
            }
            out += '\n';
        };
        line(header);
        for (const auto& r : rows) {
            line(r);
        }
        return out;
    }

    /// Column-oriented JSON; cells that parse as numbers are stored as numbers.
    Json to_json() const {
        Json out = Json::object();
        for (std::size_t c = 0; c < header.size(); ++c) {
            Json column = Json::array();
            for (const auto& r : rows) {
                const std::string& cell = r[c];
                char* end = nullptr;
                const double v = std::strtod(cell.c_str(), &end);
                if (!cell.empty() && end == cell.c_str() + cell.size() && std::isfinite(v)) {
                    column.push_back(v);
                } else if (cell.empty()) {
                    column.push_back(nullptr);
                } else {
                    column.push_back(cell);
                }
            }
            out[header[c]] = std::move(column);
        }
        return out;
    }
};

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw Error("cannot open " + path + " for writing");
    }
    file << text;
    if (!file) {
        throw Error("failed writing " + path);
    }
}

inline std::string dump(const Json& json) { return json.dump(2) + "\n"; }

inline Table potential_csv(const PotentialTable& table) {
    Table out{{"xi", "v_eff", "net"}, {}};
    for (std::size_t i = 0; i < table.xi.size(); ++i) {
        out.add({format_number(table.xi[i]), format_number(table.v_eff[i]), format_number(table.net[i])});
    }
    return out;
}

inline Table spectrum_csv(const EigenSolution& solution, const std::vector<StateObservables>& obs) {
    Table out{{"state", "energy", "node_count", "residual", "mean_xi", "rms_xi", "outer_mass"}, {}};
    for (std::size_t j = 0; j < solution.energies.size(); ++j) {
        out.add({std::to_string(j), format_number(solution.energies[j]), std::to_string(solution.node_counts[j]),
                 format_number(solution.residual_norms[j]), format_number(obs[j].mean_xi),
                 format_number(obs[j].rms_xi), format_number(obs[j].outer_mass)});
    }
    return out;
}

inline Table wavefunction_csv(const EigenSolution& solution, const TransverseGrid& grid) {
    Table out{{"xi"}, {}};
    for (std::size_t j = 0; j < solution.wavefunctions.size(); ++j) {
        out.header.push_back("f" + std::to_string(j));
    }
    for (std::size_t i = 0; i < grid.points(); ++i) {
        std::vector<std::string> row{format_number(grid.node(i))};
        for (const auto& f : solution.wavefunctions) {
            row.push_back(format_number(f[i]));
        }
        out.add(std::move(row));
    }
    return out;
}

inline Table dispersion_csv(const DispersionTable& table, std::size_t states) {
    Table out{{"kx"}, {}};
    for (std::size_t s = 0; s < states; ++s) {
        out.header.push_back("E" + std::to_string(s));
    }
    for (std::size_t i = 0; i < table.kx.size(); ++i) {
        std::vector<std::string> row{format_number(table.kx[i])};
        for (double e : table.energies[i]) {
            row.push_back(format_number(e));
        }
        out.add(std::move(row));
    }
    return out;
}

inline Table scan_csv(const ScanResult& scan) {
    Table out{{"omega", "elastic", "electronic", "total"}, {}};
    for (const auto& r : scan.rows) {
        out.add({format_number(r.omega), format_number(r.elastic), format_number(r.electronic),
                 format_number(r.total)});
    }
    return out;
}

inline Table surface_csv(const std::vector<std::array<double, 3>>& points) {
    Table out{{"x", "y", "z"}, {}};
    for (const auto& p : points) {
        out.add({format_number(p[0]), format_number(p[1]), format_number(p[2])});
    }
    return out;
}

inline Table normal_form_csv(const HeunNormalForm& form, const HeunVariables& vars) {
    Table out{{"zeta", "m", "q"}, {}};
    for (std::size_t i = 0; i < vars.zeta.size(); ++i) {
        out.add({format_number(vars.zeta[i]), format_number(vars.m[i]), format_number(form.q[i])});
    }
    return out;
}

inline Json to_json(const HeunCoefficients& k) {
    return {{"a", k.a}, {"b", k.b}, {"c", k.c}, {"d", k.d}, {"e", k.e}, {"source", std::string(to_string(k.source))}};
}

inline Json to_json(const ResidualReport& report) {
    Json stages = Json::array();
    for (const auto& s : report.stages) {
        stages.push_back({{"equation", s.stage},
                          {"convention", std::string(to_string(s.convention))},
                          {"residual", s.residual},
                          {"flagged", s.flagged}});
    }
    return {{"ratio", report.ratio},
            {"energy", report.energy},
            {"selected_convention", std::string(to_string(report.selected))},
            {"e_selected", report.e_selected},
            {"usable_nodes", report.usable_nodes},
            {"xi_cutoff", report.xi_cutoff},
            {"stages", std::move(stages)},
            {"coefficients",
             {{"listed", to_json(report.coefficients.listed)},
              {"read_from_q", to_json(report.coefficients.read_from_q)},
              {"rederived", to_json(report.coefficients.rederived)},
              {"listed_b_disagrees", report.coefficients.listed_b_disagrees}}},
            {"flags", report.flags}};
}

inline Json to_json(const LandmarkReport& r) {
    auto opt = [](std::optional<double> v) { return v ? Json(*v) : Json(nullptr); };
    return {{"omega", r.omega},
            {"ratio", r.ratio},
            {"v0", r.v0},
            {"attractive", r.attractive},
            {"xi_zero", opt(r.xi_zero)},
            {"xi_min", opt(r.xi_min)},
            {"u_min", opt(r.u_min)},
            {"numeric_xi_zero", opt(r.numeric_xi_zero)},
            {"numeric_xi_min", opt(r.numeric_xi_min)},
            {"numeric_u_min", opt(r.numeric_u_min)},
            {"u_min_simplified", r.u_min_simplified},
            {"u_min_simplified_deviation", r.u_min_simplified_deviation}};
}

} // namespace helistrip
