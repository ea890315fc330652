#pragma once

// Elastic cost of twisting against the electronic energy gained from the
// twist-lowered transverse levels.
//
// Electrons fill single-particle levels E_m(kx) at T = 0, with periodic
// quantisation kx = 2 pi j / L along the strip and a spin degeneracy per
// orbital. E_m(kx) already contains the longitudinal kinetic energy through U.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "grid.hpp"
#include "parallel.hpp"
#include "transverse.hpp"
#include "units.hpp"

namespace helistrip {

struct StabilityScenario {
    StripGeometry geometry;  ///< L and D; the twist count is replaced by each scanned omega
    double torsional_constant = 0.0; ///< C*, elastic energy per length is C* w^2 / 2
    std::size_t electrons = 0;
    std::size_t spin_degeneracy = 2;
    double temperature = 0.0; ///< kelvin
    std::size_t max_wavenumber_index = 4096; ///< level budget along kx

    void validate() const {
        if (!(torsional_constant >= 0.0) || !std::isfinite(torsional_constant)) {
            throw DomainError("torsional constant must be non-negative");
        }
        if (spin_degeneracy == 0) {
            throw DomainError("spin degeneracy must be at least 1");
        }
        if (!(temperature >= 0.0)) {
            throw DomainError("temperature must be non-negative");
        }
    }
};

inline double elastic_energy(const StabilityScenario& scenario, double omega) {
    if (!(omega >= 0.0)) {
        throw DomainError("twist rate must be non-negative");
    }
    return 0.5 * scenario.torsional_constant * omega * omega * scenario.geometry.length();
}

inline double wavenumber(const StabilityScenario& scenario, std::int64_t j) {
    return 2.0 * constants::pi * static_cast<double>(j) / scenario.geometry.length();
}

struct OccupiedLevel {
    double energy;
    std::int64_t j;         ///< kx = 2 pi j / L
    std::size_t transverse; ///< transverse index m
    std::size_t electrons;  ///< occupancy, at most the spin degeneracy
};

struct Filling {
    double energy = 0.0;
    std::vector<OccupiedLevel> levels;
    std::size_t wavenumbers_solved = 0; ///< number of |j| values solved
};

/// T = 0 filling of `scenario.electrons` electrons at twist rate `omega`.
inline Filling fill_levels(const StabilityScenario& scenario, double omega, const TransverseGrid& grid) {
    scenario.validate();
    Filling out;
    if (scenario.electrons == 0) {
        return out;
    }
    const auto geometry = scenario.geometry.with_omega(omega);
    const std::size_t g = scenario.spin_degeneracy;
    const std::size_t orbitals = (scenario.electrons + g - 1) / g;
    const std::size_t per_k = std::min(orbitals, grid.unknowns());

    std::vector<OccupiedLevel> pool;
    double floor = 0.0;
    for (std::int64_t j = 0;; ++j) {
        if (static_cast<std::size_t>(j) > scenario.max_wavenumber_index) {
            throw DomainError("level budget exhausted before the requested electrons were placed; "
                              "raise max_wavenumber_index or use a wider grid");
        }
        const auto mode = TransverseMode::from_wavenumber(wavenumber(scenario, j), geometry);
        const auto energies = solve_transverse(geometry, mode, grid, per_k).energies;
        ++out.wavenumbers_solved;
        if (j == 0) {
            floor = energies.front();
        }
        for (std::size_t m = 0; m < energies.size(); ++m) {
            pool.push_back({energies[m], j, m, 0});
            if (j > 0) {
                pool.push_back({energies[m], -j, m, 0});
            }
        }
        if (pool.size() >= orbitals) {
            std::vector<double> sorted;
            sorted.reserve(pool.size());
            for (const auto& l : pool) {
                sorted.push_back(l.energy);
            }
            std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(orbitals - 1), sorted.end());
            const double nth = sorted[orbitals - 1];
            // E_0(kx) grows with |kx|, so once it clears the last needed
            // level with a factor-two margin no larger |j| can contribute.
            if (energies.front() - floor > 2.0 * (nth - floor) && energies.front() > nth) {
                break;
            }
        }
    }

    std::sort(pool.begin(), pool.end(), [](const OccupiedLevel& a, const OccupiedLevel& b) {
        if (a.energy != b.energy) {
            return a.energy < b.energy;
        }
        const auto aj = a.j < 0 ? -a.j : a.j;
        const auto bj = b.j < 0 ? -b.j : b.j;
        if (aj != bj) {
            return aj < bj;
        }
        if (a.transverse != b.transverse) {
            return a.transverse < b.transverse;
        }
        return a.j > b.j;
    });
    std::size_t remaining = scenario.electrons;
    for (auto& level : pool) {
        if (remaining == 0) {
            break;
        }
        level.electrons = std::min(remaining, g);
        remaining -= level.electrons;
        out.energy += static_cast<double>(level.electrons) * level.energy;
        out.levels.push_back(level);
    }
    return out;
}

inline double electronic_energy(const StabilityScenario& scenario, double omega, const TransverseGrid& grid) {
    return fill_levels(scenario, omega, grid).energy;
}

struct ScanRow {
    double omega;
    double elastic;
    double electronic;
    double total;
};

struct ScanResult {
    std::vector<ScanRow> rows; ///< sorted by omega
    double omega_star;         ///< argmin of total, smallest omega on ties
    double total_star;
    double total_flat;
    bool twist_favoured;       ///< total(omega_star) < total(0)
};

inline ScanResult total_energy_scan(const StabilityScenario& scenario, std::span<const double> omega_values,
                                    const TransverseGrid& grid, std::size_t threads = 1) {
    std::vector<double> omegas(omega_values.begin(), omega_values.end());
    std::sort(omegas.begin(), omegas.end());
    if (omegas.empty() || omegas.front() != 0.0) {
        throw DomainError("the scan must include omega = 0 as the flat baseline");
    }
    std::vector<ScanRow> rows(omegas.size());
    parallel_for(omegas.size(), threads, [&](std::size_t i) {
        const double w = omegas[i];
        const double elastic = elastic_energy(scenario, w);
        const double electronic = electronic_energy(scenario, w, grid);
        rows[i] = {w, elastic, electronic, elastic + electronic};
    });
    ScanResult result{std::move(rows), 0.0, 0.0, 0.0, false};
    result.total_flat = result.rows.front().total;
    std::size_t best = 0;
    for (std::size_t i = 1; i < result.rows.size(); ++i) {
        if (result.rows[i].total < result.rows[best].total) {
            best = i;
        }
    }
    result.omega_star = result.rows[best].omega;
    result.total_star = result.rows[best].total;
    result.twist_favoured = result.total_star < result.total_flat;
    return result;
}

struct ThermalOccupation {
    double fraction;      ///< share of modes in the window with |kx| <= w/4
    double k_fermi;       ///< largest occupied |kx| at T = 0
    double k_thermal;     ///< sqrt(2 m k_B T)/hbar
    std::size_t modes;    ///< kx modes inside the thermal window
};

/// Share of the thermally reachable kx modes that sit below w/4. The window
/// holds every kx with kx^2 <= k_F^2 + k_T^2, i.e. longitudinal kinetic
/// energy within k_B T of the highest occupied mode.
inline ThermalOccupation occupied_fraction_below_thermal(const StabilityScenario& scenario, double omega,
                                                         const TransverseGrid& grid, const UnitSystem& units) {
    if (!units.is_dimensional()) {
        throw DomainError("the thermal window needs dimensional units");
    }
    if (!(scenario.temperature > 0.0)) {
        throw DomainError("the thermal window needs a positive temperature");
    }
    const auto filling = fill_levels(scenario, omega, grid);
    std::int64_t j_fermi = 0;
    for (const auto& level : filling.levels) {
        j_fermi = std::max(j_fermi, level.j < 0 ? -level.j : level.j);
    }
    const double k_fermi = wavenumber(scenario, j_fermi);
    const double k_thermal = thermal_twist_scale(scenario.temperature, units);
    const double k_window = std::hypot(k_fermi, k_thermal);
    const double dk = wavenumber(scenario, 1);
    // Guard the floor against k_window landing exactly on a mode.
    const auto j_window = static_cast<std::int64_t>(std::floor(k_window / dk * (1.0 + 1e-12)));
    const auto j_quarter = std::min(j_window, static_cast<std::int64_t>(std::floor(omega / 4.0 / dk * (1.0 + 1e-12))));
    const auto modes = static_cast<std::size_t>(2 * j_window + 1);
    const auto below = static_cast<std::size_t>(2 * j_quarter + 1);
    return {static_cast<double>(below) / static_cast<double>(modes), k_fermi, k_thermal, modes};
}

} // namespace helistrip
