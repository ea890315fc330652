#pragma once

// Transverse eigenproblem  -f'' + U(xi) f = E f  on [0, D].
//
// Second-order central differences give a symmetric tridiagonal matrix whose
// lowest eigenpairs come from Sturm bisection plus inverse iteration. The
// Numerov shooting routine in numerov.hpp is the independent check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "grid.hpp"
#include "numerov.hpp"
#include "parallel.hpp"
#include "tridiagonal.hpp"

namespace helistrip {

/// Discretised operator plus the bookkeeping needed to map unknowns back
/// onto grid nodes.
struct TransverseOperator {
    TransverseGrid grid;
    SymTridiagonal<double> matrix;
    std::vector<double> potential; ///< U at every grid node
};

inline TransverseOperator discretize(const TransverseGrid& grid, const StripGeometry& geometry,
                                     const TransverseMode& mode) {
    const double h = grid.spacing();
    const double inv_h2 = 1.0 / (h * h);
    std::vector<double> u(grid.points());
    for (std::size_t i = 0; i < grid.points(); ++i) {
        u[i] = net_potential(grid.node(i), geometry, mode);
    }
    const std::size_t first = grid.first_unknown();
    const std::size_t n = grid.unknowns();
    SymTridiagonal<double> a{std::vector<double>(n), std::vector<double>(n - 1, -inv_h2)};
    for (std::size_t k = 0; k < n; ++k) {
        a.diag[k] = 2.0 * inv_h2 + u[first + k];
    }
    // A Neumann end uses a mirrored ghost node, giving the row (2, -2)/h^2.
    // Scaling that unknown by 1/sqrt(2) restores symmetry; eigen_lowest
    // undoes the scaling.
    if (n > 1 && grid.left() == BoundaryCondition::neumann) {
        a.offdiag.front() = -std::sqrt(2.0) * inv_h2;
    }
    if (n > 1 && grid.right() == BoundaryCondition::neumann) {
        a.offdiag.back() = -std::sqrt(2.0) * inv_h2;
    }
    return {grid, std::move(a), std::move(u)};
}

struct EigenSolution {
    std::vector<double> energies;
    std::vector<std::vector<double>> wavefunctions; ///< on every grid node, sum f^2 h = 1
    std::vector<std::size_t> node_counts;
    std::vector<double> residual_norms; ///< ||(A - E) f|| / ||f||
    double spacing = 0.0;
};

namespace detail {

inline std::size_t count_sign_changes(std::span<const double> f) {
    std::size_t changes = 0;
    int last = 0;
    for (double v : f) {
        const int s = v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
        if (s != 0) {
            if (last != 0 && s != last) {
                ++changes;
            }
            last = s;
        }
    }
    return changes;
}

// x^T A x / x^T x with the kinetic part written as a sum of squared
// differences, which is free of the cancellation in the stencil form.
inline long double rayleigh_quotient(const TransverseOperator& op, std::span<const long double> x) {
    const auto& grid = op.grid;
    const std::size_t first = grid.first_unknown();
    const std::size_t n = x.size();
    const long double h = grid.spacing();
    const long double root2 = std::sqrt(2.0L);
    auto value = [&](std::size_t k) {
        // Undo the symmetrising scale at Neumann ends.
        const bool scaled = (k == 0 && grid.left() == BoundaryCondition::neumann) ||
                            (k + 1 == n && grid.right() == BoundaryCondition::neumann);
        return scaled ? root2 * x[k] : x[k];
    };
    long double kinetic = 0;
    long double potential = 0;
    long double norm = 0;
    for (std::size_t k = 0; k < n; ++k) {
        potential += op.potential[first + k] * x[k] * x[k];
        norm += x[k] * x[k];
        if (k + 1 < n) {
            const long double d = value(k + 1) - value(k);
            kinetic += d * d;
        }
    }
    if (grid.left() == BoundaryCondition::dirichlet) {
        kinetic += x[0] * x[0];
    }
    if (grid.right() == BoundaryCondition::dirichlet) {
        kinetic += x[n - 1] * x[n - 1];
    }
    return (kinetic / (h * h) + potential) / norm;
}

// ||(A - E) x|| / ||x|| for the vector as stored in double precision,
// accumulated in extended precision.
inline double residual_norm(const SymTridiagonal<double>& a, std::span<const double> x, double energy) {
    using wide = long double;
    const std::size_t n = x.size();
    wide sum = 0;
    wide norm = 0;
    for (std::size_t i = 0; i < n; ++i) {
        wide acc = (static_cast<wide>(a.diag[i]) - energy) * x[i];
        if (i > 0) {
            acc += static_cast<wide>(a.offdiag[i - 1]) * x[i - 1];
        }
        if (i + 1 < n) {
            acc += static_cast<wide>(a.offdiag[i]) * x[i + 1];
        }
        sum += acc * acc;
        norm += static_cast<wide>(x[i]) * x[i];
    }
    return static_cast<double>(std::sqrt(sum / norm));
}

} // namespace detail

/// The `count` lowest eigenpairs of the discretised operator.
inline EigenSolution eigen_lowest(const TransverseOperator& op, std::size_t count) {
    const std::size_t n = op.matrix.size();
    if (count < 1 || count > n) {
        throw DomainError("requested state count must be between 1 and the number of unknowns");
    }
    const auto& grid = op.grid;
    const double h = grid.spacing();
    const std::size_t first = grid.first_unknown();

    EigenSolution out;
    out.spacing = h;
    // Vectors are iterated in extended precision; rounding them to double at
    // the end is then the only source of residual.
    SymTridiagonal<long double> wide{{op.matrix.diag.begin(), op.matrix.diag.end()},
                                     {op.matrix.offdiag.begin(), op.matrix.offdiag.end()}};
    std::vector<std::vector<long double>> unit_vectors;
    const auto bounds = gershgorin_bounds(op.matrix);
    const long double anorm = std::max(std::abs(bounds.lower), std::abs(bounds.upper));
    for (std::size_t j = 0; j < count; ++j) {
        // Locate in double, then tighten in long double so the shift is as
        // accurate as the inverse iteration that follows.
        const double located = bisect_eigenvalue(op.matrix, j);
        const long double pad = 64.0L * std::numeric_limits<double>::epsilon() * anorm;
        long double lo = located - pad;
        long double hi = located + pad;
        long double shift;
        if (sturm_count(wide, lo) <= j && sturm_count(wide, hi) > j) {
            shift = bisect_eigenvalue(wide, j, lo, hi);
        } else {
            shift = bisect_eigenvalue(wide, j);
        }
        auto ii = inverse_iteration<long double>(wide, shift, j, unit_vectors);
        auto& x = ii.vector;

        // Deterministic sign: first appreciable component positive.
        long double peak = 0;
        for (long double v : x) {
            peak = std::max(peak, std::abs(v));
        }
        for (long double v : x) {
            if (std::abs(v) > 1e-3L * peak) {
                if (v < 0) {
                    for (auto& e : x) {
                        e = -e;
                    }
                }
                break;
            }
        }

        const double energy = static_cast<double>(detail::rayleigh_quotient(op, x));
        std::vector<double> narrow(x.begin(), x.end());
        const double residual = detail::residual_norm(op.matrix, narrow, energy);

        std::vector<long double> y(x.begin(), x.end());
        if (grid.left() == BoundaryCondition::neumann) {
            y.front() *= std::sqrt(2.0L);
        }
        if (grid.right() == BoundaryCondition::neumann) {
            y.back() *= std::sqrt(2.0L);
        }
        long double sum = 0;
        for (long double v : y) {
            sum += v * v;
        }
        std::vector<double> f(grid.points(), 0.0);
        const long double weight = 1.0L / std::sqrt(sum * static_cast<long double>(h));
        for (std::size_t k = 0; k < n; ++k) {
            f[first + k] = static_cast<double>(y[k] * weight);
        }
        out.energies.push_back(energy);
        out.node_counts.push_back(detail::count_sign_changes(narrow));
        out.residual_norms.push_back(residual);
        out.wavefunctions.push_back(std::move(f));
        unit_vectors.push_back(std::move(x));
    }
    return out;
}

inline EigenSolution solve_transverse(const StripGeometry& geometry, const TransverseMode& mode,
                                      const TransverseGrid& grid, std::size_t count) {
    return eigen_lowest(discretize(grid, geometry, mode), count);
}

/// Energy scale used for absolute tolerances: w^2, or 1/D^2 for a flat strip.
inline double energy_scale(const StripGeometry& geometry) {
    if (!geometry.is_flat()) {
        return geometry.omega() * geometry.omega();
    }
    return 1.0 / (geometry.width() * geometry.width());
}

struct ConvergedSpectrum {
    EigenSolution solution;        ///< on the finest grid
    TransverseGrid grid;           ///< finest grid actually used
    std::vector<double> coarse_energies; ///< previous level
    std::vector<double> extrapolated;    ///< Richardson (4 E_fine - E_coarse) / 3
    double last_change;            ///< |Delta E_0| between the last two levels
    double tolerance;
    std::size_t refinements;
    bool converged;
};

inline constexpr std::size_t default_grid_points = 4001;
inline constexpr std::size_t default_max_points = 128001;
inline constexpr double default_refinement_tolerance = 1e-9; ///< in units of energy_scale()

inline std::vector<double> richardson(std::span<const double> coarse, std::span<const double> fine) {
    std::vector<double> out(std::min(coarse.size(), fine.size()));
    for (std::size_t j = 0; j < out.size(); ++j) {
        out[j] = (4.0 * fine[j] - coarse[j]) / 3.0;
    }
    return out;
}

/// Halves the spacing until the ground energy moves by less than
/// `relative_tolerance * energy_scale(geometry)`.
inline ConvergedSpectrum solve_converged(const StripGeometry& geometry, const TransverseMode& mode,
                                         const TransverseGrid& start, std::size_t count,
                                         double relative_tolerance = default_refinement_tolerance,
                                         std::size_t max_points = default_max_points) {
    const double tolerance = relative_tolerance * energy_scale(geometry);
    TransverseGrid grid = start;
    EigenSolution coarse = solve_transverse(geometry, mode, grid, count);
    std::size_t refinements = 0;
    while (true) {
        const TransverseGrid finer = grid.refined();
        if (finer.points() > max_points) {
            return {coarse, grid, {}, {}, std::nan(""), tolerance, refinements, false};
        }
        EigenSolution fine = solve_transverse(geometry, mode, finer, count);
        ++refinements;
        const double change = std::abs(fine.energies[0] - coarse.energies[0]);
        if (change < tolerance) {
            auto extrapolated = richardson(coarse.energies, fine.energies);
            return {std::move(fine), finer, std::move(coarse.energies), std::move(extrapolated),
                    change, tolerance, refinements, true};
        }
        coarse = std::move(fine);
        grid = finer;
    }
}

/// Matrix eigenvalues on `grid` and on its refinement, combined by Richardson
/// extrapolation to cancel the O(h^2) stencil error.
inline std::vector<double> extrapolated_energies(const StripGeometry& geometry, const TransverseMode& mode,
                                                 const TransverseGrid& grid, std::size_t count) {
    const auto coarse = solve_transverse(geometry, mode, grid, count);
    const auto fine = solve_transverse(geometry, mode, grid.refined(), count);
    return richardson(coarse.energies, fine.energies);
}

struct BoundStateReport {
    std::size_t below_zero;        ///< matrix eigenvalues < 0 (Sturm count)
    std::size_t below_tail;        ///< matrix eigenvalues < U(D)
    double tail_value;             ///< U at the strip edge
    std::size_t numerov_below_zero; ///< shooting count at E = 0
};

inline BoundStateReport bound_state_count(const StripGeometry& geometry, const TransverseMode& mode,
                                          const TransverseGrid& grid) {
    const auto op = discretize(grid, geometry, mode);
    const double tail = net_potential(grid.xi_max(), geometry, mode);
    return {sturm_count(op.matrix, 0.0), sturm_count(op.matrix, tail), tail,
            shoot(geometry, mode, grid, 0.0).node_count};
}

struct StateObservables {
    double mean_xi;
    double rms_xi;                    ///< sqrt(<xi^2>)
    std::optional<double> outer_mass; ///< probability at xi > sqrt(2)/w
};

inline std::vector<StateObservables> observables(const EigenSolution& solution, const StripGeometry& geometry,
                                                 const TransverseGrid& grid) {
    const double h = grid.spacing();
    std::optional<double> cut;
    if (!geometry.is_flat()) {
        cut = std::sqrt(2.0) / geometry.omega();
    }
    std::vector<StateObservables> out;
    out.reserve(solution.wavefunctions.size());
    for (const auto& f : solution.wavefunctions) {
        double m1 = 0.0;
        double m2 = 0.0;
        double outer = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double xi = grid.node(i);
            const double p = f[i] * f[i] * h;
            m1 += xi * p;
            m2 += xi * xi * p;
            if (cut && xi > *cut) {
                outer += p;
            }
        }
        StateObservables s{m1, std::sqrt(m2), std::nullopt};
        if (cut) {
            s.outer_mass = std::clamp(outer, 0.0, 1.0);
        }
        out.push_back(s);
    }
    return out;
}

struct DispersionTable {
    std::vector<double> kx;
    std::vector<std::vector<double>> energies; ///< energies[row][state]
    /// Every state's energy is non-decreasing in |kx|.
    bool monotone_in_abs_kx;
};

inline DispersionTable dispersion(const StripGeometry& geometry, const TransverseGrid& grid,
                                  std::span<const double> kx_values, std::size_t states,
                                  std::size_t threads = 1) {
    for (double k : kx_values) {
        if (!std::isfinite(k)) {
            throw DomainError("kx values must be finite");
        }
    }
    DispersionTable table{{kx_values.begin(), kx_values.end()}, std::vector<std::vector<double>>(kx_values.size()),
                          true};
    parallel_for(kx_values.size(), threads, [&](std::size_t i) {
        const auto mode = TransverseMode::from_wavenumber(kx_values[i], geometry);
        table.energies[i] = solve_transverse(geometry, mode, grid, states).energies;
    });

    std::vector<std::size_t> order(kx_values.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return std::abs(kx_values[a]) < std::abs(kx_values[b]); });
    const double slack = 1e-12 * energy_scale(geometry);
    for (std::size_t s = 0; s < states; ++s) {
        for (std::size_t i = 1; i < order.size(); ++i) {
            if (table.energies[order[i]][s] < table.energies[order[i - 1]][s] - slack) {
                table.monotone_in_abs_kx = false;
            }
        }
    }
    return table;
}

} // namespace helistrip
