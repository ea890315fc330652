#pragma once

// Numerov shooting for  -f'' + U(xi) f = E f  on a TransverseGrid.
//
// Used as an oracle independent of the matrix route: fourth-order
// integration from both edges, matched at an interior node. The matching
// quantity is the normalised Wronskian of the two solutions, which is
// continuous in E and vanishes exactly at the Numerov eigenvalues. Prufer
// angles give the number of eigenvalues below a trial energy.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "grid.hpp"

namespace helistrip {

struct ShootResult {
    std::size_t node_count;    ///< eigenvalues strictly below the trial energy
    double mismatch;           ///< normalised Wronskian at the matching node, in [-1, 1]
    double log_derivative_gap; ///< f_L'/f_L - f_R'/f_R, infinite when either vanishes
    std::size_t matching_index;
};

namespace detail {

struct HalfShot {
    double value;
    double derivative;
    std::size_t sign_changes;
};

inline constexpr double numerov_rescale_threshold = 1e150;

// Integrates from one edge up to the matching node and returns f and f'
// (along +xi) there, plus the sign changes met on the way.
inline HalfShot numerov_half(const std::vector<double>& g, double h, BoundaryCondition bc, bool from_left,
                             std::size_t match) {
    const std::size_t n = g.size();
    const double c = h * h / 12.0;
    auto idx = [&](std::size_t step) { return from_left ? step : n - 1 - step; };
    const std::size_t steps = from_left ? match : n - 1 - match;

    double prev;
    double curr;
    if (bc == BoundaryCondition::dirichlet) {
        prev = 0.0;
        curr = h;
    } else {
        // Mirror ghost node, using evenness of g about the edge.
        prev = 1.0;
        curr = (1.0 + 5.0 * c * g[idx(0)]) * prev / (1.0 - c * g[idx(1)]);
    }
    int last_sign = prev > 0.0 ? 1 : (prev < 0.0 ? -1 : 0);
    std::size_t changes = 0;
    double behind = 0.0;
    double at_match = 0.0;
    double beyond = 0.0;
    for (std::size_t s = 1; s <= steps; ++s) {
        const double next = (2.0 * (1.0 + 5.0 * c * g[idx(s)]) * curr - (1.0 - c * g[idx(s - 1)]) * prev) /
                            (1.0 - c * g[idx(s + 1)]);
        const int sign = curr > 0.0 ? 1 : (curr < 0.0 ? -1 : 0);
        if (sign != 0) {
            if (last_sign != 0 && sign != last_sign) {
                ++changes;
            }
            last_sign = sign;
        }
        if (s == steps) {
            behind = prev;
            at_match = curr;
            beyond = next;
            break;
        }
        prev = curr;
        curr = next;
        if (std::abs(curr) > numerov_rescale_threshold) {
            prev /= numerov_rescale_threshold;
            curr /= numerov_rescale_threshold;
        }
    }
    double derivative = (beyond - behind) / (2.0 * h);
    if (!from_left) {
        derivative = -derivative;
    }
    return {at_match, derivative, changes};
}

} // namespace detail

/// Integrates from both edges at `trial_energy` and compares at the matching
/// node (the grid midpoint unless given).
inline ShootResult shoot(const StripGeometry& geometry, const TransverseMode& mode, const TransverseGrid& grid,
                         double trial_energy, std::optional<std::size_t> matching_index = std::nullopt) {
    const std::size_t n = grid.points();
    if (n < 5) {
        throw DomainError("shooting needs at least 5 grid points");
    }
    const std::size_t m = matching_index.value_or((n - 1) / 2);
    if (m < 2 || m + 2 >= n) {
        throw DomainError("matching node must lie at least two nodes inside the grid");
    }
    const double h = grid.spacing();
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) {
        g[i] = net_potential(grid.node(i), geometry, mode) - trial_energy;
    }
    const auto left = detail::numerov_half(g, h, grid.left(), true, m);
    const auto right = detail::numerov_half(g, h, grid.right(), false, m);

    // Prufer angles, each measured from its own edge. `scale` turns the
    // derivative into a dimensionless number; any positive value works.
    const double scale = h;
    auto angle = [&](const detail::HalfShot& s, bool from_left) {
        const double sigma = (s.sign_changes % 2 == 0) ? 1.0 : -1.0;
        const double outward = from_left ? s.derivative : -s.derivative;
        return constants::pi * static_cast<double>(s.sign_changes) +
               std::atan2(sigma * s.value, sigma * outward * scale);
    };
    const double total = angle(left, true) + angle(right, false);
    const double turns = std::floor(total / constants::pi);

    const double rl = std::hypot(left.value, left.derivative * scale);
    const double rr = std::hypot(right.value, right.derivative * scale);
    const double wronskian = scale * (left.derivative * right.value - left.value * right.derivative);
    const double mismatch = (rl > 0.0 && rr > 0.0) ? wronskian / (rl * rr) : 0.0;

    double gap = std::numeric_limits<double>::infinity();
    if (left.value != 0.0 && right.value != 0.0) {
        gap = left.derivative / left.value - right.derivative / right.value;
    }
    return {turns > 0.0 ? static_cast<std::size_t>(turns) : 0, mismatch, gap, m};
}

/// The `count` lowest Numerov eigenvalues on `grid`.
inline std::vector<double> numerov_eigenvalues(const StripGeometry& geometry, const TransverseMode& mode,
                                               const TransverseGrid& grid, std::size_t count) {
    double u_min = std::numeric_limits<double>::max();
    double u_max = std::numeric_limits<double>::lowest();
    for (std::size_t i = 0; i < grid.points(); ++i) {
        const double u = net_potential(grid.node(i), geometry, mode);
        u_min = std::min(u_min, u);
        u_max = std::max(u_max, u);
    }
    const double d = grid.xi_max();
    const double floor_energy = u_min - 1.0 / (d * d);

    std::vector<double> roots;
    roots.reserve(count);
    for (std::size_t j = 0; j < count; ++j) {
        double lo = roots.empty() ? floor_energy : roots.back();
        const double box = constants::pi * static_cast<double>(j + 1) / d;
        double step = box * box + (u_max - u_min) + 1.0 / (d * d);
        double hi = u_max + step;
        int guard = 0;
        while (shoot(geometry, mode, grid, hi).node_count <= j) {
            lo = hi;
            step *= 2.0;
            hi += step;
            if (++guard > 200) {
                throw NumericalError("could not bracket Numerov eigenvalue", j);
            }
        }
        // The count jumps from j to j + 1 exactly where the mismatch crosses
        // zero, and unlike the mismatch sign it cannot be fooled by a
        // neighbouring root sitting at the bracket edge.
        for (int it = 0; it < 400; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) {
                break;
            }
            if (shoot(geometry, mode, grid, mid).node_count <= j) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        roots.push_back(0.5 * (lo + hi));
    }
    return roots;
}

} // namespace helistrip
