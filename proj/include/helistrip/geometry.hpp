#pragma once

// Helicoidal strip geometry and the closed-form potentials it induces.
//
// The strip is the helicoid r = x e_x + xi (cos(w x) e_y + sin(w x) e_z) with
// 0 <= xi <= D and twist rate w = 2 pi n / L. All potentials are returned in
// natural units (hbar^2/2m = 1) unless a UnitSystem is passed.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "errors.hpp"
#include "units.hpp"

namespace helistrip {

class StripGeometry {
  public:
    /// `length` L, number of full 2 pi twists `twists`, strip `width` D.
    StripGeometry(double length, double twists, double width)
        : length_(length), twists_(twists), width_(width) {
        if (!(length > 0.0) || !std::isfinite(length)) {
            throw DomainError("strip length must be positive and finite");
        }
        if (!(width > 0.0) || !std::isfinite(width)) {
            throw DomainError("strip width must be positive and finite");
        }
        if (!(twists >= 0.0) || !std::isfinite(twists)) {
            throw DomainError("twist count must be non-negative and finite");
        }
        omega_ = 2.0 * constants::pi * twists_ / length_;
    }

    double length() const noexcept { return length_; }
    double twists() const noexcept { return twists_; }
    double width() const noexcept { return width_; }
    double omega() const noexcept { return omega_; }
    bool is_flat() const noexcept { return omega_ == 0.0; }

    /// Same L and D, twist count chosen so that the twist rate equals `omega`.
    StripGeometry with_omega(double omega) const {
        return StripGeometry(length_, omega * length_ / (2.0 * constants::pi), width_);
    }

  private:
    double length_;
    double twists_;
    double width_;
    double omega_ = 0.0;
};

/// Longitudinal plane wave exp(i kx x). The ratio C = kx / w exists only for
/// a twisted strip.
class TransverseMode {
  public:
    static TransverseMode from_wavenumber(double kx, const StripGeometry& geometry) {
        if (!std::isfinite(kx)) {
            throw DomainError("kx must be finite");
        }
        std::optional<double> ratio;
        if (!geometry.is_flat()) {
            ratio = kx / geometry.omega();
        }
        return TransverseMode(kx, ratio);
    }

    static TransverseMode from_ratio(double ratio, const StripGeometry& geometry) {
        if (geometry.is_flat()) {
            throw DomainError("C = kx/omega is undefined for a flat strip");
        }
        if (!std::isfinite(ratio)) {
            throw DomainError("C must be finite");
        }
        return TransverseMode(ratio * geometry.omega(), ratio);
    }

    double kx() const noexcept { return kx_; }
    std::optional<double> ratio() const noexcept { return ratio_; }
    /// Longitudinal kinetic energy E0 = kx^2.
    double longitudinal_energy() const noexcept { return kx_ * kx_; }

  private:
    TransverseMode(double kx, std::optional<double> ratio) : kx_(kx), ratio_(ratio) {}

    double kx_;
    std::optional<double> ratio_;
};

/// h1 = sqrt(1 + w^2 xi^2). The other coefficient h2 is identically 1.
inline double lame_h1(double xi, const StripGeometry& geometry) {
    const double wx = geometry.omega() * xi;
    return std::sqrt(1.0 + wx * wx);
}

/// Twist-induced transverse potential (w^2/2) (1 - u/2) / (1 + u)^2, u = w^2 xi^2.
inline double v_eff(double xi, const StripGeometry& geometry) {
    const double w2 = geometry.omega() * geometry.omega();
    const double u = w2 * xi * xi;
    const double s = 1.0 + u;
    return 0.5 * w2 * (1.0 - 0.5 * u) / (s * s);
}

inline double v_eff(double xi, const StripGeometry& geometry, const UnitSystem& units) {
    return units.from_natural(v_eff(xi, geometry));
}

struct MetricPotential {
    double value;
    double step;
    bool reliable; ///< step * w <= 1e-3
};

/// Central-difference step used when none is given.
inline double default_metric_step(double xi, const StripGeometry& geometry) {
    const double w = geometry.omega();
    const double floor_step = 1e-9 * (1.0 + xi);
    if (w == 0.0) {
        return std::max(1e-6, floor_step);
    }
    return std::max(1e-6 / w, floor_step);
}

/// Rebuilds the effective potential from h1 alone:
///   V = h1''/(2 h1) - h1'^2/(4 h1^2)
/// with both derivatives taken by central differences. Evaluated in quad
/// precision so that the O(eps/step^2) round-off stays far below the
/// truncation error for the default step.
template <typename Real = boost::multiprecision::cpp_bin_float_quad>
MetricPotential v_eff_from_metric(double xi, const StripGeometry& geometry, double step) {
    if (!(step > 0.0)) {
        throw DomainError("finite-difference step must be positive");
    }
    if (!(xi >= 0.0)) {
        throw DomainError("xi must be non-negative");
    }
    const Real w = geometry.omega();
    const Real x = xi;
    const Real s = step;
    auto h1 = [&](const Real& at) {
        using std::sqrt;
        return Real(sqrt(Real(1) + w * w * at * at));
    };
    const Real hm = h1(x - s);
    const Real h0 = h1(x);
    const Real hp = h1(x + s);
    const Real d1 = (hp - hm) / (2 * s);
    const Real d2 = (hp - 2 * h0 + hm) / (s * s);
    const Real v = d2 / (2 * h0) - d1 * d1 / (4 * h0 * h0);
    return {static_cast<double>(v), step, step * geometry.omega() <= 1e-3};
}

inline MetricPotential v_eff_from_metric(double xi, const StripGeometry& geometry) {
    return v_eff_from_metric(xi, geometry, default_metric_step(xi, geometry));
}

/// Net transverse potential U = V_eff + kx^2 / h1^2.
///
/// For a twisted strip this is evaluated in the C-parametrised form
///   (w^2/4) [ (4C^2 - 1)/(1 + u) + 3/(1 + u)^2 ].
/// A flat strip has no C and takes the direct sum, which reduces to kx^2.
inline double net_potential(double xi, const StripGeometry& geometry, const TransverseMode& mode) {
    if (geometry.is_flat() || !mode.ratio()) {
        const double h1 = lame_h1(xi, geometry);
        return v_eff(xi, geometry) + mode.longitudinal_energy() / (h1 * h1);
    }
    const double w2 = geometry.omega() * geometry.omega();
    const double c = *mode.ratio();
    const double s = 1.0 + w2 * xi * xi;
    return 0.25 * w2 * ((4.0 * c * c - 1.0) / s + 3.0 / (s * s));
}

/// w xi at which U changes sign, sqrt((2 + 4C^2)/(1 - 4C^2)); empty for C^2 >= 1/4.
inline std::optional<double> scaled_zero_crossing(double ratio) {
    const double c2 = ratio * ratio;
    if (!(c2 < 0.25)) {
        return std::nullopt;
    }
    return std::sqrt((2.0 + 4.0 * c2) / (1.0 - 4.0 * c2));
}

struct LandmarkReport {
    double omega;
    double ratio;
    double v0;        ///< U(0)
    bool attractive;  ///< false when C^2 >= 1/4: U > 0 everywhere
    std::optional<double> xi_zero;
    std::optional<double> xi_min;
    std::optional<double> u_min;
    // Independent confirmation from the sampled potential.
    std::optional<double> numeric_xi_zero;
    std::optional<double> numeric_xi_min;
    std::optional<double> numeric_u_min;
    /// Simplified closed form (1/3)(kx^2 - w^2/16). Agrees with u_min only at C = 0.
    double u_min_simplified;
    /// u_min_simplified - u_min, or NaN without an attractive region.
    double u_min_simplified_deviation;
};

namespace detail {

template <typename F>
double golden_section_minimum(F&& f, double lo, double hi, int iterations = 200) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo;
    double b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (int i = 0; i < iterations && (b - a) > 1e-15 * (std::abs(a) + std::abs(b)); ++i) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

template <typename F>
double bisect_sign_change(F&& f, double lo, double hi, int iterations = 200) {
    const bool lo_positive = f(lo) > 0.0;
    for (int i = 0; i < iterations; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        if ((f(mid) > 0.0) == lo_positive) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace detail

/// Zero crossing, minimum location and depth of U for a twisted strip.
///
/// With s = 1/(1 + w^2 xi^2), U is the quadratic (w^2/4)[(4C^2 - 1) s + 3 s^2],
/// minimised at 1 + w^2 xi^2 = 6/(1 - 4C^2) with depth -w^2 (1 - 4C^2)^2 / 48.
/// The sampled potential is minimised and bisected independently to confirm.
inline LandmarkReport landmarks(const StripGeometry& geometry, const TransverseMode& mode) {
    if (geometry.is_flat() || !mode.ratio()) {
        throw DomainError("landmarks need a twisted strip (omega > 0)");
    }
    const double w = geometry.omega();
    const double c = *mode.ratio();
    const double c2 = c * c;
    auto u = [&](double xi) { return net_potential(xi, geometry, mode); };

    LandmarkReport report{};
    report.omega = w;
    report.ratio = c;
    report.v0 = u(0.0);
    report.attractive = c2 < 0.25;
    report.u_min_simplified = (mode.kx() * mode.kx() - w * w / 16.0) / 3.0;
    report.u_min_simplified_deviation = std::nan("");
    if (!report.attractive) {
        return report;
    }

    const double gap = 1.0 - 4.0 * c2;
    report.xi_zero = *scaled_zero_crossing(c) / w;
    report.xi_min = std::sqrt(6.0 / gap - 1.0) / w;
    report.u_min = -w * w * gap * gap / 48.0;
    report.u_min_simplified_deviation = report.u_min_simplified - *report.u_min;

    // Coarse scan, then refine.
    const double span = 4.0 * *report.xi_min + 10.0 / w;
    constexpr int samples = 4096;
    int best = 0;
    int first_negative = -1;
    double best_value = u(0.0);
    for (int i = 1; i <= samples; ++i) {
        const double xi = span * i / samples;
        const double value = u(xi);
        if (value < best_value) {
            best_value = value;
            best = i;
        }
        if (first_negative < 0 && value < 0.0) {
            first_negative = i;
        }
    }
    const double dx = span / samples;
    const double lo = std::max(0.0, (best - 1) * dx);
    const double hi = (best + 1) * dx;
    report.numeric_xi_min = detail::golden_section_minimum(u, lo, hi);
    report.numeric_u_min = u(*report.numeric_xi_min);
    if (first_negative > 0) {
        report.numeric_xi_zero =
            detail::bisect_sign_change(u, (first_negative - 1) * dx, first_negative * dx);
    }
    return report;
}

/// Twist rate whose characteristic energy hbar^2 w^2 / 2m equals k_B T.
inline double thermal_twist_scale(double temperature, const UnitSystem& units) {
    if (!units.is_dimensional()) {
        throw DomainError("thermal twist scale needs dimensional units (hbar, mass)");
    }
    if (!(temperature > 0.0)) {
        throw DomainError("temperature must be positive");
    }
    return std::sqrt(2.0 * units.mass() * constants::boltzmann * temperature) / units.hbar();
}

/// Points of the helicoid mesh, row-major over x then xi.
inline std::vector<std::array<double, 3>> sample_surface(const StripGeometry& geometry, std::size_t nx,
                                                         std::size_t nxi) {
    if (nx < 2 || nxi < 2) {
        throw DomainError("surface sampling needs at least 2 points per direction");
    }
    std::vector<std::array<double, 3>> points;
    points.reserve(nx * nxi);
    const double w = geometry.omega();
    for (std::size_t i = 0; i < nx; ++i) {
        // Pin the last row to x = L exactly.
        const double x = i + 1 == nx ? geometry.length()
                                     : geometry.length() * static_cast<double>(i) / static_cast<double>(nx - 1);
        const double cw = std::cos(w * x);
        const double sw = std::sin(w * x);
        for (std::size_t j = 0; j < nxi; ++j) {
            const double xi = j + 1 == nxi ? geometry.width()
                                           : geometry.width() * static_cast<double>(j) /
                                                 static_cast<double>(nxi - 1);
            points.push_back({x, xi * cw, xi * sw});
        }
    }
    return points;
}

/// V_eff and U sampled on a uniform grid over [0, D].
struct PotentialTable {
    double omega;
    double kx;
    std::optional<double> ratio;
    bool flat_fallback; ///< U evaluated as V_eff + kx^2/h1^2 because w = 0
    std::vector<double> xi;
    std::vector<double> v_eff;
    std::vector<double> net;
};

inline PotentialTable potential_table(const StripGeometry& geometry, const TransverseMode& mode,
                                      std::size_t points) {
    if (points < 2) {
        throw DomainError("potential table needs at least 2 points");
    }
    PotentialTable table{geometry.omega(), mode.kx(), mode.ratio(), geometry.is_flat() || !mode.ratio(),
                         {}, {}, {}};
    table.xi.reserve(points);
    table.v_eff.reserve(points);
    table.net.reserve(points);
    const double h = geometry.width() / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) {
        const double xi = i + 1 == points ? geometry.width() : h * static_cast<double>(i);
        table.xi.push_back(xi);
        table.v_eff.push_back(v_eff(xi, geometry));
        table.net.push_back(net_potential(xi, geometry, mode));
    }
    return table;
}

/// First place where the sampled U goes from positive to non-positive,
/// linearly interpolated between the bracketing nodes.
inline std::optional<double> first_sign_change(const PotentialTable& table) {
    for (std::size_t i = 1; i < table.net.size(); ++i) {
        const double a = table.net[i - 1];
        const double b = table.net[i];
        if (a > 0.0 && b <= 0.0) {
            const double t = a / (a - b);
            return table.xi[i - 1] + t * (table.xi[i] - table.xi[i - 1]);
        }
    }
    return std::nullopt;
}

} // namespace helistrip
