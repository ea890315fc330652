#pragma once

// Change of variables that maps the transverse equation onto a confluent Heun
// normal form, and residual checks of each intermediate equation against a
// computed eigenfunction.
//
//   z = w^2 xi^2,  f(xi) = H(z)
//   -z H'' - H'/2 + W(z) H = -e H,   W = [(4C^2 - 1)/(1 + z) + 3/(1 + z)^2] / 16
//
// Two continuations of the chain are carried side by side:
//   stated     H = z^{1/4} L,   -z L'' - (3/16) L + W L = -e L,
//              M(zeta) = L(z), zeta = 1 + z, M'' + Q M = 0 with
//              Q = -(e + (4C^2 - 1)/16)/(zeta - 1) + (4C^2 + 2)/(16 zeta) + 3/(16 zeta^2)
//   rederived  H = z^{-1/4} L,  -z L'' - 3/(16 z) L + W L = -e L,
//              Q = -(e + (4C^2 + 2)/16)/(zeta - 1) + (4C^2 + 2)/(16 zeta)
//                  + 3/(16 zeta^2) + 3/(16 (zeta - 1)^2)
// Nothing is corrected silently: both are evaluated and reported.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "grid.hpp"

namespace helistrip {

/// How the scaled eigenvalue e relates to the transverse energy E.
enum class SignConvention { e_plus, e_minus };

inline std::string_view to_string(SignConvention c) { return c == SignConvention::e_plus ? "e_plus" : "e_minus"; }

inline double scaled_eigenvalue(double energy, double omega, SignConvention convention) {
    const double e = energy / (4.0 * omega * omega);
    return convention == SignConvention::e_plus ? e : -e;
}

enum class CoefficientSource { listed, read_from_q, rederived };

inline std::string_view to_string(CoefficientSource s) {
    switch (s) {
    case CoefficientSource::listed:
        return "listed";
    case CoefficientSource::read_from_q:
        return "read_from_q";
    case CoefficientSource::rederived:
        return "rederived";
    }
    return "unknown";
}

/// Coefficients of y'' + {A + B/x + C/(x-1) + D/x^2 + E/(x-1)^2} y = 0.
struct HeunCoefficients {
    double a;
    double b;
    double c;
    double d;
    double e;
    CoefficientSource source;
};

struct HeunCoefficientSets {
    HeunCoefficients listed;      ///< B = (4C^2 + 2)/12 as tabulated
    HeunCoefficients read_from_q; ///< read term by term off the stated Q
    HeunCoefficients rederived;
    bool listed_b_disagrees;      ///< listed B differs from the B in Q
};

inline HeunCoefficientSets heun_coefficients(double ratio, double e) {
    const double c2 = ratio * ratio;
    const double singular = -(e + (4.0 * c2 - 1.0) / 16.0);
    HeunCoefficientSets sets{
        {0.0, (4.0 * c2 + 2.0) / 12.0, singular, 3.0 / 16.0, 0.0, CoefficientSource::listed},
        {0.0, (4.0 * c2 + 2.0) / 16.0, singular, 3.0 / 16.0, 0.0, CoefficientSource::read_from_q},
        {0.0, (4.0 * c2 + 2.0) / 16.0, -(e + (4.0 * c2 + 2.0) / 16.0), 3.0 / 16.0, 3.0 / 16.0,
         CoefficientSource::rederived},
        false};
    sets.listed_b_disagrees = sets.listed.b != sets.read_from_q.b;
    return sets;
}

/// Q(zeta) in its stated form.
inline double q_of_zeta(double zeta, double ratio, double e) {
    if (!(zeta > 1.0)) {
        throw DomainError("Q(zeta) is singular at zeta = 1; need zeta > 1");
    }
    const double c2 = ratio * ratio;
    return -(e + (4.0 * c2 - 1.0) / 16.0) / (zeta - 1.0) + (4.0 * c2 + 2.0) / (16.0 * zeta) +
           3.0 / (16.0 * zeta * zeta);
}

inline double q_of_zeta_rederived(double zeta, double ratio, double e) {
    if (!(zeta > 1.0)) {
        throw DomainError("Q(zeta) is singular at zeta = 1; need zeta > 1");
    }
    const double c2 = ratio * ratio;
    const double z = zeta - 1.0;
    return -(e + (4.0 * c2 + 2.0) / 16.0) / z + (4.0 * c2 + 2.0) / (16.0 * zeta) + 3.0 / (16.0 * zeta * zeta) +
           3.0 / (16.0 * z * z);
}

/// Evaluates a coefficient set in normal form.
inline double q_from_coefficients(double zeta, const HeunCoefficients& k) {
    const double z = zeta - 1.0;
    return k.a + k.b / zeta + k.c / z + k.d / (zeta * zeta) + k.e / (z * z);
}

struct HeunNormalForm {
    double ratio;
    double e;
    SignConvention convention;
    HeunCoefficients coefficients; ///< the set read off Q
    std::vector<double> zeta;      ///< all > 1
    std::vector<double> q;
};

inline double q_of_zeta(double zeta, const HeunNormalForm& form) { return q_of_zeta(zeta, form.ratio, form.e); }

inline HeunNormalForm make_normal_form(double ratio, double energy, double omega, SignConvention convention,
                                       std::span<const double> zeta) {
    const double e = scaled_eigenvalue(energy, omega, convention);
    HeunNormalForm form{ratio, e, convention, heun_coefficients(ratio, e).read_from_q, {}, {}};
    form.zeta.assign(zeta.begin(), zeta.end());
    form.q.reserve(zeta.size());
    for (double x : zeta) {
        form.q.push_back(q_of_zeta(x, ratio, e));
    }
    return form;
}

enum class Substitution {
    stated,   ///< L = z^{-1/4} H
    rederived ///< L = z^{+1/4} H
};

struct HeunVariables {
    Substitution substitution;
    bool dropped_origin; ///< a xi = 0 node was removed (z^{-1/4} is singular there)
    std::vector<double> xi;
    std::vector<double> z;
    std::vector<double> h;
    std::vector<double> l;
    std::vector<double> zeta;
    std::vector<double> m;
};

inline double substitution_exponent(Substitution s) { return s == Substitution::stated ? -0.25 : 0.25; }

inline HeunVariables to_heun_variables(std::span<const double> xi, std::span<const double> f,
                                       const StripGeometry& geometry, Substitution substitution = Substitution::stated) {
    if (xi.size() != f.size()) {
        throw DomainError("xi and f must have the same length");
    }
    if (geometry.is_flat()) {
        throw DomainError("the Heun variables need a twisted strip");
    }
    for (std::size_t i = 1; i < xi.size(); ++i) {
        if (!(xi[i] > xi[i - 1])) {
            throw DomainError("xi grid must be strictly increasing");
        }
    }
    const double w2 = geometry.omega() * geometry.omega();
    const double p = substitution_exponent(substitution);
    HeunVariables out{substitution, false, {}, {}, {}, {}, {}, {}};
    for (std::size_t i = 0; i < xi.size(); ++i) {
        if (xi[i] <= 0.0) {
            if (xi[i] < 0.0) {
                throw DomainError("xi must be non-negative");
            }
            out.dropped_origin = true;
            continue;
        }
        const double z = w2 * xi[i] * xi[i];
        const double l = std::pow(z, p) * f[i];
        out.xi.push_back(xi[i]);
        out.z.push_back(z);
        out.h.push_back(f[i]);
        out.l.push_back(l);
        out.zeta.push_back(1.0 + z);
        out.m.push_back(l);
    }
    return out;
}

/// Inverse of to_heun_variables: f(xi) recovered from M(zeta). Uses the
/// stored z rather than zeta - 1, which loses digits near the origin.
inline std::vector<double> wavefunction_from_heun(const HeunVariables& v) {
    const double p = substitution_exponent(v.substitution);
    std::vector<double> f;
    f.reserve(v.m.size());
    for (std::size_t i = 0; i < v.m.size(); ++i) {
        f.push_back(std::pow(v.z[i], -p) * v.m[i]);
    }
    return f;
}

inline double z_from_xi(double xi, double omega) { return omega * omega * xi * xi; }
inline double xi_from_z(double z, double omega) { return std::sqrt(z) / omega; }
inline double zeta_from_z(double z) { return 1.0 + z; }
inline double z_from_zeta(double zeta) { return zeta - 1.0; }

namespace detail {

// Three-point derivatives on a non-uniform grid at interior node i.
inline double d1_nonuniform(std::span<const double> t, std::span<const double> y, std::size_t i) {
    const double a = t[i] - t[i - 1];
    const double b = t[i + 1] - t[i];
    return -b / (a * (a + b)) * y[i - 1] + (b - a) / (a * b) * y[i] + a / (b * (a + b)) * y[i + 1];
}

inline double d2_nonuniform(std::span<const double> t, std::span<const double> y, std::size_t i) {
    const double a = t[i] - t[i - 1];
    const double b = t[i + 1] - t[i];
    return 2.0 * (y[i - 1] / (a * (a + b)) - y[i] / (a * b) + y[i + 1] / (b * (a + b)));
}

} // namespace detail

/// Nodes with w xi below this are skipped: there the quadratic map makes the
/// three-point stencil only first order and the local error does not shrink
/// with the grid.
inline constexpr double heun_near_singular_cutoff = 0.5;
inline constexpr std::size_t heun_min_usable_nodes = 7;
inline constexpr double heun_flag_factor = 100.0;

struct StageResidual {
    std::string stage;
    SignConvention convention;
    double residual; ///< max |lhs| / max (sum of |terms|) over usable nodes
    bool flagged;    ///< residual > heun_flag_factor * rederived normal-form residual
};

struct ResidualReport {
    double ratio;
    double energy;
    SignConvention selected;  ///< minimises the H-equation residual
    double e_selected;
    std::size_t usable_nodes;
    double xi_cutoff;
    std::vector<StageResidual> stages;
    HeunCoefficientSets coefficients; ///< at e_selected
    std::vector<std::string> flags;

    const StageResidual& stage(std::string_view name, SignConvention convention) const {
        for (const auto& s : stages) {
            if (s.stage == name && s.convention == convention) {
                return s;
            }
        }
        throw DomainError("no such stage: " + std::string(name));
    }
};

namespace stage_names {
inline constexpr std::string_view h_equation = "h_equation";
inline constexpr std::string_view l_equation_stated = "l_equation_stated";
inline constexpr std::string_view l_equation_rederived = "l_equation_rederived";
inline constexpr std::string_view normal_form_stated = "normal_form_stated";
inline constexpr std::string_view normal_form_rederived = "normal_form_rederived";
} // namespace stage_names

/// Residuals of every equation in the chain for an eigenpair (f, energy) of
/// the transverse problem. `f` holds values at every node of `grid`.
inline ResidualReport residual_chain(const TransverseGrid& grid, std::span<const double> f, double energy,
                                     const StripGeometry& geometry, const TransverseMode& mode) {
    if (geometry.is_flat() || !mode.ratio()) {
        throw DomainError("the Heun reduction needs a twisted strip (omega > 0)");
    }
    if (f.size() != grid.points()) {
        throw DomainError("wavefunction length does not match the grid");
    }
    const double w = geometry.omega();
    const double c2 = *mode.ratio() * *mode.ratio();

    std::vector<double> xi(grid.points());
    for (std::size_t i = 0; i < xi.size(); ++i) {
        xi[i] = grid.node(i);
    }
    const auto stated = to_heun_variables(xi, f, geometry, Substitution::stated);
    const auto rederived = to_heun_variables(xi, f, geometry, Substitution::rederived);
    const std::size_t n = stated.z.size();

    std::vector<std::size_t> usable;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (w * stated.xi[i] >= heun_near_singular_cutoff) {
            usable.push_back(i);
        }
    }
    if (usable.size() < heun_min_usable_nodes) {
        throw DomainError("fewer than 7 usable interior nodes for the residual check");
    }

    auto weight = [&](double z) { return ((4.0 * c2 - 1.0) / (1.0 + z) + 3.0 / ((1.0 + z) * (1.0 + z))) / 16.0; };

    // Each stage returns the per-node terms; the residual is their sum.
    auto measure = [&](auto&& terms) {
        double worst = 0.0;
        double scale = 0.0;
        for (std::size_t i : usable) {
            double sum = 0.0;
            double mag = 0.0;
            for (double t : terms(i)) {
                sum += t;
                mag += std::abs(t);
            }
            worst = std::max(worst, std::abs(sum));
            scale = std::max(scale, mag);
        }
        return scale > 0.0 ? worst / scale : 0.0;
    };

    ResidualReport report{};
    report.ratio = *mode.ratio();
    report.energy = energy;
    report.usable_nodes = usable.size();
    report.xi_cutoff = heun_near_singular_cutoff / w;

    double best_h = std::numeric_limits<double>::infinity();
    for (SignConvention convention : {SignConvention::e_plus, SignConvention::e_minus}) {
        const double e = scaled_eigenvalue(energy, w, convention);
        const auto& z = stated.z;
        const auto& zeta = stated.zeta;

        const double h_res = measure([&](std::size_t i) {
            const auto& h = stated.h;
            return std::array<double, 4>{-z[i] * detail::d2_nonuniform(z, h, i), -0.5 * detail::d1_nonuniform(z, h, i),
                                         weight(z[i]) * h[i], e * h[i]};
        });
        const double l_stated = measure([&](std::size_t i) {
            const auto& l = stated.l;
            return std::array<double, 4>{-z[i] * detail::d2_nonuniform(z, l, i), -3.0 / 16.0 * l[i],
                                         weight(z[i]) * l[i], e * l[i]};
        });
        const double l_rederived = measure([&](std::size_t i) {
            const auto& l = rederived.l;
            return std::array<double, 4>{-z[i] * detail::d2_nonuniform(z, l, i), -3.0 / (16.0 * z[i]) * l[i],
                                         weight(z[i]) * l[i], e * l[i]};
        });
        const double nf_stated = measure([&](std::size_t i) {
            const auto& m = stated.m;
            return std::array<double, 2>{detail::d2_nonuniform(zeta, m, i),
                                         q_of_zeta(zeta[i], *mode.ratio(), e) * m[i]};
        });
        const double nf_rederived = measure([&](std::size_t i) {
            const auto& m = rederived.m;
            return std::array<double, 2>{detail::d2_nonuniform(zeta, m, i),
                                         q_of_zeta_rederived(zeta[i], *mode.ratio(), e) * m[i]};
        });

        const double threshold = heun_flag_factor * nf_rederived;
        auto push = [&](std::string_view name, double r) {
            report.stages.push_back({std::string(name), convention, r, r > threshold});
        };
        push(stage_names::h_equation, h_res);
        push(stage_names::l_equation_stated, l_stated);
        push(stage_names::l_equation_rederived, l_rederived);
        push(stage_names::normal_form_stated, nf_stated);
        push(stage_names::normal_form_rederived, nf_rederived);

        if (h_res < best_h) {
            best_h = h_res;
            report.selected = convention;
            report.e_selected = e;
        }
    }

    report.coefficients = heun_coefficients(report.ratio, report.e_selected);
    for (const auto& s : report.stages) {
        if (s.convention == report.selected && s.flagged) {
            report.flags.push_back(s.stage + ": inconsistent as stated");
        }
    }
    if (report.coefficients.listed_b_disagrees) {
        report.flags.push_back("listed coefficient B = (4C^2+2)/12 differs from (4C^2+2)/16 read off Q");
    }
    return report;
}

} // namespace helistrip
