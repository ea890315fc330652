#pragma once

// Symmetric tridiagonal eigenproblems: Sturm-sequence bisection for selected
// eigenvalues and inverse iteration (partial-pivoting LU) for eigenvectors.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "errors.hpp"

namespace helistrip {

template <std::floating_point Real>
struct SymTridiagonal {
    std::vector<Real> diag;
    std::vector<Real> offdiag; ///< size() - 1 entries

    std::size_t size() const noexcept { return diag.size(); }

    /// y = (A - shift) x
    void apply(std::span<const Real> x, std::span<Real> y, Real shift = 0) const {
        const std::size_t n = size();
        for (std::size_t i = 0; i < n; ++i) {
            Real acc = (diag[i] - shift) * x[i];
            if (i > 0) {
                acc += offdiag[i - 1] * x[i - 1];
            }
            if (i + 1 < n) {
                acc += offdiag[i] * x[i + 1];
            }
            y[i] = acc;
        }
    }
};

template <std::floating_point Real>
struct SpectrumBounds {
    Real lower;
    Real upper;
};

template <std::floating_point Real>
SpectrumBounds<Real> gershgorin_bounds(const SymTridiagonal<Real>& a) {
    const std::size_t n = a.size();
    Real lo = std::numeric_limits<Real>::max();
    Real hi = std::numeric_limits<Real>::lowest();
    for (std::size_t i = 0; i < n; ++i) {
        Real radius = 0;
        if (i > 0) {
            radius += std::abs(a.offdiag[i - 1]);
        }
        if (i + 1 < n) {
            radius += std::abs(a.offdiag[i]);
        }
        lo = std::min(lo, a.diag[i] - radius);
        hi = std::max(hi, a.diag[i] + radius);
    }
    return {lo, hi};
}

namespace detail {

template <std::floating_point Real>
Real pivot_floor(const SymTridiagonal<Real>& a) {
    Real emax = 1;
    for (Real e : a.offdiag) {
        emax = std::max(emax, e * e);
    }
    return std::numeric_limits<Real>::min() * emax;
}

} // namespace detail

/// Number of eigenvalues strictly below `x` (negative pivots of LDL^T of A - x).
template <std::floating_point Real>
std::size_t sturm_count(const SymTridiagonal<Real>& a, Real x) {
    const std::size_t n = a.size();
    if (n == 0) {
        return 0;
    }
    const Real pivmin = detail::pivot_floor(a);
    std::size_t count = 0;
    Real q = a.diag[0] - x;
    if (std::abs(q) < pivmin) {
        q = -pivmin;
    }
    if (q < 0) {
        ++count;
    }
    for (std::size_t i = 1; i < n; ++i) {
        const Real e = a.offdiag[i - 1];
        q = a.diag[i] - x - e * e / q;
        if (std::abs(q) < pivmin) {
            q = -pivmin;
        }
        if (q < 0) {
            ++count;
        }
    }
    return count;
}

/// The `index`-th smallest eigenvalue (0-based), bisected to working
/// precision inside [lo, hi], which must bracket it.
template <std::floating_point Real>
Real bisect_eigenvalue(const SymTridiagonal<Real>& a, std::size_t index, Real lo, Real hi) {
    if (index >= a.size()) {
        throw DomainError("eigenvalue index out of range");
    }
    const Real eps = std::numeric_limits<Real>::epsilon();
    for (int it = 0; it < 256; ++it) {
        const Real mid = lo + (hi - lo) / 2;
        if (mid <= lo || mid >= hi) {
            break;
        }
        if (hi - lo <= 2 * eps * std::max(std::abs(lo), std::abs(hi))) {
            break;
        }
        if (sturm_count(a, mid) > index) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return lo + (hi - lo) / 2;
}

template <std::floating_point Real>
Real bisect_eigenvalue(const SymTridiagonal<Real>& a, std::size_t index) {
    const auto bounds = gershgorin_bounds(a);
    const Real pad = std::numeric_limits<Real>::epsilon() * std::max(std::abs(bounds.lower), std::abs(bounds.upper));
    return bisect_eigenvalue(a, index, bounds.lower - pad, bounds.upper + pad);
}

/// LU factorisation of A - shift with partial pivoting; U has two
/// superdiagonals. Zero pivots are perturbed, which is what inverse
/// iteration wants.
template <std::floating_point Real>
class ShiftedTridiagonalLU {
  public:
    ShiftedTridiagonalLU(const SymTridiagonal<Real>& a, Real shift)
        : n_(a.size()), dl_(a.offdiag), d_(a.diag), du_(a.offdiag), du2_(n_ > 2 ? n_ - 2 : 0, Real(0)),
          swapped_(n_ > 0 ? n_ - 1 : 0, false) {
        Real norm = 0;
        for (std::size_t i = 0; i < n_; ++i) {
            d_[i] -= shift;
            norm = std::max(norm, std::abs(d_[i]));
        }
        for (Real e : a.offdiag) {
            norm = std::max(norm, std::abs(e));
        }
        tiny_ = std::numeric_limits<Real>::epsilon() * std::max(norm, Real(1));

        for (std::size_t i = 0; i + 1 < n_; ++i) {
            if (std::abs(d_[i]) >= std::abs(dl_[i])) {
                if (d_[i] == 0) {
                    d_[i] = tiny_;
                }
                const Real fact = dl_[i] / d_[i];
                dl_[i] = fact;
                d_[i + 1] -= fact * du_[i];
            } else {
                const Real fact = d_[i] / dl_[i];
                d_[i] = dl_[i];
                dl_[i] = fact;
                const Real temp = du_[i];
                du_[i] = d_[i + 1];
                d_[i + 1] = temp - fact * d_[i + 1];
                if (i + 2 < n_) {
                    du2_[i] = du_[i + 1];
                    du_[i + 1] = -fact * du_[i + 1];
                }
                swapped_[i] = true;
            }
        }
        for (auto& p : d_) {
            if (std::abs(p) < tiny_) {
                p = std::copysign(tiny_, p == 0 ? Real(1) : p);
            }
        }
    }

    /// Overwrites b with (A - shift)^{-1} b.
    void solve(std::span<Real> b) const {
        for (std::size_t i = 0; i + 1 < n_; ++i) {
            if (!swapped_[i]) {
                b[i + 1] -= dl_[i] * b[i];
            } else {
                const Real temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - dl_[i] * b[i];
            }
        }
        if (n_ == 0) {
            return;
        }
        b[n_ - 1] /= d_[n_ - 1];
        if (n_ > 1) {
            b[n_ - 2] = (b[n_ - 2] - du_[n_ - 2] * b[n_ - 1]) / d_[n_ - 2];
        }
        if (n_ > 2) {
            for (std::size_t k = n_ - 2; k-- > 0;) {
                b[k] = (b[k] - du_[k] * b[k + 1] - du2_[k] * b[k + 2]) / d_[k];
            }
        }
    }

  private:
    std::size_t n_;
    std::vector<Real> dl_;
    std::vector<Real> d_;
    std::vector<Real> du_;
    std::vector<Real> du2_;
    std::vector<bool> swapped_;
    Real tiny_;
};

template <std::floating_point Real>
Real norm2(std::span<const Real> x) {
    // Scaled to avoid overflow on unnormalised iterates.
    Real scale = 0;
    for (Real v : x) {
        scale = std::max(scale, std::abs(v));
    }
    if (scale == 0) {
        return 0;
    }
    Real sum = 0;
    for (Real v : x) {
        const Real r = v / scale;
        sum += r * r;
    }
    return scale * std::sqrt(sum);
}

template <std::floating_point Real>
struct InverseIterationResult {
    std::vector<Real> vector; ///< unit 2-norm
    Real residual;            ///< ||(A - shift) v||_2
    int iterations;
};

inline constexpr int max_inverse_iterations = 12;

/// Eigenvector for an eigenvalue already located to working precision.
/// `orthogonal_to` holds unit vectors of nearby eigenvalues to project out.
template <std::floating_point Real>
InverseIterationResult<Real> inverse_iteration(const SymTridiagonal<Real>& a, Real eigenvalue,
                                               std::size_t index,
                                               std::span<const std::vector<Real>> orthogonal_to = {}) {
    const std::size_t n = a.size();
    const auto bounds = gershgorin_bounds(a);
    const Real anorm = std::max(std::abs(bounds.lower), std::abs(bounds.upper));
    const Real eps = std::numeric_limits<Real>::epsilon();
    const Real target = 64 * eps * std::max(anorm, Real(1)) * std::sqrt(static_cast<Real>(n));

    ShiftedTridiagonalLU<Real> lu(a, eigenvalue);
    std::mt19937_64 rng(0x5eed + index);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<Real> x(n);
    for (auto& v : x) {
        v = static_cast<Real>(dist(rng));
    }
    std::vector<Real> r(n);

    auto project_and_normalise = [&](std::vector<Real>& v) {
        for (const auto& q : orthogonal_to) {
            Real dot = 0;
            for (std::size_t i = 0; i < n; ++i) {
                dot += q[i] * v[i];
            }
            for (std::size_t i = 0; i < n; ++i) {
                v[i] -= dot * q[i];
            }
        }
        const Real nv = norm2<Real>(v);
        if (nv == 0 || !std::isfinite(nv)) {
            return false;
        }
        for (auto& e : v) {
            e /= nv;
        }
        return true;
    };

    project_and_normalise(x);
    Real best_residual = std::numeric_limits<Real>::max();
    std::vector<Real> best = x;
    for (int it = 1; it <= max_inverse_iterations; ++it) {
        lu.solve(x);
        if (!project_and_normalise(x)) {
            throw NumericalError("inverse iteration produced a degenerate iterate", index);
        }
        a.apply(x, r, eigenvalue);
        const Real res = norm2<Real>(r);
        if (res < best_residual) {
            best_residual = res;
            best = x;
        }
        if (res <= target && it >= 3) {
            return {std::move(best), best_residual, it};
        }
    }
    throw NumericalError("inverse iteration did not converge", index);
}

} // namespace helistrip
