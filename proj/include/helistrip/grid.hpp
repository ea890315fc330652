#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "errors.hpp"

namespace helistrip {

enum class BoundaryCondition { dirichlet, neumann };

inline std::string_view to_string(BoundaryCondition bc) {
    return bc == BoundaryCondition::dirichlet ? "dirichlet" : "neumann";
}

inline BoundaryCondition parse_boundary_condition(std::string_view text) {
    if (text == "dirichlet") {
        return BoundaryCondition::dirichlet;
    }
    if (text == "neumann") {
        return BoundaryCondition::neumann;
    }
    throw DomainError("unknown boundary condition '" + std::string(text) + "'");
}

/// Uniform nodes on [0, D], both endpoints included.
class TransverseGrid {
  public:
    TransverseGrid(double width, std::size_t points, BoundaryCondition left = BoundaryCondition::dirichlet,
                   BoundaryCondition right = BoundaryCondition::dirichlet)
        : width_(width), points_(points), left_(left), right_(right) {
        if (points < 3) {
            throw DomainError("transverse grid needs at least 3 points");
        }
        if (!(width > 0.0)) {
            throw DomainError("transverse grid width must be positive");
        }
    }

    double xi_min() const noexcept { return 0.0; }
    double xi_max() const noexcept { return width_; }
    std::size_t points() const noexcept { return points_; }
    BoundaryCondition left() const noexcept { return left_; }
    BoundaryCondition right() const noexcept { return right_; }
    double spacing() const noexcept { return width_ / static_cast<double>(points_ - 1); }

    double node(std::size_t i) const noexcept {
        return i + 1 == points_ ? width_ : spacing() * static_cast<double>(i);
    }

    /// Twice as many intervals, same boundary conditions.
    TransverseGrid refined() const { return TransverseGrid(width_, 2 * (points_ - 1) + 1, left_, right_); }

    /// Index range of nodes that carry an unknown.
    std::size_t first_unknown() const noexcept { return left_ == BoundaryCondition::dirichlet ? 1 : 0; }
    std::size_t last_unknown() const noexcept {
        return right_ == BoundaryCondition::dirichlet ? points_ - 2 : points_ - 1;
    }
    std::size_t unknowns() const noexcept { return last_unknown() - first_unknown() + 1; }

  private:
    double width_;
    std::size_t points_;
    BoundaryCondition left_;
    BoundaryCondition right_;
};

} // namespace helistrip
