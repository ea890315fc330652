#pragma once

#include <cmath>

#include "errors.hpp"

namespace helistrip {

namespace constants {
// CODATA 2018 exact / recommended values, SI.
inline constexpr double boltzmann = 1.380649e-23;      // J/K
inline constexpr double hbar = 1.054571817e-34;        // J s
inline constexpr double electron_mass = 9.1093837015e-31; // kg
inline constexpr double pi = 3.14159265358979323846;
} // namespace constants

// Internally every energy is measured in units where hbar^2/2m == 1, so an
// energy carries dimension length^-2 and the twist rate is the only scale.
// A dimensional UnitSystem only matters at the boundary (conversion to
// joules, thermal scales).
class UnitSystem {
  public:
    enum class Mode { natural, dimensional };

    static UnitSystem natural() { return UnitSystem(Mode::natural, 0.0, 0.0); }

    static UnitSystem dimensional(double hbar = constants::hbar,
                                  double mass = constants::electron_mass) {
        if (!(hbar > 0.0) || !(mass > 0.0)) {
            throw DomainError("dimensional units need hbar > 0 and mass > 0");
        }
        return UnitSystem(Mode::dimensional, hbar, mass);
    }

    Mode mode() const noexcept { return mode_; }
    bool is_dimensional() const noexcept { return mode_ == Mode::dimensional; }
    double hbar() const noexcept { return hbar_; }
    double mass() const noexcept { return mass_; }

    /// hbar^2/2m: joule * length^2 in dimensional mode, 1 otherwise.
    double energy_scale() const noexcept {
        return is_dimensional() ? hbar_ * hbar_ / (2.0 * mass_) : 1.0;
    }

    /// Converts an energy in natural units to this system.
    double from_natural(double energy) const noexcept { return energy * energy_scale(); }
    double to_natural(double energy) const noexcept { return energy / energy_scale(); }

  private:
    UnitSystem(Mode mode, double hbar, double mass) : mode_(mode), hbar_(hbar), mass_(mass) {}

    Mode mode_;
    double hbar_;
    double mass_;
};

} // namespace helistrip
