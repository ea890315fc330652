#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "helistrip/geometry.hpp"

using namespace helistrip;

namespace {

StripGeometry with_omega(double omega, double width = 10.0) {
    return StripGeometry(2.0 * constants::pi, 1.0, width).with_omega(omega);
}

double relative(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

} // namespace

TEST(StripGeometry, OmegaIsTwoPiNOverL) {
    StripGeometry g(100.0, 5.0, 20.0);
    EXPECT_NEAR(g.omega(), 0.3141592653589793, 1e-15);
    EXPECT_FALSE(g.is_flat());
    EXPECT_TRUE(StripGeometry(100.0, 0.0, 20.0).is_flat());
}

TEST(StripGeometry, RejectsBadLengths) {
    EXPECT_THROW(StripGeometry(0.0, 1.0, 1.0), DomainError);
    EXPECT_THROW(StripGeometry(1.0, 1.0, -1.0), DomainError);
    EXPECT_THROW(StripGeometry(1.0, -1.0, 1.0), DomainError);
    EXPECT_THROW(StripGeometry(std::nan(""), 1.0, 1.0), DomainError);
}

TEST(TransverseMode, RatioAndWavenumberAgree) {
    const auto g = with_omega(2.0);
    const auto a = TransverseMode::from_ratio(0.3, g);
    EXPECT_DOUBLE_EQ(a.kx(), 0.6);
    const auto b = TransverseMode::from_wavenumber(0.6, g);
    ASSERT_TRUE(b.ratio());
    EXPECT_DOUBLE_EQ(*b.ratio(), 0.3);
}

TEST(TransverseMode, FlatStripHasNoRatio) {
    StripGeometry flat(10.0, 0.0, 1.0);
    EXPECT_FALSE(TransverseMode::from_wavenumber(0.5, flat).ratio());
    EXPECT_THROW(TransverseMode::from_ratio(0.1, flat), DomainError);
}

TEST(Potential, LandmarksAtUnitTwist) {
    const auto g = with_omega(1.0);
    EXPECT_DOUBLE_EQ(v_eff(0.0, g), 0.5);
    EXPECT_NEAR(v_eff(std::sqrt(2.0), g), 0.0, 1e-16);
    EXPECT_NEAR(v_eff(std::sqrt(5.0), g), -1.0 / 48.0, 1e-16);
}

TEST(Potential, VanishesWithoutTwist) {
    StripGeometry flat(10.0, 0.0, 1.0);
    for (double xi : {0.0, 0.3, 1.0}) {
        EXPECT_EQ(v_eff(xi, flat), 0.0);
        EXPECT_EQ(lame_h1(xi, flat), 1.0);
    }
}

TEST(Potential, ScalesAsOmegaSquared) {
    // V(xi; w) = w^2 V(w xi; 1)
    const auto one = with_omega(1.0);
    for (double w : {0.1, 3.0, 17.0}) {
        const auto g = with_omega(w);
        for (double xi : {0.0, 0.2, 1.5, 9.0}) {
            EXPECT_NEAR(v_eff(xi, g), w * w * v_eff(w * xi, one), 1e-14 * w * w);
        }
    }
}

TEST(Potential, MetricOracleMatchesClosedForm) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> xi_dist(0.0, 100.0);
    for (double w : {0.1, 1.0, 10.0}) {
        const auto g = with_omega(w);
        for (int i = 0; i < 200; ++i) {
            const double xi = xi_dist(rng);
            const auto m = v_eff_from_metric(xi, g);
            EXPECT_TRUE(m.reliable);
            EXPECT_LE(std::abs(v_eff(xi, g) - m.value), 1e-7 * w * w) << "w=" << w << " xi=" << xi;
        }
    }
}

TEST(Potential, MetricOracleRejectsBadStep) {
    EXPECT_THROW(v_eff_from_metric(1.0, with_omega(1.0), 0.0), DomainError);
    EXPECT_THROW(v_eff_from_metric(-1.0, with_omega(1.0), 1e-3), DomainError);
}

TEST(Potential, NetIsVeffPlusLongitudinalTerm) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        const double w = std::pow(10.0, -1.0 + 2.0 * unit(rng));
        const double kx = -2.0 * w + 4.0 * w * unit(rng);
        const double xi = 50.0 / w * unit(rng);
        const auto g = with_omega(w);
        const auto mode = TransverseMode::from_wavenumber(kx, g);
        const double h1 = lame_h1(xi, g);
        const double direct = v_eff(xi, g) + kx * kx / (h1 * h1);
        const double u = net_potential(xi, g, mode);
        EXPECT_LE(std::abs(u - direct), 1e-13 * std::max({std::abs(u), std::abs(v_eff(xi, g)), kx * kx / (h1 * h1)}));
    }
}

TEST(Potential, FlatNetIsKxSquared) {
    StripGeometry flat(10.0, 0.0, 1.0);
    const auto mode = TransverseMode::from_wavenumber(0.7, flat);
    EXPECT_DOUBLE_EQ(net_potential(0.4, flat, mode), 0.49);
}

TEST(Potential, ZeroCrossingFormula) {
    EXPECT_NEAR(*scaled_zero_crossing(0.0), std::sqrt(2.0), 1e-15);
    EXPECT_FALSE(scaled_zero_crossing(0.5));
    EXPECT_FALSE(scaled_zero_crossing(0.7));
    for (double c : {0.1, 0.3, 0.45}) {
        const auto g = with_omega(1.3);
        const auto mode = TransverseMode::from_ratio(c, g);
        const double xi = *scaled_zero_crossing(c) / g.omega();
        EXPECT_NEAR(net_potential(xi, g, mode), 0.0, 1e-15);
    }
}

TEST(Landmarks, ExactAtZeroRatio) {
    const auto g = with_omega(1.0);
    const auto r = landmarks(g, TransverseMode::from_ratio(0.0, g));
    EXPECT_DOUBLE_EQ(r.v0, 0.5);
    EXPECT_NEAR(*r.xi_zero, std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(*r.xi_min, std::sqrt(5.0), 1e-15);
    EXPECT_NEAR(*r.u_min, -1.0 / 48.0, 1e-17);
    EXPECT_LE(relative(*r.numeric_xi_zero, std::sqrt(2.0)), 1e-10);
    EXPECT_LE(relative(*r.numeric_xi_min, std::sqrt(5.0)), 1e-7); // flat minimum: sqrt(eps) limited
    EXPECT_LE(relative(*r.numeric_u_min, -1.0 / 48.0), 1e-12);
    EXPECT_NEAR(r.u_min_simplified_deviation, 0.0, 1e-17);
}

TEST(Landmarks, SimplifiedMinimumDeviatesForPositiveRatio) {
    const auto g = with_omega(2.0);
    for (double c : {0.1, 0.3}) {
        const auto r = landmarks(g, TransverseMode::from_ratio(c, g));
        const double gap = 1.0 - 4.0 * c * c;
        EXPECT_LE(relative(*r.u_min, -4.0 * gap * gap / 48.0), 1e-14);
        EXPECT_LE(relative(*r.numeric_u_min, *r.u_min), 1e-8);
        EXPECT_GT(std::abs(r.u_min_simplified_deviation), 1e-3 * std::abs(*r.u_min));
    }
}

TEST(Landmarks, RepulsiveAboveHalf) {
    const auto g = with_omega(1.0);
    const auto r = landmarks(g, TransverseMode::from_ratio(0.6, g));
    EXPECT_FALSE(r.attractive);
    EXPECT_FALSE(r.u_min);
    EXPECT_FALSE(r.xi_zero);
    EXPECT_THROW(landmarks(StripGeometry(1.0, 0.0, 1.0), TransverseMode::from_wavenumber(0.0, StripGeometry(1.0, 0.0, 1.0))),
                 DomainError);
}

TEST(Units, ThermalScaleForElectronAtOneKelvin) {
    const auto units = UnitSystem::dimensional();
    EXPECT_NEAR(thermal_twist_scale(1.0, units), 4.756e7, 1e4);
    // hbar^2 w^2 / 2m equals k_B T by construction.
    const double w = thermal_twist_scale(3.0, units);
    EXPECT_NEAR(units.from_natural(w * w) / (constants::boltzmann * 3.0), 1.0, 1e-14);
    EXPECT_THROW(thermal_twist_scale(1.0, UnitSystem::natural()), DomainError);
    EXPECT_THROW(thermal_twist_scale(0.0, units), DomainError);
}

TEST(Units, NaturalIsIdentity) {
    const auto n = UnitSystem::natural();
    EXPECT_EQ(n.from_natural(2.5), 2.5);
    EXPECT_THROW(UnitSystem::dimensional(0.0, 1.0), DomainError);
}

TEST(Surface, RowMajorWithPinnedEnds) {
    StripGeometry g(10.0, 1.0, 2.0);
    const auto pts = sample_surface(g, 5, 3);
    ASSERT_EQ(pts.size(), 15u);
    EXPECT_EQ(pts.back()[0], 10.0);
    for (const auto& p : pts) {
        const double xi = std::hypot(p[1], p[2]);
        EXPECT_LE(xi, 2.0 + 1e-14);
        if (xi > 0) {
            EXPECT_NEAR(std::atan2(p[2], p[1]), std::remainder(g.omega() * p[0], 2 * constants::pi), 1e-12);
        }
    }
    EXPECT_THROW(sample_surface(g, 1, 3), DomainError);
}

TEST(PotentialTable, SignChangeWithinOneSpacing) {
    const auto g = with_omega(1.0, 10.0);
    for (double c : {0.1, 0.3, 0.45}) {
        const auto table = potential_table(g, TransverseMode::from_ratio(c, g), 4001);
        const auto found = first_sign_change(table);
        ASSERT_TRUE(found);
        EXPECT_LE(std::abs(*found - *scaled_zero_crossing(c)), 10.0 / 4000);
    }
}
