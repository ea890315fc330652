#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "helistrip/heun.hpp"
#include "helistrip/transverse.hpp"

using namespace helistrip;

namespace {

double weight(double z, double c) { return ((4.0 * c * c - 1.0) / (1.0 + z) + 3.0 / ((1.0 + z) * (1.0 + z))) / 16.0; }

struct GroundState {
    StripGeometry geometry;
    TransverseMode mode;
    TransverseGrid grid;
    EigenSolution solution;
};

GroundState ground_state(std::size_t points, double c = 0.0) {
    StripGeometry g(2.0 * constants::pi, 1.0, 40.0);
    auto mode = TransverseMode::from_ratio(c, g);
    TransverseGrid grid(40.0, points, BoundaryCondition::dirichlet, BoundaryCondition::dirichlet);
    auto s = solve_transverse(g, mode, grid, 1);
    return {g, mode, grid, std::move(s)};
}

} // namespace

TEST(HeunCoefficients, CoefficientSetsReproduceQ) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const double c = 0.6 * unit(rng);
        const double e = -0.1 + 0.2 * unit(rng);
        const double zeta = 1.0 + 1e-3 + 50.0 * unit(rng);
        const auto sets = heun_coefficients(c, e);
        EXPECT_NEAR(q_from_coefficients(zeta, sets.read_from_q), q_of_zeta(zeta, c, e),
                    1e-13 * (1.0 + std::abs(q_of_zeta(zeta, c, e))));
        EXPECT_NEAR(q_from_coefficients(zeta, sets.rederived), q_of_zeta_rederived(zeta, c, e),
                    1e-12 * (1.0 + std::abs(q_of_zeta_rederived(zeta, c, e))));
    }
}

TEST(HeunCoefficients, ListedBDisagrees) {
    const auto sets = heun_coefficients(0.2, 0.01);
    EXPECT_TRUE(sets.listed_b_disagrees);
    EXPECT_DOUBLE_EQ(sets.listed.b, (4 * 0.04 + 2) / 12.0);
    EXPECT_DOUBLE_EQ(sets.read_from_q.b, (4 * 0.04 + 2) / 16.0);
}

// Normal form of L'' = p(z) L is M'' + Q M = 0 with Q = -p.
TEST(HeunCoefficients, StatedQFollowsFromStatedLEquation) {
    for (double c : {0.0, 0.2, 0.4}) {
        for (double e : {-0.01, 0.03}) {
            for (double z : {0.01, 0.7, 5.0, 80.0}) {
                const double p = (-3.0 / 16.0 + weight(z, c) + e) / z;
                EXPECT_NEAR(q_of_zeta(1.0 + z, c, e), -p, 1e-12 * (1.0 + std::abs(p)));
            }
        }
    }
}

TEST(HeunCoefficients, RederivedQFollowsFromRederivedLEquation) {
    for (double c : {0.0, 0.2, 0.4}) {
        for (double e : {-0.01, 0.03}) {
            for (double z : {0.01, 0.7, 5.0, 80.0}) {
                const double p = (-3.0 / (16.0 * z) + weight(z, c) + e) / z;
                EXPECT_NEAR(q_of_zeta_rederived(1.0 + z, c, e), -p, 1e-12 * (1.0 + std::abs(p)));
            }
        }
    }
}

// With H = exp(-a z) and L = z^{1/4} H the rederived L-operator equals
// z^{1/4} times the H-operator; both sides are known in closed form.
TEST(HeunCoefficients, RederivedSubstitutionIsExact) {
    for (double a : {0.1, 1.0, 3.0}) {
        for (double z : {0.05, 1.0, 9.0}) {
            const double h = std::exp(-a * z);
            const double h_op = -z * a * a * h + 0.5 * a * h; // -z H'' - H'/2
            const double l = std::pow(z, 0.25) * h;
            const double g = 0.25 / z - a;
            const double l2 = (g * g - 0.25 / (z * z)) * l;
            const double l_op = -z * l2 - 3.0 / (16.0 * z) * l;
            EXPECT_NEAR(l_op, std::pow(z, 0.25) * h_op, 1e-13 * (std::abs(l_op) + 1.0));
        }
    }
}

TEST(HeunCoefficients, SingularPointRejected) {
    EXPECT_THROW(q_of_zeta(1.0, 0.1, 0.0), DomainError);
    EXPECT_THROW(q_of_zeta_rederived(0.5, 0.1, 0.0), DomainError);
}

TEST(HeunVariables, RoundTripDropsOrigin) {
    const auto gs = ground_state(801);
    std::vector<double> xi(gs.grid.points());
    for (std::size_t i = 0; i < xi.size(); ++i) {
        xi[i] = gs.grid.node(i);
    }
    for (auto sub : {Substitution::stated, Substitution::rederived}) {
        const auto vars = to_heun_variables(xi, gs.solution.wavefunctions[0], gs.geometry, sub);
        EXPECT_TRUE(vars.dropped_origin);
        ASSERT_EQ(vars.m.size(), xi.size() - 1);
        const auto back = wavefunction_from_heun(vars);
        for (std::size_t i = 0; i < back.size(); ++i) {
            EXPECT_NEAR(back[i], gs.solution.wavefunctions[0][i + 1], 1e-15);
            EXPECT_DOUBLE_EQ(vars.zeta[i], 1.0 + vars.z[i]);
        }
    }
}

TEST(HeunVariables, MapHelpersInvert) {
    for (double xi : {0.0, 0.3, 12.0}) {
        const double z = z_from_xi(xi, 2.0);
        EXPECT_NEAR(xi_from_z(z, 2.0), xi, 1e-15);
        EXPECT_DOUBLE_EQ(z_from_zeta(zeta_from_z(z)), z);
    }
    StripGeometry flat(1.0, 0.0, 1.0);
    std::vector<double> xi{0.0, 1.0};
    EXPECT_THROW(to_heun_variables(xi, xi, flat), DomainError);
}

TEST(ResidualChain, SelectsMinusConventionAndFlagsStatedForm) {
    const auto gs = ground_state(8001);
    const auto r = residual_chain(gs.grid, gs.solution.wavefunctions[0], gs.solution.energies[0], gs.geometry, gs.mode);
    EXPECT_EQ(r.selected, SignConvention::e_minus);
    EXPECT_NEAR(r.e_selected, -gs.solution.energies[0] / 4.0, 1e-15);
    EXPECT_LT(r.stage(stage_names::h_equation, SignConvention::e_minus).residual, 1e-4);
    EXPECT_LT(r.stage(stage_names::normal_form_rederived, SignConvention::e_minus).residual, 1e-5);
    EXPECT_TRUE(r.stage(stage_names::normal_form_stated, SignConvention::e_minus).flagged);
    EXPECT_TRUE(r.stage(stage_names::l_equation_stated, SignConvention::e_minus).flagged);
    EXPECT_FALSE(r.stage(stage_names::l_equation_rederived, SignConvention::e_minus).flagged);
    EXPECT_EQ(r.flags.size(), 3u);
}

TEST(ResidualChain, RederivedResidualShrinksUnderRefinement) {
    const auto coarse = ground_state(2001, 0.2);
    const auto fine = ground_state(4001, 0.2);
    const auto rc = residual_chain(coarse.grid, coarse.solution.wavefunctions[0], coarse.solution.energies[0],
                                   coarse.geometry, coarse.mode);
    const auto rf = residual_chain(fine.grid, fine.solution.wavefunctions[0], fine.solution.energies[0],
                                   fine.geometry, fine.mode);
    const double a = rc.stage(stage_names::normal_form_rederived, rc.selected).residual;
    const double b = rf.stage(stage_names::normal_form_rederived, rf.selected).residual;
    EXPECT_GT(a / b, 3.0);
}

TEST(ResidualChain, RejectsFlatAndShortInput) {
    const auto gs = ground_state(101);
    StripGeometry flat(1.0, 0.0, 40.0);
    EXPECT_THROW(residual_chain(gs.grid, gs.solution.wavefunctions[0], gs.solution.energies[0], flat,
                                TransverseMode::from_wavenumber(0.0, flat)),
                 DomainError);
    std::vector<double> wrong(10, 0.0);
    EXPECT_THROW(residual_chain(gs.grid, wrong, 0.0, gs.geometry, gs.mode), DomainError);
}
