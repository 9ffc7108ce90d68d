#include <gtest/gtest.h>

#include <cmath>

#include "anderson/errors.hpp"
#include "anderson/green.hpp"
#include "anderson/selfenergy.hpp"
#include "oracles.hpp"

using namespace anderson;

namespace {

SingleSitePotential single_site_cell() {
    return SingleSitePotential::nonoverlapping({{Site{}, 1.0}}, {1, 1, 1}, {Site{}});
}

SingleSitePotential dipole_in_cell() {
    return SingleSitePotential::nonoverlapping({{Site{0, 0, 0}, 1.0}, {Site{1, 0, 0}, -1.0}}, {2, 1, 1},
                                               {Site{0, 0, 0}, Site{1, 0, 0}});
}

}  // namespace

TEST(Thresholds, ClosedForms) {
    EXPECT_NEAR(threshold_overlapping(0.1, 1.0), -0.0202, 1e-15);
    EXPECT_EQ(threshold_overlapping(0.0, 1.0), 0.0);
    EXPECT_NEAR(threshold_overlapping(0.1, 2.0), -0.0832, 1e-15);
    EXPECT_NEAR(threshold_nonoverlapping(0.1, single_site_cell(), -3.0), -8.0 * 0.01, 1e-15);
    EXPECT_EQ(threshold_nonoverlapping(0.0, dipole_in_cell(), -1.0), 0.0);
    EXPECT_NEAR(threshold_dipole(0.1), -0.011, 1e-15);
}

TEST(Thresholds, GrowWithCell) {
    auto small = SingleSitePotential::nonoverlapping({{Site{}, 1.0}}, {2, 1, 1}, {Site{0, 0, 0}, Site{1, 0, 0}});
    auto large = SingleSitePotential::nonoverlapping({{Site{}, 1.0}}, {3, 1, 1},
                                                     {Site{0, 0, 0}, Site{1, 0, 0}, Site{2, 0, 0}});
    EXPECT_LT(threshold_nonoverlapping(0.1, large, -0.5), threshold_nonoverlapping(0.1, small, -0.5));
}

TEST(ScalarSolver, ZeroCouplingGivesZero) {
    auto s = solve_sigma_overlapping(0.0, -0.1, 0.0, SingleSitePotential::delta());
    EXPECT_EQ(std::abs(s.coefficient(Site{})), 0.0);
    EXPECT_LE(s.report.iterations, 1);
}

TEST(ScalarSolver, DeltaFixedPointMatchesOracle) {
    auto s = solve_sigma_overlapping(0.1, -0.1, 0.0, SingleSitePotential::delta());
    ASSERT_EQ(s.coefficients.size(), 1u);
    const double ref = oracle::delta_self_energy(0.1, -0.1);
    EXPECT_NEAR(s.coefficient(Site{}).real(), ref, 1e-9);
    EXPECT_NEAR(s.coefficient(Site{}).imag(), 0.0, 1e-14);
    EXPECT_NEAR(ref, 0.0043287125099181, 1e-12);
    EXPECT_LE(s.report.residual, 1e-10);
    EXPECT_LE(s.report.norm, s.report.bound);
    // σ(p) is flat
    EXPECT_NEAR(std::abs(s(Momentum(0.1, 0.3, 0.2)) - s(Momentum(0.4, 0.0, 0.25))), 0.0, 1e-15);
}

TEST(ScalarSolver, ContractionRatio) {
    auto s = solve_sigma_overlapping(0.05, -0.1, 0.0, SingleSitePotential::delta());
    EXPECT_LE(s.report.observed_contraction, 1.0 / std::sqrt(2.0) + 0.05);
}

TEST(ScalarSolver, ExponentialPotentialCertificates) {
    auto u = SingleSitePotential::exponential(1.0, 2.0, false);
    const double E0 = threshold_overlapping(0.05, u_hat_sup(u));
    auto s = solve_sigma_overlapping(0.05, 2.0 * E0, 0.0, u, TorusGrid{48, true});
    EXPECT_GT(s.coefficients.size(), 1u);
    EXPECT_LE(s.report.residual, 1e-10);
    EXPECT_LE(s.report.norm, s.report.bound);
    // c_k = c_{-k} for an even potential
    EXPECT_NEAR(std::abs(s.coefficient(Site{1, 0, 0}) - s.coefficient(Site{-1, 0, 0})), 0.0, 1e-13);
}

TEST(ScalarSolver, RejectsInadmissible) {
    EXPECT_THROW(solve_sigma_overlapping(0.1, -0.01, 0.0, SingleSitePotential::delta()), InadmissibleError);
    EXPECT_THROW(solve_sigma_overlapping(0.1, -0.1, 0.5, SingleSitePotential::delta()), InadmissibleError);
    EXPECT_THROW(solve_sigma_overlapping(0.1, -0.1, 0.0, dipole_in_cell()), UnsupportedVariantError);
}

TEST(ScalarSolver, EpsilonContinuity) {
    auto u = SingleSitePotential::delta();
    const cplx s0 = solve_sigma_overlapping(0.1, -0.1, 0.0, u).coefficient(Site{});
    double prev = 0.0;
    for (double eps : {1e-2, 1e-3, 1e-4}) {
        const double d = std::abs(solve_sigma_overlapping(0.1, -0.1, eps, u).coefficient(Site{}) - s0);
        EXPECT_LE(d, 0.1 * eps);
        if (prev > 0.0) EXPECT_LT(d, prev);
        prev = d;
    }
}

TEST(BlochFiber, ReducesToScalarForOneSiteCell) {
    auto u = single_site_cell();
    CellMatrix s(1, 1);
    s(0, 0) = cplx(-0.02);
    const TorusGrid g{64, true};
    auto S = cell_resolvent(u, s, -0.3, 0.0, g);
    auto G = scalar_resolvent_table(-0.3, 0.0, {{Site{}, cplx(-0.02)}}, 0, g);
    EXPECT_NEAR(std::abs(S(0, 0) - G(Site{})), 0.0, 1e-12);
}

TEST(BlochFiber, FreeCellResolventMatchesGreen) {
    auto u = dipole_in_cell();
    CellMatrix zero = CellMatrix::Zero(2, 2);
    auto S = cell_resolvent(u, zero, -0.5, 0.0, TorusGrid{64, true});
    EXPECT_NEAR(S(0, 0).real(), oracle::free_green(-0.5, {0, 0, 0}), 1e-6);
    EXPECT_NEAR(S(0, 1).real(), oracle::free_green(-0.5, {1, 0, 0}), 1e-6);
    EXPECT_NEAR(std::abs(S(0, 1) - std::conj(S(1, 0))), 0.0, 1e-10);
}

TEST(BlochFiber, ResolventKernelMatchesGreenAcrossCells) {
    auto u = dipole_in_cell();
    auto K = cell_resolvent_kernel(u, CellMatrix::Zero(2, 2), -0.5, 0.0, 2, TorusGrid{32, true});
    EXPECT_NEAR(K(Site{0, 0, 0}, Site{3, 1, 0}).real(), oracle::free_green(-0.5, {3, 1, 0}), 1e-6);
    EXPECT_NEAR(K(Site{1, 0, 0}, Site{-2, 0, 1}).real(), oracle::free_green(-0.5, {3, 0, 1}), 1e-6);
}

TEST(MatrixSolver, AgreesWithScalarForDelta) {
    auto m = solve_sigma_nonoverlapping(0.05, -0.1, 0.0, single_site_cell());
    auto s = solve_sigma_overlapping(0.05, -0.1, 0.0, SingleSitePotential::delta());
    EXPECT_NEAR(std::abs(m.sigma(0, 0) - s.coefficient(Site{})), 0.0, 1e-8);
}

TEST(MatrixSolver, DipoleCellBounds) {
    auto u = dipole_in_cell();
    const double kappa = kappa_nonoverlapping(0.05, u);
    EXPECT_NEAR(kappa, 4.0 * 2.0 * 0.0025, 1e-15);
    auto m = solve_sigma_nonoverlapping(0.05, -2.0 * kappa, 0.0, u);
    EXPECT_LE(operator_norm(m.sigma), 2.0 * 2.0 * 0.0025);
    EXPECT_LE(operator_norm(m.sigma), kappa / 2.0);
    EXPECT_LE(m.report.residual, 1e-10);
    EXPECT_LE(m.report.observed_contraction, 0.5 + 0.05);
    auto zero = solve_sigma_nonoverlapping(0.0, -1.0, 0.0, u);
    EXPECT_EQ(operator_norm(zero.sigma), 0.0);
}

TEST(MatrixSolver, RejectsInadmissible) {
    auto u = dipole_in_cell();
    EXPECT_THROW(solve_sigma_nonoverlapping(0.05, -0.001, 0.0, u), InadmissibleError);
    EXPECT_THROW(solve_sigma_nonoverlapping(0.05, -0.1, 0.0, SingleSitePotential::delta()), UnsupportedVariantError);
}

TEST(DipoleSolver, BoundsAndZeroCoupling) {
    const double lam = 0.05;
    auto d = solve_sigma_dipole(lam, -2.0 * (1.0 + lam) * lam * lam, 0.0);
    EXPECT_LT(std::abs(d.A), lam * lam);
    EXPECT_LT(std::abs(d.B), 14.0 * lam * lam);
    EXPECT_LE(d.report.residual, 1e-10);
    EXPECT_LE(d.report.observed_contraction, 20.0 * lam + 0.05);
    auto z = solve_sigma_dipole(0.0, -0.1, 0.0);
    EXPECT_EQ(std::abs(z.A) + std::abs(z.B), 0.0);
    EXPECT_THROW(solve_sigma_dipole(0.25, -1.0, 0.0), InadmissibleError);
    EXPECT_THROW(solve_sigma_dipole(lam, 0.0, 0.0), InadmissibleError);
}

TEST(DipoleSolver, AgreesWithGeneralScalarSolver) {
    const double lam = 0.05, E = -0.03;
    const TorusGrid g{128, true};
    auto d = solve_sigma_dipole(lam, E, 0.0, g);
    auto s = solve_sigma_overlapping(lam, E, 0.0, SingleSitePotential::dipole(), g);
    double worst = 0.0;
    for (double p1 : {0.0, 0.1, 0.25, 0.4, 0.5})
        for (double p2 : {0.0, 0.3}) {
            Momentum p(p1, p2, 0.1);
            worst = std::max(worst, std::abs(d(p) - s(p)));
        }
    EXPECT_LE(worst, 1e-6);
}

TEST(Renormalized, DeltaGreenShiftsEnergy) {
    auto s = solve_sigma_overlapping(0.1, -0.1, 0.0, SingleSitePotential::delta());
    auto R = renormalized_green(s, 2);
    const double shifted = -0.1 + s.coefficient(Site{}).real();
    EXPECT_NEAR(R(Site{1, 0, 0}).real(), oracle::free_green(shifted, {1, 0, 0}), 1e-8);
}
