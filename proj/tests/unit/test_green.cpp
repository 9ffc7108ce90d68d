#include <gtest/gtest.h>

#include <cmath>

#include "anderson/errors.hpp"
#include "anderson/green.hpp"
#include "oracles.hpp"

using namespace anderson;

TEST(FreeGreen, MatchesBesselOracle) {
    for (double E : {-0.1, -0.5, -1.0}) {
        auto G = free_green_table(E, 3);
        for (std::array<int, 3> w : {std::array<int, 3>{0, 0, 0}, {1, 0, 0}, {2, 1, 0}, {1, 1, 1}, {3, 0, 2}})
            EXPECT_NEAR(G(Site{w[0], w[1], w[2]}).real(), oracle::free_green(E, w), 1e-11)
                << "E=" << E << " w=" << w[0] << w[1] << w[2];
    }
}

TEST(FreeGreen, FrozenValues) {
    EXPECT_NEAR(free_green(-0.1, Site{}), 0.43121798639269104, 1e-12);
    EXPECT_NEAR(free_green(-0.5, Site{1, 0, 0}), 0.06455554954657305, 1e-12);
    EXPECT_NEAR(free_green(-1.0, Site{2, 1, 0}), 0.0031013998857674194, 1e-12);
}

TEST(FreeGreen, CubicSymmetry) {
    auto G = free_green_table(-0.3, 3);
    const cplx g = G(Site{2, 1, 0});
    for (Site w : {Site{1, 2, 0}, Site{0, -2, 1}, Site{-1, 0, -2}}) EXPECT_NEAR(std::abs(G(w) - g), 0.0, 1e-14);
}

TEST(FreeGreen, DefiningRelationAndNeighbourSum) {
    const double E = -0.5;
    auto G = free_green_table(E, 6);
    for (int i = -5; i <= 5; ++i)
        for (int j = -5; j <= 5; ++j)
            for (int k = -5; k <= 5; ++k) {
                Site w{i, j, k};
                double nb = 0.0;
                for (const Site& e : unit_vectors()) nb += G(w + e).real();
                const double lhs = (3.0 - E) * G(w).real() - 0.5 * nb;
                EXPECT_NEAR(lhs, w == Site{} ? 1.0 : 0.0, 1e-7);
                if (!(w == Site{})) EXPECT_NEAR(nb / ((6.0 - 2.0 * E) * G(w).real()), 1.0, 1e-8);
            }
}

TEST(RatioBound, ExamplesAndPrecondition) {
    EXPECT_TRUE(ratio_bound_check(-1.0, Site{1, 0, 0}, Site{0, 1, 0}));
    auto G = free_green_table(-1.0, 3);
    const double r = G(Site{1, 0, 0}).real() / G(Site{1, 1, 0}).real();
    EXPECT_GT(r, 1.0 / 8.0);
    EXPECT_LT(r, 8.0);
    EXPECT_THROW(ratio_bound_check(G, Site{}, Site{1, 0, 0}), PreconditionError);
    EXPECT_THROW(ratio_bound_check(G, Site{1, 0, 0}, Site{1, 1, 0}), PreconditionError);
}

TEST(Envelope, FiniteStableAndPositive) {
    for (double E : {-0.5, -0.1}) {
        auto env = envelope_check(E, 8);
        EXPECT_TRUE(std::isfinite(env.worst_ratio));
        EXPECT_GT(env.min_value, 0.0);
        EXPECT_LE(env.sup_by_radius[8] / env.sup_by_radius[6], 1.1);
    }
}

TEST(Envelope, PsiShape) {
    EXPECT_NEAR(psi_envelope(9.0, -1.0, 0.0, 3), 1.0, 1e-15);
    EXPECT_LT(psi_envelope(9.0, -0.5, 5.0, 3), psi_envelope(9.0, -0.5, 4.0, 3));
    EXPECT_THROW(psi_envelope(9.0, -0.5, 1.0, 2), PreconditionError);
}

TEST(ScalarResolvent, ZeroSigmaIsFreeGreen) {
    auto R = scalar_resolvent_table(-0.5, 0.0, {}, 2);
    EXPECT_NEAR(R(Site{1, 0, 0}).real(), free_green(-0.5, Site{1, 0, 0}), 1e-13);
    // σ constant shifts the energy
    auto S = scalar_resolvent_table(-0.4, 0.0, {{Site{}, cplx(-0.1)}}, 2);
    EXPECT_NEAR(S(Site{1, 1, 0}).real(), free_green(-0.5, Site{1, 1, 0}), 1e-13);
}

TEST(DecayFit, RecoversRateOfExactExponential) {
    std::vector<double> r, v;
    for (int i = 1; i <= 6; ++i) {
        r.push_back(i);
        v.push_back(2.0 * std::exp(-0.7 * i));
    }
    auto f = exponential_fit(r, v);
    EXPECT_NEAR(f.rate, 0.7, 1e-12);
    EXPECT_NEAR(f.prefactor, 2.0, 1e-11);
    EXPECT_NEAR(f.residual, 0.0, 1e-12);
    EXPECT_THROW(exponential_fit({1.0}, {1.0}), PreconditionError);
}

TEST(DecayFit, FreeGreenDecaysAtPositiveRate) {
    const int R = 6;
    auto G = free_green_table(-0.5, R);
    std::vector<std::pair<Site, double>> vals;
    for (int i = -R; i <= R; ++i)
        for (int j = -R; j <= R; ++j)
            for (int k = -R; k <= R; ++k) vals.emplace_back(Site{i, j, k}, G(Site{i, j, k}).real());
    auto f = decay_fit(vals, 2.0, R);
    EXPECT_GT(f.rate, 0.5);
    EXPECT_GE(f.points, 5u);
}
