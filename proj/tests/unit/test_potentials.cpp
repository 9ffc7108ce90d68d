#include <gtest/gtest.h>

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "anderson/errors.hpp"
#include "anderson/potentials.hpp"

using namespace anderson;

namespace {

double integrate(const std::function<double(double)>& f, double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-14);
}

}  // namespace

TEST(SingleSite, DeltaAndDipole) {
    auto d = SingleSitePotential::delta();
    EXPECT_EQ(d.kind(), PotentialKind::Overlapping);
    EXPECT_DOUBLE_EQ(d.value(Site{}), 1.0);
    EXPECT_DOUBLE_EQ(d.value(Site{1, 0, 0}), 0.0);
    EXPECT_NEAR(std::abs(u_hat(d, Momentum(0.3, 0.1, -0.2))), 1.0, 1e-15);

    auto p = SingleSitePotential::dipole();
    EXPECT_EQ(p.kind(), PotentialKind::Dipole);
    EXPECT_NEAR(std::abs(u_hat(p, Momentum(0, 0, 0))), 0.0, 1e-15);
    EXPECT_NEAR(u_hat_sup(p), 2.0, 1e-12);
}

TEST(SingleSite, OverlappingDecayIsValidated) {
    EXPECT_THROW(SingleSitePotential::overlapping({{Site{3, 0, 0}, 1.0}}, 1.0, 1.0), PreconditionError);
    auto e = SingleSitePotential::exponential(1.0, 2.0, true);
    EXPECT_LT(e.value(Site{1, 0, 0}), 0.0);
    EXPECT_GT(e.value(Site{1, 1, 0}), 0.0);
    EXPECT_GE(e.truncation_radius(), static_cast<int>(std::log(1e12) / 2.0));
    for (const auto& [x, v] : e.values()) EXPECT_LE(std::abs(v), std::exp(-2.0 * euclidean_norm(x)) * (1 + 1e-14));
}

TEST(SingleSite, NonOverlappingCell) {
    auto u = SingleSitePotential::nonoverlapping({{Site{0, 0, 0}, 1.0}, {Site{1, 0, 0}, -1.0}}, {2, 1, 1},
                                                  {Site{0, 0, 0}, Site{1, 0, 0}});
    EXPECT_EQ(u.cell_size(), 2u);
    EXPECT_EQ(u.cell_diameter(), 1);
    auto D = u.cell_diagonal();
    EXPECT_DOUBLE_EQ(D[0], 1.0);
    EXPECT_DOUBLE_EQ(D[1], -1.0);
    auto [i, l] = u.cell_decompose(Site{5, -3, 2});
    EXPECT_EQ(i, 1u);
    EXPECT_EQ(l, (Site{4, -3, 2}));
    EXPECT_TRUE(u.on_period_lattice(Site{-2, 7, 1}));
    EXPECT_FALSE(u.on_period_lattice(Site{1, 0, 0}));
    EXPECT_THROW(u_hat(u, Momentum()), UnsupportedVariantError);
    // wrong cell size and support outside the cell
    EXPECT_THROW(SingleSitePotential::nonoverlapping({{Site{}, 1.0}}, {2, 1, 1}, {Site{}}), PreconditionError);
    EXPECT_THROW(SingleSitePotential::nonoverlapping({{Site{0, 1, 0}, 1.0}}, {2, 1, 1}, {Site{}, Site{1, 0, 0}}),
                 PreconditionError);
}

class DensityTest : public ::testing::TestWithParam<DensityKind> {};

TEST_P(DensityTest, NormalizedUnitVarianceAndConsistentMoments) {
    auto rho = DisorderDensity::from_kind(GetParam());
    const double a = rho.half_width();
    EXPECT_NEAR(integrate([&](double x) { return rho.pdf(x); }, -a, a), 1.0, 1e-10);
    EXPECT_NEAR(integrate([&](double x) { return x * x * rho.pdf(x); }, -a, a), 1.0, 1e-10);
    EXPECT_DOUBLE_EQ(rho.even_moment(0), 1.0);
    EXPECT_NEAR(rho.even_moment(1), 1.0, 1e-12);
    for (int l = 2; l <= 4; ++l)
        EXPECT_NEAR(rho.even_moment(l),
                    integrate([&](double x) { return std::pow(x, 2 * l) * rho.pdf(x); }, -a, a), 1e-9);
    for (double u : {0.01, 0.3, 0.5, 0.77, 0.999}) EXPECT_NEAR(rho.cdf(rho.inverse_cdf(u)), u, 1e-12);
    EXPECT_GE(rho.sup(), rho.pdf(0.3 * a));
}

INSTANTIATE_TEST_SUITE_P(Presets, DensityTest,
                         ::testing::Values(DensityKind::Uniform, DensityKind::RaisedCosine, DensityKind::SqrtBump));

TEST(Density, RationalMoments) {
    auto u = DisorderDensity::uniform();
    auto m2 = u.even_moment_fraction(2);
    ASSERT_TRUE(m2);
    EXPECT_EQ(m2->first * 5, m2->second * 9);  // m4 = 9/5
    EXPECT_FALSE(DisorderDensity::raised_cosine().even_moment_fraction(2).has_value());
}

TEST(Disorder, DeterministicDrawsAndCoverage) {
    auto rho = DisorderDensity::uniform();
    SeedRecord s{42, 3};
    EXPECT_EQ(draw_coupling(rho, s, Site{1, 2, 3}), draw_coupling(rho, s, Site{1, 2, 3}));
    EXPECT_NE(draw_coupling(rho, s, Site{1, 2, 3}), draw_coupling(rho, SeedRecord{42, 4}, Site{1, 2, 3}));

    auto u = SingleSitePotential::exponential(1.0, 2.0, false);
    Region r(Box{Site{}, 2});
    auto ds = sample_disorder(rho, r, u, s);
    for (const Site& x : r.sites()) EXPECT_NO_THROW(alloy_potential(ds, u, x));
    DisorderSample empty;
    EXPECT_THROW(empty.at(Site{}), IncompleteSampleError);

    // the sample mean and variance of many couplings match the density
    double m = 0, v = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        double w = draw_coupling(rho, SeedRecord{7, 0}, Site{i, 0, 0});
        m += w;
        v += w * w;
    }
    EXPECT_NEAR(m / n, 0.0, 0.03);
    EXPECT_NEAR(v / n, 1.0, 0.03);
}
