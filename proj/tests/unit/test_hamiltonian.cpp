#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "anderson/errors.hpp"
#include "anderson/green.hpp"
#include "anderson/hamiltonian.hpp"
#include "oracles.hpp"

using namespace anderson;

namespace {

FiniteHamiltonian random_box(int L, double lambda, std::uint64_t seed) {
    Box b{Site{}, L};
    auto u = SingleSitePotential::delta();
    return FiniteHamiltonian::build(b, lambda, u, sample_disorder(DisorderDensity::uniform(), Region(b), u,
                                                                  SeedRecord{seed, 0}));
}

}  // namespace

TEST(FiniteHamiltonian, StructureOfTheMatrix) {
    auto H = random_box(2, 0.3, 7);
    const auto& M = H.matrix();
    EXPECT_EQ(H.dim(), 125u);
    EXPECT_EQ((Eigen::MatrixXd(M) - Eigen::MatrixXd(M).transpose()).norm(), 0.0);
    for (int k = 0; k < M.outerSize(); ++k)
        for (SparseReal::InnerIterator it(M, k); it; ++it)
            if (it.row() != it.col()) EXPECT_EQ(it.value(), -0.5);
            else EXPECT_NEAR(it.value(), 3.0 + H.potential()[static_cast<std::size_t>(it.row())], 1e-15);
    auto F = FiniteHamiltonian::free(Region(Box{Site{}, 2}));
    EXPECT_EQ(F.matrix().coeff(F.region().index(Site{}), F.region().index(Site{})), 3.0);
}

TEST(FiniteHamiltonian, FreeSpectrumIsTensorProduct) {
    auto F = FiniteHamiltonian::free(Region(Box{Site{}, 1}));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(F.dense());
    EXPECT_NEAR(es.eigenvalues()(0), 3.0 * (1.0 - std::cos(std::numbers::pi / 4.0)), 1e-12);
    EXPECT_GE(es.eigenvalues()(0), 0.0);
    EXPECT_LE(es.eigenvalues()(26), 6.0);
    EXPECT_NEAR(ground_energy(F), 3.0 * (1.0 - std::cos(std::numbers::pi / 4.0)), 1e-9);
}

TEST(FiniteHamiltonian, IncompleteSampleThrows) {
    Box b{Site{}, 1};
    DisorderSample empty;
    EXPECT_THROW(FiniteHamiltonian::build(b, 0.1, SingleSitePotential::delta(), empty), IncompleteSampleError);
}

TEST(FiniteHamiltonian, TripletsHaveAHeader) {
    auto F = FiniteHamiltonian::free(Region(Box{Site{}, 0}));
    std::ostringstream os;
    F.write_triplets(os);
    EXPECT_EQ(os.str().rfind("# 1 1", 0), 0u);
}

TEST(Resolvent, DeepEnergyApproximatesFreeGreen) {
    auto F = FiniteHamiltonian::free(Region(Box{Site{}, 8}));
    const cplx r = resolvent_entry(F, -1.0, 0.0, Site{}, Site{3, 0, 0});
    const double g = oracle::free_green(-1.0, {3, 0, 0});
    EXPECT_NEAR(r.real() / g, 1.0, 0.05);
}

TEST(Resolvent, SymmetryAndEpsBound) {
    auto H = random_box(3, 0.5, 11);
    ResolventSolver s(H, 2.0, 0.05);
    const cplx a = s.entry(Site{1, 0, -1}, Site{-2, 1, 0});
    const cplx b = s.entry(Site{-2, 1, 0}, Site{1, 0, -1});
    EXPECT_NEAR(std::abs(a - b), 0.0, 1e-12);
    for (const Site& x : H.region().sites()) EXPECT_LE(std::abs(s.entry(x, Site{})), 1.0 / 0.05 + 1e-9);
}

TEST(Resolvent, IterativeSolverAgreesWithDirect) {
    auto H = random_box(10, 0.2, 3);  // 9261 sites, above the direct limit
    ResolventSolver it(H, -0.3, 1e-3);
    EXPECT_TRUE(it.iterative());
    const cplx r = it.entry(Site{2, 0, 0}, Site{});
    EXPECT_LE(it.last_residual(), 1e-10);
    // same realization on the inner 15³ box, boundary far away
    auto u = SingleSitePotential::delta();
    Box inner{Site{}, 7};
    auto Hi = FiniteHamiltonian::build(inner, 0.2, u,
                                       sample_disorder(DisorderDensity::uniform(), Region(inner), u, SeedRecord{3, 0}));
    const cplx ri = resolvent_entry(Hi, -0.3, 1e-3, Site{2, 0, 0}, Site{});
    EXPECT_NEAR(std::abs(r - ri) / std::abs(r), 0.0, 1e-3);
    // real energies factor directly at any size
    ResolventSolver real(H, -0.3, 0.0);
    EXPECT_FALSE(real.iterative());
    EXPECT_NEAR(std::abs(real.entry(Site{2, 0, 0}, Site{}) - r) / std::abs(r), 0.0, 1e-2);
}

TEST(Resolvent, EigenvalueHitIsReported) {
    Region one(Box{Site{}, 0});
    auto H = FiniteHamiltonian::from_potential(one, {0.25});
    EXPECT_THROW(ResolventSolver(H, 3.25, 0.0), EigenvalueHitError);
    EXPECT_NEAR(resolvent_entry(H, 3.0, 0.0, Site{}, Site{}).real(), 4.0, 1e-12);
}

TEST(Resolvent, RestrictionConsistencyDecays) {
    auto u = SingleSitePotential::delta();
    const Box big{Site{}, 9};
    auto ds = sample_disorder(DisorderDensity::uniform(), Region(big), u, SeedRecord{5, 0});
    auto Hbig = FiniteHamiltonian::build(big, 0.2, u, ds);
    const cplx ref = resolvent_entry(Hbig, -0.5, 0.0, Site{}, Site{1, 0, 0});
    double prev = 1e300;
    for (int L : {3, 5, 7}) {
        auto H = FiniteHamiltonian::build(Box{Site{}, L}, 0.2, u, ds);
        const double d = std::abs(resolvent_entry(H, -0.5, 0.0, Site{}, Site{1, 0, 0}) - ref);
        EXPECT_LT(d, prev);
        prev = d;
    }
}

TEST(TraceProjector, CountsAndAdditivity) {
    auto F = FiniteHamiltonian::free(Region(Box{Site{}, 2}));
    EXPECT_EQ(trace_projector(F, SpectralWindow(-1.0, -0.01)), 0u);
    EXPECT_EQ(trace_projector(F, SpectralWindow{}), F.dim());
    auto H = random_box(2, 0.7, 13);
    const auto a = trace_projector(H, SpectralWindow(-1.0, 2.0));
    const auto b = trace_projector(H, SpectralWindow(2.0 + 1e-9, 4.0));
    const auto ab = trace_projector(H, SpectralWindow(-1.0, 4.0));
    EXPECT_EQ(a + b, ab);
    EXPECT_LE(trace_projector(H, SpectralWindow(0.0, 1.5)), a);

    Region one(Box{Site{}, 0});
    auto S = FiniteHamiltonian::from_potential(one, {0.4});
    EXPECT_EQ(trace_projector(S, SpectralWindow(3.3, 3.5)), 1u);
}

TEST(TraceProjector, InertiaMatchesDenseAboveTheDenseLimit) {
    auto H = random_box(6, 0.5, 17);  // 2197 sites
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H.dense(), Eigen::EigenvaluesOnly);
    const SpectralWindow w(0.5, 0.9);
    std::size_t n = 0;
    for (double v : es.eigenvalues()) n += (v >= w.a && v <= w.b);
    EXPECT_EQ(trace_projector(H, w), n);
}

TEST(SpectralWindow, DistanceToFreeSpectrum) {
    EXPECT_NEAR(SpectralWindow(-0.3, -0.1).distance_to_free_spectrum(), 0.1, 1e-15);
    EXPECT_NEAR(SpectralWindow(6.5, 7.0).distance_to_free_spectrum(), 0.5, 1e-15);
    EXPECT_EQ(SpectralWindow(-0.1, 0.1).distance_to_free_spectrum(), 0.0);
    EXPECT_THROW(SpectralWindow(1.0, 0.0), PreconditionError);
}

TEST(GroundEnergy, LanczosAndMonotonicity) {
    auto H = random_box(7, 0.3, 19);  // 3375 sites
    auto g = ground_state(H.matrix());
    EXPECT_FALSE(g.dense);
    EXPECT_LE(g.residual, 1e-6);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H.dense(), Eigen::EigenvaluesOnly);
    EXPECT_NEAR(g.energy, es.eigenvalues()(0), 1e-9 * std::max(1.0, std::abs(g.energy)));

    Region r(Box{Site{}, 3});
    std::vector<double> v(r.size(), 0.0);
    auto F = FiniteHamiltonian::from_potential(r, v);
    v[r.index(Site{})] = -0.5;
    auto G = FiniteHamiltonian::from_potential(r, v);
    EXPECT_LT(ground_energy(G), ground_energy(F));
    EXPECT_GT(ground_energy(F), 0.0);
}

TEST(DipoleWall, ClosedFormAndFiniteChain) {
    EXPECT_NEAR(dipole_wall_exact(0.1), 1.0 - std::sqrt(1.04), 1e-15);
    EXPECT_NEAR(dipole_wall_exact(0.1), -0.0198039, 1e-7);
    EXPECT_EQ(dipole_wall_exact(0.0), 0.0);
    EXPECT_NEAR(dipole_wall_exact(1e-3) / (-2e-6), 1.0, 2e-3);
    auto w = dipole_wall_ground(0.1, 200);
    EXPECT_LE(std::abs(w.E_finite - w.E_m_exact), 1e-4);
    double prev = 1.0;
    for (int L : {20, 40, 80, 160}) {
        const double e = dipole_chain_energy(0.1, L);
        EXPECT_LT(e, prev);
        prev = e;
    }
    EXPECT_THROW(dipole_wall_ground(0.5, 200), PreconditionError);
    EXPECT_THROW(dipole_wall_ground(0.1, 10), PreconditionError);
}

TEST(DipoleWall, SlabIsChainPlusTransverseCost) {
    auto g = dipole_slab_ground(0.2, 6, 10);
    const double transverse = 2.0 * (1.0 - std::cos(std::numbers::pi / 22.0));
    EXPECT_NEAR(g.energy, dipole_chain_energy(0.2, 6) + transverse, 1e-8);
}
