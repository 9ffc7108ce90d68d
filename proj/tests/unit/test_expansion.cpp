#include <gtest/gtest.h>

#include <cmath>

#include "anderson/errors.hpp"
#include "anderson/expansion.hpp"
#include "anderson/partitions.hpp"
#include "anderson/rng.hpp"

using namespace anderson;

namespace {

SingleSitePotential cell_dipole() {
    return SingleSitePotential::nonoverlapping({{Site{0, 0, 0}, 1.0}, {Site{1, 0, 0}, -1.0}}, {2, 1, 1},
                                               {Site{0, 0, 0}, Site{1, 0, 0}});
}

std::vector<Rational> uniform_moments(int l_max) {
    std::vector<Rational> m;
    auto rho = DisorderDensity::uniform();
    for (int l = 0; l <= l_max; ++l) {
        auto f = rho.even_moment_fraction(l);
        m.emplace_back(Rational(f->first) / Rational(f->second));
    }
    return m;
}

BoxOperators operators(const Region& region, double lambda, double E, double eps, const SingleSitePotential& u,
                       std::uint64_t seed) {
    auto se = self_energy_on_region(region, u, lambda, E, eps);
    auto ds = sample_disorder(DisorderDensity::uniform(), region, u, SeedRecord{seed, 0});
    return make_box_operators(FiniteHamiltonian::build(region, lambda, u, ds), se.sigma, E, eps);
}

}  // namespace

TEST(Terms, SmallOrdersAndFibonacciCounts) {
    auto t1 = enumerate_terms(1);
    ASSERT_EQ(t1.size(), 1u);
    EXPECT_EQ(t1[0].tags, "V");
    auto t2 = enumerate_terms(2);
    ASSERT_EQ(t2.size(), 2u);
    EXPECT_EQ(t2[0].tags, "VV");
    EXPECT_EQ(t2[1].tags, "B");
    auto t3 = enumerate_terms(3);
    ASSERT_EQ(t3.size(), 3u);
    EXPECT_EQ(t3[0].tags, "VVV");
    EXPECT_EQ(t3[1].tags, "VB");
    EXPECT_EQ(t3[2].tags, "BV");
    std::size_t a = 1, b = 2;
    for (int l = 3; l <= 12; ++l) {
        const std::size_t c = a + b;
        auto t = enumerate_terms(l);
        EXPECT_EQ(t.size(), c) << "order " << l;
        for (const auto& term : t) EXPECT_EQ(term.order(), l);
        a = b;
        b = c;
    }
    EXPECT_THROW(enumerate_terms(13), GuardError);
}

TEST(Partitions, SmallCases) {
    auto p1 = enumerate_partitions(1);
    ASSERT_EQ(p1.size(), 1u);
    EXPECT_EQ(p1[0].blocks, (std::vector<std::vector<int>>{{1, 3}}));
    EXPECT_FALSE(p1[0].tadpole[0]);

    auto p2 = enumerate_partitions(2);
    ASSERT_EQ(p2.size(), 4u);
    int tadpoles = 0;
    for (const auto& p : p2)
        for (std::size_t b = 0; b < p.blocks.size(); ++b)
            if (p.tadpole[b]) {
                ++tadpoles;
                EXPECT_TRUE(p.blocks[b] == (std::vector<int>{1, 2}) || p.blocks[b] == (std::vector<int>{4, 5}));
            }
    EXPECT_EQ(tadpoles, 2);
    EXPECT_EQ(enumerate_partitions(3).size(), 31u);
    for (int n = 2; n <= 12; n += 2) EXPECT_EQ(even_partitions_of(n).size(), even_partition_count(n));
    EXPECT_EQ(enumerate_partitions(6).size(), even_partition_count(12));
    EXPECT_THROW(enumerate_partitions(7), GuardError);
    EXPECT_EQ(upsilon(2), (std::vector<int>{1, 2, 4, 5}));
}

TEST(Cumulants, UniformDensity) {
    auto m = uniform_moments(4);
    EXPECT_EQ(m[2], Rational(9, 5));
    auto c = cumulants_from_moments(m, 4);
    EXPECT_EQ(c[1], Rational(1));
    EXPECT_EQ(c[2], Rational(-6, 5));
    EXPECT_EQ(c[2], m[2] - 3);
    // back-substitution: m_{2l} is the partition sum at full coincidence
    for (int l = 1; l <= 4; ++l) EXPECT_EQ(partition_sum_moment(std::vector<Site>(2 * l, Site{}), c), m[l]);
    std::vector<double> md;
    for (int l = 0; l <= 6; ++l) md.push_back(DisorderDensity::uniform().even_moment(l));
    EXPECT_GT(cumulant_growth_constant(cumulants_from_moments(md, 6)), 0.0);
    EXPECT_THROW(cumulants_from_moments(std::vector<double>{1.0, 2.0, 3.0}, 2), PreconditionError);
}

TEST(Tadpoles, WorkedExamples) {
    auto m = uniform_moments(4);
    auto parts = enumerate_partitions(2);
    auto distinct = tadpole_cancellation_check<Rational>(2, {Site{0, 0, 0}, Site{1, 0, 0}, Site{2, 0, 0}, Site{3, 0, 0}}, m, parts);
    EXPECT_EQ(distinct.lhs, 0);
    EXPECT_EQ(distinct.rhs, 0);
    auto crossed = tadpole_cancellation_check<Rational>(2, {Site{0, 0, 0}, Site{1, 0, 0}, Site{0, 0, 0}, Site{1, 0, 0}}, m, parts);
    EXPECT_EQ(crossed.lhs, 1);
    EXPECT_EQ(crossed.rhs, 1);
    auto tad = tadpole_cancellation_check<Rational>(2, {Site{0, 0, 0}, Site{0, 0, 0}, Site{2, 0, 0}, Site{3, 0, 0}}, m, parts);
    EXPECT_EQ(tad.lhs, 0);
    EXPECT_EQ(tad.rhs, 0);
}

TEST(Tadpoles, ExactForAllPatternsUpToThree) {
    auto m = uniform_moments(6);
    for (int N = 1; N <= 3; ++N) {
        auto parts = enumerate_partitions(N);
        for (const auto& pat : coincidence_patterns(2 * N)) {
            auto r = tadpole_cancellation_check<Rational>(N, positions_from_pattern(pat), m, parts);
            EXPECT_TRUE(r.equal) << "N=" << N;
        }
    }
}

TEST(MomentIdentity, MonteCarloMatchesPartitionSum) {
    auto rho = DisorderDensity::uniform();
    std::vector<double> md;
    for (int l = 0; l <= 3; ++l) md.push_back(rho.even_moment(l));
    auto cum = cumulants_from_moments(md, 3);
    SplitMix64 rng(99);
    const int draws = 4000;
    int outside = 0, total = 0;
    for (const auto& pat : coincidence_patterns(6)) {
        const int classes = *std::max_element(pat.begin(), pat.end()) + 1;
        double sum = 0.0, sum2 = 0.0;
        std::vector<double> w(static_cast<std::size_t>(classes));
        for (int d = 0; d < draws; ++d) {
            for (auto& v : w) v = rho.inverse_cdf(rng.uniform());
            double prod = 1.0;
            for (int c : pat) prod *= w[static_cast<std::size_t>(c)];
            sum += prod;
            sum2 += prod * prod;
        }
        const double mean = sum / draws;
        const double se = std::sqrt((sum2 / draws - mean * mean) / (draws - 1));
        const double pred = partition_sum_moment(positions_from_pattern(pat), cum);
        EXPECT_NEAR(pred, joint_moment(positions_from_pattern(pat), md), 1e-12);
        ++total;
        if (std::abs(mean - pred) > 4.0 * se) ++outside;
    }
    EXPECT_EQ(total, 203);
    EXPECT_LE(outside, 1);
}

TEST(Operators, OrderZeroAndTermSums) {
    Region box(Box{Site{}, 2});
    auto ops = operators(box, 0.1, -0.05, 1e-3, SingleSitePotential::delta(), 1);
    EXPECT_EQ((build_A(0, ops) - ops.Rr).norm(), 0.0);
    for (int l = 1; l <= 4; ++l)
        EXPECT_LE(spectral_norm(build_A(l, ops) - build_A_from_terms(l, ops)), 1e-12 * (1.0 + spectral_norm(build_A(l, ops))));
    // ℓ = 2: λ² R V R V R − R Σ R, with θ_V = −λV
    const Eigen::MatrixXcd V = ops.theta_V.asDiagonal();
    const Eigen::MatrixXcd A2 = ops.Rr * V * ops.Rr * V * ops.Rr - ops.Rr * ops.Sigma * ops.Rr;
    EXPECT_LE(spectral_norm(build_A(2, ops) - A2), 1e-13);
}

TEST(Operators, ZeroCouplingKeepsOnlyBullets) {
    Region box(Box{Site{}, 2});
    auto ops = operators(box, 0.0, -0.05, 0.0, SingleSitePotential::delta(), 1);
    EXPECT_EQ(ops.theta_V.norm(), 0.0);
    EXPECT_LE(spectral_norm(build_A(2, ops) + ops.Rr * ops.Sigma * ops.Rr), 1e-15);
    EXPECT_LE(telescoping_residual(3, ops), 1e-12);
}

TEST(Telescoping, IdentityAcrossVariants) {
    Region box5(Box{Site{}, 2});
    Region box6 = Region::cuboid(Site{0, 0, 0}, Site{5, 5, 5});
    struct Case {
        SingleSitePotential u;
        double E;
        TorusGrid grid;
    };
    std::vector<Case> cases{{SingleSitePotential::delta(), -0.05, TorusGrid{}},
                            {SingleSitePotential::dipole(), -0.05, TorusGrid{}},
                            {cell_dipole(), -0.2, TorusGrid{64, true}}};
    for (const auto& c : cases)
        for (const Region* r : {&box5, &box6}) {
            auto ds = sample_disorder(DisorderDensity::uniform(), *r, c.u, SeedRecord{7, 1});
            auto se = self_energy_on_region(*r, c.u, 0.1, c.E, 1e-3, c.grid);
            auto ops = make_box_operators(FiniteHamiltonian::build(*r, 0.1, c.u, ds), se.sigma, c.E, 1e-3);
            for (int N = 1; N <= 4; ++N) {
                EXPECT_LE(telescoping_residual(N, ops), 1e-9) << to_string(c.u.kind()) << " N=" << N;
                EXPECT_LE(spectral_norm(build_A_tilde(N, ops) - build_A_tilde_alt(N, ops)), 1e-9);
            }
        }
}

TEST(MonteCarlo, OrderZeroIsDeterministic) {
    Region box(Box{Site{}, 3});
    auto u = SingleSitePotential::delta();
    auto [m, se] = mc_moment_A(box, 0.1, -0.1, 0.0, u, DisorderDensity::uniform(), 0, Site{}, Site{1, 0, 0}, 100, 1);
    EXPECT_EQ(se, 0.0);
    auto ops = operators(box, 0.1, -0.1, 0.0, u, 1);
    const auto i = box.index(Site{}), j = box.index(Site{1, 0, 0});
    EXPECT_NEAR(m, std::norm(ops.Rr(i, j)), 1e-14);
    EXPECT_THROW(mc_moment_A(box, 0.1, -0.1, 0.0, u, DisorderDensity::uniform(), 1, Site{}, Site{}, 50, 1),
                 PreconditionError);
}

TEST(MonteCarlo, ColumnRecursionMatchesDenseA) {
    Region box(Box{Site{}, 2});
    auto u = SingleSitePotential::delta();
    const double lam = 0.1, E = -0.1;
    auto se = self_energy_on_region(box, u, lam, E, 0.0);
    AMomentEstimator est(box, lam, E, 0.0, u, DisorderDensity::uniform(), se.sigma);
    auto r = est.run(3, {{Site{}, Site{1, 1, 0}}}, 2, 5);
    auto ds = sample_disorder(DisorderDensity::uniform(), box, u, SeedRecord{5, 1});
    auto ops = make_box_operators(FiniteHamiltonian::build(box, lam, u, ds), se.sigma, E, 0.0);
    const cplx a = build_A(3, ops)(box.index(Site{}), box.index(Site{1, 1, 0}));
    EXPECT_NEAR(r.values(1, 0), std::norm(a), 1e-12 * std::norm(a));
}

TEST(MonteCarlo, ThreadCountInvariant) {
    Region box(Box{Site{}, 3});
    auto u = SingleSitePotential::delta();
    auto se = self_energy_on_region(box, u, 0.1, -0.1, 0.0);
    AMomentEstimator est(box, 0.1, -0.1, 0.0, u, DisorderDensity::uniform(), se.sigma);
    auto a = est.run(2, {{Site{}, Site{}}, {Site{}, Site{2, 0, 0}}}, 40, 3, 1);
    auto b = est.run(2, {{Site{}, Site{}}, {Site{}, Site{2, 0, 0}}}, 40, 3, 3);
    EXPECT_EQ((a.values - b.values).norm(), 0.0);
}

TEST(MonteCarlo, DoublingSamplesIsConsistent) {
    Region box(Box{Site{}, 3});
    auto u = SingleSitePotential::delta();
    auto a = mc_moment_A(box, 0.1, -0.1, 0.0, u, DisorderDensity::uniform(), 1, Site{}, Site{}, 200, 11);
    auto b = mc_moment_A(box, 0.1, -0.1, 0.0, u, DisorderDensity::uniform(), 1, Site{}, Site{}, 400, 11);
    EXPECT_LE(std::abs(a.first - b.first), 3.0 * std::hypot(a.second, b.second));
}
