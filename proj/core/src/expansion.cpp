#include "anderson/expansion.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <thread>

#include <Eigen/LU>
#include <Eigen/SVD>
#include <Eigen/SparseLU>

#include "anderson/errors.hpp"

namespace anderson {

int Term::order() const {
    int o = 0;
    for (char c : tags) o += (c == 'B') ? 2 : 1;
    return o;
}

std::vector<Term> enumerate_terms(int order) {
    if (order < 1) throw PreconditionError("enumerate_terms: order must be >= 1");
    if (order > 12) throw GuardError("enumerate_terms: order > 12");
    std::vector<Term> out;
    std::string cur;
    std::function<void(int)> rec = [&](int left) {
        if (left == 0) {
            out.push_back(Term{cur});
            return;
        }
        cur.push_back('V');
        rec(left - 1);
        cur.pop_back();
        if (left >= 2) {
            cur.push_back('B');
            rec(left - 2);
            cur.pop_back();
        }
    };
    rec(order);
    return out;
}

SelfEnergyRealization realize_scalar(const Region& region, const std::vector<std::pair<Site, cplx>>& coefficients) {
    const auto n = static_cast<Eigen::Index>(region.size());
    std::vector<Eigen::Triplet<cplx>> t;
    SelfEnergyRealization out;
    for (std::size_t i = 0; i < region.size(); ++i) {
        const Site& x = region.site(i);
        double dropped = 0.0;
        for (const auto& [k, c] : coefficients) {
            if (c == cplx(0.0)) continue;
            auto j = region.index(x + k);
            if (j >= 0)
                t.emplace_back(static_cast<int>(i), static_cast<int>(j), c);
            else
                dropped += std::abs(c);
        }
        out.dropped_weight = std::max(out.dropped_weight, dropped);
    }
    out.sigma.resize(n, n);
    out.sigma.setFromTriplets(t.begin(), t.end());
    out.sigma.makeCompressed();
    return out;
}

SelfEnergyRealization realize_matrix(const Region& region, const SingleSitePotential& u, const CellMatrix& sigma) {
    if (u.kind() != PotentialKind::NonOverlapping)
        throw UnsupportedVariantError("realize_matrix: needs a non-overlapping potential");
    const std::size_t m = u.cell_size();
    if (static_cast<std::size_t>(sigma.rows()) != m || static_cast<std::size_t>(sigma.cols()) != m)
        throw PreconditionError("realize_matrix: σ does not match the cell size");
    const auto n = static_cast<Eigen::Index>(region.size());
    std::vector<Eigen::Triplet<cplx>> t;
    SelfEnergyRealization out;
    for (std::size_t a = 0; a < region.size(); ++a) {
        const auto [i, l] = u.cell_decompose(region.site(a));
        double dropped = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            const cplx v = sigma(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            if (v == cplx(0.0)) continue;
            auto b = region.index(u.cell()[j] + l);
            if (b >= 0)
                t.emplace_back(static_cast<int>(a), static_cast<int>(b), v);
            else
                dropped += std::abs(v);
        }
        out.dropped_weight = std::max(out.dropped_weight, dropped);
    }
    out.sigma.resize(n, n);
    out.sigma.setFromTriplets(t.begin(), t.end());
    out.sigma.makeCompressed();
    return out;
}

SelfEnergyRealization self_energy_on_region(const Region& region, const SingleSitePotential& u, double lambda,
                                            double E, double eps, const TorusGrid& grid) {
    switch (u.kind()) {
        case PotentialKind::Overlapping:
            return realize_scalar(region, solve_sigma_overlapping(lambda, E, eps, u, grid).coefficients);
        case PotentialKind::Dipole:
            return realize_scalar(region, solve_sigma_dipole(lambda, E, eps, grid).coefficients());
        case PotentialKind::NonOverlapping:
            return realize_matrix(region, u, solve_sigma_nonoverlapping(lambda, E, eps, u, grid).sigma);
    }
    throw UnsupportedVariantError("self_energy_on_region: unknown variant");
}

namespace {

Eigen::MatrixXcd checked_inverse(const Eigen::MatrixXcd& m, const char* what) {
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m);
    if (!(lu.rcond() > 1e-14)) throw ConditioningError(std::string(what) + ": matrix is numerically singular");
    return lu.inverse();
}

}  // namespace

BoxOperators make_box_operators(const FiniteHamiltonian& H, const SparseComplex& sigma, double E, double eps) {
    const auto n = static_cast<Eigen::Index>(H.dim());
    if (sigma.rows() != n || sigma.cols() != n)
        throw PreconditionError("make_box_operators: Σ and H live on different regions");
    const cplx z(E, eps);
    const Eigen::MatrixXd Hd = H.dense();
    Eigen::VectorXd lv(n);
    for (Eigen::Index i = 0; i < n; ++i) lv(i) = H.potential()[static_cast<std::size_t>(i)];

    BoxOperators ops;
    ops.Sigma = Eigen::MatrixXcd(sigma);
    Eigen::MatrixXcd H0 = Hd.cast<cplx>();
    H0.diagonal() -= lv.cast<cplx>();
    ops.Hr_minus_z = H0 - ops.Sigma;
    ops.Hr_minus_z.diagonal().array() -= z;
    ops.Rr = checked_inverse(ops.Hr_minus_z, "make_box_operators: H_r - z");
    Eigen::MatrixXcd Hz = Hd.cast<cplx>();
    Hz.diagonal().array() -= z;
    ops.R = checked_inverse(Hz, "make_box_operators: H - z");
    ops.theta_V = (-lv).cast<cplx>();
    return ops;
}

Eigen::MatrixXcd term_product(const Term& t, const BoxOperators& ops) {
    Eigen::MatrixXcd P = ops.Rr;
    for (char c : t.tags) {
        if (c == 'V')
            P = P * ops.theta_V.asDiagonal();
        else
            P = -(P * ops.Sigma);
        P = P * ops.Rr;
    }
    return P;
}

namespace {

// A'_0 … A'_order
std::vector<Eigen::MatrixXcd> primed_sequence(int order, const BoxOperators& ops) {
    const Eigen::Index n = ops.dim();
    if (ops.Sigma.rows() != n || ops.theta_V.size() != n || ops.R.rows() != n)
        throw PreconditionError("expansion: operator blocks have mismatched dimensions");
    if (order > 64) throw GuardError("expansion: order > 64");
    const Eigen::MatrixXcd MV = ops.Rr * ops.theta_V.asDiagonal();
    const Eigen::MatrixXcd MB = -(ops.Rr * ops.Sigma);
    std::vector<Eigen::MatrixXcd> P;
    P.push_back(Eigen::MatrixXcd::Identity(n, n));
    for (int l = 1; l <= order; ++l) {
        Eigen::MatrixXcd next = MV * P[static_cast<std::size_t>(l - 1)];
        if (l >= 2) next += MB * P[static_cast<std::size_t>(l - 2)];
        P.push_back(std::move(next));
    }
    return P;
}

}  // namespace

Eigen::MatrixXcd build_A(int order, const BoxOperators& ops) {
    if (order < 0) throw PreconditionError("build_A: order must be >= 0");
    return primed_sequence(order, ops).back() * ops.Rr;
}

Eigen::MatrixXcd build_A_from_terms(int order, const BoxOperators& ops) {
    if (order == 0) return ops.Rr;
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(ops.dim(), ops.dim());
    for (const Term& t : enumerate_terms(order)) A += term_product(t, ops);
    return A;
}

Eigen::MatrixXcd build_A_tilde(int N, const BoxOperators& ops) {
    if (N < 1) throw PreconditionError("build_A_tilde: N must be >= 1");
    auto P = primed_sequence(N, ops);
    const Eigen::MatrixXcd A_prev = P[static_cast<std::size_t>(N - 1)] * ops.Rr;
    return P[static_cast<std::size_t>(N)] - A_prev * ops.Sigma;
}

Eigen::MatrixXcd build_A_tilde_alt(int N, const BoxOperators& ops) {
    if (N < 1) throw PreconditionError("build_A_tilde_alt: N must be >= 1");
    return build_A(N, ops) * ops.Hr_minus_z - build_A(N - 1, ops) * ops.Sigma;
}

double spectral_norm(const Eigen::MatrixXcd& m) {
    if (m.size() == 0) return 0.0;
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(m);
    return svd.singularValues()(0);
}

double telescoping_residual(int N, const BoxOperators& ops) {
    if (N < 1) throw PreconditionError("telescoping_residual: N must be >= 1");
    auto P = primed_sequence(N, ops);
    Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(ops.dim(), ops.dim());
    for (int l = 0; l < N; ++l) S += P[static_cast<std::size_t>(l)] * ops.Rr;
    const Eigen::MatrixXcd A_prev = P[static_cast<std::size_t>(N - 1)] * ops.Rr;
    const Eigen::MatrixXcd At = P[static_cast<std::size_t>(N)] - A_prev * ops.Sigma;
    S += At * ops.R;
    return spectral_norm(ops.R - S);
}

TelescopingReport telescoping_check(const Region& region, double lambda, double E, double eps,
                                    const SingleSitePotential& u, const DisorderSample& sample, int N,
                                    const TorusGrid& grid) {
    auto se = self_energy_on_region(region, u, lambda, E, eps, grid);
    auto H = FiniteHamiltonian::build(region, lambda, u, sample);
    auto ops = make_box_operators(H, se.sigma, E, eps);
    TelescopingReport r;
    r.N = N;
    r.residual = telescoping_residual(N, ops);
    r.tilde_agreement = spectral_norm(build_A_tilde(N, ops) - build_A_tilde_alt(N, ops));
    r.sigma_dropped = se.dropped_weight;
    return r;
}

std::pair<double, double> MomentSamples::paired_difference(std::size_t i, std::size_t j) const {
    const auto n = values.rows();
    if (n < 2) throw PreconditionError("paired_difference: need at least two samples");
    const Eigen::VectorXd d = values.col(static_cast<Eigen::Index>(i)) - values.col(static_cast<Eigen::Index>(j));
    const double mean = d.mean();
    const double var = (d.array() - mean).square().sum() / static_cast<double>(n - 1);
    return {mean, std::sqrt(var / static_cast<double>(n))};
}

struct AMomentEstimator::Impl {
    Region region;
    double lambda = 0.0;
    SingleSitePotential u;
    DisorderDensity rho;
    SparseComplex theta_B;
    Eigen::SparseLU<SparseComplex> lu;
};

AMomentEstimator::AMomentEstimator(const Region& region, double lambda, double E, double eps, SingleSitePotential u,
                                   DisorderDensity rho, const SparseComplex& sigma)
    : impl_(std::make_unique<Impl>()) {
    const auto n = static_cast<Eigen::Index>(region.size());
    if (sigma.rows() != n || sigma.cols() != n) throw PreconditionError("AMomentEstimator: Σ has the wrong size");
    impl_->region = region;
    impl_->lambda = lambda;
    impl_->u = std::move(u);
    impl_->rho = std::move(rho);
    impl_->theta_B = -sigma;
    SparseComplex A = FiniteHamiltonian::free(region).matrix().cast<cplx>();
    A -= sigma;
    for (Eigen::Index k = 0; k < A.outerSize(); ++k)
        for (SparseComplex::InnerIterator it(A, k); it; ++it)
            if (it.row() == it.col()) it.valueRef() -= cplx(E, eps);
    A.makeCompressed();
    impl_->lu.compute(A);
    if (impl_->lu.info() != Eigen::Success) throw ConditioningError("AMomentEstimator: H_r - z is singular");
}

AMomentEstimator::~AMomentEstimator() = default;

MomentSamples AMomentEstimator::run(int order, const std::vector<std::pair<Site, Site>>& pairs, int samples,
                                    std::uint64_t seed, int threads) const {
    if (order < 0) throw PreconditionError("AMomentEstimator: order must be >= 0");
    if (samples < 1) throw PreconditionError("AMomentEstimator: need at least one sample");
    const Impl& im = *impl_;
    const auto n = static_cast<Eigen::Index>(im.region.size());

    // A_ℓ is complex symmetric, so A(x, y) can be read from the column at either end.
    std::vector<Site> columns;
    std::map<Site, std::size_t> column_of;
    std::vector<std::pair<std::size_t, Eigen::Index>> lookup;  // (column, row) per pair
    for (const auto& [x, y] : pairs) {
        if (!im.region.contains(x) || !im.region.contains(y))
            throw PreconditionError("AMomentEstimator: pair outside the region");
        Site col = y, row = x;
        if (!column_of.count(y) && column_of.count(x)) std::swap(col, row);
        if (!column_of.count(col)) {
            column_of[col] = columns.size();
            columns.push_back(col);
        }
        lookup.emplace_back(column_of[col], static_cast<Eigen::Index>(im.region.index(row)));
    }
    std::vector<Eigen::VectorXcd> base;
    for (const Site& c : columns) {
        Eigen::VectorXcd e = Eigen::VectorXcd::Zero(n);
        e(im.region.index(c)) = 1.0;
        base.push_back(im.lu.solve(e));
    }

    MomentSamples out;
    out.values.resize(samples, static_cast<Eigen::Index>(pairs.size()));

    auto one_sample = [&](int s) {
        Eigen::VectorXcd thetaV(n);
        if (order > 0) {
            auto ds = sample_disorder(im.rho, im.region, im.u, SeedRecord{seed, static_cast<std::uint64_t>(s)});
            for (Eigen::Index i = 0; i < n; ++i)
                thetaV(i) = -im.lambda * alloy_potential(ds, im.u, im.region.site(static_cast<std::size_t>(i)));
        }
        std::vector<Eigen::VectorXcd> top;
        for (const auto& w0 : base) {
            Eigen::VectorXcd prev = Eigen::VectorXcd::Zero(n), cur = w0;
            for (int l = 1; l <= order; ++l) {
                Eigen::VectorXcd rhs = thetaV.cwiseProduct(cur) + im.theta_B * prev;
                prev = std::move(cur);
                cur = im.lu.solve(rhs);
            }
            top.push_back(std::move(cur));
        }
        for (std::size_t p = 0; p < pairs.size(); ++p)
            out.values(s, static_cast<Eigen::Index>(p)) = std::norm(top[lookup[p].first](lookup[p].second));
    };

    const int T = std::max(1, std::min(threads, samples));
    if (T == 1) {
        for (int s = 0; s < samples; ++s) one_sample(s);
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < T; ++t)
            pool.emplace_back([&, t] {
                for (int s = t; s < samples; s += T) one_sample(s);
            });
    }

    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const Eigen::VectorXd v = out.values.col(static_cast<Eigen::Index>(p));
        PairMoment pm{pairs[p].first, pairs[p].second, v.mean(), 0.0};
        if (samples > 1) {
            const double var = (v.array() - pm.mean_sq).square().sum() / (samples - 1);
            pm.stderr = std::sqrt(var / samples);
        }
        out.pairs.push_back(pm);
    }
    return out;
}

std::pair<double, double> mc_moment_A(const Region& region, double lambda, double E, double eps,
                                      const SingleSitePotential& u, const DisorderDensity& rho, int order,
                                      const Site& x, const Site& y, int samples, std::uint64_t seed,
                                      const TorusGrid& grid) {
    if (samples < 100) throw PreconditionError("mc_moment_A: need at least 100 samples");
    auto se = self_energy_on_region(region, u, lambda, E, eps, grid);
    AMomentEstimator est(region, lambda, E, eps, u, rho, se.sigma);
    // A_0 = R_r is deterministic; one evaluation is exact.
    auto r = est.run(order, {{x, y}}, order == 0 ? 1 : samples, seed);
    return {r.pairs[0].mean_sq, r.pairs[0].stderr};
}

}  // namespace anderson
