#include "anderson/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "anderson/errors.hpp"
#include "anderson/rng.hpp"

namespace anderson {

namespace {

constexpr std::size_t kDenseLimit = 12 * 12 * 12;
constexpr std::size_t kDirectLimit = 20 * 20 * 20;

SparseReal assemble(const Region& region, const std::vector<double>& lambda_v) {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(region.size() * 7);
    for (std::size_t i = 0; i < region.size(); ++i) {
        const Site& x = region.site(i);
        t.emplace_back(static_cast<int>(i), static_cast<int>(i), 3.0 + lambda_v[i]);
        for (const Site& e : unit_vectors()) {
            auto j = region.index(x + e);
            if (j >= 0) t.emplace_back(static_cast<int>(i), static_cast<int>(j), -0.5);
        }
    }
    const auto n = static_cast<Eigen::Index>(region.size());
    SparseReal H(n, n);
    H.setFromTriplets(t.begin(), t.end());
    H.makeCompressed();
    return H;
}

SparseReal shifted(const SparseReal& H, double s) {
    SparseReal A = H;
    for (Eigen::Index k = 0; k < A.outerSize(); ++k)
        for (SparseReal::InnerIterator it(A, k); it; ++it)
            if (it.row() == it.col()) it.valueRef() -= s;
    return A;
}

using LDLT = Eigen::SimplicialLDLT<SparseReal, Eigen::Lower, Eigen::AMDOrdering<int>>;

std::size_t negative_pivots(const LDLT& f) {
    const auto d = f.vectorD();
    std::size_t c = 0;
    for (Eigen::Index i = 0; i < d.size(); ++i)
        if (d(i) < 0.0) ++c;
    return c;
}

// Shifted LDLᵀ factorizations of a fixed sparsity pattern.
class InertiaCounter {
public:
    explicit InertiaCounter(const SparseReal& H) : H_(H) { ldlt_.analyzePattern(H_); }
    std::size_t below(double s) {
        if (std::isinf(s)) return s < 0 ? 0 : static_cast<std::size_t>(H_.rows());
        ldlt_.factorize(shifted(H_, s));
        if (ldlt_.info() != Eigen::Success) throw ConditioningError("inertia count: LDL^T factorization failed");
        return negative_pivots(ldlt_);
    }

private:
    const SparseReal& H_;
    LDLT ldlt_;
};

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(8);
    os << x;
    return os.str();
}

}  // namespace

SpectralWindow::SpectralWindow(double lo, double hi) : a(lo), b(hi) {
    if (!(lo <= hi)) throw PreconditionError("SpectralWindow: need a <= b");
}

double SpectralWindow::distance_to_free_spectrum() const {
    if (b < 0.0) return -b;
    if (a > 6.0) return a - 6.0;
    return 0.0;
}

FiniteHamiltonian FiniteHamiltonian::build(const Region& region, double lambda, const SingleSitePotential& u,
                                           const DisorderSample& s) {
    std::vector<double> v(region.size());
    for (std::size_t i = 0; i < region.size(); ++i) v[i] = lambda * alloy_potential(s, u, region.site(i));
    FiniteHamiltonian H = from_potential(region, v, lambda);
    std::ostringstream os;
    os << "u=" << to_string(u.kind()) << " seed=" << s.seed().master_seed << ":" << s.seed().stream;
    H.provenance_ = os.str();
    return H;
}

FiniteHamiltonian FiniteHamiltonian::build(const Box& box, double lambda, const SingleSitePotential& u,
                                           const DisorderSample& s) {
    return build(Region(box), lambda, u, s);
}

FiniteHamiltonian FiniteHamiltonian::from_potential(const Region& region, const std::vector<double>& lambda_v,
                                                    double lambda) {
    if (lambda_v.size() != region.size()) throw PreconditionError("FiniteHamiltonian: potential size mismatch");
    FiniteHamiltonian H;
    H.region_ = std::make_shared<const Region>(region);
    H.lambda_ = lambda;
    H.lambda_v_ = lambda_v;
    H.H_ = assemble(region, lambda_v);
    H.provenance_ = "explicit potential";
    return H;
}

FiniteHamiltonian FiniteHamiltonian::free(const Region& region) {
    FiniteHamiltonian H = from_potential(region, std::vector<double>(region.size(), 0.0), 0.0);
    H.provenance_ = "free";
    return H;
}

void FiniteHamiltonian::write_triplets(std::ostream& os) const {
    os << "# " << H_.rows() << ' ' << H_.nonZeros() << '\n' << std::setprecision(17);
    for (Eigen::Index k = 0; k < H_.outerSize(); ++k)
        for (SparseReal::InnerIterator it(H_, k); it; ++it)
            os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

struct ResolventSolver::Impl {
    std::shared_ptr<const Region> region;
    enum class Mode { ComplexLU, RealLDLT, Iterative } mode = Mode::ComplexLU;
    Eigen::SparseLU<SparseComplex> lu;
    LDLT ldlt;
    Eigen::BiCGSTAB<SparseComplex, Eigen::IncompleteLUT<cplx>> bicg;
    SparseComplex A;
    mutable double residual = 0.0;
};

ResolventSolver::ResolventSolver(const FiniteHamiltonian& H, double E, double eps, double hit_eta)
    : impl_(std::make_unique<Impl>()) {
    impl_->region = H.region_ptr();
    const std::size_t n = H.dim();
    if (eps == 0.0) {
        InertiaCounter ic(H.matrix());
        if (ic.below(E - hit_eta) != ic.below(E + hit_eta))
            throw EigenvalueHitError("resolvent: eigenvalue within " + fmt(hit_eta) + " of E = " + fmt(E));
    }
    // The inertia check above already paid for an LDL^T of this size, and at real E below the
    // spectrum bottom H - E can be indefinite, where BiCGSTAB breaks down.
    if (eps == 0.0) {
        impl_->mode = Impl::Mode::RealLDLT;
        impl_->ldlt.compute(shifted(H.matrix(), E));
        if (impl_->ldlt.info() != Eigen::Success) throw EigenvalueHitError("resolvent: singular system");
    } else if (n > kDirectLimit) {
        impl_->mode = Impl::Mode::Iterative;
        impl_->A = H.matrix().cast<cplx>();
        for (Eigen::Index i = 0; i < impl_->A.rows(); ++i) impl_->A.coeffRef(i, i) -= cplx(E, eps);
        impl_->bicg.setTolerance(1e-12);
        impl_->bicg.setMaxIterations(5000);
        impl_->bicg.compute(impl_->A);
        if (impl_->bicg.info() != Eigen::Success) throw ConditioningError("resolvent: preconditioner setup failed");
    } else {
        impl_->mode = Impl::Mode::ComplexLU;
        SparseComplex A = H.matrix().cast<cplx>();
        for (Eigen::Index i = 0; i < A.rows(); ++i) A.coeffRef(i, i) -= cplx(E, eps);
        A.makeCompressed();
        impl_->lu.compute(A);
        if (impl_->lu.info() != Eigen::Success) throw ConditioningError("resolvent: sparse LU failed");
    }
}

ResolventSolver::~ResolventSolver() = default;
ResolventSolver::ResolventSolver(ResolventSolver&&) noexcept = default;
ResolventSolver& ResolventSolver::operator=(ResolventSolver&&) noexcept = default;

Eigen::VectorXcd ResolventSolver::solve(const Eigen::VectorXcd& rhs) const {
    switch (impl_->mode) {
        case Impl::Mode::ComplexLU: return impl_->lu.solve(rhs);
        case Impl::Mode::RealLDLT: {
            Eigen::VectorXd re = impl_->ldlt.solve(rhs.real().eval());
            Eigen::VectorXd im = impl_->ldlt.solve(rhs.imag().eval());
            Eigen::VectorXcd out(rhs.size());
            out.real() = re;
            out.imag() = im;
            return out;
        }
        case Impl::Mode::Iterative: {
            Eigen::VectorXcd x = impl_->bicg.solve(rhs);
            const double rel = (impl_->A * x - rhs).norm() / std::max(rhs.norm(), 1e-300);
            impl_->residual = rel;
            if (impl_->bicg.info() != Eigen::Success || rel > 1e-10)
                throw NonconvergenceError("resolvent: BiCGSTAB relative residual " + fmt(rel), {rel});
            return x;
        }
    }
    return {};
}

Eigen::VectorXcd ResolventSolver::column(const Site& y) const {
    auto j = impl_->region->index(y);
    if (j < 0) throw PreconditionError("resolvent: site " + y.str() + " outside the region");
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(impl_->region->size()));
    e(j) = 1.0;
    return solve(e);
}

cplx ResolventSolver::entry(const Site& x, const Site& y) const {
    auto i = impl_->region->index(x);
    if (i < 0) throw PreconditionError("resolvent: site " + x.str() + " outside the region");
    return column(y)(i);
}

bool ResolventSolver::iterative() const { return impl_->mode == Impl::Mode::Iterative; }
double ResolventSolver::last_residual() const { return impl_->residual; }

cplx resolvent_entry(const FiniteHamiltonian& H, double E, double eps, const Site& x, const Site& y) {
    return ResolventSolver(H, E, eps).entry(x, y);
}

std::size_t count_below(const SparseReal& H, double s) {
    InertiaCounter ic(H);
    return ic.below(s);
}

std::vector<std::size_t> trace_projector(const FiniteHamiltonian& H, const std::vector<SpectralWindow>& ws) {
    std::vector<std::size_t> out;
    out.reserve(ws.size());
    if (H.dim() <= kDenseLimit) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H.dense(), Eigen::EigenvaluesOnly);
        const auto& ev = es.eigenvalues();
        for (const auto& w : ws) {
            std::size_t c = 0;
            for (Eigen::Index i = 0; i < ev.size(); ++i)
                if (ev(i) >= w.a && ev(i) < w.b) ++c;
            out.push_back(c);
        }
        return out;
    }
    InertiaCounter ic(H.matrix());
    for (const auto& w : ws) out.push_back(ic.below(w.b) - ic.below(w.a));
    return out;
}

std::size_t trace_projector(const FiniteHamiltonian& H, const SpectralWindow& w) {
    return trace_projector(H, std::vector<SpectralWindow>{w}).front();
}

namespace {

GroundState dense_ground(const SparseReal& H) {
    GroundState g;
    g.dense = true;
    const Eigen::MatrixXd A(H);
    if (A.rows() <= 729) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
        g.energy = es.eigenvalues()(0);
        Eigen::VectorXd x = es.eigenvectors().col(0);
        g.residual = (A * x - g.energy * x).norm();
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
        g.energy = es.eigenvalues()(0);
        g.residual = 0.0;
    }
    return g;
}

// Plain Lanczos without reorthogonalization; the extremal Ritz value is unaffected by ghosts.
// The Ritz vector is rebuilt in a second pass to certify the residual.
struct LanczosRecurrence {
    const SparseReal& H;
    Eigen::VectorXd v, vp, w;
    double bprev = 0.0;

    LanczosRecurrence(const SparseReal& A, const Eigen::VectorXd& v0)
        : H(A), v(v0), vp(Eigen::VectorXd::Zero(v0.size())), w(v0.size()) {}

    // Advances one step; returns false on breakdown.
    bool step(double& a, double& b) {
        w.noalias() = H * v;
        w -= bprev * vp;
        a = w.dot(v);
        w -= a * v;
        b = w.norm();
        if (b < 1e-300) return false;
        vp.swap(v);
        v = w / b;
        bprev = b;
        return true;
    }
};

GroundState lanczos_ground(const SparseReal& H, double rel_tol, int max_iter) {
    const Eigen::Index n = H.rows();
    SplitMix64 rng(0x5eed);
    Eigen::VectorXd v0(n);
    for (Eigen::Index i = 0; i < n; ++i) v0(i) = rng.uniform(-1.0, 1.0);
    v0.normalize();

    std::vector<double> alpha, beta;
    LanczosRecurrence rec(H, v0);
    GroundState g;
    double theta_prev = std::numeric_limits<double>::infinity();
    Eigen::VectorXd s;
    bool breakdown = false;
    const int chunk = 25;
    while (static_cast<int>(alpha.size()) < max_iter && !breakdown) {
        for (int c = 0; c < chunk && static_cast<int>(alpha.size()) < max_iter; ++c) {
            double a = 0.0, b = 0.0;
            breakdown = !rec.step(a, b);
            alpha.push_back(a);
            beta.push_back(b);
            if (breakdown) break;
        }
        const auto m = static_cast<Eigen::Index>(alpha.size());
        Eigen::VectorXd dg = Eigen::Map<Eigen::VectorXd>(alpha.data(), m);
        Eigen::VectorXd sd = Eigen::Map<Eigen::VectorXd>(beta.data(), std::max<Eigen::Index>(m - 1, 0));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
        es.computeFromTridiagonal(dg, sd, Eigen::ComputeEigenvectors);
        const double theta = es.eigenvalues()(0);
        s = es.eigenvectors().col(0);
        const double est = std::abs(beta.back() * s(m - 1));
        g.energy = theta;
        g.iterations = static_cast<int>(m);
        const double scale = std::max(std::abs(theta), 1e-2);
        if (est <= 1e-7 * scale && std::abs(theta - theta_prev) <= rel_tol * scale) break;
        theta_prev = theta;
    }
    // The recurrence is deterministic from v0, so the second pass reproduces the basis.
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    LanczosRecurrence again(H, v0);
    for (Eigen::Index k = 0; k < s.size(); ++k) {
        x += s(k) * again.v;
        double a = 0.0, b = 0.0;
        if (k + 1 < s.size() && !again.step(a, b)) break;
    }
    x.normalize();
    g.residual = (H * x - g.energy * x).norm();
    if (!(g.residual <= 1e-5 * std::max(std::abs(g.energy), 1e-2)))
        throw NonconvergenceError("Lanczos: ground-state residual " + fmt(g.residual) + " after " +
                                      std::to_string(g.iterations) + " steps",
                                  {g.residual});
    return g;
}

}  // namespace

GroundState ground_state(const SparseReal& H, double rel_tol, int max_iter) {
    if (static_cast<std::size_t>(H.rows()) <= kDenseLimit) return dense_ground(H);
    return lanczos_ground(H, rel_tol, max_iter);
}

double ground_energy(const FiniteHamiltonian& H) { return ground_state(H.matrix()).energy; }

double dipole_wall_exact(double lambda) { return 1.0 - std::sqrt(1.0 + 4.0 * lambda * lambda); }

double dipole_chain_energy(double lambda, int L) {
    if (L < 1) throw PreconditionError("dipole_chain_energy: need L >= 1");
    const Eigen::Index n = 2 * L + 1;
    Eigen::VectorXd d = Eigen::VectorXd::Ones(n);
    d(L) -= 2.0 * lambda;
    Eigen::VectorXd off = Eigen::VectorXd::Constant(n - 1, -0.5);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(d, off, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

DipoleWall dipole_wall_ground(double lambda, int L) {
    if (!(lambda > 0.0 && lambda <= 0.3)) throw PreconditionError("dipole_wall_ground: need lambda in (0, 0.3]");
    if (L < 20) throw PreconditionError("dipole_wall_ground: need L >= 20");
    return {dipole_chain_energy(lambda, L), dipole_wall_exact(lambda)};
}

GroundState dipole_slab_ground(double lambda, int L, int Lt) {
    if (L < 1 || Lt < 0) throw PreconditionError("dipole_slab_ground: bad extents");
    Region r = Region::cuboid(Site{-L, -Lt, -Lt}, Site{L, Lt, Lt});
    std::vector<double> v(r.size(), 0.0);
    for (std::size_t i = 0; i < r.size(); ++i)
        if (r.site(i).x == 0) v[i] = -2.0 * lambda;
    return ground_state(assemble(r, v));
}

}  // namespace anderson
