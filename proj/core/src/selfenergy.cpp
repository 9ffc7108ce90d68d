#include "anderson/selfenergy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "anderson/errors.hpp"

namespace anderson {

double threshold_overlapping(double lambda, double s) {
    const double a = lambda * lambda * s * s;
    return -2.0 * a - 2.0 * a * a;
}

double kappa_nonoverlapping(double lambda, const SingleSitePotential& u) {
    const double m = u.sup_abs();
    return 4.0 * static_cast<double>(u.cell_size()) * lambda * lambda * m * m;
}

double threshold_nonoverlapping(double lambda, const SingleSitePotential& u, double E) {
    if (u.kind() != PotentialKind::NonOverlapping)
        throw UnsupportedVariantError("threshold_nonoverlapping: potential is not non-overlapping");
    const double factor = std::pow(6.0 - 2.0 * E, static_cast<double>(u.cell_diameter())) *
                          static_cast<double>(u.cell_size());
    return -kappa_nonoverlapping(lambda, u) * (factor + 1.0);
}

double threshold_dipole(double lambda) { return -(1.0 + lambda) * lambda * lambda; }

namespace {

using Coeffs = std::vector<std::pair<Site, cplx>>;

double grid_sup(const Coeffs& c, const TorusGrid& grid) {
    if (c.empty()) return 0.0;
    bool constant = std::all_of(c.begin(), c.end(), [](const auto& e) { return e.first == Site{}; });
    if (constant) {
        cplx s = 0.0;
        for (const auto& e : c) s += e.second;
        return std::abs(s);
    }
    GridField F = synthesize_on_grid(c, grid);
    double m = 0.0;
    for (const cplx& v : F.values) m = std::max(m, std::abs(v));
    return m;
}

Coeffs difference(const Coeffs& a, const Coeffs& b) {
    std::map<Site, cplx> m;
    for (const auto& [k, v] : a) m[k] += v;
    for (const auto& [k, v] : b) m[k] -= v;
    return {m.begin(), m.end()};
}

// Ratios of successive changes, skipping pairs where the earlier change is already at roundoff.
void finish_ratios(SolverReport& r, double scale) {
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * std::max(scale, 1e-300);
    r.ratios.clear();
    for (std::size_t j = 1; j < r.changes.size(); ++j) {
        if (r.changes[j - 1] > floor && r.changes[j] > floor) r.ratios.push_back(r.changes[j] / r.changes[j - 1]);
    }
    r.observed_contraction = r.ratios.empty() ? 0.0 : *std::max_element(r.ratios.begin(), r.ratios.end());
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

}  // namespace

cplx ScalarSelfEnergy::operator()(const Momentum& p) const {
    cplx s = 0.0;
    for (const auto& [k, c] : coefficients)
        s += c * std::polar(1.0, 2.0 * std::numbers::pi * (p[0] * k.x + p[1] * k.y + p[2] * k.z));
    return s;
}

cplx ScalarSelfEnergy::coefficient(const Site& k) const {
    for (const auto& [w, c] : coefficients)
        if (w == k) return c;
    return 0.0;
}

namespace {

// Σ_m u(m) u(m + k) accumulated on a dense cube; only nonzero lags are returned.
std::vector<std::pair<Site, double>> autocorrelation(const SingleSitePotential& u) {
    std::int64_t R = 0;
    for (const auto& [m, um] : u.values()) R = std::max(R, sup_norm(m));
    const std::int64_t W = 4 * R + 1, off = 2 * R;
    std::vector<double> cube(static_cast<std::size_t>(W * W * W), 0.0);
    for (const auto& [m, um] : u.values())
        for (const auto& [n, un] : u.values()) {
            const Site d = n - m;
            cube[static_cast<std::size_t>(((d.x + off) * W + d.y + off) * W + d.z + off)] += um * un;
        }
    std::vector<std::pair<Site, double>> out;
    for (std::int64_t i = 0; i < W; ++i)
        for (std::int64_t j = 0; j < W; ++j)
            for (std::int64_t k = 0; k < W; ++k) {
                const double a = cube[static_cast<std::size_t>((i * W + j) * W + k)];
                if (a != 0.0) out.emplace_back(Site{i - off, j - off, k - off}, a);
            }
    return out;
}

Coeffs scalar_map_step(double lambda, double E, double eps, const std::vector<std::pair<Site, double>>& auto_corr,
                       const Coeffs& sigma, const TorusGrid& grid) {
    std::int64_t R = 0;
    for (const auto& [k, a] : auto_corr) R = std::max(R, sup_norm(k));
    GreenTable g = scalar_resolvent_table(E, eps, sigma, static_cast<int>(R), grid);
    Coeffs out;
    out.reserve(auto_corr.size());
    for (const auto& [k, a] : auto_corr) out.emplace_back(k, lambda * lambda * a * g(-k));
    return out;
}

}  // namespace

Coeffs apply_scalar_map(double lambda, double E, double eps, const SingleSitePotential& u, const Coeffs& sigma,
                        const TorusGrid& grid) {
    if (u.kind() == PotentialKind::NonOverlapping)
        throw UnsupportedVariantError("scalar self-energy map: use the matrix solver for non-overlapping u");
    return scalar_map_step(lambda, E, eps, autocorrelation(u), sigma, grid);
}

ScalarSelfEnergy solve_sigma_overlapping(double lambda, double E, double eps, const SingleSitePotential& u,
                                         const TorusGrid& grid, SolverOptions opt) {
    if (u.kind() == PotentialKind::NonOverlapping)
        throw UnsupportedVariantError("solve_sigma_overlapping: potential is non-overlapping");
    if (lambda < 0.0) throw InadmissibleError("solve_sigma_overlapping: lambda must be >= 0");
    ScalarSelfEnergy out;
    out.lambda = lambda;
    out.E = E;
    out.eps = eps;
    out.grid = grid;
    out.u_hat_sup = u_hat_sup(u);
    const double E0 = threshold_overlapping(lambda, out.u_hat_sup);
    if (!(E < E0))
        throw InadmissibleError("solve_sigma_overlapping: E = " + fmt(E) + " not below E0 = " + fmt(E0));
    if (std::abs(eps) > lambda * lambda)
        throw InadmissibleError("solve_sigma_overlapping: |eps| = " + fmt(std::abs(eps)) + " exceeds lambda^2");

    SolverReport& rep = out.report;
    rep.norm_name = "sup-grid";
    const auto auto_corr = autocorrelation(u);
    Coeffs sigma;
    bool converged = false;
    for (int it = 1; it <= opt.max_iter; ++it) {
        Coeffs next = scalar_map_step(lambda, E, eps, auto_corr, sigma, grid);
        double change = grid_sup(difference(next, sigma), grid);
        sigma = std::move(next);
        rep.changes.push_back(change);
        rep.iterations = it;
        if (change <= opt.tol) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw NonconvergenceError("solve_sigma_overlapping: no convergence in " + std::to_string(opt.max_iter) +
                                      " iterations",
                                  rep.changes);
    out.coefficients = sigma;
    rep.residual = grid_sup(difference(scalar_map_step(lambda, E, eps, auto_corr, sigma, grid), sigma), grid);
    rep.norm = grid_sup(sigma, grid);
    const double s2 = lambda * lambda * out.u_hat_sup * out.u_hat_sup;
    rep.bound = std::min(-E - 2.0 * s2 * s2, 2.0 * s2);
    rep.bound_slack = rep.bound - rep.norm;
    finish_ratios(rep, std::max(rep.norm, lambda * lambda));
    if (rep.norm > rep.bound)
        throw CertificateError("scalar self-energy: sup|sigma| = " + fmt(rep.norm) + " exceeds bound " +
                               fmt(rep.bound));
    return out;
}

CellKernel::CellKernel(const SingleSitePotential& u, std::vector<FourierTable> tables)
    : u_(u), n_(u.cell_size()), tables_(std::move(tables)) {
    if (tables_.size() != n_ * n_) throw PreconditionError("CellKernel: need n^2 tables");
}

cplx CellKernel::operator()(const Site& x, const Site& y) const {
    auto [i, lx] = u_.cell_decompose(x);
    auto [j, ly] = u_.cell_decompose(y);
    const auto& k = u_.period();
    Site d = lx - ly;
    Site z{d.x / k[0], d.y / k[1], d.z / k[2]};
    return tables_[i * n_ + j](z);
}

std::int64_t CellKernel::reach() const {
    if (tables_.empty()) return 0;
    const auto& k = u_.period();
    std::int64_t span = 0;
    for (const Site& a : u_.cell())
        for (const Site& b : u_.cell()) span = std::max(span, sup_norm(a - b));
    const std::int64_t kmin = *std::min_element(k.begin(), k.end());
    return std::max<std::int64_t>(0, tables_.front().radius() * kmin - span);
}

CellMatrix CellKernel::cell_block(const Site& z) const {
    CellMatrix m(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = tables_[i * n_ + j](z);
    return m;
}

namespace {

struct Hop {
    Eigen::Index i, j;
    Site z;
};

// Nearest-neighbour hops x_i → x_j + k∘z of the cell, each with amplitude -1/2.
std::vector<Hop> cell_hops(const SingleSitePotential& u) {
    std::vector<Hop> hops;
    const auto& k = u.period();
    const auto& cell = u.cell();
    for (std::size_t i = 0; i < cell.size(); ++i)
        for (const Site& e : unit_vectors()) {
            auto [j, l] = u.cell_decompose(cell[i] + e);
            hops.push_back({static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j),
                            Site{l.x / k[0], l.y / k[1], l.z / k[2]}});
        }
    return hops;
}

void check_cell(const SingleSitePotential& u, const CellMatrix& sigma) {
    if (u.kind() != PotentialKind::NonOverlapping)
        throw UnsupportedVariantError("Bloch fiber requires a non-overlapping potential");
    if (u.cell_size() > kMaxCellSize) throw GuardError("Bloch fiber: cell size above 8");
    const auto n = static_cast<Eigen::Index>(u.cell_size());
    if (sigma.size() != 0 && (sigma.rows() != n || sigma.cols() != n))
        throw PreconditionError("Bloch fiber: sigma dimension does not match the cell");
}

CellMatrix assemble_fiber(const std::vector<Hop>& hops, Eigen::Index n, const CellMatrix& sigma,
                          const Momentum& phi, cplx z) {
    CellMatrix h = CellMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) h(i, i) = 3.0 - z;
    for (const Hop& hp : hops) {
        double ph = 2.0 * std::numbers::pi * (phi[0] * hp.z.x + phi[1] * hp.z.y + phi[2] * hp.z.z);
        h(hp.i, hp.j) += std::polar(-0.5, ph);
    }
    if (sigma.size() != 0) h -= sigma;
    return h;
}

CellMatrix invert_checked(const CellMatrix& h) {
    Eigen::PartialPivLU<CellMatrix> lu(h);
    double rc = lu.rcond();
    if (!(rc > 1e-12)) {
        throw ConditioningError("Bloch fiber: condition number estimate " + fmt(1.0 / rc) + " above 1e12");
    }
    return lu.inverse();
}

}  // namespace

CellMatrix fiber_matrix(const SingleSitePotential& u, const CellMatrix& sigma, const Momentum& phi, double E,
                        double eps) {
    check_cell(u, sigma);
    return assemble_fiber(cell_hops(u), static_cast<Eigen::Index>(u.cell_size()), sigma, phi, {E, eps});
}

CellMatrix bloch_fiber(const SingleSitePotential& u, const CellMatrix& sigma, const Momentum& phi, double E,
                       double eps) {
    return invert_checked(fiber_matrix(u, sigma, phi, E, eps));
}

CellMatrix cell_resolvent(const SingleSitePotential& u, const CellMatrix& sigma, double E, double eps,
                          const TorusGrid& grid) {
    check_cell(u, sigma);
    const auto hops = cell_hops(u);
    const auto n = static_cast<Eigen::Index>(u.cell_size());
    std::vector<CompensatedSum<cplx>> acc(static_cast<std::size_t>(n * n));
    for (int a = 0; a < grid.M; ++a)
        for (int b = 0; b < grid.M; ++b)
            for (int c = 0; c < grid.M; ++c) {
                CellMatrix inv = invert_checked(assemble_fiber(hops, n, sigma, grid.momentum(a, b, c), {E, eps}));
                for (Eigen::Index i = 0; i < n; ++i)
                    for (Eigen::Index j = 0; j < n; ++j) acc[static_cast<std::size_t>(i * n + j)].add(inv(i, j));
            }
    CellMatrix S(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) S(i, j) = acc[static_cast<std::size_t>(i * n + j)].value() * grid.weight();
    return S;
}

CellKernel cell_resolvent_kernel(const SingleSitePotential& u, const CellMatrix& sigma, double E, double eps,
                                 int Z, const TorusGrid& grid) {
    check_cell(u, sigma);
    const auto hops = cell_hops(u);
    const auto n = static_cast<Eigen::Index>(u.cell_size());
    std::vector<GridField> fields(static_cast<std::size_t>(n * n), GridField(grid));
    for (int a = 0; a < grid.M; ++a)
        for (int b = 0; b < grid.M; ++b)
            for (int c = 0; c < grid.M; ++c) {
                CellMatrix inv = invert_checked(assemble_fiber(hops, n, sigma, grid.momentum(a, b, c), {E, eps}));
                for (Eigen::Index i = 0; i < n; ++i)
                    for (Eigen::Index j = 0; j < n; ++j) fields[static_cast<std::size_t>(i * n + j)].at(a, b, c) = inv(i, j);
            }
    std::vector<FourierTable> tables;
    tables.reserve(fields.size());
    for (const auto& f : fields) tables.push_back(fourier_coefficients(f, Z));
    return CellKernel(u, std::move(tables));
}

double operator_norm(const CellMatrix& m) {
    if (m.size() == 0) return 0.0;
    const Eigen::MatrixXcd full = m;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(full);
    return svd.singularValues()(0);
}

MatrixSelfEnergy solve_sigma_nonoverlapping(double lambda, double E, double eps, const SingleSitePotential& u,
                                            const TorusGrid& grid, SolverOptions opt) {
    if (u.kind() != PotentialKind::NonOverlapping)
        throw UnsupportedVariantError("solve_sigma_nonoverlapping: potential is not non-overlapping");
    if (lambda < 0.0) throw InadmissibleError("solve_sigma_nonoverlapping: lambda must be >= 0");
    MatrixSelfEnergy out;
    out.lambda = lambda;
    out.E = E;
    out.eps = eps;
    out.grid = grid;
    out.kappa = kappa_nonoverlapping(lambda, u);
    out.cell = u.cell();
    out.D = u.cell_diagonal();
    if (!(E < -out.kappa))
        throw InadmissibleError("solve_sigma_nonoverlapping: E = " + fmt(E) + " not below -kappa = " + fmt(-out.kappa));
    if (eps != 0.0 && !(std::abs(eps) < out.kappa / 2.0))
        throw InadmissibleError("solve_sigma_nonoverlapping: |eps| must be below kappa/2");

    const auto n = static_cast<Eigen::Index>(u.cell_size());
    Eigen::Matrix<cplx, Eigen::Dynamic, 1, 0, 8, 1> d(n);
    for (Eigen::Index i = 0; i < n; ++i) d(i) = out.D[static_cast<std::size_t>(i)];
    auto T = [&](const CellMatrix& s) -> CellMatrix {
        CellMatrix S = cell_resolvent(u, s, E, eps, grid);
        return (lambda * lambda) * d.asDiagonal() * S * d.asDiagonal();
    };

    SolverReport& rep = out.report;
    rep.norm_name = "operator";
    CellMatrix sigma = CellMatrix::Zero(n, n);
    bool converged = false;
    for (int it = 1; it <= opt.max_iter; ++it) {
        CellMatrix next = T(sigma);
        double change = operator_norm(next - sigma);
        sigma = next;
        rep.changes.push_back(change);
        rep.iterations = it;
        if (change <= opt.tol) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw NonconvergenceError("solve_sigma_nonoverlapping: no convergence", rep.changes);
    out.sigma = sigma;
    rep.residual = operator_norm(T(sigma) - sigma);
    rep.norm = operator_norm(sigma);
    rep.bound = out.kappa / 2.0;
    rep.bound_slack = rep.bound - rep.norm;
    finish_ratios(rep, std::max(rep.norm, lambda * lambda));
    if (rep.norm > rep.bound)
        throw CertificateError("matrix self-energy: ||sigma|| = " + fmt(rep.norm) + " exceeds kappa/2 = " +
                               fmt(rep.bound));
    return out;
}

cplx DipoleSelfEnergy::operator()(const Momentum& p) const {
    double s = std::sin(std::numbers::pi * p[0]);
    return A + B * s * s;
}

std::vector<std::pair<Site, cplx>> DipoleSelfEnergy::coefficients() const {
    return {{Site{-1, 0, 0}, -B / 4.0}, {Site{0, 0, 0}, A + B / 2.0}, {Site{1, 0, 0}, -B / 4.0}};
}

std::pair<cplx, cplx> apply_dipole_map(double lambda, double E, double eps, cplx A, cplx B, const TorusGrid& grid) {
    if (grid.M % 2 != 0 || !grid.shifted) throw PreconditionError("dipole map: needs a shifted grid with even M");
    const int h = grid.M / 2;
    std::vector<double> s(static_cast<std::size_t>(h));
    for (int j = 0; j < h; ++j) {
        double v = std::sin(std::numbers::pi * grid.point(j));
        s[static_cast<std::size_t>(j)] = 2.0 * v * v;
    }
    const cplx z{E, eps};
    CompensatedSum<cplx> Is, Ic;
    for (int i = 0; i < h; ++i) {
        const double si = s[static_cast<std::size_t>(i)];
        const cplx base = si - z - A - B * (0.5 * si);
        cplx inner = 0.0;
        for (int j = 0; j < h; ++j)
            for (int k = 0; k < h; ++k) inner += 1.0 / (base + s[static_cast<std::size_t>(j)] + s[static_cast<std::size_t>(k)]);
        Is.add(0.5 * si * inner);
        Ic.add((1.0 - si) * inner);
    }
    const double w = 8.0 * grid.weight() * 4.0 * lambda * lambda;
    return {Is.value() * w, Ic.value() * w};
}

DipoleSelfEnergy solve_sigma_dipole(double lambda, double E, double eps, const TorusGrid& grid, DipoleOptions opt) {
    if (lambda < 0.0) throw InadmissibleError("solve_sigma_dipole: lambda must be >= 0");
    if (lambda > opt.lambda_cap)
        throw InadmissibleError("solve_sigma_dipole: lambda = " + fmt(lambda) + " above cap " + fmt(opt.lambda_cap));
    const double Ed = threshold_dipole(lambda);
    if (!(E < Ed)) throw InadmissibleError("solve_sigma_dipole: E = " + fmt(E) + " not below E_d = " + fmt(Ed));
    if (std::abs(eps) > lambda * lambda)
        throw InadmissibleError("solve_sigma_dipole: |eps| exceeds lambda^2");

    DipoleSelfEnergy out;
    out.lambda = lambda;
    out.E = E;
    out.eps = eps;
    out.grid = grid;
    SolverReport& rep = out.report;
    rep.norm_name = "G";
    auto gnorm = [&](cplx a, cplx b) { return std::abs(a) + lambda * std::abs(b); };
    cplx A = 0.0, B = 0.0;
    bool converged = false;
    for (int it = 1; it <= opt.max_iter; ++it) {
        auto [A1, B1] = apply_dipole_map(lambda, E, eps, A, B, grid);
        double change = gnorm(A1 - A, B1 - B);
        A = A1;
        B = B1;
        rep.changes.push_back(change);
        rep.iterations = it;
        if (change <= opt.tol) {
            converged = true;
            break;
        }
    }
    if (!converged) throw NonconvergenceError("solve_sigma_dipole: no convergence", rep.changes);
    out.A = A;
    out.B = B;
    auto [A2, B2] = apply_dipole_map(lambda, E, eps, A, B, grid);
    rep.residual = gnorm(A2 - A, B2 - B);
    rep.norm = gnorm(A, B);
    const double l2 = lambda * lambda;
    rep.bound = l2 + lambda * 14.0 * l2;
    rep.bound_slack = rep.bound - rep.norm;
    finish_ratios(rep, std::max(rep.norm, l2));
    const bool ok = lambda == 0.0 ? (A == 0.0 && B == 0.0) : (std::abs(A) < l2 && std::abs(B) < 14.0 * l2);
    if (!ok)
        throw CertificateError("dipole self-energy: |A| = " + fmt(std::abs(A)) + ", |B| = " + fmt(std::abs(B)) +
                               " violate |A| < lambda^2, |B| < 14 lambda^2");
    return out;
}

GreenTable renormalized_green(const ScalarSelfEnergy& s, int R) {
    return scalar_resolvent_table(s.E, s.eps, s.coefficients, R, s.grid);
}

GreenTable renormalized_green(const DipoleSelfEnergy& s, int R) {
    return scalar_resolvent_table(s.E, s.eps, s.coefficients(), R, s.grid);
}

CellKernel renormalized_green(const MatrixSelfEnergy& s, const SingleSitePotential& u, int Z) {
    return cell_resolvent_kernel(u, s.sigma, s.E, s.eps, Z, s.grid);
}

cplx renormalized_green(double E, double eps, const ScalarSelfEnergy& s, const Site& w) {
    return scalar_resolvent_table(E, eps, s.coefficients, static_cast<int>(sup_norm(w)), s.grid)(w);
}

}  // namespace anderson
