#pragma once

#include <limits>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "anderson/lattice.hpp"
#include "anderson/potentials.hpp"

namespace anderson {

using SparseReal = Eigen::SparseMatrix<double>;
using SparseComplex = Eigen::SparseMatrix<cplx>;

struct SpectralWindow {
    double a = -std::numeric_limits<double>::infinity();
    double b = std::numeric_limits<double>::infinity();

    SpectralWindow() = default;
    SpectralWindow(double lo, double hi);
    double width() const { return b - a; }
    // dist(I, [0, 6])
    double distance_to_free_spectrum() const;
};

// H = -Δ/2 + λV restricted to a region (rows lose outside neighbours, diagonal stays 3 + λV).
class FiniteHamiltonian {
public:
    static FiniteHamiltonian build(const Region& region, double lambda, const SingleSitePotential& u,
                                   const DisorderSample& s);
    static FiniteHamiltonian build(const Box& box, double lambda, const SingleSitePotential& u,
                                   const DisorderSample& s);
    // λ V given site by site (in region order).
    static FiniteHamiltonian from_potential(const Region& region, const std::vector<double>& lambda_v,
                                            double lambda = 1.0);
    static FiniteHamiltonian free(const Region& region);

    const Region& region() const { return *region_; }
    std::shared_ptr<const Region> region_ptr() const { return region_; }
    const SparseReal& matrix() const { return H_; }
    std::size_t dim() const { return region_->size(); }
    double lambda() const { return lambda_; }
    // λ V_ω(x) per site
    const std::vector<double>& potential() const { return lambda_v_; }
    const std::string& provenance() const { return provenance_; }
    Eigen::MatrixXd dense() const { return Eigen::MatrixXd(H_); }

    // Coordinate triplets "row col value", one per line, with a leading "# n nnz" line.
    void write_triplets(std::ostream& os) const;

private:
    std::shared_ptr<const Region> region_;
    SparseReal H_;
    double lambda_ = 0.0;
    std::vector<double> lambda_v_;
    std::string provenance_;
};

// Factorization of H - E - iε reused across right-hand sides.
class ResolventSolver {
public:
    // ε = 0 uses a real LDLᵀ factorization and throws EigenvalueHitError when an
    // eigenvalue lies within `hit_eta` of E (inertia counts at E ± η differ).
    ResolventSolver(const FiniteHamiltonian& H, double E, double eps, double hit_eta = 1e-6);
    ~ResolventSolver();
    ResolventSolver(ResolventSolver&&) noexcept;
    ResolventSolver& operator=(ResolventSolver&&) noexcept;

    Eigen::VectorXcd solve(const Eigen::VectorXcd& rhs) const;
    // (H - E - iε)⁻¹ e_y
    Eigen::VectorXcd column(const Site& y) const;
    cplx entry(const Site& x, const Site& y) const;
    bool iterative() const;
    // Relative residual of the last iterative solve; 0 for direct solves.
    double last_residual() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

cplx resolvent_entry(const FiniteHamiltonian& H, double E, double eps, const Site& x, const Site& y);

// Number of eigenvalues of a symmetric sparse matrix strictly below s (Sylvester inertia).
std::size_t count_below(const SparseReal& H, double s);

// Eigenvalues in [a, b]; dense for |Λ| <= 12³, inertia counts above.
std::size_t trace_projector(const FiniteHamiltonian& H, const SpectralWindow& w);
std::vector<std::size_t> trace_projector(const FiniteHamiltonian& H, const std::vector<SpectralWindow>& ws);

struct GroundState {
    double energy = 0.0;
    double residual = 0.0;  // ‖H x - E x‖ for the normalized Ritz vector
    int iterations = 0;
    bool dense = false;
};

// Smallest eigenvalue; Lanczos above 12³ sites with a residual certificate.
GroundState ground_state(const SparseReal& H, double rel_tol = 1e-9, int max_iter = 20000);
double ground_energy(const FiniteHamiltonian& H);

struct DipoleWall {
    double E_finite = 0.0;
    double E_m_exact = 0.0;
};

double dipole_wall_exact(double lambda);
// Ground energy of the chain of 2L+1 sites (diagonal 1, hopping -1/2) with -2λ at the centre; L >= 1.
double dipole_chain_energy(double lambda, int L);
// 1D chain of 2L+1 sites (diagonal 1, hopping -1/2) with -2λ at the centre.
DipoleWall dipole_wall_ground(double lambda, int L);
// Ground energy of the 3D box [-L, L] × [-Lt, Lt]² with -2λ on the plane x1 = 0.
GroundState dipole_slab_ground(double lambda, int L, int Lt);

}  // namespace anderson
