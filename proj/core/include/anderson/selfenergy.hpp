#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "anderson/green.hpp"
#include "anderson/lattice.hpp"
#include "anderson/potentials.hpp"

namespace anderson {

// Cell matrices never exceed 8x8; storage stays on the stack.
using CellMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, 0, 8, 8>;
inline constexpr std::size_t kMaxCellSize = 8;

double threshold_overlapping(double lambda, double u_hat_sup);
// 4 n λ² ‖u‖²_∞
double kappa_nonoverlapping(double lambda, const SingleSitePotential& u);
// -κ {(6 - 2E)^{diam Θ̂} |Θ̂| + 1}; E enters the factor, so admissibility is E < threshold(E).
double threshold_nonoverlapping(double lambda, const SingleSitePotential& u, double E);
// -(1 + λ) λ²
double threshold_dipole(double lambda);

struct SolverOptions {
    double tol = 1e-10;
    int max_iter = 200;
};

struct SolverReport {
    int iterations = 0;
    std::vector<double> changes;  // ‖σ_{j+1} - σ_j‖ per iteration
    std::vector<double> ratios;   // successive change ratios above the roundoff floor
    double observed_contraction = 0.0;  // max of `ratios`, 0 when none qualify
    double residual = 0.0;        // ‖σ - T σ‖ for the returned σ
    double norm = 0.0;            // ‖σ‖ in the variant norm
    double bound = 0.0;           // certified upper bound on ‖σ‖
    double bound_slack = 0.0;     // bound - norm
    std::string norm_name;
};

struct ScalarSelfEnergy {
    double lambda = 0.0, E = 0.0, eps = 0.0;
    double u_hat_sup = 0.0;
    TorusGrid grid{};
    std::vector<std::pair<Site, cplx>> coefficients;  // σ(p) = Σ_k c_k e^{i2π p·k}
    SolverReport report;

    cplx operator()(const Momentum& p) const;
    cplx coefficient(const Site& k) const;
};

// The map T: coefficients c_k = λ² a_k ∫ e^{-i2π q·k} / (e - E - iε - σ), a_k = Σ_m u(m) u(m+k).
std::vector<std::pair<Site, cplx>> apply_scalar_map(double lambda, double E, double eps,
                                                    const SingleSitePotential& u,
                                                    const std::vector<std::pair<Site, cplx>>& sigma,
                                                    const TorusGrid& grid);

ScalarSelfEnergy solve_sigma_overlapping(double lambda, double E, double eps, const SingleSitePotential& u,
                                         const TorusGrid& grid = {}, SolverOptions opt = {});

// Translation-invariant kernel K(x, y) of a kZ³-periodic operator, stored per cell pair (i, j)
// as Fourier tables in the cell-lattice offset z, with x = x_i + k∘z_x, y = x_j + k∘z_y.
class CellKernel {
public:
    CellKernel() = default;
    CellKernel(const SingleSitePotential& u, std::vector<FourierTable> tables);
    cplx operator()(const Site& x, const Site& y) const;
    // Largest |x - y|_∞ guaranteed to be covered by the tables.
    std::int64_t reach() const;
    CellMatrix cell_block(const Site& z) const;

private:
    SingleSitePotential u_;
    std::size_t n_ = 0;
    std::vector<FourierTable> tables_;
};

// The Floquet fiber h(φ) of -Δ/2 - E - iε - Σ, φ ∈ T³ the cell quasi-momentum (φ_a = k_a θ_a).
CellMatrix fiber_matrix(const SingleSitePotential& u, const CellMatrix& sigma, const Momentum& phi, double E,
                        double eps);
// h(φ)⁻¹; throws ConditioningError when cond₁(h) > 1e12.
CellMatrix bloch_fiber(const SingleSitePotential& u, const CellMatrix& sigma, const Momentum& phi, double E,
                       double eps);
// S = ∫ h(φ)⁻¹ dφ
CellMatrix cell_resolvent(const SingleSitePotential& u, const CellMatrix& sigma, double E, double eps,
                          const TorusGrid& grid);
// Kernel of (-Δ/2 - E - iε - Σ)⁻¹ for cell offsets |z|_∞ <= Z.
CellKernel cell_resolvent_kernel(const SingleSitePotential& u, const CellMatrix& sigma, double E, double eps,
                                 int Z, const TorusGrid& grid);

struct MatrixSelfEnergy {
    double lambda = 0.0, E = 0.0, eps = 0.0;
    double kappa = 0.0;
    TorusGrid grid{};
    CellMatrix sigma;
    std::vector<Site> cell;
    std::vector<double> D;
    SolverReport report;
};

double operator_norm(const CellMatrix& m);

MatrixSelfEnergy solve_sigma_nonoverlapping(double lambda, double E, double eps, const SingleSitePotential& u,
                                            const TorusGrid& grid = TorusGrid{64, true}, SolverOptions opt = {});

struct DipoleSelfEnergy {
    double lambda = 0.0, E = 0.0, eps = 0.0;
    TorusGrid grid{};
    cplx A = 0.0, B = 0.0;
    SolverReport report;

    cplx operator()(const Momentum& p) const;
    // A + B sin²(π p1) as Fourier coefficients: c_0 = A + B/2, c_{±e1} = -B/4.
    std::vector<std::pair<Site, cplx>> coefficients() const;
};

// (A, B) ↦ (4λ² ∫ sin²(πq1)/D, 4λ² ∫ cos(2πq1)/D), D = e - E - iε - A - B sin²(πq1).
std::pair<cplx, cplx> apply_dipole_map(double lambda, double E, double eps, cplx A, cplx B, const TorusGrid& grid);

struct DipoleOptions : SolverOptions {
    double lambda_cap = 0.2;
};

DipoleSelfEnergy solve_sigma_dipole(double lambda, double E, double eps, const TorusGrid& grid = {},
                                    DipoleOptions opt = {});

// Renormalized propagators R_r for the three variants.
GreenTable renormalized_green(const ScalarSelfEnergy& s, int R);
GreenTable renormalized_green(const DipoleSelfEnergy& s, int R);
CellKernel renormalized_green(const MatrixSelfEnergy& s, const SingleSitePotential& u, int Z);
cplx renormalized_green(double E, double eps, const ScalarSelfEnergy& s, const Site& w);

}  // namespace anderson
