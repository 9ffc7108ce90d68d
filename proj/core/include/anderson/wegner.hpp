#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "anderson/hamiltonian.hpp"
#include "anderson/lattice.hpp"
#include "anderson/potentials.hpp"

namespace anderson {

struct Interval {
    double lo = 0.0, hi = 0.0;
    double length() const { return hi - lo; }
    bool contains(double x) const { return lo <= x && x <= hi; }
};

// Hermitian A and positive-definite B with α = λ_min(B), β = λ_max(B).
class HermitianPair {
public:
    HermitianPair(Eigen::MatrixXcd A, Eigen::MatrixXcd B);

    const Eigen::MatrixXcd& A() const { return A_; }
    const Eigen::MatrixXcd& B() const { return B_; }
    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    Eigen::Index dim() const { return A_.rows(); }

    // Ascending eigenvalues of A + xB.
    Eigen::VectorXd eigenvalues(double x) const;

private:
    Eigen::MatrixXcd A_, B_;
    double alpha_ = 0.0, beta_ = 0.0;
};

// Number of eigenvalues of a Hermitian matrix in the closed interval.
std::size_t count_in(const Eigen::VectorXd& eigenvalues, const Interval& I);

struct WeylBound {
    double lhs = 0.0;          // ∫_J tr P_I(A + xB) dx
    double rhs = 0.0;          // α⁻¹ |I| tr P_Î(A)
    Interval I_hat;            // [a - β d, b - α c]
    bool holds = false;        // lhs <= rhs (1e-9 slack)
};

// λ_k(A + xB) increases strictly in x, so each k contributes the length of one interval
// whose endpoints are found by bracketing root solves.
WeylBound weyl_interval_bound(const HermitianPair& pair, const Interval& I, const Interval& J);

// Midpoint-rule estimate of the same integral, for cross-checks.
double weyl_lhs_midpoint(const HermitianPair& pair, const Interval& I, const Interval& J, int points);

// ρ_K(x) = inf_{y ∈ J} (ρ(y) + K|x - y|) on J, tabulated on a grid graded towards 0 and ±a.
class LipschitzApprox {
public:
    LipschitzApprox(const DisorderDensity& rho, double K);

    double K() const { return K_; }
    // true when ρ is already Lipschitz (α = 1) and ρ_K = ρ
    bool identity() const { return identity_; }
    double operator()(double x) const;

    const std::vector<double>& grid() const { return xs_; }
    const std::vector<double>& values() const { return vals_; }
    // ‖ρ - ρ_K‖_∞ on the grid
    double sup_error() const { return sup_error_; }
    double l1_norm() const { return l1_; }
    // max difference quotient of ρ_K over consecutive grid points
    double max_difference_quotient() const { return max_quotient_; }
    // C with sup_error = C K^{-α/(1-α)}; 0 for the identity case
    double fitted_constant() const { return C_fit_; }
    // 1 + C K^{-α/(1-α)} |J|
    double l1_bound() const;

private:
    DisorderDensity rho_;
    double K_ = 0.0;
    bool identity_ = false;
    std::vector<double> xs_, vals_;
    double sup_error_ = 0.0, l1_ = 0.0, max_quotient_ = 0.0, C_fit_ = 0.0;
};

LipschitzApprox lipschitz_approx(const DisorderDensity& rho, double K);

struct WegnerRow {
    double width = 0.0;
    double estimate = 0.0;
    double stderr = 0.0;
    double ratio = 0.0;  // estimate / (|I| |Λ|^{(1+α)/α} / D_I)
    double D_I = 0.0;
};

struct WegnerTable {
    std::vector<WegnerRow> rows;
    double slope = 0.0;       // least-squares slope of estimate against width
    double intercept = 0.0;
    Eigen::MatrixXi counts;   // samples × widths
    bool monotone = true;     // every sample's counts are nondecreasing in width

    // mean and standard error of counts(:, j) - factor · counts(:, i)
    std::pair<double, double> paired_linear_combination(std::size_t j, std::size_t i, double factor) const;
};

// E tr P_I(H) over disorder for intervals of the given widths centred at the window centre.
// Counts come from LDLᵀ inertia at the interval endpoints.
WegnerTable mc_wegner(const Region& region, double lambda, const SingleSitePotential& u, const DisorderDensity& rho,
                      const SpectralWindow& window, const std::vector<double>& widths, int samples,
                      std::uint64_t seed);

}  // namespace anderson
