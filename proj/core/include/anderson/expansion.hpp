#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "anderson/hamiltonian.hpp"
#include "anderson/lattice.hpp"
#include "anderson/potentials.hpp"
#include "anderson/selfenergy.hpp"

namespace anderson {

// A V/B string; V is a potential insertion (order 1), B a self-energy bullet (order 2).
struct Term {
    std::string tags;
    int order() const;
};

// All strings of total order ℓ in lexicographic order (V < B); guard ℓ <= 12.
std::vector<Term> enumerate_terms(int order);

// Σ restricted to a finite region, with the ℓ¹ weight of kernel entries that fell outside.
struct SelfEnergyRealization {
    SparseComplex sigma;
    double dropped_weight = 0.0;  // max over rows of Σ_{y ∉ region} |Σ(x, y)|
};

// Σ(x, y) = c_{y - x}
SelfEnergyRealization realize_scalar(const Region& region, const std::vector<std::pair<Site, cplx>>& coefficients);
// Σ(x, y) = σ_ij when x, y lie in the same translate of the cell
SelfEnergyRealization realize_matrix(const Region& region, const SingleSitePotential& u, const CellMatrix& sigma);

// Solves the self-energy equation for u's variant and realizes it on the region.
// Overlapping u uses the scalar solver, NonOverlapping the matrix solver, Dipole the dedicated one.
SelfEnergyRealization self_energy_on_region(const Region& region, const SingleSitePotential& u, double lambda,
                                            double E, double eps, const TorusGrid& grid = {});

// Dense operator blocks on a box: z = E + iε, H_r = -Δ/2 - Σ.
struct BoxOperators {
    Eigen::MatrixXcd Hr_minus_z;  // H_r - z
    Eigen::MatrixXcd Rr;          // (H_r - z)⁻¹
    Eigen::VectorXcd theta_V;     // -λ V (diagonal)
    Eigen::MatrixXcd Sigma;
    Eigen::MatrixXcd R;           // (H - z)⁻¹ with H = -Δ/2 + λV

    Eigen::Index dim() const { return Rr.rows(); }
};

BoxOperators make_box_operators(const FiniteHamiltonian& H, const SparseComplex& sigma, double E, double eps);

// R_r θ_{t1} R_r θ_{t2} … R_r for one term.
Eigen::MatrixXcd term_product(const Term& t, const BoxOperators& ops);
// A_ℓ from the two-term recursion A'_ℓ = R_r θ_V A'_{ℓ-1} + R_r θ_B A'_{ℓ-2}, A_ℓ = A'_ℓ R_r.
Eigen::MatrixXcd build_A(int order, const BoxOperators& ops);
// A_ℓ as the explicit sum of term products.
Eigen::MatrixXcd build_A_from_terms(int order, const BoxOperators& ops);
// Ã_N = A'_N - A_{N-1} Σ
Eigen::MatrixXcd build_A_tilde(int N, const BoxOperators& ops);
// Ã_N = A_N (H_r - z) - A_{N-1} Σ
Eigen::MatrixXcd build_A_tilde_alt(int N, const BoxOperators& ops);

double spectral_norm(const Eigen::MatrixXcd& m);

// ‖R - (Σ_{l<N} A_l + Ã_N R)‖₂
double telescoping_residual(int N, const BoxOperators& ops);

struct TelescopingReport {
    double residual = 0.0;
    double tilde_agreement = 0.0;  // ‖Ã_N - Ã_N^{alt}‖₂
    double sigma_dropped = 0.0;
    int N = 0;
};

TelescopingReport telescoping_check(const Region& region, double lambda, double E, double eps,
                                    const SingleSitePotential& u, const DisorderSample& sample, int N,
                                    const TorusGrid& grid = {});

struct PairMoment {
    Site x, y;
    double mean_sq = 0.0;
    double stderr = 0.0;
};

struct MomentSamples {
    std::vector<PairMoment> pairs;
    Eigen::MatrixXd values;  // samples × pairs, |A_ℓ(x, y)|²

    // mean and standard error of |A(pair i)|² - |A(pair j)|² over samples
    std::pair<double, double> paired_difference(std::size_t i, std::size_t j) const;
};

// Monte Carlo over disorder of |A_ℓ(x, y)|² with one sparse factorization of H_r - z.
class AMomentEstimator {
public:
    AMomentEstimator(const Region& region, double lambda, double E, double eps, SingleSitePotential u,
                     DisorderDensity rho, const SparseComplex& sigma);
    ~AMomentEstimator();

    // Samples are independent draws keyed by (seed, sample index), so any thread count gives the same table.
    MomentSamples run(int order, const std::vector<std::pair<Site, Site>>& pairs, int samples,
                      std::uint64_t seed, int threads = 1) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// E|A_ℓ(x, y)|² and its standard error; samples >= 100.
std::pair<double, double> mc_moment_A(const Region& region, double lambda, double E, double eps,
                                      const SingleSitePotential& u, const DisorderDensity& rho, int order,
                                      const Site& x, const Site& y, int samples, std::uint64_t seed,
                                      const TorusGrid& grid = {});

}  // namespace anderson
