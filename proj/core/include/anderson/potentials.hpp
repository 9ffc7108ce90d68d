#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "anderson/lattice.hpp"

namespace anderson {

enum class PotentialKind { Overlapping, NonOverlapping, Dipole };

std::string to_string(PotentialKind k);

class SingleSitePotential {
public:
    // Overlapping u with |u(x)| <= C e^{-A|x|}. Entries beyond the truncation radius are dropped.
    static SingleSitePotential overlapping(std::vector<std::pair<Site, double>> values, double C,
                                           double A);
    // u = δ_0, the Anderson model.
    static SingleSitePotential delta();
    // u(x) = C s(x) e^{-A|x|} with s(x) = (-1)^{x1+x2+x3} when alternating, else 1.
    static SingleSitePotential exponential(double C, double A, bool alternating);
    // Compactly supported u on Θ ⊆ Θ̂ with period vector k; the cell Θ̂ is given in enumeration order.
    static SingleSitePotential nonoverlapping(std::vector<std::pair<Site, double>> values,
                                              std::array<int, 3> period, std::vector<Site> cell);
    // u(0) = 1, u(e1) = -1.
    static SingleSitePotential dipole();

    PotentialKind kind() const { return kind_; }
    // Nonzero entries of u.
    const std::vector<std::pair<Site, double>>& values() const { return values_; }
    double value(const Site& x) const;
    double sup_abs() const;
    // max |x|_∞ over the support
    std::int64_t reach() const;

    // Overlapping data.
    double decay_C() const { return C_; }
    double decay_A() const { return A_; }
    int truncation_radius() const { return truncation_radius_; }

    // Period vector; (1,1,1) for Overlapping and Dipole.
    const std::array<int, 3>& period() const { return period_; }
    bool on_period_lattice(const Site& i) const;

    // NonOverlapping data.
    const std::vector<Site>& cell() const { return cell_; }
    std::size_t cell_size() const { return cell_.size(); }
    // D_ii = u(x_i)
    std::vector<double> cell_diagonal() const;
    // ℓ¹ diameter of Θ̂.
    std::int64_t cell_diameter() const;
    // x = x_i + l with l ∈ kZ³; returns (i, l).
    std::pair<std::size_t, Site> cell_decompose(const Site& x) const;

private:
    PotentialKind kind_ = PotentialKind::Overlapping;
    std::vector<std::pair<Site, double>> values_;
    double C_ = 0.0, A_ = 0.0;
    int truncation_radius_ = 0;
    std::array<int, 3> period_{1, 1, 1};
    std::vector<Site> cell_;
    std::unordered_map<Site, std::size_t, SiteHash> residue_;
};

// Σ_n e^{-i2π p·n} u(n). Throws UnsupportedVariantError for NonOverlapping.
cplx u_hat(const SingleSitePotential& u, const Momentum& p);
// max_p |û(p)| on the unshifted M³ grid (contains p = 0 and p = 1/2 per axis).
double u_hat_sup(const SingleSitePotential& u, int M = 64);

enum class DensityKind { Uniform, RaisedCosine, SqrtBump };

std::string to_string(DensityKind k);

// Even, compactly supported density on J = [-a, a] with unit variance.
class DisorderDensity {
public:
    static DisorderDensity uniform();
    // (1 + cos(πx/a)) / (2a)
    static DisorderDensity raised_cosine();
    // c |x|^{1/2}, Hölder with α = 1/2
    static DisorderDensity sqrt_bump();
    static DisorderDensity from_kind(DensityKind k);

    DensityKind kind() const { return kind_; }
    double half_width() const { return a_; }
    double alpha() const { return alpha_; }
    double holder_K() const { return K_; }
    double sup() const;
    double pdf(double x) const;
    double cdf(double x) const;
    double inverse_cdf(double u) const;
    // m_{2l}
    double even_moment(int l) const;
    // Exact m_{2l} = num/den where the density has rational moments.
    std::optional<std::pair<std::int64_t, std::int64_t>> even_moment_fraction(int l) const;

private:
    DensityKind kind_ = DensityKind::Uniform;
    double a_ = 0.0, alpha_ = 1.0, K_ = 0.0, c_ = 0.0;
    std::vector<double> moments_;
};

struct SeedRecord {
    std::uint64_t master_seed = 0;
    std::uint64_t stream = 0;
};

// ω_i = F⁻¹(u(seed, stream, i)).
double draw_coupling(const DisorderDensity& rho, const SeedRecord& seed, const Site& i);

class DisorderSample {
public:
    DisorderSample() = default;
    DisorderSample(std::array<int, 3> period, SeedRecord seed) : period_(period), seed_(seed) {}

    void set(const Site& i, double w) { values_[i] = w; }
    bool has(const Site& i) const { return values_.count(i) != 0; }
    // Throws IncompleteSampleError when i was not drawn.
    double at(const Site& i) const;
    std::size_t size() const { return values_.size(); }
    const std::array<int, 3>& period() const { return period_; }
    const SeedRecord& seed() const { return seed_; }
    const std::unordered_map<Site, double, SiteHash>& values() const { return values_; }

private:
    std::array<int, 3> period_{1, 1, 1};
    SeedRecord seed_{};
    std::unordered_map<Site, double, SiteHash> values_;
};

// One draw for every i ∈ kZ³ whose translate u(· - i) touches the region.
DisorderSample sample_disorder(const DisorderDensity& rho, const Region& region,
                               const SingleSitePotential& u, SeedRecord seed);
// Lattice kZ³ sites within distance `extension` (sup norm) of the box.
DisorderSample sample_disorder(const DisorderDensity& rho, const Box& region, std::array<int, 3> period,
                               int extension, SeedRecord seed);

// V_ω(x) = Σ_i ω_i u(x - i)
double alloy_potential(const DisorderSample& s, const SingleSitePotential& u, const Site& x);

}  // namespace anderson
