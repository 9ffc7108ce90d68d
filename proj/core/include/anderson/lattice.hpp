#pragma once

#include <array>
#include <complex>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

namespace anderson {

using cplx = std::complex<double>;

struct Site {
    std::int64_t x = 0, y = 0, z = 0;

    constexpr std::int64_t operator[](int a) const { return a == 0 ? x : (a == 1 ? y : z); }
    constexpr std::int64_t& operator[](int a) { return a == 0 ? x : (a == 1 ? y : z); }

    friend constexpr Site operator+(Site a, Site b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend constexpr Site operator-(Site a, Site b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend constexpr Site operator-(Site a) { return {-a.x, -a.y, -a.z}; }
    friend constexpr auto operator<=>(const Site&, const Site&) = default;

    static constexpr Site unit(int axis, int sign = 1) {
        Site s;
        s[axis] = sign;
        return s;
    }
    std::string str() const;
};

struct SiteHash {
    std::size_t operator()(const Site& s) const noexcept;
};

std::int64_t sup_norm(const Site& s);
std::int64_t l1_norm(const Site& s);
double euclidean_norm(const Site& s);
inline std::int64_t sup_distance(const Site& a, const Site& b) { return sup_norm(a - b); }
inline double euclidean_distance(const Site& a, const Site& b) { return euclidean_norm(a - b); }

// The six nearest-neighbour offsets, +e1, -e1, +e2, ...
const std::array<Site, 6>& unit_vectors();

// Cube Λ_{L,x} = { y : |y - x|_∞ <= L }.
struct Box {
    Site center{};
    int radius = 0;

    bool contains(const Site& s) const { return sup_distance(s, center) <= radius; }
    std::size_t size() const;
    std::vector<Site> sites() const;
};

// Sites of b that have a nearest neighbour outside b.
std::vector<Site> boundary(const Box& b);

// A finite set of sites with a fixed enumeration; used as the index space of box matrices.
class Region {
public:
    Region() = default;
    explicit Region(const Box& b);
    explicit Region(std::vector<Site> sites);
    // Axis-aligned cuboid [lo, hi] (inclusive).
    static Region cuboid(const Site& lo, const Site& hi);

    std::size_t size() const { return sites_.size(); }
    const std::vector<Site>& sites() const { return sites_; }
    const Site& site(std::size_t i) const { return sites_[i]; }
    // -1 when s is not in the region.
    std::ptrdiff_t index(const Site& s) const;
    bool contains(const Site& s) const { return index(s) >= 0; }
    std::vector<Site> boundary() const;
    // Smallest distance (sup norm) from s to a site outside the region.
    std::int64_t depth(const Site& s) const;

private:
    std::vector<Site> sites_;
    std::unordered_map<Site, std::size_t, SiteHash> index_;
};

struct Momentum {
    std::array<double, 3> p{0.0, 0.0, 0.0};

    Momentum() = default;
    Momentum(double a, double b, double c);
    double operator[](int a) const { return p[static_cast<std::size_t>(a)]; }
    // Representative of x mod 1 in [-1/2, 1/2).
    static double reduce(double x);
};

// e(p) = 2 Σ_a sin²(π p_a), range [0, 6].
double dispersion(const Momentum& p);

struct TorusGrid {
    int M = 128;
    // Shifted grid: (j + 1/2)/M - 1/2. Unshifted: j/M - 1/2, which contains 0 and 1/2.
    bool shifted = true;

    double point(int j) const { return (j + (shifted ? 0.5 : 0.0)) / M - 0.5; }
    double weight() const { return 1.0 / (static_cast<double>(M) * M * M); }
    std::size_t count() const { return static_cast<std::size_t>(M) * M * M; }
    Momentum momentum(int i, int j, int k) const { return {point(i), point(j), point(k)}; }
};

// Neumaier-compensated accumulator.
template <class T>
class CompensatedSum {
public:
    void add(T v) {
        T t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }
    T value() const { return sum_ + comp_; }

private:
    T sum_{};
    T comp_{};
};

template <>
inline void CompensatedSum<cplx>::add(cplx v) {
    auto step = [](double& s, double& c, double x) {
        double t = s + x;
        if (std::abs(s) >= std::abs(x))
            c += (s - t) + x;
        else
            c += (x - t) + s;
        s = t;
    };
    double sr = sum_.real(), si = sum_.imag(), cr = comp_.real(), ci = comp_.imag();
    step(sr, cr, v.real());
    step(si, ci, v.imag());
    sum_ = {sr, si};
    comp_ = {cr, ci};
}

using MomentumFn = std::function<cplx(const Momentum&)>;

// Uniform-weight Riemann sum over the grid; throws DomainError at the first non-finite value.
cplx torus_quadrature(const MomentumFn& f, const TorusGrid& grid);

struct LadderStep {
    int M;
    cplx value;
    double diff;  // |Q(M) - Q(M/2)|, NaN at the first rung
};

struct LadderResult {
    std::vector<LadderStep> steps;
    bool converged = false;  // last relative difference below rel_tol
    bool monotone = false;   // each difference at most 10x the previous one, or at roundoff
    cplx value() const { return steps.back().value; }
};

// Evaluates Q(M0), Q(2 M0), ... for `levels` rungs.
LadderResult quadrature_ladder(const MomentumFn& f, int M0, int levels, double rel_tol = 1e-6);

// ∫ g(e(p)) dp on the shifted grid, using the cubic symmetry of e. Cost ~ M³/48.
double dispersion_quadrature(const std::function<double(double)>& g, int M);

// Ladder of dispersion_quadrature starting at M0, doubling until the relative change
// drops below rel_tol or M exceeds M_max.
LadderResult dispersion_ladder(const std::function<double(double)>& g, int M0, int M_max,
                               double rel_tol = 1e-6);

// Complex samples of a function on a TorusGrid, stored row-major as (i*M + j)*M + k.
struct GridField {
    TorusGrid grid;
    std::vector<cplx> values;

    explicit GridField(const TorusGrid& g) : grid(g), values(g.count()) {}
    cplx& at(int i, int j, int k) {
        return values[(static_cast<std::size_t>(i) * grid.M + j) * grid.M + k];
    }
    cplx at(int i, int j, int k) const {
        return values[(static_cast<std::size_t>(i) * grid.M + j) * grid.M + k];
    }
};

// F(p) = e(p) on every grid point.
GridField dispersion_field(const TorusGrid& grid);

// Table of ∫ e^{i2π w·p} F(p) dp for |w|_∞ <= R, computed axis by axis.
class FourierTable {
public:
    FourierTable() = default;
    FourierTable(int R, std::vector<cplx> data) : R_(R), data_(std::move(data)) {}
    int radius() const { return R_; }
    cplx operator()(const Site& w) const;

private:
    int R_ = 0;
    std::vector<cplx> data_;
};

FourierTable fourier_coefficients(const GridField& F, int R);

// σ(p) = Σ_k c_k e^{i2π p·k} evaluated on the grid.
GridField synthesize_on_grid(const std::vector<std::pair<Site, cplx>>& coefficients,
                             const TorusGrid& grid);

}  // namespace anderson
