#include "anderson/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "anderson/errors.hpp"
#include "anderson/rng.hpp"

namespace anderson {

namespace {

std::int64_t floor_mod(std::int64_t a, std::int64_t m) {
    std::int64_t r = a % m;
    return r < 0 ? r + m : r;
}

Site residue(const Site& x, const std::array<int, 3>& k) {
    return {floor_mod(x.x, k[0]), floor_mod(x.y, k[1]), floor_mod(x.z, k[2])};
}

}  // namespace

std::string to_string(PotentialKind k) {
    switch (k) {
        case PotentialKind::Overlapping: return "overlapping";
        case PotentialKind::NonOverlapping: return "nonoverlapping";
        case PotentialKind::Dipole: return "dipole";
    }
    return "?";
}

SingleSitePotential SingleSitePotential::overlapping(std::vector<std::pair<Site, double>> values,
                                                     double C, double A) {
    if (!(C > 0.0) || !(A > 0.0)) throw PreconditionError("overlapping potential: need C > 0 and A > 0");
    SingleSitePotential u;
    u.kind_ = PotentialKind::Overlapping;
    u.C_ = C;
    u.A_ = A;
    u.truncation_radius_ = std::max(0, static_cast<int>(std::floor(std::log(C / 1e-12) / A)) + 1);
    for (auto& [x, v] : values) {
        double r = euclidean_norm(x);
        if (std::abs(v) > C * std::exp(-A * r) * (1.0 + 1e-12))
            throw PreconditionError("overlapping potential: |u" + x.str() + "| exceeds C e^{-A|x|}");
        if (r > u.truncation_radius_ || v == 0.0) continue;
        u.values_.emplace_back(x, v);
    }
    std::sort(u.values_.begin(), u.values_.end());
    for (std::size_t i = 1; i < u.values_.size(); ++i)
        if (u.values_[i].first == u.values_[i - 1].first)
            throw PreconditionError("overlapping potential: duplicate site " + u.values_[i].first.str());
    return u;
}

SingleSitePotential SingleSitePotential::delta() { return overlapping({{Site{}, 1.0}}, 1.0, 1.0); }

SingleSitePotential SingleSitePotential::exponential(double C, double A, bool alternating) {
    const int r = std::max(0, static_cast<int>(std::floor(std::log(C / 1e-12) / A)) + 1);
    std::vector<std::pair<Site, double>> vals;
    for (int i = -r; i <= r; ++i)
        for (int j = -r; j <= r; ++j)
            for (int k = -r; k <= r; ++k) {
                Site x{i, j, k};
                double d = euclidean_norm(x);
                if (d > r) continue;
                double s = (alternating && ((i + j + k) % 2 != 0)) ? -1.0 : 1.0;
                vals.emplace_back(x, s * C * std::exp(-A * d));
            }
    return overlapping(std::move(vals), C, A);
}

SingleSitePotential SingleSitePotential::nonoverlapping(std::vector<std::pair<Site, double>> values,
                                                        std::array<int, 3> period,
                                                        std::vector<Site> cell) {
    for (int a : period)
        if (a < 1) throw PreconditionError("nonoverlapping potential: period entries must be >= 1");
    SingleSitePotential u;
    u.kind_ = PotentialKind::NonOverlapping;
    u.period_ = period;
    u.cell_ = std::move(cell);
    const auto cells = static_cast<std::size_t>(period[0]) * period[1] * period[2];
    if (u.cell_.size() != cells)
        throw PreconditionError("nonoverlapping potential: |cell| must equal k1 k2 k3");
    for (std::size_t i = 0; i < u.cell_.size(); ++i) {
        if (!u.residue_.emplace(residue(u.cell_[i], period), i).second)
            throw PreconditionError("nonoverlapping potential: cell sites " + u.cell_[i].str() +
                                    " repeat a residue class, translates do not tile");
    }
    for (auto& [x, v] : values) {
        if (v == 0.0) continue;
        if (std::find(u.cell_.begin(), u.cell_.end(), x) == u.cell_.end())
            throw PreconditionError("nonoverlapping potential: support site " + x.str() + " not in cell");
        u.values_.emplace_back(x, v);
    }
    std::sort(u.values_.begin(), u.values_.end());
    // (Θ - i) ∩ Θ = ∅ for 0 ≠ i ∈ kZ³ within twice the cell diameter.
    const std::int64_t lim = 2 * std::max<std::int64_t>(u.cell_diameter(), 1);
    for (std::int64_t a = -lim; a <= lim; ++a)
        for (std::int64_t b = -lim; b <= lim; ++b)
            for (std::int64_t c = -lim; c <= lim; ++c) {
                Site i{a * period[0], b * period[1], c * period[2]};
                if (i == Site{}) continue;
                for (const auto& [x, v] : u.values_)
                    if (u.value(x + i) != 0.0)
                        throw PreconditionError("nonoverlapping potential: translates overlap");
            }
    return u;
}

SingleSitePotential SingleSitePotential::dipole() {
    SingleSitePotential u;
    u.kind_ = PotentialKind::Dipole;
    u.values_ = {{Site{0, 0, 0}, 1.0}, {Site{1, 0, 0}, -1.0}};
    std::sort(u.values_.begin(), u.values_.end());
    return u;
}

double SingleSitePotential::value(const Site& x) const {
    auto it = std::lower_bound(values_.begin(), values_.end(), x,
                               [](const auto& e, const Site& s) { return e.first < s; });
    return (it != values_.end() && it->first == x) ? it->second : 0.0;
}

double SingleSitePotential::sup_abs() const {
    double m = 0.0;
    for (const auto& [x, v] : values_) m = std::max(m, std::abs(v));
    return m;
}

std::int64_t SingleSitePotential::reach() const {
    std::int64_t r = 0;
    for (const auto& [x, v] : values_) r = std::max(r, sup_norm(x));
    return r;
}

bool SingleSitePotential::on_period_lattice(const Site& i) const {
    return floor_mod(i.x, period_[0]) == 0 && floor_mod(i.y, period_[1]) == 0 &&
           floor_mod(i.z, period_[2]) == 0;
}

std::vector<double> SingleSitePotential::cell_diagonal() const {
    std::vector<double> d;
    d.reserve(cell_.size());
    for (const Site& x : cell_) d.push_back(value(x));
    return d;
}

std::int64_t SingleSitePotential::cell_diameter() const {
    std::int64_t d = 0;
    for (const Site& a : cell_)
        for (const Site& b : cell_) d = std::max(d, l1_norm(a - b));
    return d;
}

std::pair<std::size_t, Site> SingleSitePotential::cell_decompose(const Site& x) const {
    if (kind_ != PotentialKind::NonOverlapping)
        throw UnsupportedVariantError("cell_decompose: potential has no primitive cell");
    auto it = residue_.find(residue(x, period_));
    std::size_t i = it->second;
    return {i, x - cell_[i]};
}

cplx u_hat(const SingleSitePotential& u, const Momentum& p) {
    if (u.kind() == PotentialKind::NonOverlapping)
        throw UnsupportedVariantError("u_hat: non-overlapping potentials use the cell matrix D");
    CompensatedSum<cplx> acc;
    for (const auto& [n, v] : u.values()) {
        double ph = -2.0 * std::numbers::pi * (p[0] * n.x + p[1] * n.y + p[2] * n.z);
        acc.add(std::polar(v, ph));
    }
    return acc.value();
}

double u_hat_sup(const SingleSitePotential& u, int M) {
    if (u.kind() == PotentialKind::NonOverlapping)
        throw UnsupportedVariantError("u_hat: non-overlapping potentials use the cell matrix D");
    // û(p) = Σ_n u(n) e^{-i2π p·n}, i.e. coefficient u(n) at offset -n
    std::vector<std::pair<Site, cplx>> coeffs;
    coeffs.reserve(u.values().size());
    for (const auto& [n, v] : u.values()) coeffs.emplace_back(Site{} - n, cplx(v));
    const GridField F = synthesize_on_grid(coeffs, TorusGrid{M, false});
    double m = 0.0;
    for (const cplx& v : F.values) m = std::max(m, std::abs(v));
    return m;
}

std::string to_string(DensityKind k) {
    switch (k) {
        case DensityKind::Uniform: return "uniform";
        case DensityKind::RaisedCosine: return "raised_cosine";
        case DensityKind::SqrtBump: return "sqrt_bump";
    }
    return "?";
}

DisorderDensity DisorderDensity::uniform() {
    DisorderDensity d;
    d.kind_ = DensityKind::Uniform;
    d.a_ = std::sqrt(3.0);
    d.alpha_ = 1.0;
    d.K_ = 0.0;
    d.c_ = 1.0 / (2.0 * d.a_);
    for (int l = 0; l <= 16; ++l) d.moments_.push_back(std::pow(3.0, l) / (2 * l + 1));
    return d;
}

DisorderDensity DisorderDensity::raised_cosine() {
    using std::numbers::pi;
    DisorderDensity d;
    d.kind_ = DensityKind::RaisedCosine;
    d.a_ = 1.0 / std::sqrt(1.0 / 3.0 - 2.0 / (pi * pi));
    d.alpha_ = 1.0;
    d.K_ = pi / (2.0 * d.a_ * d.a_);
    d.c_ = 1.0 / (2.0 * d.a_);
    for (int l = 0; l <= 16; ++l) {
        auto f = [&](double x) { return std::pow(x, 2 * l) * d.pdf(x); };
        double m = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, -d.a_, d.a_, 15, 1e-15);
        d.moments_.push_back(m);
    }
    return d;
}

DisorderDensity DisorderDensity::sqrt_bump() {
    DisorderDensity d;
    d.kind_ = DensityKind::SqrtBump;
    d.a_ = std::sqrt(7.0 / 3.0);
    d.alpha_ = 0.5;
    d.c_ = 3.0 / (4.0 * std::pow(d.a_, 1.5));
    d.K_ = d.c_;
    for (int l = 0; l <= 16; ++l) d.moments_.push_back(3.0 * std::pow(7.0 / 3.0, l) / (4 * l + 3));
    return d;
}

DisorderDensity DisorderDensity::from_kind(DensityKind k) {
    switch (k) {
        case DensityKind::Uniform: return uniform();
        case DensityKind::RaisedCosine: return raised_cosine();
        case DensityKind::SqrtBump: return sqrt_bump();
    }
    throw PreconditionError("unknown density kind");
}

double DisorderDensity::sup() const {
    switch (kind_) {
        case DensityKind::Uniform: return c_;
        case DensityKind::RaisedCosine: return 2.0 * c_;
        case DensityKind::SqrtBump: return c_ * std::sqrt(a_);
    }
    return 0.0;
}

double DisorderDensity::pdf(double x) const {
    if (std::abs(x) > a_) return 0.0;
    switch (kind_) {
        case DensityKind::Uniform: return c_;
        case DensityKind::RaisedCosine: return c_ * (1.0 + std::cos(std::numbers::pi * x / a_));
        case DensityKind::SqrtBump: return c_ * std::sqrt(std::abs(x));
    }
    return 0.0;
}

double DisorderDensity::cdf(double x) const {
    if (x <= -a_) return 0.0;
    if (x >= a_) return 1.0;
    switch (kind_) {
        case DensityKind::Uniform: return (x + a_) / (2.0 * a_);
        case DensityKind::RaisedCosine:
            return (x + a_) / (2.0 * a_) + std::sin(std::numbers::pi * x / a_) / (2.0 * std::numbers::pi);
        case DensityKind::SqrtBump: {
            double s = 0.5 * std::pow(std::abs(x) / a_, 1.5);
            return x < 0 ? 0.5 - s : 0.5 + s;
        }
    }
    return 0.0;
}

double DisorderDensity::inverse_cdf(double u) const {
    if (!(u > 0.0 && u < 1.0)) throw DomainError("inverse_cdf: u must lie in (0, 1)");
    switch (kind_) {
        case DensityKind::Uniform: return -a_ + 2.0 * a_ * u;
        case DensityKind::SqrtBump: {
            double t = std::pow(std::abs(2.0 * u - 1.0), 2.0 / 3.0);
            return (u < 0.5 ? -a_ : a_) * t;
        }
        case DensityKind::RaisedCosine: {
            auto f = [&](double x) { return cdf(x) - u; };
            boost::math::tools::eps_tolerance<double> tol(50);
            std::uintmax_t iters = 100;
            auto [lo, hi] = boost::math::tools::toms748_solve(f, -a_, a_, -u, 1.0 - u, tol, iters);
            return 0.5 * (lo + hi);
        }
    }
    return 0.0;
}

double DisorderDensity::even_moment(int l) const {
    if (l < 0 || static_cast<std::size_t>(l) >= moments_.size())
        throw PreconditionError("even_moment: order out of range");
    return moments_[static_cast<std::size_t>(l)];
}

std::optional<std::pair<std::int64_t, std::int64_t>> DisorderDensity::even_moment_fraction(int l) const {
    if (l < 0 || l > 16) return std::nullopt;
    auto ipow = [](std::int64_t b, int e) {
        std::int64_t r = 1;
        for (int i = 0; i < e; ++i) r *= b;
        return r;
    };
    switch (kind_) {
        case DensityKind::Uniform: return std::pair{ipow(3, l), std::int64_t{2 * l + 1}};
        case DensityKind::SqrtBump: return std::pair{3 * ipow(7, l), ipow(3, l) * (4 * l + 3)};
        case DensityKind::RaisedCosine: return std::nullopt;
    }
    return std::nullopt;
}

double draw_coupling(const DisorderDensity& rho, const SeedRecord& seed, const Site& i) {
    return rho.inverse_cdf(to_unit_open(hash_key(seed.master_seed, seed.stream, i)));
}

double DisorderSample::at(const Site& i) const {
    auto it = values_.find(i);
    if (it == values_.end()) throw IncompleteSampleError("disorder sample has no coupling at " + i.str());
    return it->second;
}

DisorderSample sample_disorder(const DisorderDensity& rho, const Region& region,
                               const SingleSitePotential& u, SeedRecord seed) {
    DisorderSample s(u.period(), seed);
    for (const Site& x : region.sites())
        for (const auto& [n, v] : u.values()) {
            Site i = x - n;
            if (u.on_period_lattice(i) && !s.has(i)) s.set(i, draw_coupling(rho, seed, i));
        }
    return s;
}

DisorderSample sample_disorder(const DisorderDensity& rho, const Box& region, std::array<int, 3> period,
                               int extension, SeedRecord seed) {
    DisorderSample s(period, seed);
    Box ext{region.center, region.radius + std::max(extension, 0)};
    for (const Site& i : ext.sites()) {
        if (floor_mod(i.x, period[0]) == 0 && floor_mod(i.y, period[1]) == 0 && floor_mod(i.z, period[2]) == 0)
            s.set(i, draw_coupling(rho, seed, i));
    }
    return s;
}

double alloy_potential(const DisorderSample& s, const SingleSitePotential& u, const Site& x) {
    double v = 0.0;
    for (const auto& [n, un] : u.values()) {
        Site i = x - n;
        if (!u.on_period_lattice(i)) continue;
        v += s.at(i) * un;
    }
    return v;
}

}  // namespace anderson
