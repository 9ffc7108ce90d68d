#include "anderson/green.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "anderson/errors.hpp"

namespace anderson {

void GreenTable::write_csv(std::ostream& os) const {
    os << "w1,w2,w3,Re,Im\n";
    os << std::setprecision(17);
    const int R = radius();
    for (int i = -R; i <= R; ++i)
        for (int j = -R; j <= R; ++j)
            for (int k = -R; k <= R; ++k) {
                cplx v = table_(Site{i, j, k});
                os << i << ',' << j << ',' << k << ',' << v.real() << ',' << v.imag() << '\n';
            }
}

GreenTable free_green_table(double E, int R, const TorusGrid& grid) {
    if (!(E < 0.0)) throw DomainError("free_green: E must be below the spectrum [0, 6]");
    GridField F = dispersion_field(grid);
    for (auto& v : F.values) v = 1.0 / (v - E);
    FourierTable t = fourier_coefficients(F, R);
    for (int i = -R; i <= R; ++i)
        for (int j = -R; j <= R; ++j)
            for (int k = -R; k <= R; ++k) {
                cplx v = t(Site{i, j, k});
                if (std::abs(v.imag()) > 1e-10) {
                    std::ostringstream os;
                    os << "free_green: parity check failed at " << Site{i, j, k}.str() << ", Im = " << v.imag();
                    throw DomainError(os.str());
                }
            }
    return GreenTable(E, 0.0, grid.M, std::move(t));
}

double free_green(double E, const Site& w, const TorusGrid& grid) {
    auto R = static_cast<int>(sup_norm(w));
    return free_green_table(E, R, grid)(w).real();
}

bool ratio_bound_check(const GreenTable& G, const Site& w, const Site& e) {
    if (w == Site{}) throw PreconditionError("ratio_bound_check: w = 0 is excluded");
    if (l1_norm(e) != 1) throw PreconditionError("ratio_bound_check: e must be a unit vector");
    const double b = 6.0 - 2.0 * G.energy();
    const double ratio = G(w).real() / G(w + e).real();
    return 1.0 / b < ratio && ratio < b;
}

bool ratio_bound_check(double E, const Site& w, const Site& e, const TorusGrid& grid) {
    auto R = static_cast<int>(std::max(sup_norm(w), sup_norm(w + e)));
    return ratio_bound_check(free_green_table(E, R, grid), w, e);
}

double psi_envelope(double alpha, double E, double r, int d) {
    if (d < 3) throw PreconditionError("psi_envelope: d must be >= 3");
    const double m = -E;
    const double power = std::max(std::pow(m, 0.5 * (d - 2)), std::pow(1.0 + r, 2.0 - d));
    return std::exp(-r * std::sqrt(m) / alpha) * power;
}

EnvelopeCheck envelope_check(const GreenTable& G, int radius) {
    if (radius > G.radius()) throw PreconditionError("envelope_check: table radius too small");
    EnvelopeCheck out;
    out.sup_by_radius.assign(static_cast<std::size_t>(radius) + 1, 0.0);
    out.min_value = std::numeric_limits<double>::infinity();
    constexpr int d = 3;
    for (int i = -radius; i <= radius; ++i)
        for (int j = -radius; j <= radius; ++j)
            for (int k = -radius; k <= radius; ++k) {
                Site w{i, j, k};
                double g = G(w).real();
                out.min_value = std::min(out.min_value, g);
                double q = g / psi_envelope(3.0 * d, G.energy(), euclidean_norm(w), d);
                auto r = static_cast<std::size_t>(sup_norm(w));
                out.sup_by_radius[r] = std::max(out.sup_by_radius[r], q);
                if (q > out.C_fit) {
                    out.C_fit = q;
                    out.argmax = w;
                }
            }
    for (std::size_t r = 1; r < out.sup_by_radius.size(); ++r)
        out.sup_by_radius[r] = std::max(out.sup_by_radius[r], out.sup_by_radius[r - 1]);
    out.worst_ratio = out.C_fit;
    if (!std::isfinite(out.C_fit)) throw DomainError("envelope_check: non-finite envelope constant");
    return out;
}

EnvelopeCheck envelope_check(double E, int radius, const TorusGrid& grid) {
    return envelope_check(free_green_table(E, radius, grid), radius);
}

GreenTable scalar_resolvent_table(double E, double eps, const std::vector<std::pair<Site, cplx>>& sigma,
                                  int R, const TorusGrid& grid) {
    GridField F = dispersion_field(grid);
    GridField S = synthesize_on_grid(sigma, grid);
    const cplx z{E, eps};
    double min_abs = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < F.values.size(); ++i) {
        cplx d = F.values[i] - z - S.values[i];
        min_abs = std::min(min_abs, std::abs(d));
        F.values[i] = 1.0 / d;
    }
    if (min_abs < 1e-8) {
        std::ostringstream os;
        os << "renormalized denominator nearly singular: min |e - E - i eps - sigma| = " << min_abs;
        throw ConditioningError(os.str());
    }
    return GreenTable(E, eps, grid.M, fourier_coefficients(F, R));
}

DecayFit exponential_fit(const std::vector<double>& r, const std::vector<double>& v) {
    if (r.size() != v.size() || r.size() < 2) throw PreconditionError("exponential_fit: need >= 2 points");
    const auto n = static_cast<double>(r.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (!(v[i] > 0.0)) throw DomainError("exponential_fit: nonpositive value");
        sx += r[i];
        sy += std::log(v[i]);
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        sxx += (r[i] - mx) * (r[i] - mx);
        sxy += (r[i] - mx) * (std::log(v[i]) - my);
    }
    if (sxx <= 0.0) throw PreconditionError("exponential_fit: all distances coincide");
    const double slope = sxy / sxx;
    const double icpt = my - slope * mx;
    double ss = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        double e = std::log(v[i]) - (icpt + slope * r[i]);
        ss += e * e;
    }
    DecayFit f;
    f.rate = slope == 0.0 ? 0.0 : -slope;
    f.prefactor = std::exp(icpt);
    f.residual = std::sqrt(ss / n);
    f.rate_stderr = r.size() > 2 ? std::sqrt(ss / (n - 2.0) / sxx) : 0.0;
    f.r_min = *std::min_element(r.begin(), r.end());
    f.r_max = *std::max_element(r.begin(), r.end());
    f.points = r.size();
    return f;
}

DecayFit decay_fit(const std::vector<std::pair<Site, double>>& values, double r_min, double r_max) {
    std::vector<double> r, v;
    for (const auto& [w, g] : values) {
        double d = euclidean_norm(w);
        if (d < r_min || d > r_max) continue;
        if (!(g > 0.0)) throw DomainError("decay_fit: nonpositive value at " + w.str());
        r.push_back(d);
        v.push_back(g);
    }
    if (r.size() < 5) throw PreconditionError("decay_fit: fewer than 5 points in range");
    DecayFit f = exponential_fit(r, v);
    f.r_min = r_min;
    f.r_max = r_max;
    return f;
}

}  // namespace anderson
