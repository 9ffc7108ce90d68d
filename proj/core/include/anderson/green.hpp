#pragma once

#include <map>
#include <ostream>
#include <utility>
#include <vector>

#include "anderson/lattice.hpp"

namespace anderson {

// Values of a translation-invariant kernel G(0, w) for |w|_∞ <= radius.
class GreenTable {
public:
    GreenTable() = default;
    GreenTable(double E, double eps, int M, FourierTable table)
        : E_(E), eps_(eps), M_(M), table_(std::move(table)) {}

    double energy() const { return E_; }
    double epsilon() const { return eps_; }
    int grid_size() const { return M_; }
    int radius() const { return table_.radius(); }
    cplx operator()(const Site& w) const { return table_(w); }

    // CSV rows w1,w2,w3,Re,Im with a header, offsets in lexicographic order.
    void write_csv(std::ostream& os) const;

private:
    double E_ = 0.0, eps_ = 0.0;
    int M_ = 0;
    FourierTable table_;
};

// G_E(0, w) for |w|_∞ <= R, E < 0. The imaginary parts must vanish to 1e-10.
GreenTable free_green_table(double E, int R, const TorusGrid& grid = {});
double free_green(double E, const Site& w, const TorusGrid& grid = {});

// 1/(6-2E) < G(0,w)/G(0,w+e) < 6-2E evaluated on a precomputed table.
bool ratio_bound_check(const GreenTable& G, const Site& w, const Site& e);
bool ratio_bound_check(double E, const Site& w, const Site& e, const TorusGrid& grid = {});

// e^{-r√(-E)/α} max((-E)^{(d-2)/2}, (1+r)^{2-d})
double psi_envelope(double alpha, double E, double r, int d = 3);

struct EnvelopeCheck {
    double C_fit = 0.0;         // sup over the full radius
    double worst_ratio = 0.0;   // equals C_fit; kept under the name used by reports
    std::vector<double> sup_by_radius;  // sup over |w|_∞ <= r for r = 0..radius
    double min_value = 0.0;     // min G over the ball, must be > 0
    Site argmax{};
};

// sup_{|w|_∞ <= radius} G_E(0,w) / ψ_{3d}(|w|).
EnvelopeCheck envelope_check(double E, int radius, const TorusGrid& grid = {});
EnvelopeCheck envelope_check(const GreenTable& G, int radius);

// ∫ e^{i2π w·p} / (e(p) - E - iε - σ(p)) for |w|_∞ <= R, σ given by Fourier coefficients.
// Throws ConditioningError when |e - E - iε - σ| < 1e-8 at a grid point.
GreenTable scalar_resolvent_table(double E, double eps, const std::vector<std::pair<Site, cplx>>& sigma,
                                  int R, const TorusGrid& grid = {});

struct DecayFit {
    double rate = 0.0;       // minus the slope of log(value) against distance
    double prefactor = 0.0;  // exp(intercept)
    double residual = 0.0;   // RMS of log residuals
    double rate_stderr = 0.0;
    double r_min = 0.0, r_max = 0.0;
    std::size_t points = 0;
};

// Least-squares line through (r_i, log v_i); needs at least two distinct r.
DecayFit exponential_fit(const std::vector<double>& r, const std::vector<double>& v);

// Fit over sites with r_min <= |w| <= r_max (Euclidean); needs >= 5 points, all values > 0.
DecayFit decay_fit(const std::vector<std::pair<Site, double>>& values, double r_min, double r_max);

}  // namespace anderson
