#include "anderson/wegner.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <Eigen/Eigenvalues>
#include <boost/math/tools/toms748_solve.hpp>

#include "anderson/errors.hpp"

namespace anderson {

HermitianPair::HermitianPair(Eigen::MatrixXcd A, Eigen::MatrixXcd B) : A_(std::move(A)), B_(std::move(B)) {
    if (A_.rows() != A_.cols() || B_.rows() != B_.cols() || A_.rows() != B_.rows())
        throw PreconditionError("HermitianPair: A and B must be square of the same size");
    const double scale = 1.0 + A_.norm() + B_.norm();
    if ((A_ - A_.adjoint()).norm() > 1e-12 * scale || (B_ - B_.adjoint()).norm() > 1e-12 * scale)
        throw PreconditionError("HermitianPair: matrices must be Hermitian");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(B_, Eigen::EigenvaluesOnly);
    alpha_ = es.eigenvalues()(0);
    beta_ = es.eigenvalues()(es.eigenvalues().size() - 1);
    if (!(alpha_ > 0.0)) throw PreconditionError("HermitianPair: B is not positive definite");
}

Eigen::VectorXd HermitianPair::eigenvalues(double x) const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(A_ + x * B_, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

std::size_t count_in(const Eigen::VectorXd& ev, const Interval& I) {
    return static_cast<std::size_t>(std::count_if(ev.begin(), ev.end(), [&](double v) { return I.contains(v); }));
}

WeylBound weyl_interval_bound(const HermitianPair& pair, const Interval& I, const Interval& J) {
    if (J.lo < 0.0 || J.hi < J.lo) throw PreconditionError("weyl_interval_bound: need 0 <= c <= d");
    if (I.hi < I.lo) throw PreconditionError("weyl_interval_bound: empty interval I");
    const double c = J.lo, d = J.hi;
    const Eigen::VectorXd ec = pair.eigenvalues(c), ed = pair.eigenvalues(d);

    auto root = [&](Eigen::Index k, double level) {
        auto f = [&](double x) { return pair.eigenvalues(x)(k) - level; };
        boost::uintmax_t iters = 200;
        auto r = boost::math::tools::toms748_solve(f, c, d, boost::math::tools::eps_tolerance<double>(50), iters);
        return 0.5 * (r.first + r.second);
    };

    WeylBound out;
    for (Eigen::Index k = 0; k < pair.dim(); ++k) {
        if (ed(k) < I.lo || ec(k) > I.hi) continue;
        const double lo = ec(k) >= I.lo ? c : root(k, I.lo);
        const double hi = ed(k) <= I.hi ? d : root(k, I.hi);
        out.lhs += std::max(0.0, hi - lo);
    }
    out.I_hat = Interval{I.lo - pair.beta() * d, I.hi - pair.alpha() * c};
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(pair.A(), Eigen::EigenvaluesOnly);
    out.rhs = I.length() / pair.alpha() * static_cast<double>(count_in(es.eigenvalues(), out.I_hat));
    out.holds = out.lhs <= out.rhs + 1e-9;
    return out;
}

double weyl_lhs_midpoint(const HermitianPair& pair, const Interval& I, const Interval& J, int points) {
    if (points < 1) throw PreconditionError("weyl_lhs_midpoint: need points >= 1");
    const double h = J.length() / points;
    double s = 0.0;
    for (int i = 0; i < points; ++i)
        s += static_cast<double>(count_in(pair.eigenvalues(J.lo + (i + 0.5) * h), I));
    return s * h;
}

namespace {

std::vector<double> graded_grid(double a) {
    std::set<double> pts;
    const int n = 20000;
    for (int i = 0; i <= n; ++i) pts.insert(-a + 2.0 * a * i / n);
    // 40 points per decade down to 1e-12 around 0 and inside the edges
    for (int j = 0; j <= 480; ++j) {
        const double t = a * std::pow(10.0, -j / 40.0);
        pts.insert(t);
        pts.insert(-t);
        pts.insert(a - t);
        pts.insert(-a + t);
    }
    pts.insert(0.0);
    return {pts.begin(), pts.end()};
}

}  // namespace

LipschitzApprox::LipschitzApprox(const DisorderDensity& rho, double K) : rho_(rho), K_(K) {
    if (!(K > 0.0)) throw PreconditionError("lipschitz_approx: K must be positive");
    identity_ = rho.alpha() >= 1.0;
    xs_ = graded_grid(rho.half_width());
    vals_.resize(xs_.size());
    for (std::size_t i = 0; i < xs_.size(); ++i) vals_[i] = rho.pdf(xs_[i]);
    if (!identity_) {
        // forward and backward sweeps of the lower envelope of cones
        for (std::size_t i = 1; i < xs_.size(); ++i)
            vals_[i] = std::min(vals_[i], vals_[i - 1] + K * (xs_[i] - xs_[i - 1]));
        for (std::size_t i = xs_.size() - 1; i-- > 0;)
            vals_[i] = std::min(vals_[i], vals_[i + 1] + K * (xs_[i + 1] - xs_[i]));
    }
    for (std::size_t i = 0; i < xs_.size(); ++i) {
        sup_error_ = std::max(sup_error_, std::abs(rho.pdf(xs_[i]) - vals_[i]));
        if (i > 0) {
            const double h = xs_[i] - xs_[i - 1];
            l1_ += 0.5 * h * (vals_[i] + vals_[i - 1]);
            max_quotient_ = std::max(max_quotient_, std::abs(vals_[i] - vals_[i - 1]) / h);
        }
    }
    if (!identity_) {
        const double a = rho.alpha();
        C_fit_ = sup_error_ * std::pow(K, a / (1.0 - a));
    }
}

double LipschitzApprox::operator()(double x) const {
    if (identity_) return rho_.pdf(x);
    if (x < xs_.front() || x > xs_.back()) return 0.0;
    auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    if (it == xs_.end()) return vals_.back();
    const std::size_t j = static_cast<std::size_t>(it - xs_.begin());
    const double t = (x - xs_[j - 1]) / (xs_[j] - xs_[j - 1]);
    return (1.0 - t) * vals_[j - 1] + t * vals_[j];
}

double LipschitzApprox::l1_bound() const {
    if (identity_) return 1.0;
    const double a = rho_.alpha();
    return 1.0 + C_fit_ * std::pow(K_, -a / (1.0 - a)) * 2.0 * rho_.half_width();
}

LipschitzApprox lipschitz_approx(const DisorderDensity& rho, double K) { return LipschitzApprox(rho, K); }

std::pair<double, double> WegnerTable::paired_linear_combination(std::size_t j, std::size_t i, double factor) const {
    const auto n = counts.rows();
    if (n < 2) throw PreconditionError("paired_linear_combination: need at least two samples");
    const Eigen::VectorXd d = counts.col(static_cast<Eigen::Index>(j)).cast<double>() -
                              factor * counts.col(static_cast<Eigen::Index>(i)).cast<double>();
    const double mean = d.mean();
    const double var = (d.array() - mean).square().sum() / static_cast<double>(n - 1);
    return {mean, std::sqrt(var / static_cast<double>(n))};
}

WegnerTable mc_wegner(const Region& region, double lambda, const SingleSitePotential& u, const DisorderDensity& rho,
                      const SpectralWindow& window, const std::vector<double>& widths, int samples,
                      std::uint64_t seed) {
    if (widths.empty()) throw PreconditionError("mc_wegner: no widths");
    if (samples < 2) throw PreconditionError("mc_wegner: need at least two samples");
    const double centre = 0.5 * (window.a + window.b);
    if (!std::isfinite(centre)) throw PreconditionError("mc_wegner: window must be bounded");

    std::vector<SpectralWindow> I;
    for (double w : widths) {
        if (!(w > 0.0)) throw PreconditionError("mc_wegner: widths must be positive");
        I.emplace_back(centre - 0.5 * w, centre + 0.5 * w);
        if (!(I.back().distance_to_free_spectrum() > 0.0))
            throw PreconditionError("mc_wegner: interval touches the free spectrum (D_I = 0)");
    }
    // interval endpoints, deduplicated, so each sample needs one inertia count per endpoint
    std::vector<double> ends;
    for (const auto& w : I) {
        ends.push_back(w.a);
        ends.push_back(w.b);
    }
    std::sort(ends.begin(), ends.end());
    ends.erase(std::unique(ends.begin(), ends.end()), ends.end());
    auto slot = [&](double e) { return std::lower_bound(ends.begin(), ends.end(), e) - ends.begin(); };

    WegnerTable t;
    t.counts.resize(samples, static_cast<Eigen::Index>(widths.size()));
    std::vector<std::size_t> below(ends.size());
    for (int s = 0; s < samples; ++s) {
        auto ds = sample_disorder(rho, region, u, SeedRecord{seed, static_cast<std::uint64_t>(s)});
        auto H = FiniteHamiltonian::build(region, lambda, u, ds);
        for (std::size_t e = 0; e < ends.size(); ++e) below[e] = count_below(H.matrix(), ends[e]);
        for (std::size_t w = 0; w < I.size(); ++w)
            t.counts(s, static_cast<Eigen::Index>(w)) =
                static_cast<int>(below[static_cast<std::size_t>(slot(I[w].b))] - below[static_cast<std::size_t>(slot(I[w].a))]);
    }

    // monotonicity needs widths sorted; compare along the sorted order
    std::vector<std::size_t> order(widths.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return widths[x] < widths[y]; });
    for (int s = 0; s < samples && t.monotone; ++s)
        for (std::size_t k = 1; k < order.size(); ++k)
            if (t.counts(s, static_cast<Eigen::Index>(order[k])) < t.counts(s, static_cast<Eigen::Index>(order[k - 1])))
                t.monotone = false;

    const double vol = static_cast<double>(region.size());
    const double a = rho.alpha();
    for (std::size_t w = 0; w < widths.size(); ++w) {
        const Eigen::VectorXd c = t.counts.col(static_cast<Eigen::Index>(w)).cast<double>();
        WegnerRow r;
        r.width = widths[w];
        r.estimate = c.mean();
        r.stderr = std::sqrt((c.array() - r.estimate).square().sum() / (samples - 1) / samples);
        r.D_I = I[w].distance_to_free_spectrum();
        r.ratio = r.estimate / (r.width * std::pow(vol, (1.0 + a) / a) / r.D_I);
        t.rows.push_back(r);
    }
    if (widths.size() >= 2) {
        double mx = 0, my = 0;
        for (const auto& r : t.rows) {
            mx += r.width;
            my += r.estimate;
        }
        mx /= static_cast<double>(t.rows.size());
        my /= static_cast<double>(t.rows.size());
        double sxy = 0, sxx = 0;
        for (const auto& r : t.rows) {
            sxy += (r.width - mx) * (r.estimate - my);
            sxx += (r.width - mx) * (r.width - mx);
        }
        t.slope = sxx > 0 ? sxy / sxx : 0.0;
        t.intercept = my - t.slope * mx;
    }
    return t;
}

}  // namespace anderson
