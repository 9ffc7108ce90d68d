#pragma once

// Reference values computed independently of the library's torus quadrature:
// lattice integrals from the heat-kernel representation with modified Bessel functions,
//   1/(e - E) = ∫_0^∞ e^{-t(e - E)} dt,   ∫ e^{t cos θ + i w θ} dθ/2π = I_w(t).

#include <array>
#include <cmath>
#include <cstdlib>
#include <functional>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/bessel_prime.hpp>

namespace oracle {

// e^{-t} I_n(t), stable for the range used below.
inline double scaled_bessel_i(int n, double t) {
    if (t == 0.0) return n == 0 ? 1.0 : 0.0;
    if (t < 600.0) return std::exp(-t) * boost::math::cyl_bessel_i(std::abs(n), t);
    // Hankel expansion e^{-t} I_n(t) ~ (2πt)^{-1/2} Σ_k (-1)^k a_k(n) / t^k
    const double mu = 4.0 * n * n;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k <= 12; ++k) {
        term *= -(mu - (2.0 * k - 1) * (2.0 * k - 1)) / (8.0 * k * t);
        sum += term;
    }
    return sum / std::sqrt(2.0 * M_PI * t);
}

// ∫_0^∞ f(t) dt on geometric panels; the integrands here decay at least like e^{-|E| t} t^{-3/2}.
inline double half_line(const std::function<double(double)>& f, double t_max) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    double s = 0.0, a = 0.0, b = 0.5;
    while (a < t_max) {
        s += GK::integrate(f, a, std::min(b, t_max), 10, 1e-14);
        a = b;
        b *= 2.0;
    }
    return s;
}

// G_E(0, w) = ∫ e^{i2π w·p} / (e(p) - E), E < 0.
inline double free_green(double E, std::array<int, 3> w) {
    auto f = [&](double t) {
        return std::exp(E * t) * scaled_bessel_i(w[0], t) * scaled_bessel_i(w[1], t) * scaled_bessel_i(w[2], t);
    };
    return half_line(f, std::min(4000.0, 45.0 / -E));
}

// ∫ 1/(e(p) + s)^2 = ∫_0^∞ t e^{-ts} (e^{-t} I_0(t))^3 dt, s > 0.
inline double inverse_square_integral(double s) {
    auto f = [&](double t) {
        const double i0 = scaled_bessel_i(0, t);
        return t * std::exp(-s * t) * i0 * i0 * i0;
    };
    return half_line(f, 60.0 / s);
}

// Watson's integral ∫ 1/e(p) = ∫_0^∞ (e^{-t} I_0(t))^3 dt; the tail beyond T is ∫ (2πt)^{-3/2}.
inline double watson_integral() {
    const double T = 4.0e4;
    auto f = [](double t) {
        const double i0 = scaled_bessel_i(0, t);
        return i0 * i0 * i0;
    };
    const double tail = 2.0 * std::pow(2.0 * M_PI, -1.5) / std::sqrt(T);
    return half_line(f, T) + tail;
}

// Self-consistent σ for u = δ_0 at ε = 0: σ = λ² G_{E+σ}(0), iterated to a fixed point.
inline double delta_self_energy(double lambda, double E) {
    double s = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double next = lambda * lambda * free_green(E + s, {0, 0, 0});
        if (std::abs(next - s) < 1e-16) return next;
        s = next;
    }
    return s;
}

}  // namespace oracle
