#include "carnot/weierstrass.hpp"

#include <array>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "carnot/jet.hpp"

namespace carnot {

namespace {

constexpr int kLaurentTerms = 24;

// ℘(z) = z⁻² + Σ_{k≥2} c_k z^{2k−2} with c₂ = g₂/20, c₃ = g₃/28.
std::array<double, kLaurentTerms + 1> laurent_coefficients(double g2, double g3) {
    std::array<double, kLaurentTerms + 1> c{};
    c[2] = g2 / 20;
    c[3] = g3 / 28;
    for (int k = 4; k <= kLaurentTerms; ++k) {
        double s = 0;
        for (int m = 2; m <= k - 2; ++m) s += c[m] * c[k - m];
        c[k] = 3.0 * s / ((2.0 * k + 1) * (k - 3));
    }
    return c;
}

WpValue laurent(double z, const WeierstrassParams& w) {
    static thread_local double cached_g2 = std::numeric_limits<double>::quiet_NaN(), cached_g3 = 0;
    static thread_local std::array<double, kLaurentTerms + 1> c{};
    if (w.g2 != cached_g2 || w.g3 != cached_g3) {
        c = laurent_coefficients(w.g2, w.g3);
        cached_g2 = w.g2;
        cached_g3 = w.g3;
    }
    const double z2 = z * z;
    double u = 1 / z2, du = -2 / (z2 * z);
    double pw = 1; // z^{2k-4}
    for (int k = 2; k <= kLaurentTerms; ++k) {
        u += c[k] * pw * z2;
        du += (2.0 * k - 2) * c[k] * pw * z;
        pw *= z2;
    }
    return {u, du};
}

// ℘(2z), ℘'(2z) from ℘(z), ℘'(z): ℘(2z) = −2℘ + ℘''²/(4℘'²), with ℘'' = 6℘² − g₂/2.
WpValue duplicate(const WpValue& v, const WeierstrassParams& w) {
    const double P = v.u, P1 = v.du, P2 = 6 * P * P - w.g2 / 2;
    const double u = -2 * P + P2 * P2 / (4 * P1 * P1);
    const double du = 0.5 * (-2 * P1 + 6 * P * P2 / P1 - P2 * P2 * P2 / (2 * P1 * P1 * P1));
    return {u, du};
}

} // namespace

double lemniscatic_half_period() {
    return std::pow(std::tgamma(0.25), 2) / (4 * std::sqrt(2 * std::numbers::pi));
}

WeierstrassParams weierstrass_params(double g2) {
    if (!(g2 >= 0)) throw std::invalid_argument("weierstrass_params: g2 must be nonnegative");
    WeierstrassParams w;
    w.g2 = g2;
    w.d = std::sqrt(g2) / 2;
    if (g2 == 0) {
        w.tau_plus = w.tau_minus = std::numeric_limits<double>::infinity();
        return w;
    }
    // τ₊ = ∫_d^∞ ds / √(4s³ − g₂s); with s = d + w² the integrand is 1/√((d + w²)(2d + w²)).
    const double d = w.d;
    boost::math::quadrature::exp_sinh<double> integrator;
    w.tau_plus = integrator.integrate([d](double x) { return 1 / std::sqrt((d + x * x) * (2 * d + x * x)); });
    w.tau_minus = w.tau_plus;
    return w;
}

WpValue weierstrass_p(double t, const WeierstrassParams& w) {
    if (w.g2 == 0) {
        if (std::abs(t) < kPoleExclusion) throw DomainError("weierstrass_p: too close to a pole");
        return {1 / (t * t), -2 / (t * t * t)};
    }
    const double period = 2 * w.tau_plus;
    double r = std::fmod(t, period);
    if (r < 0) r += period;
    double sign = 1;
    if (r > w.tau_plus) {
        r = period - r;
        sign = -1;
    }
    if (r < kPoleExclusion) throw DomainError("weierstrass_p: too close to a pole");
    WpValue v;
    if (r <= 0.5 * w.tau_plus) v = laurent(r, w);
    else v = duplicate(laurent(r / 2, w), w);
    v.du *= sign;
    return v;
}

double weierstrass_ode_residual(const WpValue& v, const WeierstrassParams& w) {
    return v.du * v.du - (4 * v.u * v.u * v.u - w.g2 * v.u - w.g3);
}

} // namespace carnot
