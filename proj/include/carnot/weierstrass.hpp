#pragma once

namespace carnot {

// ℘ with invariants (g₂, 0). The period lattice is square: half-periods τ₊ (real) and iτ₊.
struct WeierstrassParams {
    double g2 = 0;
    double g3 = 0;
    double tau_plus = 0;  // real half-period
    double tau_minus = 0; // imaginary part of the imaginary half-period
    double d = 0;         // positive root of 4u³ − g₂u, the minimum of ℘ on the real axis
};

WeierstrassParams weierstrass_params(double g2);

// τ₊ for g₂ = 4: Γ(1/4)² / (4√(2π)).
double lemniscatic_half_period();

struct WpValue {
    double u = 0;
    double du = 0;
};

constexpr double kPoleExclusion = 1e-3;

// ℘(t) and ℘'(t) on the real axis. Throws DomainError within kPoleExclusion of a pole.
WpValue weierstrass_p(double t, const WeierstrassParams& w);
// u'² − (4u³ − g₂u − g₃).
double weierstrass_ode_residual(const WpValue& v, const WeierstrassParams& w);

} // namespace carnot
