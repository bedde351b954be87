#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "carnot/exterior.hpp"
#include "carnot/jet.hpp"
#include "carnot/weierstrass.hpp"

namespace carnot {

// Everything below is evaluated at one base point x ∈ R⁴ from jets of the dilaton
// function f; the default order 2 is the least that reaches curvature and dT.
constexpr int kHeteroticOrder = 2;

// Θ̄ = e^{2f}[ω₁∧e⁷ + ω₂∧e⁵ − ω₃∧e⁶] + e⁵⁶⁷ in the e-basis.
FrameForm g2_form(const Jet& f);

struct G2Check {
    FrameForm theta, star_theta, lee;
    double closure = 0;   // max |dΘ̄ ∧ Θ̄|
    double coclosure = 0; // max |d*Θ̄ − θ⁷ ∧ *Θ̄| with θ⁷ = 2 df
    double lee_form = 0;  // max |−⅓ *(*dΘ̄ ∧ Θ̄) − 2 df|
};

G2Check g2_structure(const ScalarField& f, const StructureConstants& sc, std::span<const double> x,
                     int order = kHeteroticOrder);

// T = −*dΘ̄ + *(θ⁷∧Θ̄) = −*dΘ̄ − 2*(dφ∧Θ̄), where θ⁷ = −2dφ = 2df is the Lee form.
FrameForm torsion_form(const Jet& f, const StructureConstants& sc);

struct DilatonTerms {
    double laplace_e2f = 0;   // Δ e^{2f}
    double laplace_em2f = 0;  // Δ e^{−2f}
    double hessian2 = 0;      // sum of principal 2×2 minors of Hess f
    double four_laplacian = 0; // div(|∇f|² ∇f)
};

DilatonTerms dilaton_terms(const Jet& f);

double frobenius_norm2(const Eigen::Matrix3d& A);

struct TorsionCheck {
    double pipeline = 0;    // e¹²³⁴ coefficient of dT from the exterior calculus
    double closed_form = 0; // −(Δe^{2f} + 2|A|²)
    double off_component = 0;
};

TorsionCheck torsion_check(const ScalarField& f, const StructureConstants& sc, std::span<const double> x,
                           int order = kHeteroticOrder);

struct ConnectionData {
    // Row-major 7×7 matrices of 1-forms (i, j) ↦ ω^i_j and 2-forms R^i_j, in the e-basis,
    // with ∇_X ē_j = ω^i_j(X) ē_i and g(∇⁻_X Y, Z) = g(∇^g_X Y, Z) − ½T(X, Y, Z).
    std::vector<FrameForm> levi_civita, minus, curvature;
    FrameForm trace;             // Σ R^i_j ∧ R^j_i
    double p1_coefficient = 0;   // π² p₁(∇⁻) on e¹²³⁴, with 8π² p₁ = Σ_{i<j} R^i_j ∧ R^i_j
    double closed_form = 0;      // F₂[f] + Δ₄f − (3/8)|A|² Δe^{−2f}
    double off_component = 0;    // largest coefficient of the trace off e¹²³⁴
    double lc_torsion = 0;       // max |dē^i + ω^i_j ∧ ē^j|
    double antisymmetry = 0;     // max |ω^i_j + ω^j_i| over both connections
};

ConnectionData connection_and_p1(const ScalarField& f, const StructureConstants& sc, std::span<const double> x,
                                 int order = kHeteroticOrder);

// λ = |ΛA|; throws std::invalid_argument when rank(Λ) ≥ 2.
double instanton_lambda(const Eigen::Matrix3d& Lambda, const Eigen::Matrix3d& A);

// Δe^{2f} + 2|A|² + (α'/4)[8F₂ + 8Δ₄f − 3|A|²Δe^{−2f} + 4λ²] at x.
double anomaly_residual(const ScalarField& f, const Eigen::Matrix3d& A, const Eigen::Matrix3d& Lambda,
                        double alpha_prime, std::span<const double> x);
// The same equation assembled from dT and the curvature of ∇⁻.
double anomaly_residual_pipeline(const ScalarField& f, const Eigen::Matrix3d& A, const Eigen::Matrix3d& Lambda,
                                 double alpha_prime, std::span<const double> x);

// One-variable solution: α' = −α² with 2|A|² = α²λ², u = ℘ with g₂ = 3|A|²/α².
struct StromingerData {
    Eigen::Matrix3d A = Eigen::Matrix3d::Identity();
    Eigen::Matrix3d Lambda = Eigen::Matrix3d::Zero();
    double normA2 = 0, lambda = 0, alpha = 0, alpha_prime = 0;
    WeierstrassParams wp;
};

StromingerData strominger_data(const Eigen::Matrix3d& A, const Eigen::Matrix3d& Lambda);

// f(x) = ½ ln(α² ℘(x¹)) as a field on R⁴.
ScalarField weierstrass_dilaton(const StromingerData& data);

struct OdeSample {
    double t = 0, u = 0, du = 0, f = 0, df = 0;
    double ode_residual = 0;     // u'² − (4u³ − g₂u)
    double reduced_residual = 0; // (e^{2f})' + ¾α²|A|²(e^{−2f})' − 2α²f'³
};

// Throws DomainError when u ≤ 0 or t is near a pole.
OdeSample dilaton_from_u(double t, const StromingerData& data);
OdeSample dilaton_from_u(double t, double u, double du, const StromingerData& data);

} // namespace carnot
