#pragma once

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <vector>

#include "carnot/algebra.hpp"
#include "carnot/jet.hpp"
#include "carnot/quaternion.hpp"

namespace carnot {

struct BallPoint {
    Eigen::VectorXd xi1;
    Eigen::VectorXd xi2;
    double a = 0;
    bool boundary = false;
};

struct SiegelPoint {
    Eigen::VectorXd xi1;
    Eigen::VectorXd xi2;
    double a = 0;
    bool boundary = false;
};

// Ball ↔ Siegel domain. The J-maps of `alg` are used as given; for the
// standard algebras these are the H-type maps.
SiegelPoint cayley(const HTypeAlgebra& alg, const BallPoint& p);
BallPoint cayley_inv(const HTypeAlgebra& alg, const SiegelPoint& q);

struct JacobianCheck {
    double closed_form;
    double numeric;
    double residual; // relative
};

JacobianCheck cayley_jacobian_check(const HTypeAlgebra& alg, const BallPoint& p);

// Sphere minus the pole onto the group; the centre coordinate is returned in
// the algebra's own units (y = c_B ξ₂').
GroupPoint boundary_cayley(const HTypeAlgebra& alg, const BallPoint& p);

// Inversion with respect to the unit gauge sphere of G(H) in explicit coordinates.
GroupPoint inversion(const HTypeAlgebra& alg, const GroupPoint& g);
// The same map assembled as C₂ ∘ C₁⁻¹ through the sphere.
GroupPoint inversion_via_cayley(const HTypeAlgebra& alg, const GroupPoint& g);

// qc sphere S^{4n+3} ⊂ Hⁿ × H and the Siegel boundary Re p' = |q'|².
struct QcSpherePoint {
    std::vector<Quaternion> q;
    Quaternion p;
};

// Siegel coordinate of a group point: p' = |q'|² - ω'.
Quaternion siegel_p(const GroupPoint& g);
QcSpherePoint qc_cayley_inverse(const GroupPoint& g);           // C⁻¹(q', p') = (2(1+p')⁻¹q', (1-p')(1+p')⁻¹)
GroupPoint qc_cayley(int n, const QcSpherePoint& s);            // C(q,p) = ((1+p)⁻¹q, (1+p)⁻¹(1-p))

// Compares λ·((C⁻¹)*η̃)·λ̄ with (8/|1+p'|²)Θ̃ on every coordinate direction.
struct QcFactorCheck {
    double factor;   // 8/|1+p'|²
    double residual; // max abs difference over directions and components
};

QcFactorCheck qc_conformal_factor_check(const HTypeAlgebra& alg, const GroupPoint& g);

// CR sphere S^{2n+1} ⊂ Cⁿ × C, Cayley map (Z,W) ↦ (iZ/(1-W), i(1+W)/(1-W)).
struct CrFactorCheck {
    double factor;   // |1-W|⁻²
    double residual; // tangential covector difference
};

CrFactorCheck cr_conformal_factor_check(const std::vector<std::complex<double>>& Z, std::complex<double> W);

// Group point (x, y, t) in explicit coordinates for the CR Cayley image.
GroupPoint cr_cayley(const std::vector<std::complex<double>>& Z, std::complex<double> W);
// Inverse map: ((2z/(i+w)), (w-i)/(w+i)) with w = t + i|z|².
std::pair<std::vector<std::complex<double>>, std::complex<double>> cr_cayley_inverse(const GroupPoint& g);

// Ambient sphere coordinates as jets of group coordinates, for pulling functions back to
// the group. qc: blocks q_1..q_n then p; CR: (Re, Im) pairs of Z_1..Z_n then W.
std::vector<Jet> qc_cayley_inverse_coords(std::span<const Jet> g, int n);
std::vector<Jet> cr_cayley_inverse_coords(std::span<const Jet> g, int n);

// η̃ = f·Θ̃ under the inverse Cayley map: 8/|1+p'|² (qc) and |1-W|² = 4/((1+|z|²)²+t²) (CR).
double qc_contact_factor(const GroupPoint& g);
double cr_contact_factor(const GroupPoint& g);

} // namespace carnot
