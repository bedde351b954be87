#pragma once

#include <random>
#include <vector>

#include "carnot/algebra.hpp"
#include "carnot/jet.hpp"

namespace carnot {

enum class LaplacianSign { analyst, geometer };

// X_a = ∂/∂x_a + Σ_s Σ_b C[a](s,b) x_b ∂/∂y_s, the left-invariant extension of e_a.
struct LeftInvariantFrame {
    int m = 0;
    int k = 0;
    std::vector<Eigen::MatrixXd> C; // C[a] is k×m

    // Ambient vector (length m+k) of X_a at the point.
    Eigen::VectorXd field(int a, const GroupPoint& p) const;
    // [X_a, X_b] as a constant vertical vector of length k.
    Eigen::VectorXd commutator(int a, int b) const;
};

LeftInvariantFrame frame(const HTypeAlgebra& alg);

// Horizontal derivatives from a jet at p (coordinates ordered x then y).
double frame_derivative(const LeftInvariantFrame& fr, const Jet& j, const GroupPoint& p, int a);
double frame_second_derivative(const LeftInvariantFrame& fr, const Jet& j, const GroupPoint& p, int a, int b);
double horizontal_gradient_norm2(const LeftInvariantFrame& fr, const Jet& j, const GroupPoint& p);

double sub_laplacian(const HTypeAlgebra& alg, const ScalarField& f, const GroupPoint& p,
                     LaplacianSign sign = LaplacianSign::analyst);
double sub_laplacian(const LeftInvariantFrame& fr, const Jet& j, const GroupPoint& p,
                     LaplacianSign sign = LaplacianSign::analyst);

ScalarField gauge_field(const HTypeAlgebra& alg);
ScalarField gauge_power_field(const HTypeAlgebra& alg, double power);

// Δ(N^{2-Q})(p); the scale-free number is |residual|·N(p)^{Q+2}.
double fundamental_residual(const HTypeAlgebra& alg, const GroupPoint& p);
double normalized_fundamental_residual(const HTypeAlgebra& alg, const GroupPoint& p);

struct YamabeResidual {
    double residual;
    double ratio; // -Δu / u^{2*-1}
};

YamabeResidual yamabe_residual(const HTypeAlgebra& alg, const ScalarField& u, const GroupPoint& p, double c);

// c₀[(σ + |x(g₀∘g)|²)² + 16|y(g₀∘g)|²_H]; for quaternionic explicit coordinates
// this is c₀[(σ+|q+q₀|²)² + |ω+ω₀+2 Im q₀q̄|²].
double conformal_factor_h(const HTypeAlgebra& alg, double c0, double sigma, const GroupPoint& g0, const GroupPoint& p);
ScalarField conformal_factor_h_field(const HTypeAlgebra& alg, double c0, double sigma, const GroupPoint& g0);
// φ = (2h)^{-(Q-2)/4}.
ScalarField conformal_factor_phi_field(const HTypeAlgebra& alg, double c0, double sigma, const GroupPoint& g0);
// 4(Q+2)/(Q-2) · (-Δφ)/φ^{2*-1}: the scalar curvature of φ^{4/(Q-2)}Θ̃ when the base is flat.
double conformal_scalar_ratio(const HTypeAlgebra& alg, double c0, double sigma, const GroupPoint& g0, const GroupPoint& p);

double best_constant(int m, int k);
double extremal_amplitude(int m, int k); // γ(m,k)

struct ExtremalFamily {
    HTypeAlgebra alg;
    double gamma;
    double eps;
    GroupPoint center;

    double value(const GroupPoint& g) const;
    ScalarField field() const;
};

ExtremalFamily extremal_family(const HTypeAlgebra& alg, double eps = 1.0, GroupPoint center = {});

// u_λ = λ^{Q/2*}·u∘δ_λ and τ_h u = u∘τ_h, applied to fields on the group.
ScalarField scaled_field(const HTypeAlgebra& alg, const ScalarField& u, double lambda);
ScalarField translated_field(const HTypeAlgebra& alg, const ScalarField& u, const GroupPoint& h);

// Random point with gauge log-uniform in [gmin, gmax].
GroupPoint random_group_point(const HTypeAlgebra& alg, std::mt19937_64& rng, double gmin = 0.1, double gmax = 10.0);

// Reduced equation in the quadrant x = |ξ₂| > 0, y = |ξ₁|²/4 > 0.
struct GvParams {
    double a; // k-1
    double b; // m/2
    double n() const { return a + b; }
};

GvParams gv_params(int m, int k);

struct GvResiduals {
    double yfinal;      // Δφ - [(n+2)/2 |∇φ|²/φ - (a/x)φ_x - (b/y)φ_y + n/(2y)]
    double hessian;     // 2‖∇²φ‖² - (Δφ)²
    double laplace;     // Δφ - |∇φ|²/φ
    double mixed;       // φ_x/x - φ_y/y + n/(2by)
};

GvResiduals gv_reduction(const GvParams& gv, const ScalarField& phi, double x, double y);

// φ = A²(x²+y²) + 2Bβ y + β² with B = A, β = n/(4bA).
ScalarField gv_quadratic_family(const GvParams& gv, double A);

// Both sides of the divergence identity (hF)_x - (hG)_y = h{...}, with δ = n/(2b).
struct GvDivergence {
    double lhs;
    double rhs;
};

GvDivergence gv_divergence_identity(const GvParams& gv, const ScalarField& phi, double x, double y);

} // namespace carnot
