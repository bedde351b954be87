#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "carnot/algebra.hpp"
#include "carnot/jet.hpp"

namespace carnot {

enum class SphereFamily { cr, qc };

std::string to_string(SphereFamily f);

struct StructureCheck {
    double annihilation = 0;     // max |η̃_s(X)| over X in H
    double invariance = 0;       // max component of I_s X outside H
    double square = 0;           // max |I_s² X + X|
    double reeb = 0;             // residual of the Reeb system
    double metric_spread = 0;    // max |g_s - c·1| over s
};

// Unit sphere S^{2n+1} ⊂ Cⁿ⁺¹ (CR) or S^{4n+3} ⊂ Hⁿ⁺¹ (qc) with the standard
// contact form(s). Ambient coordinates: (Re, Im) pairs for CR, (w,x,y,z) blocks for qc,
// with the last pair/block holding W or p.
class SphereModel {
public:
    SphereModel(SphereFamily family, int n);

    SphereFamily family() const { return family_; }
    int n() const { return n_; }
    int ambient_dim() const { return N_; }
    int k() const { return k_; }
    int m() const { return N_ - 1 - k_; }
    int Q() const { return m() + 2 * k_; }
    std::string label() const;

    // I_s as ambient matrices (multiplication by i, or left multiplication by i, j, k).
    const Eigen::MatrixXd& I(int s) const { return I_[s]; }

    // Coefficient of dx_i in η̃_s, as a polynomial field on the ambient space.
    const ScalarField& eta_coefficient(int s, int i) const { return coeff_[s][i]; }
    Eigen::VectorXd eta(int s, const Eigen::VectorXd& P) const;
    // dη̃_s(X, Y) = Xᵀ M Y, from exact jets of the coefficients.
    Eigen::MatrixXd d_eta(int s, const Eigen::VectorXd& P) const;

    Eigen::MatrixXd vertical_basis(const Eigen::VectorXd& P) const;   // N × k, orthonormal
    Eigen::MatrixXd horizontal_basis(const Eigen::VectorXd& P) const; // N × m, orthonormal
    // Gram matrix of g(X, Y) = ½ dη̃_s(X, I_s Y) on the horizontal basis.
    Eigen::MatrixXd horizontal_metric(int s, const Eigen::VectorXd& P) const;
    // ξ_t with η̃_s(ξ_t) = δ_st and dη̃_s(ξ_t, H) = 0, solved numerically (N × k).
    Eigen::MatrixXd reeb(const Eigen::VectorXd& P, double* residual = nullptr) const;
    StructureCheck check(const Eigen::VectorXd& P) const;

    // g = metric_scale · Euclidean on H; measured at construction and validated.
    double metric_scale() const { return metric_scale_; }
    // Vol_η̃ / Euclidean surface measure, measured with the exterior algebra.
    double volume_density() const { return volume_density_; }
    double volume() const;
    // Euclidean projection onto H at a point of the sphere.
    Eigen::VectorXd project_horizontal(const Eigen::VectorXd& P, const Eigen::VectorXd& v) const;

    // S̃ of η̃: closed form 8n(n+2) for qc; measured through the Cayley transform for CR.
    double scalar_curvature() const { return scalar_; }

    Eigen::VectorXd random_point(std::mt19937_64& rng) const;
    // Group of the Cayley picture (explicit coordinates) and the conformal factor f with η̃ ≅ f·Θ̃.
    HTypeAlgebra group() const;
    double contact_factor(const GroupPoint& g) const;
    Eigen::VectorXd from_group(const GroupPoint& g) const;
    std::vector<Jet> from_group(std::span<const Jet> g) const;
    GroupPoint to_group(const Eigen::VectorXd& P) const;
    // Lebesgue density of Vol_Θ̃ on the group.
    double group_volume_density() const { return group_density_; }

private:
    void require_on_sphere(const Eigen::VectorXd& P) const;

    SphereFamily family_;
    int n_, N_, k_;
    std::vector<Eigen::MatrixXd> I_;
    std::vector<std::vector<ScalarField>> coeff_;
    double metric_scale_ = 0, volume_density_ = 0, group_density_ = 0, scalar_ = 0;
};

// Top-degree coefficient of η∧(dη)ⁿ (one form) or η₁∧η₂∧η₃∧Ωⁿ (three forms) on an
// orthonormal basis, where ω_s = ½dη_s restricted to the first `horizontal` basis vectors.
double contact_volume(const std::vector<Eigen::VectorXd>& eta, const std::vector<Eigen::MatrixXd>& d_eta, int horizontal);

struct HorizontalGradient {
    Eigen::VectorXd vector; // ambient
    double norm2;           // in the metric g
};

HorizontalGradient horizontal_gradient(const SphereModel& model, const ScalarField& f, const Eigen::VectorXd& P);
// |∇_H f|² computed on the group: f⁻¹ Σ (X_a (f∘C⁻¹))², an independent path.
double horizontal_gradient_transported(const SphereModel& model, const ScalarField& f, const Eigen::VectorXd& P);
// Δ_η̃ f (sum-of-squares sign) via the conformal covariance of the Yamabe operator.
double sublaplacian_transported(const SphereModel& model, const ScalarField& f, const Eigen::VectorXd& P);

enum class Scheme { monte_carlo, qmc, cayley_grid };
std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

// Replicate grids split into batches whose weights each sum to Vol/batches; the error of
// any functional is the batch standard error. Refinement grids hold a fine level (batch 0)
// and a coarse level (batch 1), each summing to Vol; the error is their difference.
struct QuadratureGrid {
    Scheme scheme = Scheme::monte_carlo;
    std::uint64_t seed = 0;
    int batches = 1;
    bool refinement = false;
    int ambient_dim = 0;
    std::vector<double> coords; // point-major
    std::vector<double> weights;
    std::vector<int> batch;

    std::size_t size() const { return weights.size(); }
    Eigen::Map<const Eigen::VectorXd> point(std::size_t i) const {
        return {coords.data() + i * ambient_dim, ambient_dim};
    }
};

QuadratureGrid monte_carlo_grid(const SphereModel& model, std::size_t samples, std::uint64_t seed, int batches = 20);
QuadratureGrid qmc_grid(const SphereModel& model, std::size_t samples, std::uint64_t seed, int batches = 16);
QuadratureGrid cayley_grid(const SphereModel& model, int per_axis);

void write_grid_csv(const QuadratureGrid& grid, std::ostream& out);
QuadratureGrid read_grid_csv(std::istream& in);

struct Estimate {
    double value = 0;
    double error = 0;
};

using PointFunction = std::function<double(const Eigen::VectorXd&)>;

// Fills K integrand values at a point.
using PointVectorFunction = std::function<void(const Eigen::VectorXd&, std::span<double>)>;
using Functional = std::function<double(std::span<const double>)>;

// Several functionals of the same K integrals from one pass over the grid.
std::vector<Estimate> integrate_functionals(const QuadratureGrid& grid, std::size_t K, const PointVectorFunction& integrand,
                                            const std::vector<Functional>& fs);
Estimate integrate(const QuadratureGrid& grid, const PointFunction& u);
// f applied to a vector of integrals, with the grid's error model.
Estimate integrate_combined(const QuadratureGrid& grid, const std::vector<PointFunction>& integrands,
                            const std::function<double(std::span<const double>)>& f);

// |∇_H f|² and g(∇_H f, ∇_H ψ) as point functions (projection fast path).
PointFunction gradient_energy(const SphereModel& model, const ScalarField& f);
PointFunction gradient_pairing(const SphereModel& model, const ScalarField& f, const ScalarField& psi);
PointFunction as_point_function(const ScalarField& f);

Estimate rayleigh(const SphereModel& model, const ScalarField& f, const QuadratureGrid& grid);
Estimate weak_eigen_residual(const SphereModel& model, const ScalarField& f, double lambda,
                             const std::vector<ScalarField>& tests, const QuadratureGrid& grid);

// Value and ambient gradient together; built from jets or supplied in closed form.
using ValueGradient = std::function<double(const Eigen::VectorXd& P, Eigen::VectorXd& gradient)>;
ValueGradient value_gradient(const ScalarField& f);

struct YamabeFunctionals {
    Estimate E, N, Upsilon;
};

YamabeFunctionals yamabe_functionals(const SphereModel& model, const ScalarField& phi, const QuadratureGrid& grid,
                                     std::optional<double> scalar = std::nullopt);
YamabeFunctionals yamabe_functionals(const SphereModel& model, const ValueGradient& phi, const QuadratureGrid& grid,
                                     std::optional<double> scalar = std::nullopt);
std::vector<Estimate> center_of_mass(const SphereModel& model, const ScalarField& u, const QuadratureGrid& grid);
std::vector<Estimate> center_of_mass(const SphereModel& model, const PointFunction& u, const QuadratureGrid& grid);

// Coordinate functions and monomials on the ambient space.
ScalarField coordinate_function(int dim, int i);
ScalarField monomial(int dim, const std::vector<int>& exponents);
// All monomials of total degree ≤ d.
std::vector<ScalarField> monomials_up_to(int dim, int degree);

// Euclidean area of S^{d-1}.
double unit_sphere_area(int d);

} // namespace carnot
