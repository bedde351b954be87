#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "carnot/jet.hpp"

namespace carnot {

enum class Family { complex, quaternionic };

// Coordinates in which the explicit Heisenberg group laws are written use a
// bracket scale of 4; the H-type normalization uses 1.
enum class Normalization { explicit_coordinates, h_type };

struct HomogeneousData {
    int Q;
    double sobolev_exponent; // 2Q/(Q-2)
};

struct HTypeAlgebra {
    int m = 0;
    int k = 0;
    std::vector<Eigen::MatrixXd> J;
    // y-component of the product is y + y' + (c_B/2) <J_s x, x'>.
    double bracket_scale = 1.0;
    std::string label;

    int Q() const { return m + 2 * k; }
    HomogeneousData homogeneous() const;
    Eigen::MatrixXd J_of(const Eigen::VectorXd& y) const;
    // Largest violation among skewness, orthogonality and anticommutation.
    double structure_defect() const;
};

HTypeAlgebra make_algebra(std::vector<Eigen::MatrixXd> J, double bracket_scale, std::string label = "custom");
HTypeAlgebra standard_algebra(Family family, int n, Normalization norm = Normalization::explicit_coordinates);

struct GroupPoint {
    Eigen::VectorXd x;
    Eigen::VectorXd y;

    Eigen::VectorXd flat() const;
    static GroupPoint from_flat(const HTypeAlgebra& alg, const Eigen::VectorXd& v);
};

GroupPoint group_identity(const HTypeAlgebra& alg);
GroupPoint group_multiply(const HTypeAlgebra& alg, const GroupPoint& a, const GroupPoint& b);
GroupPoint group_inverse(const HTypeAlgebra& alg, const GroupPoint& p);
GroupPoint dilate(const HTypeAlgebra& alg, double lambda, const GroupPoint& p);
double gauge(const HTypeAlgebra& alg, const GroupPoint& p);
double distance(const GroupPoint& a, const GroupPoint& b);

// |y|² in H-type units, i.e. |y/c_B|²; the gauge is (|x|⁴ + 16·that)^{1/4}.
template <class T>
T htype_center_norm2(const HTypeAlgebra& alg, const std::vector<T>& y) {
    T s = y[0] * y[0];
    for (std::size_t i = 1; i < y.size(); ++i) s += y[i] * y[i];
    return s / (alg.bracket_scale * alg.bracket_scale);
}

// Left translation by a fixed point applied to jet-valued coordinates.
std::vector<Jet> translate_coordinates(const HTypeAlgebra& alg, const GroupPoint& g0, std::span<const Jet> coords);

struct J2Result {
    bool holds = true;
    double max_residual = 0;
    int pairs_tested = 0;
    std::vector<std::vector<double>> witnesses; // least-squares coefficients of J(ξ)J(ξ') in the J_s
};

J2Result check_j2(const HTypeAlgebra& alg, std::uint64_t seed = 1, double tol = 1e-9, int random_pairs = 20);

// Random unit-determinant orthogonal conjugate of the given family, for tests.
HTypeAlgebra rotated_algebra(const HTypeAlgebra& alg, const Eigen::MatrixXd& orthogonal);

} // namespace carnot
