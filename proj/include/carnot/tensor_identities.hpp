#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

namespace carnot {

// Bilinear forms Ψ(X, Y) = Xᵀ Ψ Y on the horizontal space.
struct CrComponents {
    Eigen::MatrixXd plus;  // Ψ_[1]:  invariant under J
    Eigen::MatrixXd minus; // Ψ_[-1]: anti-invariant under J
};

struct QcComponents {
    Eigen::MatrixXd three; // Ψ_[3]
    Eigen::MatrixXd minus; // Ψ_[-1]
};

// Ψ ↦ Ψ(J·, J·) and Ψ ↦ Σ_s Ψ(I_s·, I_s·).
Eigen::MatrixXd upsilon_cr(const Eigen::MatrixXd& psi, const Eigen::MatrixXd& J);
Eigen::MatrixXd upsilon_qc(const Eigen::MatrixXd& psi, const std::array<Eigen::MatrixXd, 3>& I);

CrComponents project_cr(const Eigen::MatrixXd& psi, const Eigen::MatrixXd& J);
QcComponents project_qc(const Eigen::MatrixXd& psi, const std::array<Eigen::MatrixXd, 3>& I);

// Standard structures on R^{2n} and R^{4n} (left multiplication by i, j, k on each block).
Eigen::MatrixXd standard_complex_structure(int n);
std::array<Eigen::MatrixXd, 3> standard_quaternionic_structure(int n);

// Integer numerators over a common denominator, so the entries are exact.
struct ExactMatrix {
    Eigen::MatrixXi numer;
    int denom = 1;
    Eigen::MatrixXd value() const { return numer.cast<double>() / denom; }
};

ExactMatrix matrix_Q();
ExactMatrix matrix_L();

struct Spectrum {
    std::vector<double> eigenvalues; // ascending
    double min = 0;
    int kernel_dim = 0;
    bool symmetric = false;
    bool psd = false;
    bool positive_definite = false;
};

// Extended-precision symmetric eigensolve; kernel counts |λ| < kernel_tol.
Spectrum analyze(const ExactMatrix& M, double kernel_tol = 1e-10);

std::vector<double> expected_spectrum_Q(); // (15 ± √209)/4 and 1/2, ascending
std::vector<double> expected_spectrum_L(); // 0, 0, 2(2 ± √2), 10, 10, ascending

} // namespace carnot
