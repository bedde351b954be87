#include "carnot/tensor_identities.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace carnot {

namespace {

constexpr double kStructureTol = 1e-12;

void require_square(const Eigen::MatrixXd& psi, const Eigen::MatrixXd& J) {
    if (psi.rows() != psi.cols() || psi.rows() != J.rows() || J.rows() != J.cols())
        throw std::invalid_argument("projection: dimension mismatch");
}

double defect_square(const Eigen::MatrixXd& J) {
    return (J * J + Eigen::MatrixXd::Identity(J.rows(), J.cols())).cwiseAbs().maxCoeff();
}

} // namespace

Eigen::MatrixXd upsilon_cr(const Eigen::MatrixXd& psi, const Eigen::MatrixXd& J) { return J.transpose() * psi * J; }

Eigen::MatrixXd upsilon_qc(const Eigen::MatrixXd& psi, const std::array<Eigen::MatrixXd, 3>& I) {
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(psi.rows(), psi.cols());
    for (const auto& Is : I) r += Is.transpose() * psi * Is;
    return r;
}

CrComponents project_cr(const Eigen::MatrixXd& psi, const Eigen::MatrixXd& J) {
    require_square(psi, J);
    if (defect_square(J) > kStructureTol) throw std::invalid_argument("project_cr: J is not almost complex");
    const Eigen::MatrixXd plus = 0.5 * (psi + upsilon_cr(psi, J));
    return {plus, psi - plus};
}

QcComponents project_qc(const Eigen::MatrixXd& psi, const std::array<Eigen::MatrixXd, 3>& I) {
    for (const auto& Is : I) {
        require_square(psi, Is);
        if (defect_square(Is) > kStructureTol) throw std::invalid_argument("project_qc: I_s is not almost complex");
    }
    // Either orientation of the quaternion triple is accepted.
    const Eigen::MatrixXd I12 = I[0] * I[1];
    const double plus = (I12 - I[2]).cwiseAbs().maxCoeff(), minus = (I12 + I[2]).cwiseAbs().maxCoeff();
    const double anti = (I[0] * I[1] + I[1] * I[0]).cwiseAbs().maxCoeff();
    if (std::min(plus, minus) > kStructureTol || anti > kStructureTol)
        throw std::invalid_argument("project_qc: quaternionic relations violated");
    const Eigen::MatrixXd three = 0.25 * (psi + upsilon_qc(psi, I));
    return {three, psi - three};
}

Eigen::MatrixXd standard_complex_structure(int n) {
    if (n < 1) throw std::invalid_argument("standard_complex_structure: n must be positive");
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    for (int c = 0; c < n; ++c) {
        J(2 * c, 2 * c + 1) = -1;
        J(2 * c + 1, 2 * c) = 1;
    }
    return J;
}

std::array<Eigen::MatrixXd, 3> standard_quaternionic_structure(int n) {
    if (n < 1) throw std::invalid_argument("standard_quaternionic_structure: n must be positive");
    // Left multiplication by i, j, k in the basis (1, i, j, k).
    const int table[3][4][4] = {
        {{0, -1, 0, 0}, {1, 0, 0, 0}, {0, 0, 0, -1}, {0, 0, 1, 0}},
        {{0, 0, -1, 0}, {0, 0, 0, 1}, {1, 0, 0, 0}, {0, -1, 0, 0}},
        {{0, 0, 0, -1}, {0, 0, -1, 0}, {0, 1, 0, 0}, {1, 0, 0, 0}},
    };
    std::array<Eigen::MatrixXd, 3> I;
    for (int s = 0; s < 3; ++s) {
        I[s] = Eigen::MatrixXd::Zero(4 * n, 4 * n);
        for (int b = 0; b < n; ++b)
            for (int r = 0; r < 4; ++r)
                for (int c = 0; c < 4; ++c) I[s](4 * b + r, 4 * b + c) = table[s][r][c];
    }
    return I;
}

ExactMatrix matrix_Q() {
    ExactMatrix M;
    M.numer.resize(3, 3);
    M.numer << 2, -1, 4,
               -1, 2, -4,
               4, -4, 12;
    M.denom = 2;
    return M;
}

ExactMatrix matrix_L() {
    ExactMatrix M;
    M.numer.resize(6, 6);
    M.numer << 6, 0, 0, 10, -2, -2,
               0, 6, 0, -2, 10, -2,
               0, 0, 6, -2, -2, 10,
               10, -2, -2, 22, -2, -2,
               -2, 10, -2, -2, 22, -2,
               -2, -2, 10, -2, -2, 22;
    M.denom = 3;
    return M;
}

Spectrum analyze(const ExactMatrix& M, double kernel_tol) {
    using Mat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    const Mat A = M.numer.cast<long double>() / static_cast<long double>(M.denom);
    Spectrum s;
    s.symmetric = M.numer == M.numer.transpose();
    if (!s.symmetric) throw std::invalid_argument("analyze: matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<Mat> es(A, Eigen::EigenvaluesOnly);
    for (int i = 0; i < es.eigenvalues().size(); ++i) s.eigenvalues.push_back(static_cast<double>(es.eigenvalues()[i]));
    std::sort(s.eigenvalues.begin(), s.eigenvalues.end());
    s.min = s.eigenvalues.front();
    s.kernel_dim = static_cast<int>(std::count_if(s.eigenvalues.begin(), s.eigenvalues.end(), [&](double l) { return std::abs(l) < kernel_tol; }));
    s.psd = s.min >= -kernel_tol;
    s.positive_definite = s.min > kernel_tol;
    return s;
}

std::vector<double> expected_spectrum_Q() {
    const double r = std::sqrt(209.0);
    std::vector<double> v{(15 - r) / 4, 0.5, (15 + r) / 4};
    std::sort(v.begin(), v.end());
    return v;
}

std::vector<double> expected_spectrum_L() {
    const double r = std::sqrt(2.0);
    return {0, 0, 2 * (2 - r), 2 * (2 + r), 10, 10};
}

} // namespace carnot
