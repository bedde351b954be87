#include "doctest.h"

#include <cmath>
#include <random>

#include "carnot/tensor_identities.hpp"

using namespace carnot;

namespace {

Eigen::MatrixXd random_matrix(int d, std::mt19937_64& rng) {
    std::normal_distribution<double> N(0, 1);
    Eigen::MatrixXd A(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) A(i, j) = N(rng);
    return A;
}

Eigen::MatrixXd random_orthogonal(int d, std::mt19937_64& rng) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_matrix(d, rng));
    return qr.householderQ();
}

double max_abs(const Eigen::MatrixXd& A) { return A.cwiseAbs().maxCoeff(); }

// Υ as a d²×d² operator on vec(Ψ); it is an orthogonal involution (CR) or satisfies
// (Υ-3)(Υ+1) = 0 (qc), so it is symmetric and its eigenprojectors come from a dense solve.
Eigen::MatrixXd operator_matrix(int d, const std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>& op) {
    Eigen::MatrixXd U(d * d, d * d);
    for (int c = 0; c < d * d; ++c) {
        Eigen::MatrixXd E = Eigen::MatrixXd::Zero(d, d);
        E(c % d, c / d) = 1;
        U.col(c) = op(E).reshaped();
    }
    return U;
}

Eigen::MatrixXd eigenprojector(const Eigen::MatrixXd& U, double lambda) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(U);
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(U.rows(), U.cols());
    for (int i = 0; i < U.rows(); ++i)
        if (std::abs(es.eigenvalues()[i] - lambda) < 1e-8) P += es.eigenvectors().col(i) * es.eigenvectors().col(i).transpose();
    return P;
}

Eigen::MatrixXd apply(const Eigen::MatrixXd& P, const Eigen::MatrixXd& psi) {
    const int d = static_cast<int>(psi.rows());
    return (P * psi.reshaped()).reshaped(d, d);
}

double frobenius_pairing(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) { return (A.array() * B.array()).sum(); }

} // namespace

TEST_CASE("CR projection: idempotent, orthogonal, eigen-components") {
    std::mt19937_64 rng(11);
    for (int n : {1, 2, 3}) {
        const Eigen::MatrixXd J = standard_complex_structure(n);
        for (int trial = 0; trial < 20; ++trial) {
            const Eigen::MatrixXd psi = random_matrix(2 * n, rng);
            const auto [p, m] = project_cr(psi, J);
            CHECK(max_abs(p + m - psi) < 1e-13);
            CHECK(max_abs(upsilon_cr(p, J) - p) < 1e-13);
            CHECK(max_abs(upsilon_cr(m, J) + m) < 1e-13);
            const auto again = project_cr(p, J);
            CHECK(max_abs(again.plus - p) < 1e-13);
            CHECK(max_abs(again.minus) < 1e-13);
            CHECK(std::abs(frobenius_pairing(p, m)) < 1e-12);
        }
    }
}

TEST_CASE("CR projection agrees with the spectral projector of Υ") {
    std::mt19937_64 rng(12);
    for (int n : {1, 2}) {
        const int d = 2 * n;
        Eigen::MatrixXd J = standard_complex_structure(n);
        // A conjugated structure is still complex and exercises non-block matrices.
        const Eigen::MatrixXd O = random_orthogonal(d, rng);
        J = O * J * O.transpose();
        const Eigen::MatrixXd U = operator_matrix(d, [&](const Eigen::MatrixXd& A) { return upsilon_cr(A, J); });
        const Eigen::MatrixXd P1 = eigenprojector(U, 1);
        CHECK(P1.trace() == doctest::Approx(d * d / 2.0).epsilon(1e-10));
        for (int trial = 0; trial < 10; ++trial) {
            const Eigen::MatrixXd psi = random_matrix(d, rng);
            CHECK(max_abs(project_cr(psi, J).plus - apply(P1, psi)) < 1e-12);
        }
    }
}

TEST_CASE("CR projection of g and ω") {
    for (int n : {1, 2}) {
        const Eigen::MatrixXd J = standard_complex_structure(n);
        const Eigen::MatrixXd g = Eigen::MatrixXd::Identity(2 * n, 2 * n);
        const Eigen::MatrixXd omega = g * J; // ω(X,Y) = g(X, JY)
        CHECK(max_abs(project_cr(g, J).minus) < 1e-15);
        CHECK(max_abs(project_cr(omega, J).minus) < 1e-15);
        CHECK(max_abs(project_cr(omega, J).plus - omega) < 1e-15);
        // e¹⊗e¹ - e²⊗e² on the first complex line is anti-invariant.
        Eigen::MatrixXd anti = Eigen::MatrixXd::Zero(2 * n, 2 * n);
        anti(0, 0) = 1;
        anti(1, 1) = -1;
        CHECK(max_abs(project_cr(anti, J).plus) < 1e-15);
    }
}

TEST_CASE("qc projection: idempotent, orthogonal, agrees with spectral projector") {
    std::mt19937_64 rng(13);
    for (int n : {1, 2}) {
        const int d = 4 * n;
        const auto I = standard_quaternionic_structure(n);
        const Eigen::MatrixXd U = operator_matrix(d, [&](const Eigen::MatrixXd& A) { return upsilon_qc(A, I); });
        CHECK(max_abs(U - U.transpose()) < 1e-14);
        const Eigen::MatrixXd P3 = eigenprojector(U, 3);
        for (int trial = 0; trial < 10; ++trial) {
            const Eigen::MatrixXd psi = random_matrix(d, rng);
            const auto [t, m] = project_qc(psi, I);
            CHECK(max_abs(t + m - psi) < 1e-13);
            CHECK(max_abs(upsilon_qc(t, I) - 3 * t) < 1e-12);
            CHECK(max_abs(upsilon_qc(m, I) + m) < 1e-12);
            CHECK(max_abs(project_qc(t, I).three - t) < 1e-13);
            CHECK(max_abs(project_qc(m, I).three) < 1e-13);
            CHECK(std::abs(frobenius_pairing(t, m)) < 1e-12);
            CHECK(max_abs(t - apply(P3, psi)) < 1e-12);
        }
    }
}

TEST_CASE("qc projection of g, ω_s, and the n = 1 trace formula") {
    std::mt19937_64 rng(14);
    for (int n : {1, 2}) {
        const auto I = standard_quaternionic_structure(n);
        const Eigen::MatrixXd g = Eigen::MatrixXd::Identity(4 * n, 4 * n);
        CHECK(max_abs(project_qc(g, I).minus) < 1e-15);
        for (int s = 0; s < 3; ++s) {
            const Eigen::MatrixXd omega = g * I[s];
            CHECK(max_abs(project_qc(omega, I).three) < 1e-15);
        }
    }
    const auto I = standard_quaternionic_structure(1);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::MatrixXd A = random_matrix(4, rng);
        const Eigen::MatrixXd psi = A + A.transpose();
        const Eigen::MatrixXd expect = psi.trace() / 4 * Eigen::MatrixXd::Identity(4, 4);
        CHECK(max_abs(project_qc(psi, I).three - expect) < 1e-13);
    }
}

TEST_CASE("projections reject invalid structures") {
    const Eigen::MatrixXd psi = Eigen::MatrixXd::Identity(4, 4);
    CHECK_THROWS_AS(project_cr(psi, Eigen::MatrixXd::Identity(4, 4)), std::invalid_argument);
    CHECK_THROWS_AS(project_cr(psi, standard_complex_structure(1)), std::invalid_argument);
    auto I = standard_quaternionic_structure(1);
    std::swap(I[1], I[2]); // still quaternionic, opposite orientation
    CHECK_NOTHROW(project_qc(psi, I));
    I[2] = I[0];
    CHECK_THROWS_AS(project_qc(psi, I), std::invalid_argument);
}

TEST_CASE("structure matrices: exact entries") {
    const ExactMatrix Q = matrix_Q(), L = matrix_L();
    CHECK(Q.value()(0, 1) == -0.5);
    CHECK(Q.value()(2, 2) == 6.0);
    CHECK(L.numer(3, 0) * 3 == 10 * L.denom);
    CHECK(L.value()(3, 3) * 3 == doctest::Approx(22).epsilon(1e-16));
    CHECK(Q.numer == Q.numer.transpose());
    CHECK(L.numer == L.numer.transpose());
}

TEST_CASE("structure matrices: spectra against closed forms") {
    const Spectrum q = analyze(matrix_Q()), l = analyze(matrix_L());
    const auto eq = expected_spectrum_Q(), el = expected_spectrum_L();
    REQUIRE(q.eigenvalues.size() == eq.size());
    REQUIRE(l.eigenvalues.size() == el.size());
    for (std::size_t i = 0; i < eq.size(); ++i) CHECK(std::abs(q.eigenvalues[i] - eq[i]) < 1e-12);
    for (std::size_t i = 0; i < el.size(); ++i) CHECK(std::abs(l.eigenvalues[i] - el[i]) < 1e-12);
    CHECK(q.positive_definite);
    CHECK(q.kernel_dim == 0);
    CHECK(l.psd);
    CHECK_FALSE(l.positive_definite);
    CHECK(l.kernel_dim == 2);
    // Exact invariants: trace and trace of the square, computed over the integers.
    auto check_traces = [](const ExactMatrix& M, const std::vector<double>& ev) {
        const double d = M.denom;
        double s1 = 0, s2 = 0;
        for (double v : ev) { s1 += v; s2 += v * v; }
        CHECK(s1 == doctest::Approx(M.numer.trace() / d).epsilon(1e-13));
        CHECK(s2 == doctest::Approx((M.numer * M.numer).trace() / (d * d)).epsilon(1e-13));
    };
    check_traces(matrix_Q(), eq);
    check_traces(matrix_L(), el);
}

TEST_CASE("structure matrices: kernel of L is explicit") {
    const Eigen::MatrixXd L = matrix_L().value();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(L);
    CHECK(lu.rank() == 4);
    const Eigen::MatrixXd K = lu.kernel();
    CHECK(K.cols() == 2);
    CHECK(max_abs(L * K) < 1e-13);
}

TEST_CASE("quadratic forms on random vectors") {
    std::mt19937_64 rng(15);
    std::normal_distribution<double> N(0, 1);
    const Eigen::MatrixXd Q = matrix_Q().value(), L = matrix_L().value();
    const double qmin = expected_spectrum_Q().front();
    for (int trial = 0; trial < 10000; ++trial) {
        Eigen::VectorXd v(3), w(6);
        for (int i = 0; i < 3; ++i) v[i] = N(rng);
        for (int i = 0; i < 6; ++i) w[i] = N(rng);
        const double qv = v.dot(Q * v);
        CHECK(qv >= qmin * v.squaredNorm() - 1e-12);
        CHECK(w.dot(L * w) >= -1e-10 * w.squaredNorm());
        // Polynomial form of Q on scalars (d, e, u).
        const double d = v[0], e = v[1], u = v[2];
        CHECK(qv == doctest::Approx(d * d + e * e + 6 * u * u - d * e + 4 * d * u - 4 * u * e).epsilon(1e-12));
    }
}
