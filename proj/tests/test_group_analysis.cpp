#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "carnot/group_analysis.hpp"

using namespace carnot;

namespace {

std::span<const double> sp(const Eigen::VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

// Closed-form horizontal frame of the quaternionic Heisenberg group, one block:
// rows are (T, X, Y, Z), entry [field][s][b] is the coefficient of coordinate b
// (ordered t, x, y, z) in the ∂/∂ω_s component.
constexpr int kQuatFrame[4][3][4] = {
    {{0, 2, 0, 0}, {0, 0, 2, 0}, {0, 0, 0, 2}},     // T = ∂t + 2x∂ω1 + 2y∂ω2 + 2z∂ω3
    {{-2, 0, 0, 0}, {0, 0, 0, -2}, {0, 0, 2, 0}},   // X = ∂x - 2t∂ω1 - 2z∂ω2 + 2y∂ω3
    {{0, 0, 0, 2}, {-2, 0, 0, 0}, {0, -2, 0, 0}},   // Y = ∂y + 2z∂ω1 - 2t∂ω2 - 2x∂ω3
    {{0, 0, -2, 0}, {0, 2, 0, 0}, {-2, 0, 0, 0}},   // Z = ∂z - 2y∂ω1 + 2x∂ω2 - 2t∂ω3
};

} // namespace

TEST_CASE("frame of G(C) is X_j = ∂x_j + 2y_j∂t, Y_j = ∂y_j - 2x_j∂t") {
    for (int n : {1, 2, 3}) {
        const auto fr = frame(standard_algebra(Family::complex, n));
        for (int a = 0; a < 2 * n; ++a)
            for (int b = 0; b < 2 * n; ++b) {
                double expect = 0;
                if (a < n && b == n + a) expect = 2;
                if (a >= n && b == a - n) expect = -2;
                CHECK(fr.C[a](0, b) == expect);
            }
        for (int j = 0; j < n; ++j) CHECK(fr.commutator(j, n + j)[0] == -4.0);
        CHECK(fr.commutator(0, 0)[0] == 0.0);
    }
}

TEST_CASE("frame of G(H) matches the closed form") {
    for (int n : {1, 2}) {
        const auto fr = frame(standard_algebra(Family::quaternionic, n));
        for (int alpha = 0; alpha < n; ++alpha)
            for (int f = 0; f < 4; ++f)
                for (int s = 0; s < 3; ++s)
                    for (int b = 0; b < 4 * n; ++b) {
                        const int expect = (b / 4 == alpha) ? kQuatFrame[f][s][b % 4] : 0;
                        CHECK(fr.C[4 * alpha + f](s, b) == static_cast<double>(expect));
                    }
    }
}

TEST_CASE("frame commutators reproduce the bracket") {
    std::mt19937_64 rng(2);
    for (auto fam : {Family::complex, Family::quaternionic}) {
        const auto alg = standard_algebra(fam, 2);
        const auto fr = frame(alg);
        // A polynomial test function with nontrivial y-dependence.
        const ScalarField f(alg.m + alg.k, [m = alg.m, k = alg.k](std::span<const Jet> v) {
            Jet s = v[0] * v[m];
            for (int i = 1; i < m; ++i) s += (0.3 * i) * v[i] * v[i] * v[m + (i % k)];
            for (int t = 0; t < k; ++t) s += (1.0 + t) * v[m + t] * v[m + t];
            return s;
        });
        for (int trial = 0; trial < 5; ++trial) {
            const GroupPoint p = random_group_point(alg, rng, 0.5, 2);
            const Jet j = f.jet(sp(p.flat()), 2);
            for (int a = 0; a < alg.m; ++a)
                for (int b = 0; b < alg.m; ++b) {
                    const double lhs = frame_second_derivative(fr, j, p, a, b) - frame_second_derivative(fr, j, p, b, a);
                    double rhs = 0;
                    // (c_B/2)(J_s)_{ba} - (c_B/2)(J_s)_{ab} = -c_B (J_s)_{ab}
                    for (int s = 0; s < alg.k; ++s) rhs += -alg.bracket_scale * alg.J[s](a, b) * j.d(alg.m + s);
                    CHECK(std::abs(lhs - rhs) <= 1e-12 * (1 + std::abs(rhs)));
                }
        }
    }
}

TEST_CASE("sub-Laplacian instances") {
    for (auto fam : {Family::complex, Family::quaternionic}) {
        const auto alg = standard_algebra(fam, 2);
        const ScalarField x2(alg.m + alg.k, [m = alg.m](std::span<const Jet> v) {
            Jet s = v[0] * v[0];
            for (int i = 1; i < m; ++i) s += v[i] * v[i];
            return s;
        });
        const ScalarField ys(alg.m + alg.k, [m = alg.m](std::span<const Jet> v) { return v[m]; });
        std::mt19937_64 rng(3);
        const GroupPoint p = random_group_point(alg, rng);
        CHECK(sub_laplacian(alg, x2, p) == doctest::Approx(2.0 * alg.m).epsilon(1e-13));
        CHECK(sub_laplacian(alg, x2, p, LaplacianSign::geometer) == doctest::Approx(-2.0 * alg.m).epsilon(1e-13));
        CHECK(std::abs(sub_laplacian(alg, ys, p)) < 1e-13);
    }
    // h = (1/16)[(1+|q|²)² + |ω|²] on G(H): Δh = (Q-6)/4 + (Q+2)/4 |q|².
    for (int n : {1, 2}) {
        const auto alg = standard_algebra(Family::quaternionic, n);
        const ScalarField h = conformal_factor_h_field(alg, 1.0 / 16, 1.0, group_identity(alg));
        const double Q = alg.Q();
        CHECK(std::abs(sub_laplacian(alg, h, group_identity(alg)) - (Q - 6) / 4) < 1e-12);
        std::mt19937_64 rng(4);
        for (int trial = 0; trial < 20; ++trial) {
            const GroupPoint p = random_group_point(alg, rng);
            const double expect = (Q - 6) / 4 + (Q + 2) / 4 * p.x.squaredNorm();
            CHECK(sub_laplacian(alg, h, p) == doctest::Approx(expect).epsilon(1e-12));
        }
    }
}

TEST_CASE("fundamental solution") {
    std::mt19937_64 rng(5);
    for (auto fam : {Family::complex, Family::quaternionic})
        for (int n : {1, 2})
            for (auto nm : {Normalization::explicit_coordinates, Normalization::h_type}) {
                const auto alg = standard_algebra(fam, n, nm);
                INFO(alg.label);
                for (int i = 0; i < 100; ++i) CHECK(normalized_fundamental_residual(alg, random_group_point(alg, rng)) <= 1e-8);
                const GroupPoint flat{Eigen::VectorXd::Constant(alg.m, 0.7), Eigen::VectorXd::Zero(alg.k)};
                CHECK(normalized_fundamental_residual(alg, flat) <= 1e-8);
                CHECK_THROWS_AS(fundamental_residual(alg, group_identity(alg)), std::invalid_argument);
            }
}

TEST_CASE("the profile (|x|⁴+16|y|²)^{-(Q-2)/4} fails without the centre rescaling") {
    // Negative control: dropping the 1/c_B² factor breaks harmonicity in explicit coordinates.
    const auto alg = standard_algebra(Family::complex, 1);
    const ScalarField wrong(3, [](std::span<const Jet> v) {
        const Jet x2 = v[0] * v[0] + v[1] * v[1];
        return pow(x2 * x2 + 16.0 * v[2] * v[2], -0.5);
    });
    std::mt19937_64 rng(6);
    const GroupPoint p = random_group_point(alg, rng, 0.5, 2);
    const double r = sub_laplacian(alg, wrong, p) * std::pow(gauge(alg, p), alg.Q() + 2);
    CHECK(std::abs(r) > 1e-3);
}

TEST_CASE("Yamabe ratio of Φ on G(H)") {
    const auto alg = standard_algebra(Family::quaternionic, 1);
    const ScalarField Phi = conformal_factor_phi_field(alg, 1.0 / 16, 1.0, group_identity(alg));
    const double K = (alg.Q() - 2.0) * (alg.Q() - 6.0) / 8.0;
    CHECK(K == 4.0);
    std::mt19937_64 rng(7);
    for (int i = 0; i < 100; ++i) {
        const auto r = yamabe_residual(alg, Phi, random_group_point(alg, rng, 0.1, 5), K);
        CHECK(r.ratio == doctest::Approx(K).epsilon(1e-8));
    }
    const ScalarField neg(alg.m + alg.k, [](std::span<const Jet> v) { return -1.0 - v[0] * v[0]; });
    CHECK_THROWS_AS(yamabe_residual(alg, neg, group_identity(alg), 1.0), DomainError);
}

TEST_CASE("extremal ratio is constant along translations and dilations") {
    std::mt19937_64 rng(8);
    for (auto fam : {Family::complex, Family::quaternionic}) {
        const auto alg = standard_algebra(fam, 1);
        const auto fam0 = extremal_family(alg);
        const double ref = yamabe_residual(alg, fam0.field(), group_identity(alg), 0).ratio;
        for (int i = 0; i < 50; ++i) {
            const double r = yamabe_residual(alg, fam0.field(), random_group_point(alg, rng, 0.1, 5), 0).ratio;
            CHECK(std::abs(r / ref - 1) <= 1e-8);
        }
        for (int i = 0; i < 5; ++i) {
            const GroupPoint h = random_group_point(alg, rng, 0.3, 2);
            const double lam = 0.5 + std::uniform_real_distribution<double>(0, 1.5)(rng);
            const ScalarField u = scaled_field(alg, translated_field(alg, fam0.field(), h), lam);
            const double r = yamabe_residual(alg, u, random_group_point(alg, rng, 0.1, 3), 0).ratio;
            CHECK(std::abs(r / ref - 1) <= 1e-8);
        }
        // The explicit family with its own centre and scale matches the orbit description.
        const GroupPoint c = random_group_point(alg, rng, 0.5, 1.5);
        const auto fam1 = extremal_family(alg, 0.7, c);
        const GroupPoint g = random_group_point(alg, rng, 0.5, 1.5);
        CHECK(fam1.value(g) == doctest::Approx(fam1.field().value(sp(g.flat()))).epsilon(1e-14));
        // F_ε = ε^{-(Q-2)/2} u_{1/ε}, so the ratio picks up ε².
        CHECK(yamabe_residual(alg, fam1.field(), g, 0).ratio == doctest::Approx(ref * 0.49).epsilon(1e-8));
        CHECK(fam1.value(g) > 0);
    }
}

TEST_CASE("scaling covariance of the horizontal gradient") {
    const auto alg = standard_algebra(Family::quaternionic, 1);
    const auto fr = frame(alg);
    const ScalarField u = extremal_family(alg, 0.8).field();
    std::mt19937_64 rng(9);
    for (int i = 0; i < 20; ++i) {
        const double lam = 0.3 + std::uniform_real_distribution<double>(0, 2)(rng);
        const GroupPoint g = random_group_point(alg, rng, 0.2, 3);
        const GroupPoint dg = dilate(alg, lam, g);
        const double lhs = std::sqrt(horizontal_gradient_norm2(fr, scaled_field(alg, u, lam).jet(sp(g.flat()), 1), g));
        const double rhs = std::pow(lam, (alg.Q() - 2) / 2.0 + 1) * std::sqrt(horizontal_gradient_norm2(fr, u.jet(sp(dg.flat()), 1), dg));
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("sub-Laplacian commutes with left translation") {
    const auto alg = standard_algebra(Family::complex, 2);
    const ScalarField u = conformal_factor_h_field(alg, 0.5, 0.3, group_identity(alg));
    std::mt19937_64 rng(10);
    for (int i = 0; i < 20; ++i) {
        const GroupPoint h = random_group_point(alg, rng, 0.2, 3), g = random_group_point(alg, rng, 0.2, 3);
        const double lhs = sub_laplacian(alg, translated_field(alg, u, h), g);
        const double rhs = sub_laplacian(alg, u, group_multiply(alg, h, g));
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));
    }
}

TEST_CASE("Liouville conformal factor") {
    std::mt19937_64 rng(11);
    for (int n : {1, 2}) {
        const auto alg = standard_algebra(Family::quaternionic, n);
        struct Case { double c0, sigma; };
        for (Case c : {Case{1.0 / 16, 1.0}, Case{0.3, 2.5}, Case{2.0, 0.0}}) {
            const double expect = 128.0 * n * (n + 2) * c.c0 * c.sigma;
            const GroupPoint g0 = random_group_point(alg, rng, 0.2, 2);
            for (int i = 0; i < 20; ++i) {
                const GroupPoint p = random_group_point(alg, rng, 0.1, 4);
                const double r0 = conformal_scalar_ratio(alg, c.c0, c.sigma, group_identity(alg), p);
                const double r1 = conformal_scalar_ratio(alg, c.c0, c.sigma, g0, p);
                CHECK(std::abs(r0 - expect) <= 1e-8 * std::max(1.0, expect));
                CHECK(std::abs(r1 - expect) <= 1e-8 * std::max(1.0, expect));
            }
        }
    }
    // The closed form in quaternion notation.
    const auto alg = standard_algebra(Family::quaternionic, 1);
    const GroupPoint g0 = random_group_point(alg, rng), p = random_group_point(alg, rng);
    const GroupPoint s = group_multiply(alg, g0, p);
    const double expect = 0.25 * (std::pow(2.0 + s.x.squaredNorm(), 2) + s.y.squaredNorm());
    CHECK(conformal_factor_h(alg, 0.25, 2.0, g0, p) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("best constant") {
    // Gamma values used by the closed form, checked analytically.
    CHECK(std::tgamma(3.0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(std::tgamma(1.5) == doctest::Approx(std::sqrt(std::numbers::pi) / 2).epsilon(1e-15));
    const double pi = std::numbers::pi;
    const double c21 = 0.5 * std::pow(4.0, 0.25) * std::pow(pi, -3.0 / 8) * std::pow(2.0 / (std::sqrt(pi) / 2), 0.25);
    CHECK(best_constant(2, 1) == doctest::Approx(c21).epsilon(1e-14));
    // Γ(7)/Γ(7/2) = 720 / (15√π/8)
    const double g43 = 720.0 / (15.0 * std::sqrt(pi) / 8.0);
    const double c43 = 1 / std::sqrt(4.0 * 8.0) * std::pow(4.0, 0.3) * std::pow(pi, -7.0 / 20) * std::pow(g43, 0.1);
    CHECK(best_constant(4, 3) == doctest::Approx(c43).epsilon(1e-14));
    for (int k = 1; k <= 7; ++k) {
        const double v = best_constant(4 * k, k);
        CHECK(std::isfinite(v));
        CHECK(v > 0);
    }
}

TEST_CASE("GV reduction on the quadratic family") {
    for (auto [m, k] : {std::pair{2, 1}, std::pair{4, 1}, std::pair{4, 3}, std::pair{8, 3}}) {
        const auto gv = gv_params(m, k);
        for (double A : {1.0, 0.4, 2.3}) {
            const ScalarField phi = gv_quadratic_family(gv, A);
            for (int i = 1; i <= 10; ++i)
                for (int j = 1; j <= 10; ++j) {
                    const double x = 0.5 * i, y = 0.5 * j;
                    const auto r = gv_reduction(gv, phi, x, y);
                    CHECK(std::abs(r.yfinal) <= 1e-10);
                    CHECK(std::abs(r.hessian) <= 1e-10 * std::max(1.0, A * A * A * A));
                    CHECK(std::abs(r.laplace) <= 1e-10);
                    CHECK(std::abs(r.mixed) <= 1e-10);
                    const auto d = gv_divergence_identity(gv, phi, x, y);
                    CHECK(std::abs(d.lhs - d.rhs) <= 1e-10);
                }
        }
    }
}

TEST_CASE("GV reduction rejects a generic cubic") {
    const auto gv = gv_params(2, 1);
    const ScalarField cubic(2, [](std::span<const Jet> v) { return 1.0 + v[0] * v[0] * v[0] + 0.5 * v[0] * v[1] * v[1] + v[1]; });
    double worst = 0;
    for (int i = 1; i <= 5; ++i)
        for (int j = 1; j <= 5; ++j) worst = std::max(worst, std::abs(gv_reduction(gv, cubic, i, j).yfinal));
    CHECK(worst > 1e-2);
    CHECK_THROWS_AS(gv_reduction(gv, cubic, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("random group points respect the gauge window") {
    std::mt19937_64 rng(12);
    const auto alg = standard_algebra(Family::quaternionic, 2);
    for (int i = 0; i < 200; ++i) {
        const double N = gauge(alg, random_group_point(alg, rng));
        CHECK(N >= 0.1 * (1 - 1e-12));
        CHECK(N <= 10 * (1 + 1e-12));
    }
}
