#include "doctest.h"

#include <boost/math/special_functions/ellint_1.hpp>
#include <boost/math/special_functions/jacobi_elliptic.hpp>
#include <algorithm>
#include <cmath>
#include <random>

#include "carnot/heterotic.hpp"

using namespace carnot;

namespace {

constexpr std::uint32_t E1234 = 0xF;

Eigen::Matrix3d random_A(std::mt19937_64& rng) {
    std::normal_distribution<double> N(0, 1);
    Eigen::Matrix3d A;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) A(i, j) = N(rng);
    return A;
}

std::vector<double> random_base_point(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(-1, 1);
    return {U(rng), U(rng), U(rng), U(rng)};
}

// Random cubic polynomial in x¹..x⁴ with small coefficients.
ScalarField random_cubic(std::mt19937_64& rng, double scale = 0.2) {
    std::normal_distribution<double> N(0, scale);
    std::vector<std::array<int, 3>> idx;
    std::vector<double> c;
    for (int a = -1; a < 4; ++a)
        for (int b = a; b < 4; ++b)
            for (int d = std::max(b, 0); d < 4; ++d) {
                idx.push_back({a, b, d});
                c.push_back(N(rng));
            }
    return ScalarField(4, [idx, c](std::span<const Jet> v) {
        Jet r = 0.0 * v[0];
        for (std::size_t t = 0; t < idx.size(); ++t) {
            Jet m = v[idx[t][2]];
            if (idx[t][1] >= 0) m *= v[idx[t][1]];
            if (idx[t][0] >= 0) m *= v[idx[t][0]];
            r += c[t] * m;
        }
        return r;
    });
}

// Random k-form with coefficient jets of random cubics at x.
FrameForm random_form(int degree, std::mt19937_64& rng, std::span<const double> x, int order) {
    FrameForm f(order);
    for (std::uint32_t m = 0; m < 128; ++m)
        if (std::popcount(m) == degree) f.add(m, random_cubic(rng).jet(x, order));
    return f;
}

FrameForm constant(const Form<double>& f, int order = 3) { return FrameForm(f, order); }

Form<double> e(int i) { return Form<double>::basis(7, i, 1.0); }

double max_abs_forms(const Form<double>& a, const Form<double>& b) { return max_abs(a - b); }

}  // namespace

TEST_CASE("make_KA with A = I gives the quaternionic Heisenberg algebra") {
    const auto sc = make_KA(Eigen::Matrix3d::Identity());
    for (int i = 0; i < 4; ++i) CHECK(sc.de(i).empty());
    CHECK(max_abs_forms(sc.de(4), (e(0) ^ e(1)) - (e(2) ^ e(3))) == 0.0);
    CHECK(max_abs_forms(sc.de(5), (e(0) ^ e(2)) + (e(1) ^ e(3))) == 0.0);
    CHECK(max_abs_forms(sc.de(6), (e(0) ^ e(3)) - (e(1) ^ e(2))) == 0.0);
}

TEST_CASE("make_KA: Jacobi identity, abelian limit, antisymmetric table") {
    std::mt19937_64 rng(21);
    for (int t = 0; t < 20; ++t) {
        const auto sc = make_KA(random_A(rng));
        CHECK(sc.jacobi_residual() <= 1e-13);
        for (int i = 0; i < 7; ++i)
            for (int j = 0; j < 7; ++j)
                for (int k = 0; k < 7; ++k) CHECK(sc.c[i][j][k] == -sc.c[i][k][j]);
    }
    const auto ab = make_KA(Eigen::Matrix3d::Zero());
    for (int i = 0; i < 7; ++i) CHECK(ab.de(i).empty());
}

TEST_CASE("σ_i ∧ ω_j = 0 and the hyperkähler relations") {
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            CHECK(max_abs(sigma_form(i) ^ kahler_form(j)) == 0.0);
            const auto ww = kahler_form(i) ^ kahler_form(j);
            const double expect = i == j ? 2.0 : 0.0;
            const double* c = ww.find(E1234);
            CHECK((c ? *c : 0.0) == expect);
        }
}

TEST_CASE("ce_differential: consistency with the structure constants") {
    std::mt19937_64 rng(22);
    const auto sc = make_KA(random_A(rng));
    const std::vector<double> x{0.2, -0.4, 0.7, 0.1};
    for (int i = 0; i < 7; ++i) CHECK(max_abs_forms(ce_differential(constant(e(i)), sc).values(), sc.de(i)) == 0.0);
    // d(x²x³ e¹) = d(x²x³) ∧ e¹
    const ScalarField f(4, [](std::span<const Jet> v) { return v[1] * v[2]; });
    const auto d = ce_differential(FrameForm::term(1u, f.jet(x, 3)), sc).values();
    Form<double> expect = (x[2] * e(1) + x[1] * e(2)) ^ e(0);
    CHECK(max_abs_forms(d, expect) < 1e-15);
    CHECK_THROWS_AS(ce_differential(FrameForm::term(1u, Jet(7, 2, 1.0)), sc), std::invalid_argument);
}

TEST_CASE("ce_differential: d² = 0 and Leibniz on function-coefficient forms") {
    std::mt19937_64 rng(23);
    for (int t = 0; t < 5; ++t) {
        const auto sc = make_KA(random_A(rng));
        const auto x = random_base_point(rng);
        for (int deg : {0, 1, 2, 3}) {
            const auto a = random_form(deg, rng, x, 3);
            CHECK(ce_differential(ce_differential(a, sc), sc).max_value() <= 1e-11);
        }
        const auto a = random_form(1, rng, x, 3), b = random_form(2, rng, x, 3);
        const auto lhs = ce_differential(a ^ b, sc);
        const auto rhs = (ce_differential(a, sc) ^ b) - (a ^ ce_differential(b, sc));
        CHECK((lhs - rhs).max_value() <= 1e-11);
        const auto c = random_form(2, rng, x, 3);
        const auto lhs2 = ce_differential(b ^ c, sc);
        const auto rhs2 = (ce_differential(b, sc) ^ c) + (b ^ ce_differential(c, sc));
        CHECK((lhs2 - rhs2).max_value() <= 1e-11);
    }
}

TEST_CASE("Hodge star of the conformal coframe") {
    std::mt19937_64 rng(24);
    const auto x = random_base_point(rng);
    const Jet f = random_cubic(rng).jet(x, 2);
    // *(ē¹∧…∧ē⁷) = 1 and *ē¹² = ē³⁴⁵⁶⁷
    const auto vol = orthonormal_basis(FrameForm::kVolumeMask, f);
    const auto one = hodge_star(vol, f);
    CHECK(one.coefficient(0u).value() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(one.max_value(0u) == 0.0);
    const auto s12 = hodge_star(orthonormal_basis(0x3, f), f);
    const auto target = orthonormal_basis(0x7C, f);
    CHECK((s12 - target).max_value() < 1e-14);
    for (int deg = 0; deg <= 7; ++deg) {
        const auto a = random_form(deg, rng, x, 2);
        CHECK((hodge_star(hodge_star(a, f), f) - a).max_value() < 1e-12);
        // α ∧ *α = |α|² vol
        const auto lhs = a ^ hodge_star(a, f);
        const Jet rhs = frame_norm2(a, f) * exp(4.0 * f);
        CHECK(std::abs(lhs.coefficient(FrameForm::kVolumeMask).value() - rhs.value()) < 1e-12 * (1 + std::abs(rhs.value())));
    }
}

TEST_CASE("G₂ structure: closure, co-closure with the Lee form") {
    const auto zero = ScalarField(4, [](std::span<const Jet> v) { return 0.0 * v[0]; });
    const std::vector<double> x{0.3, -0.2, 0.5, 0.1};
    const auto c0 = g2_structure(zero, make_KA(Eigen::Matrix3d::Identity()), x);
    CHECK(c0.closure <= 1e-12);
    CHECK(c0.coclosure <= 1e-12);
    const auto sinf = ScalarField(4, [](std::span<const Jet> v) { return 0.1 * sin(v[0]); });
    std::mt19937_64 rng(25);
    for (int t = 0; t < 5; ++t) {
        const auto sc = make_KA(random_A(rng));
        const auto p = random_base_point(rng);
        const auto c = g2_structure(sinf, sc, p);
        CHECK(c.closure <= 1e-8);
        CHECK(c.coclosure <= 1e-8);
        CHECK(c.lee_form <= 1e-12);
        // Θ̄ has unit norm scaled by 7 (seven terms of a G₂ form).
        const Jet fj = sinf.jet(p, 2);
        CHECK(frame_norm2(c.theta, fj).value() == doctest::Approx(7.0).epsilon(1e-14));
    }
}

TEST_CASE("torsion: constant dilaton and the dT closed form") {
    const std::vector<double> x{0.1, 0.2, 0.3, 0.4};
    const auto zero = ScalarField(4, [](std::span<const Jet> v) { return 0.0 * v[0]; });
    const auto t0 = torsion_check(zero, make_KA(Eigen::Matrix3d::Identity()), x);
    CHECK(t0.pipeline == doctest::Approx(-6.0).epsilon(1e-14));
    CHECK(t0.off_component <= 1e-14);
    // At f ≡ 0 T has constant coefficients.
    const auto T0 = torsion_form(zero.jet(x, 2), make_KA(Eigen::Matrix3d::Identity()));
    for (const auto& [m, c] : T0.form().terms())
        for (int i = 0; i < 4; ++i) CHECK(c.d(i) == 0.0);

    std::mt19937_64 rng(26);
    for (int t = 0; t < 10; ++t) {
        const auto sc = make_KA(random_A(rng));
        const auto f = random_cubic(rng);
        const auto p = random_base_point(rng);
        const auto tc = torsion_check(f, sc, p);
        CHECK(std::abs(tc.pipeline - tc.closed_form) <= 1e-8);
        CHECK(tc.off_component <= 1e-8);
    }
}

TEST_CASE("torsion depends on f only through its 1-jet") {
    const std::vector<double> x{0.4, -0.3, 0.2, 0.6};
    const auto f1 = ScalarField(4, [](std::span<const Jet> v) { return 0.3 * v[0] - 0.2 * v[3]; });
    // Same value and gradient at x, different second derivatives.
    const auto f2 = ScalarField(4, [x](std::span<const Jet> v) {
        return 0.3 * v[0] - 0.2 * v[3] + 0.7 * square(v[1] - x[1]) + 0.4 * (v[0] - x[0]) * (v[2] - x[2]);
    });
    const auto sc = make_KA(Eigen::Matrix3d::Identity());
    const auto T1 = torsion_form(f1.jet(x, 2), sc), T2 = torsion_form(f2.jet(x, 2), sc);
    CHECK((T1.truncated(0) - T2.truncated(0)).max_value() < 1e-15);
    // Shifting f by a constant rescales only through e^{2f}: the fiber term e⁵⁶⁷ drives a difference.
    const auto f3 = ScalarField(4, [](std::span<const Jet> v) { return 0.3 * v[0] - 0.2 * v[3] + 0.5; });
    const auto T3 = torsion_form(f3.jet(x, 2), sc);
    CHECK((T1.truncated(0) - T3.truncated(0)).max_value() > 1e-3);
}

TEST_CASE("dilaton terms against hand derivatives") {
    const std::vector<double> x{0.5, -0.3, 0.2, 0.1};
    const double c = 0.7;
    const auto lin = ScalarField(4, [c](std::span<const Jet> v) { return c * v[0]; });
    const auto t = dilaton_terms(lin.jet(x, 2));
    CHECK(t.hessian2 == 0.0);
    CHECK(std::abs(t.four_laplacian) < 1e-15);
    CHECK(t.laplace_em2f == doctest::Approx(4 * c * c * std::exp(-2 * c * x[0])).epsilon(1e-14));
    CHECK(t.laplace_e2f == doctest::Approx(4 * c * c * std::exp(2 * c * x[0])).epsilon(1e-14));
    // f = a x₁² + b x₁x₂ + e x₂²: F₂ = det Hess = 4ae − b²; Δ₄f by hand.
    const double a = 0.3, b = -0.2, ee = 0.45;
    const auto quad = ScalarField(4, [=](std::span<const Jet> v) { return a * v[0] * v[0] + b * v[0] * v[1] + ee * v[1] * v[1]; });
    const auto q = dilaton_terms(quad.jet(x, 2));
    CHECK(q.hessian2 == doctest::Approx(4 * a * ee - b * b).epsilon(1e-14));
    const double f1 = 2 * a * x[0] + b * x[1], f2 = b * x[0] + 2 * ee * x[1];
    const double g2 = f1 * f1 + f2 * f2;
    // div(g² ∇f) = g²Δf + ∇(g²)·∇f, ∇(g²) = 2 Hess ∇f
    const double h11 = 2 * a, h12 = b, h22 = 2 * ee;
    const double grad_g2_1 = 2 * (h11 * f1 + h12 * f2), grad_g2_2 = 2 * (h12 * f1 + h22 * f2);
    CHECK(q.four_laplacian == doctest::Approx(g2 * (h11 + h22) + grad_g2_1 * f1 + grad_g2_2 * f2).epsilon(1e-13));
}

TEST_CASE("connection: Levi-Civita is torsion free, both connections metric") {
    std::mt19937_64 rng(27);
    for (int t = 0; t < 3; ++t) {
        const auto cd = connection_and_p1(random_cubic(rng), make_KA(random_A(rng)), random_base_point(rng));
        CHECK(cd.lc_torsion <= 1e-12);
        CHECK(cd.antisymmetry <= 1e-12);
    }
}

TEST_CASE("first Pontrjagin form: curvature path against the closed form") {
    const std::vector<double> x{0.3, -0.2, 0.5, 0.1};
    const auto sc = make_KA(Eigen::Matrix3d::Identity());
    const auto cst = ScalarField(4, [](std::span<const Jet> v) { return 0.0 * v[0] + 0.4; });
    const auto c0 = connection_and_p1(cst, sc, x);
    CHECK(std::abs(c0.p1_coefficient) <= 1e-12);
    CHECK(c0.closed_form == 0.0);
    CHECK(c0.off_component <= 1e-12);

    const auto lin = ScalarField(4, [](std::span<const Jet> v) { return 0.35 * v[0]; });
    const auto c1 = connection_and_p1(lin, sc, x);
    CHECK(std::abs(c1.p1_coefficient - c1.closed_form) <= 1e-6);
    CHECK(c1.off_component <= 1e-8);

    const auto quad = ScalarField(4, [](std::span<const Jet> v) { return 0.2 * v[0] * v[0] - 0.1 * v[0] * v[1] + 0.15 * v[1] * v[1]; });
    const auto c2 = connection_and_p1(quad, sc, x);
    CHECK(std::abs(c2.p1_coefficient - c2.closed_form) <= 1e-6);
    CHECK(c2.off_component <= 1e-8);

    std::mt19937_64 rng(28);
    for (int t = 0; t < 5; ++t) {
        const auto c = connection_and_p1(random_cubic(rng), make_KA(random_A(rng)), random_base_point(rng));
        CHECK(std::abs(c.p1_coefficient - c.closed_form) <= 1e-6);
        CHECK(c.off_component <= 1e-8);
    }
}

TEST_CASE("anomaly residual: constant dilaton and the rank gate") {
    const std::vector<double> x{0.1, 0.1, 0.1, 0.1};
    std::mt19937_64 rng(29);
    const Eigen::Matrix3d A = random_A(rng);
    const Eigen::Vector3d u(0.3, -0.5, 0.8), v(1.0, 0.2, -0.4);
    const Eigen::Matrix3d L = u * v.transpose();
    const double lam = (L * A).norm(), a2 = A.squaredNorm();
    const auto cst = ScalarField(4, [](std::span<const Jet> w) { return 0.0 * w[0] - 0.2; });
    for (double ap : {-1.0, 0.5, 2.0})
        CHECK(anomaly_residual(cst, A, L, ap, x) == doctest::Approx(2 * a2 + ap * lam * lam).epsilon(1e-13));
    CHECK(std::abs(anomaly_residual(cst, A, L, -2 * a2 / (lam * lam), x)) < 1e-12);
    Eigen::Matrix3d L2 = L;
    L2(1, 1) += 1.0;
    CHECK_THROWS_AS(anomaly_residual(cst, A, L2, -1.0, x), std::invalid_argument);
    // Both assembly routes agree on generic data.
    for (int t = 0; t < 3; ++t) {
        const auto f = random_cubic(rng);
        const auto p = random_base_point(rng);
        CHECK(anomaly_residual(f, A, L, -0.7, p) == doctest::Approx(anomaly_residual_pipeline(f, A, L, -0.7, p)).epsilon(1e-9));
    }
}

TEST_CASE("Weierstrass ℘: ODE, pole asymptotics, half period, periodicity") {
    const auto w = weierstrass_params(4.5);
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
        const double t = 0.05 + (2 * w.tau_plus - 0.1) * i / 999.0;
        const auto v = weierstrass_p(t, w);
        worst = std::max(worst, std::abs(weierstrass_ode_residual(v, w)) / (1 + std::pow(std::abs(v.u), 3)));
        CHECK(v.u >= w.d - 1e-12);
    }
    CHECK(worst <= 1e-9);
    CHECK(weierstrass_p(2e-3, w).u * 4e-6 == doctest::Approx(1.0).epsilon(1e-6));
    // Root of 4u(u − r)(u + r) found by bisection.
    double lo = 1e-6, hi = 10;
    for (int i = 0; i < 200; ++i) {
        const double mid = (lo + hi) / 2;
        (4 * mid * mid * mid - w.g2 * mid < 0 ? lo : hi) = mid;
    }
    CHECK(weierstrass_p(w.tau_plus, w).u == doctest::Approx(lo).epsilon(1e-12));
    CHECK(w.d == doctest::Approx(lo).epsilon(1e-12));
    for (double t : {0.3, 1.1, 2.0})
        CHECK(weierstrass_p(t + 2 * w.tau_plus, w).u == doctest::Approx(weierstrass_p(t, w).u).epsilon(1e-12));
    CHECK_THROWS_AS(weierstrass_p(2 * w.tau_plus + 1e-4, w), DomainError);
}

TEST_CASE("Weierstrass ℘ against Jacobi elliptic functions") {
    // g₃ = 0: e₁ = r, e₂ = 0, e₃ = −r; ℘(z) = e₃ + (e₁ − e₃)/sn²(z√(e₁ − e₃), k), k² = ½.
    for (double g2 : {0.3, 1.5, 4.0, 12.0}) {
        const auto w = weierstrass_params(g2);
        const double r = std::sqrt(g2) / 2, k = std::sqrt(0.5), s = std::sqrt(2 * r);
        CHECK(w.tau_plus == doctest::Approx(boost::math::ellint_1(k) / s).epsilon(1e-13));
        for (double frac : {0.05, 0.2, 0.45, 0.7, 0.99, 1.3, 1.9}) {
            const double t = frac * w.tau_plus;
            const double sn = boost::math::jacobi_sn(k, t * s);
            CHECK(weierstrass_p(t, w).u == doctest::Approx(-r + 2 * r / (sn * sn)).epsilon(1e-11));
        }
    }
    CHECK(weierstrass_params(4.0).tau_plus == doctest::Approx(lemniscatic_half_period()).epsilon(1e-15));
}

TEST_CASE("one-variable dilaton solves the reduced ODE and the anomaly") {
    const Eigen::Matrix3d A = Eigen::Matrix3d::Identity();
    Eigen::Matrix3d L = Eigen::Matrix3d::Zero();
    L(0, 0) = 1;
    const auto data = strominger_data(A, L);
    CHECK(2 * data.normA2 == doctest::Approx(data.alpha * data.alpha * data.lambda * data.lambda).epsilon(1e-15));
    const auto f = weierstrass_dilaton(data);
    const double P = 2 * data.wp.tau_plus;
    for (int i = 1; i < 40; ++i) {
        const double t = P * i / 40.0;
        const auto s = dilaton_from_u(t, data);
        CHECK(std::abs(s.reduced_residual) <= 1e-8);
        CHECK(dilaton_from_u(t + P, data).f == doctest::Approx(s.f).epsilon(1e-12));
        const std::vector<double> x{t, 0.3, -0.1, 0.7};
        // Jet path and chain-rule path agree on f and f'.
        const Jet fj = f.jet(x, 2);
        CHECK(fj.value() == doctest::Approx(s.f).epsilon(1e-14));
        CHECK(fj.d(0) == doctest::Approx(s.df).epsilon(1e-12));
        CHECK(std::abs(anomaly_residual(f, A, L, data.alpha_prime, x)) <= 1e-7);
        CHECK(std::abs(anomaly_residual_pipeline(f, A, L, data.alpha_prime, x)) <= 1e-7);
    }
    CHECK_THROWS_AS(dilaton_from_u(0.5, -1.0, 0.0, data), DomainError);
    CHECK_THROWS_AS(dilaton_from_u(0.0, data), DomainError);
    // The literal scale √(3|A|²)/α is twice the minimum of u.
    CHECK(std::sqrt(3 * data.normA2) / data.alpha == doctest::Approx(2 * data.wp.d).epsilon(1e-15));
}

TEST_CASE("contraction of the quaternionic Heisenberg algebra") {
    const double a = 0.8, b = -1.3;
    const auto s0 = contract(0, a, b);
    CHECK(max_abs_forms(s0.de(4), b * sigma_form(1)) == 0.0);
    CHECK(max_abs_forms(s0.de(5), a * sigma_form(0) - b * sigma_form(2)) == 0.0);
    CHECK(s0.de(6).empty());
    for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
        const auto s = contract(eps, a, b);
        CHECK(s.jacobi_residual() <= 1e-13);
        CHECK(s.distance(s0) == doctest::Approx(eps).epsilon(1e-12));
    }
    CHECK_THROWS_AS(contract(-1, a, b), std::invalid_argument);
}
