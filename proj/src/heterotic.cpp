#include "carnot/heterotic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace carnot {

namespace {

constexpr std::uint32_t kE1234 = 0xF;

constexpr std::uint32_t bit(int i) { return 1u << i; }

Jet base_jet(const ScalarField& f, std::span<const double> x, int order) {
    if (f.dim() != FrameForm::kBase || x.size() != FrameForm::kBase)
        throw std::invalid_argument("heterotic: the dilaton is a function of x¹..x⁴");
    return f.jet(x, order);
}

FrameForm differential(const Jet& f) {
    FrameForm r(f.order() - 1);
    for (int i = 0; i < FrameForm::kBase; ++i) r.add(bit(i), f.derivative(i));
    return r;
}

// Component of an antisymmetric tensor stored as a form: coefficient of ē^{abc...} with sign.
Jet component(const FrameForm& form, std::initializer_list<int> idx, const Jet& f, int order) {
    std::uint32_t mask = 0;
    int prev_sign = 1;
    for (int i : idx) {
        if (mask & bit(i)) return Jet(FrameForm::kBase, order, 0.0);
        prev_sign *= wedge_sign(mask, bit(i));
        mask |= bit(i);
    }
    return static_cast<double>(prev_sign) * orthonormal_coefficient(form, mask, f).truncated(order);
}

} // namespace

FrameForm g2_form(const Jet& f) {
    const int ord = f.order();
    const Jet e2f = exp(2.0 * f);
    auto e = [&](int i) { return FrameForm(Form<double>::basis(7, i, 1.0), ord); };
    const FrameForm w1(kahler_form(0), ord), w2(kahler_form(1), ord), w3(kahler_form(2), ord);
    return e2f * ((w1 ^ e(6)) + (w2 ^ e(4)) - (w3 ^ e(5))) + ((e(4) ^ e(5)) ^ e(6));
}

G2Check g2_structure(const ScalarField& field, const StructureConstants& sc, std::span<const double> x, int order) {
    const Jet f = base_jet(field, x, order);
    G2Check c;
    c.theta = g2_form(f);
    c.star_theta = hodge_star(c.theta, f);
    const FrameForm dtheta = ce_differential(c.theta, sc);
    c.closure = (dtheta ^ c.theta).max_value();
    const FrameForm theta7 = 2.0 * differential(f);
    c.coclosure = (ce_differential(c.star_theta, sc) - (theta7 ^ c.star_theta)).max_value();
    c.lee = (-1.0 / 3.0) * hodge_star(hodge_star(dtheta, f) ^ c.theta, f);
    c.lee_form = (c.lee - theta7).max_value();
    return c;
}

FrameForm torsion_form(const Jet& f, const StructureConstants& sc) {
    const FrameForm theta = g2_form(f);
    const FrameForm dphi = -1.0 * differential(f);
    return -1.0 * hodge_star(ce_differential(theta, sc), f) - 2.0 * hodge_star(dphi ^ theta, f);
}

DilatonTerms dilaton_terms(const Jet& f) {
    if (f.order() < 2) throw std::invalid_argument("dilaton_terms: need second derivatives");
    DilatonTerms t;
    t.laplace_e2f = exp(2.0 * f).laplacian();
    t.laplace_em2f = exp(-2.0 * f).laplacian();
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) t.hessian2 += f.d(i, i) * f.d(j, j) - f.d(i, j) * f.d(i, j);
    // div(|∇f|²∇f) = |∇f|² Δf + 2 Σ f_i f_j f_ij
    double g2 = 0, q = 0, lap = 0;
    for (int i = 0; i < 4; ++i) {
        g2 += f.d(i) * f.d(i);
        lap += f.d(i, i);
        for (int j = 0; j < 4; ++j) q += f.d(i) * f.d(j) * f.d(i, j);
    }
    t.four_laplacian = g2 * lap + 2 * q;
    return t;
}

double frobenius_norm2(const Eigen::Matrix3d& A) { return A.squaredNorm(); }

TorsionCheck torsion_check(const ScalarField& field, const StructureConstants& sc, std::span<const double> x, int order) {
    if (order < 2) throw std::invalid_argument("torsion_check: order must be at least 2");
    const Jet f = base_jet(field, x, order);
    const FrameForm dT = ce_differential(torsion_form(f, sc), sc);
    TorsionCheck t;
    t.pipeline = dT.coefficient(kE1234).value();
    t.off_component = dT.max_value(kE1234);
    t.closed_form = -(dilaton_terms(f).laplace_e2f + 2 * frobenius_norm2(sc.A));
    return t;
}

ConnectionData connection_and_p1(const ScalarField& field, const StructureConstants& sc, std::span<const double> x, int order) {
    if (order < 2) throw std::invalid_argument("connection_and_p1: order must be at least 2");
    const Jet f = base_jet(field, x, order);
    const int o1 = order - 1;
    constexpr int n = FrameForm::kDim;

    std::vector<FrameForm> ebar, debar;
    for (int i = 0; i < n; ++i) {
        ebar.push_back(orthonormal_basis(bit(i), f));
        debar.push_back(ce_differential(ebar.back(), sc));
    }
    const FrameForm T = torsion_form(f, sc);

    // c̄(i; j, k) = dē^i(ē_j, ē_k), T̄(i, j, k) = T(ē_i, ē_j, ē_k)
    auto cbar = [&](int i, int j, int k) { return component(debar[i], {j, k}, f, o1); };
    auto tbar = [&](int i, int j, int k) { return component(T, {i, j, k}, f, o1); };

    ConnectionData out;
    out.levi_civita.assign(n * n, FrameForm(o1));
    out.minus.assign(n * n, FrameForm(o1));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                const Jet lc = 0.5 * (cbar(i, j, k) - cbar(k, i, j) + cbar(j, k, i));
                // g(∇⁻_X e_j, e_i) = ω^i_j(X) − ½T(X, e_j, e_i) = ω^i_j(X) + ½T(e_i, e_j, X)
                const Jet mi = lc + 0.5 * tbar(i, j, k);
                out.levi_civita[i * n + j] += lc * ebar[k];
                out.minus[i * n + j] += mi * ebar[k];
            }

    for (int i = 0; i < n; ++i) {
        FrameForm t = debar[i];
        for (int j = 0; j < n; ++j) t += out.levi_civita[i * n + j] ^ ebar[j];
        out.lc_torsion = std::max(out.lc_torsion, t.max_value());
        for (int j = 0; j < n; ++j) {
            out.antisymmetry = std::max(out.antisymmetry, (out.levi_civita[i * n + j] + out.levi_civita[j * n + i]).max_value());
            out.antisymmetry = std::max(out.antisymmetry, (out.minus[i * n + j] + out.minus[j * n + i]).max_value());
        }
    }

    out.curvature.assign(n * n, FrameForm(order - 2));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            FrameForm R = ce_differential(out.minus[i * n + j], sc);
            for (int s = 0; s < n; ++s) R += out.minus[i * n + s] ^ out.minus[s * n + j];
            out.curvature[i * n + j] = R;
        }
    out.trace = FrameForm(order - 2);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out.trace += out.curvature[i * n + j] ^ out.curvature[j * n + i];

    // 8π²p₁ = Σ_{i<j} R^i_j ∧ R^i_j = −½ Σ_{i,j} R^i_j ∧ R^j_i
    out.p1_coefficient = -out.trace.coefficient(kE1234).value() / 16;
    out.off_component = out.trace.max_value(kE1234);
    const DilatonTerms d = dilaton_terms(f);
    out.closed_form = d.hessian2 + d.four_laplacian - 3.0 / 8.0 * frobenius_norm2(sc.A) * d.laplace_em2f;
    return out;
}

double instanton_lambda(const Eigen::Matrix3d& Lambda, const Eigen::Matrix3d& A) {
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(Lambda);
    const auto s = svd.singularValues();
    if (s[1] > 1e-12 * std::max(1.0, s[0])) throw std::invalid_argument("instanton: rank(Λ) must be at most 1");
    return (Lambda * A).norm();
}

double anomaly_residual(const ScalarField& field, const Eigen::Matrix3d& A, const Eigen::Matrix3d& Lambda,
                        double alpha_prime, std::span<const double> x) {
    const double lambda = instanton_lambda(Lambda, A);
    const DilatonTerms d = dilaton_terms(base_jet(field, x, 2));
    const double a2 = frobenius_norm2(A);
    return d.laplace_e2f + 2 * a2 +
           alpha_prime / 4 * (8 * d.hessian2 + 8 * d.four_laplacian - 3 * a2 * d.laplace_em2f + 4 * lambda * lambda);
}

double anomaly_residual_pipeline(const ScalarField& field, const Eigen::Matrix3d& A, const Eigen::Matrix3d& Lambda,
                                 double alpha_prime, std::span<const double> x) {
    const double lambda = instanton_lambda(Lambda, A);
    const StructureConstants sc = make_KA(A);
    const Jet f = base_jet(field, x, 2);
    const double dT = ce_differential(torsion_form(f, sc), sc).coefficient(kE1234).value();
    const double p1 = connection_and_p1(field, sc, x).p1_coefficient;
    // dT = (α'/4)·8π²(p₁(∇⁻) − p₁(D_Λ)) with 8π²p₁(D_Λ) = −4λ² e¹²³⁴
    return alpha_prime / 4 * (8 * p1 + 4 * lambda * lambda) - dT;
}

StromingerData strominger_data(const Eigen::Matrix3d& A, const Eigen::Matrix3d& Lambda) {
    StromingerData s;
    s.A = A;
    s.Lambda = Lambda;
    s.normA2 = frobenius_norm2(A);
    s.lambda = instanton_lambda(Lambda, A);
    if (s.normA2 <= 0 || s.lambda <= 0) throw std::invalid_argument("strominger_data: need A ≠ 0 and ΛA ≠ 0");
    s.alpha = std::sqrt(2 * s.normA2) / s.lambda;
    s.alpha_prime = -s.alpha * s.alpha;
    s.wp = weierstrass_params(3 * s.normA2 / (s.alpha * s.alpha));
    return s;
}

ScalarField weierstrass_dilaton(const StromingerData& data) {
    return ScalarField(4, [data](std::span<const Jet> v) {
        const Jet& t = v[0];
        const WpValue p = weierstrass_p(t.value(), data.wp);
        const double u2 = 6 * p.u * p.u - data.wp.g2 / 2, u3 = 12 * p.u * p.du;
        const Jet u = t.compose(p.u, p.du, u2, u3);
        return 0.5 * log(data.alpha * data.alpha * u);
    });
}

OdeSample dilaton_from_u(double t, double u, double du, const StromingerData& data) {
    if (!(u > 0)) throw DomainError("dilaton_from_u: u must be positive");
    OdeSample s;
    s.t = t;
    s.u = u;
    s.du = du;
    const double a2 = data.alpha * data.alpha;
    s.f = 0.5 * std::log(a2 * u);
    s.df = du / (2 * u);
    s.ode_residual = du * du - (4 * u * u * u - data.wp.g2 * u - data.wp.g3);
    const double e2f = std::exp(2 * s.f), em2f = std::exp(-2 * s.f);
    s.reduced_residual = 2 * s.df * e2f + 0.75 * a2 * data.normA2 * (-2 * s.df * em2f) - 2 * a2 * s.df * s.df * s.df;
    return s;
}

OdeSample dilaton_from_u(double t, const StromingerData& data) {
    const WpValue p = weierstrass_p(t, data.wp);
    return dilaton_from_u(t, p.u, p.du, data);
}

} // namespace carnot
