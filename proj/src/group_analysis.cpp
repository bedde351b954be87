#include "carnot/group_analysis.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace carnot {

LeftInvariantFrame frame(const HTypeAlgebra& alg) {
    LeftInvariantFrame fr;
    fr.m = alg.m;
    fr.k = alg.k;
    // d/dt of the y-part of g∘(t e_a, 0) is (c_B/2) <J_s x, e_a>.
    for (int a = 0; a < alg.m; ++a) {
        Eigen::MatrixXd C(alg.k, alg.m);
        for (int s = 0; s < alg.k; ++s) C.row(s) = 0.5 * alg.bracket_scale * alg.J[s].row(a);
        fr.C.push_back(C);
    }
    return fr;
}

Eigen::VectorXd LeftInvariantFrame::field(int a, const GroupPoint& p) const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(m + k);
    v[a] = 1.0;
    v.tail(k) = C[a] * p.x;
    return v;
}

Eigen::VectorXd LeftInvariantFrame::commutator(int a, int b) const {
    return C[b].col(a) - C[a].col(b);
}

double frame_derivative(const LeftInvariantFrame& fr, const Jet& j, const GroupPoint& p, int a) {
    const Eigen::VectorXd v = fr.field(a, p);
    double s = 0;
    for (int i = 0; i < fr.m + fr.k; ++i) s += v[i] * j.d(i);
    return s;
}

double frame_second_derivative(const LeftInvariantFrame& fr, const Jet& j, const GroupPoint& p, int a, int b) {
    const Eigen::VectorXd va = fr.field(a, p), vb = fr.field(b, p);
    const int n = fr.m + fr.k;
    double s = 0;
    for (int i = 0; i < n; ++i)
        for (int l = 0; l < n; ++l) s += va[i] * vb[l] * j.d(i, l);
    // X_a acting on the coefficients of X_b.
    for (int t = 0; t < fr.k; ++t) s += fr.C[b](t, a) * j.d(fr.m + t);
    return s;
}

double horizontal_gradient_norm2(const LeftInvariantFrame& fr, const Jet& j, const GroupPoint& p) {
    double s = 0;
    for (int a = 0; a < fr.m; ++a) {
        const double d = frame_derivative(fr, j, p, a);
        s += d * d;
    }
    return s;
}

double sub_laplacian(const LeftInvariantFrame& fr, const Jet& j, const GroupPoint& p, LaplacianSign sign) {
    double s = 0;
    for (int a = 0; a < fr.m; ++a) s += frame_second_derivative(fr, j, p, a, a);
    return sign == LaplacianSign::analyst ? s : -s;
}

double sub_laplacian(const HTypeAlgebra& alg, const ScalarField& f, const GroupPoint& p, LaplacianSign sign) {
    const Eigen::VectorXd c = p.flat();
    const Jet j = f.jet({c.data(), static_cast<std::size_t>(c.size())}, 2);
    return sub_laplacian(frame(alg), j, p, sign);
}

namespace {

Jet x_norm2(const HTypeAlgebra& alg, std::span<const Jet> v) {
    Jet s = v[0] * v[0];
    for (int a = 1; a < alg.m; ++a) s += v[a] * v[a];
    return s;
}

Jet y_norm2_htype(const HTypeAlgebra& alg, std::span<const Jet> v) {
    Jet s = v[alg.m] * v[alg.m];
    for (int t = 1; t < alg.k; ++t) s += v[alg.m + t] * v[alg.m + t];
    return s / (alg.bracket_scale * alg.bracket_scale);
}

std::span<const double> as_span(const Eigen::VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

} // namespace

ScalarField gauge_power_field(const HTypeAlgebra& alg, double power) {
    return ScalarField(alg.m + alg.k, [alg, power](std::span<const Jet> v) {
        const Jet x2 = x_norm2(alg, v);
        return pow(x2 * x2 + 16.0 * y_norm2_htype(alg, v), power / 4.0);
    });
}

ScalarField gauge_field(const HTypeAlgebra& alg) { return gauge_power_field(alg, 1.0); }

double fundamental_residual(const HTypeAlgebra& alg, const GroupPoint& p) {
    if (gauge(alg, p) == 0.0) throw std::invalid_argument("fundamental_residual: point at the origin");
    return sub_laplacian(alg, gauge_power_field(alg, 2.0 - alg.Q()), p);
}

double normalized_fundamental_residual(const HTypeAlgebra& alg, const GroupPoint& p) {
    return std::abs(fundamental_residual(alg, p)) * std::pow(gauge(alg, p), alg.Q() + 2);
}

YamabeResidual yamabe_residual(const HTypeAlgebra& alg, const ScalarField& u, const GroupPoint& p, double c) {
    const Eigen::VectorXd flat = p.flat();
    const Jet j = u.jet(as_span(flat), 2);
    if (!(j.value() > 0)) throw DomainError("yamabe_residual: u must be positive");
    const double e = alg.homogeneous().sobolev_exponent - 1.0;
    const double lap = sub_laplacian(frame(alg), j, p);
    const double up = std::pow(j.value(), e);
    return {lap + c * up, -lap / up};
}

double conformal_factor_h(const HTypeAlgebra& alg, double c0, double sigma, const GroupPoint& g0, const GroupPoint& p) {
    const GroupPoint g = group_multiply(alg, g0, p);
    const double x2 = g.x.squaredNorm();
    const double y2 = g.y.squaredNorm() / (alg.bracket_scale * alg.bracket_scale);
    return c0 * ((sigma + x2) * (sigma + x2) + 16.0 * y2);
}

ScalarField conformal_factor_h_field(const HTypeAlgebra& alg, double c0, double sigma, const GroupPoint& g0) {
    return ScalarField(alg.m + alg.k, [alg, c0, sigma, g0](std::span<const Jet> v) {
        const auto w = translate_coordinates(alg, g0, v);
        const Jet s = x_norm2(alg, w) + sigma;
        return c0 * (s * s + 16.0 * y_norm2_htype(alg, w));
    });
}

ScalarField conformal_factor_phi_field(const HTypeAlgebra& alg, double c0, double sigma, const GroupPoint& g0) {
    const ScalarField h = conformal_factor_h_field(alg, c0, sigma, g0);
    const double p = -(alg.Q() - 2) / 4.0;
    return ScalarField(h.dim(), [h, p](std::span<const Jet> v) { return pow(2.0 * h(v), p); });
}

double conformal_scalar_ratio(const HTypeAlgebra& alg, double c0, double sigma, const GroupPoint& g0, const GroupPoint& p) {
    const double Q = alg.Q();
    const auto r = yamabe_residual(alg, conformal_factor_phi_field(alg, c0, sigma, g0), p, 0.0);
    return 4.0 * (Q + 2) / (Q - 2) * r.ratio;
}

double best_constant(int m, int k) {
    const double Q = m + 2.0 * k;
    if (!(Q > 2)) throw std::invalid_argument("best_constant: Q must exceed 2");
    const double pre = 1.0 / std::sqrt(m * (m + 2.0 * (k - 1)));
    const double g = std::tgamma(m + k) / std::tgamma((m + k) / 2.0);
    return pre * std::pow(4.0, k / Q) * std::pow(std::numbers::pi, -(m + k) / (2 * Q)) * std::pow(g, 1.0 / Q);
}

double extremal_amplitude(int m, int k) {
    const double Q = m + 2.0 * k;
    const double g = std::tgamma(m + k) / std::tgamma((m + k) / 2.0);
    const double base = std::pow(4.0, k) * std::pow(std::numbers::pi, -(m + k) / (2 * Q)) * g;
    return std::pow(base, (m + 2.0 * (k - 1)) / (2 * Q));
}

ExtremalFamily extremal_family(const HTypeAlgebra& alg, double eps, GroupPoint center) {
    if (center.x.size() == 0) center = group_identity(alg);
    return {alg, extremal_amplitude(alg.m, alg.k), eps, std::move(center)};
}

double ExtremalFamily::value(const GroupPoint& g) const {
    const GroupPoint d = group_multiply(alg, group_inverse(alg, center), g);
    const double x2 = d.x.squaredNorm();
    const double y2 = d.y.squaredNorm() / (alg.bracket_scale * alg.bracket_scale);
    const double s = eps * eps + x2;
    return gamma * std::pow(s * s + 16.0 * y2, -(alg.Q() - 2) / 4.0);
}

ScalarField ExtremalFamily::field() const {
    const HTypeAlgebra a = alg;
    const GroupPoint inv = group_inverse(alg, center);
    const double gam = gamma, e2 = eps * eps, p = -(alg.Q() - 2) / 4.0;
    return ScalarField(alg.m + alg.k, [a, inv, gam, e2, p](std::span<const Jet> v) {
        const auto w = translate_coordinates(a, inv, v);
        const Jet s = x_norm2(a, w) + e2;
        return gam * pow(s * s + 16.0 * y_norm2_htype(a, w), p);
    });
}

ScalarField scaled_field(const HTypeAlgebra& alg, const ScalarField& u, double lambda) {
    const double amp = std::pow(lambda, (alg.Q() - 2) / 2.0);
    const int m = alg.m;
    return ScalarField(u.dim(), [u, lambda, amp, m](std::span<const Jet> v) {
        std::vector<Jet> w(v.begin(), v.end());
        for (std::size_t i = 0; i < w.size(); ++i) w[i] *= (static_cast<int>(i) < m ? lambda : lambda * lambda);
        return amp * u(w);
    });
}

ScalarField translated_field(const HTypeAlgebra& alg, const ScalarField& u, const GroupPoint& h) {
    return ScalarField(u.dim(), [alg, u, h](std::span<const Jet> v) { return u(translate_coordinates(alg, h, v)); });
}

GroupPoint random_group_point(const HTypeAlgebra& alg, std::mt19937_64& rng, double gmin, double gmax) {
    std::normal_distribution<double> N(0.0, 1.0);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    GroupPoint p{Eigen::VectorXd(alg.m), Eigen::VectorXd(alg.k)};
    for (int a = 0; a < alg.m; ++a) p.x[a] = N(rng);
    for (int s = 0; s < alg.k; ++s) p.y[s] = alg.bracket_scale * N(rng);
    const double target = gmin * std::pow(gmax / gmin, U(rng));
    return dilate(alg, target / gauge(alg, p), p);
}

GvParams gv_params(int m, int k) { return {k - 1.0, m / 2.0}; }

namespace {
void require_quadrant(double x, double y) {
    if (!(x > 0) || !(y > 0)) throw std::invalid_argument("gv_reduction: point must lie in the open quadrant");
}
} // namespace

GvResiduals gv_reduction(const GvParams& gv, const ScalarField& phi, double x, double y) {
    require_quadrant(x, y);
    const double p[2] = {x, y};
    const Jet j = phi.jet(p, 2);
    const double f = j.value(), fx = j.d(0), fy = j.d(1);
    const double fxx = j.d(0, 0), fxy = j.d(0, 1), fyy = j.d(1, 1);
    const double lap = fxx + fyy, grad2 = fx * fx + fy * fy, n = gv.n();
    GvResiduals r;
    r.yfinal = lap - ((n + 2) / 2 * grad2 / f - gv.a / x * fx - gv.b / y * fy + n / (2 * y));
    r.hessian = 2 * (fxx * fxx + 2 * fxy * fxy + fyy * fyy) - lap * lap;
    r.laplace = lap - grad2 / f;
    r.mixed = fx / x - fy / y + n / (2 * gv.b * y);
    return r;
}

ScalarField gv_quadratic_family(const GvParams& gv, double A) {
    const double beta = gv.n() / (4 * gv.b * A);
    return ScalarField(2, [A, beta](std::span<const Jet> v) {
        return (A * A) * (v[0] * v[0] + v[1] * v[1]) + (2 * A * beta) * v[1] + beta * beta;
    });
}

GvDivergence gv_divergence_identity(const GvParams& gv, const ScalarField& phi, double x, double y) {
    require_quadrant(x, y);
    const double p[2] = {x, y};
    const auto vars = seed_variables(p, 1);
    const Jet j3 = phi.jet(p, 3);
    const Jet f = j3.truncated(1);
    const Jet fx = j3.derivative(0).truncated(1), fy = j3.derivative(1).truncated(1);
    const Jet fxx = j3.derivative(0).derivative(0), fxy = j3.derivative(0).derivative(1),
              fyy = j3.derivative(1).derivative(1);
    const double n = gv.n(), delta = n / (2 * gv.b);
    const Jet grad2 = fx * fx + fy * fy;
    const Jet F = 2.0 * (fx * fxx + fy * fxy) - (n / gv.b) * fxy - fx * grad2 / f;
    const Jet G = -2.0 * (fx * fxy + fy * fyy) + (n / gv.b) * fyy + (fy - delta) * grad2 / f;
    const Jet h = pow(vars[0], gv.a) * pow(vars[1], gv.b) * pow(f, -(n + 1));
    const Jet hF = h * F, hG = h * G;

    const double lap = fxx.value() + fyy.value(), g2 = grad2.value();
    const double hess = 2 * (square(fxx.value()) + 2 * square(fxy.value()) + square(fyy.value())) - lap * lap;
    const double lapd = lap - g2 / f.value();
    const double mixed = fx.value() / x - (fy.value() / y - n / (2 * gv.b * y));
    const double rhs = h.value() * (hess + (n + 2) / n * lapd * lapd + 2 * gv.a * gv.b / n * mixed * mixed);
    return {hF.d(0) - hG.d(1), rhs};
}

} // namespace carnot
