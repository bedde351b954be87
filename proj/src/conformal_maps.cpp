#include "carnot/conformal_maps.hpp"

#include <cmath>
#include <stdexcept>

namespace carnot {

namespace {

constexpr double kPoleTol = 1e-8;
constexpr double kConstraintTol = 1e-12;

template <class T>
std::vector<T> cayley_map(const HTypeAlgebra& alg, const std::vector<T>& v, bool inverse) {
    const int m = alg.m, k = alg.k;
    const T zero = v[0] * 0.0;
    const T& a = v[m + k];
    // Forward uses (1 - a) and +J(ξ₂); the inverse uses (1 + a') and -J(ξ₂').
    const T base = inverse ? 1.0 + a : 1.0 - a;
    T y2 = zero;
    for (int s = 0; s < k; ++s) y2 += v[m + s] * v[m + s];
    const T D = base * base + y2;
    std::vector<T> out(v.size(), zero);
    for (int i = 0; i < m; ++i) {
        T Jx = zero;
        for (int s = 0; s < k; ++s)
            for (int j = 0; j < m; ++j)
                if (alg.J[s](i, j) != 0.0) Jx += v[m + s] * v[j] * alg.J[s](i, j);
        // The inverse carries no factor 2 here; this is what makes it a two-sided inverse.
        out[i] = inverse ? (base * v[i] - Jx) / D : 2.0 * (base * v[i] + Jx) / D;
    }
    for (int s = 0; s < k; ++s) out[m + s] = 2.0 * v[m + s] / D;
    out[m + k] = inverse ? (-1.0 + a * a + y2) / D : (1.0 - a * a - y2) / D;
    return out;
}

std::vector<double> pack(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2, double a) {
    std::vector<double> v(x1.data(), x1.data() + x1.size());
    v.insert(v.end(), x2.data(), x2.data() + x2.size());
    v.push_back(a);
    return v;
}

void validate_ball(const HTypeAlgebra& alg, const BallPoint& p) {
    if (p.xi1.size() != alg.m || p.xi2.size() != alg.k) throw std::invalid_argument("BallPoint: dimension mismatch");
    const double r2 = p.xi1.squaredNorm() + p.xi2.squaredNorm() + p.a * p.a;
    if (p.boundary ? std::abs(r2 - 1) > kConstraintTol : r2 >= 1 + kConstraintTol)
        throw std::invalid_argument("BallPoint: norm constraint violated");
    const double pole = std::sqrt(p.xi1.squaredNorm() + p.xi2.squaredNorm() + (p.a - 1) * (p.a - 1));
    if (pole < kPoleTol) throw std::invalid_argument("BallPoint: too close to the pole (0,0,1)");
}

} // namespace

SiegelPoint cayley(const HTypeAlgebra& alg, const BallPoint& p) {
    validate_ball(alg, p);
    const auto out = cayley_map(alg, pack(p.xi1, p.xi2, p.a), false);
    SiegelPoint s;
    s.xi1 = Eigen::Map<const Eigen::VectorXd>(out.data(), alg.m);
    s.xi2 = Eigen::Map<const Eigen::VectorXd>(out.data() + alg.m, alg.k);
    s.a = out[alg.m + alg.k];
    s.boundary = p.boundary;
    return s;
}

BallPoint cayley_inv(const HTypeAlgebra& alg, const SiegelPoint& q) {
    if (q.xi1.size() != alg.m || q.xi2.size() != alg.k) throw std::invalid_argument("SiegelPoint: dimension mismatch");
    const double gap = q.a - 0.25 * q.xi1.squaredNorm();
    if (q.boundary ? std::abs(gap) > kConstraintTol * std::max(1.0, std::abs(q.a)) : gap <= -kConstraintTol)
        throw std::invalid_argument("SiegelPoint: defining inequality violated");
    if ((1 + q.a) * (1 + q.a) + q.xi2.squaredNorm() < kPoleTol * kPoleTol) throw std::invalid_argument("SiegelPoint: image of the pole");
    const auto out = cayley_map(alg, pack(q.xi1, q.xi2, q.a), true);
    BallPoint b;
    b.xi1 = Eigen::Map<const Eigen::VectorXd>(out.data(), alg.m);
    b.xi2 = Eigen::Map<const Eigen::VectorXd>(out.data() + alg.m, alg.k);
    b.a = out[alg.m + alg.k];
    b.boundary = q.boundary;
    return b;
}

JacobianCheck cayley_jacobian_check(const HTypeAlgebra& alg, const BallPoint& p) {
    validate_ball(alg, p);
    if (p.boundary) throw std::invalid_argument("cayley_jacobian_check: needs an interior point");
    const int n = alg.m + alg.k + 1;
    const auto vars = seed_variables(pack(p.xi1, p.xi2, p.a), 1);
    const auto out = cayley_map(alg, vars, false);
    Eigen::MatrixXd Jm(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) Jm(i, j) = out[i].d(j);
    const double D = (1 - p.a) * (1 - p.a) + p.xi2.squaredNorm();
    const double closed = std::pow(2.0, n) * std::pow(D, -(alg.m + 2.0 * alg.k + 2) / 2);
    const double num = Jm.determinant();
    return {closed, num, std::abs(num - closed) / std::abs(closed)};
}

GroupPoint boundary_cayley(const HTypeAlgebra& alg, const BallPoint& p) {
    if (!p.boundary) throw std::invalid_argument("boundary_cayley: needs a boundary point");
    const SiegelPoint s = cayley(alg, p);
    return {s.xi1, alg.bracket_scale * s.xi2};
}

namespace {

void require_quaternionic(const HTypeAlgebra& alg) {
    if (alg.k != 3 || alg.m % 4 != 0) throw std::invalid_argument("expected the quaternionic Heisenberg group");
}

int rank_of(const GroupPoint& g) { return static_cast<int>(g.x.size() / 4); }

template <class T>
Quat<T> block(const std::vector<T>& v, int alpha) {
    return {v[4 * alpha], v[4 * alpha + 1], v[4 * alpha + 2], v[4 * alpha + 3]};
}

// C⁻¹ on jet-valued group coordinates (q' blocks then ω).
template <class T>
std::pair<std::vector<Quat<T>>, Quat<T>> cayley_inverse_generic(const std::vector<T>& v, int n) {
    const T zero = v[0] * 0.0;
    T q2 = zero;
    for (int i = 0; i < 4 * n; ++i) q2 += v[i] * v[i];
    const Quat<T> p{q2, -v[4 * n], -v[4 * n + 1], -v[4 * n + 2]};
    const Quat<T> one{zero + 1.0, zero, zero, zero};
    const Quat<T> inv = inverse(one + p);
    std::vector<Quat<T>> q;
    for (int a = 0; a < n; ++a) q.push_back(scale(inv * block(v, a), 2.0));
    return {q, (one - p) * inv};
}

Quaternion value_quat(const Quat<Jet>& q) { return {q.w.value(), q.x.value(), q.y.value(), q.z.value()}; }
Quaternion deriv_quat(const Quat<Jet>& q, int i) { return {q.w.d(i), q.x.d(i), q.y.d(i), q.z.d(i)}; }

} // namespace

Quaternion siegel_p(const GroupPoint& g) { return {g.x.squaredNorm(), -g.y[0], -g.y[1], -g.y[2]}; }

QcSpherePoint qc_cayley_inverse(const GroupPoint& g) {
    const int n = rank_of(g);
    std::vector<double> v(g.x.data(), g.x.data() + g.x.size());
    v.insert(v.end(), g.y.data(), g.y.data() + 3);
    auto [q, p] = cayley_inverse_generic(v, n);
    return {q, p};
}

GroupPoint qc_cayley(int n, const QcSpherePoint& s) {
    const Quaternion onep = Quaternion{1, 0, 0, 0} + s.p;
    if (norm(onep) < kPoleTol) throw std::invalid_argument("qc_cayley: pole p = -1");
    const Quaternion inv = inverse(onep);
    GroupPoint g{Eigen::VectorXd(4 * n), Eigen::VectorXd(3)};
    for (int a = 0; a < n; ++a) {
        const Quaternion qa = inv * s.q[a];
        for (int r = 0; r < 4; ++r) g.x[4 * a + r] = qa[r];
    }
    const Quaternion pp = inv * (Quaternion{1, 0, 0, 0} - s.p);
    // ω' = |q'|² - p' on the Siegel boundary, so only the imaginary part survives.
    for (int r = 0; r < 3; ++r) g.y[r] = -pp[r + 1];
    return g;
}

GroupPoint inversion(const HTypeAlgebra& alg, const GroupPoint& g) {
    require_quaternionic(alg);
    const double N4 = std::pow(g.x.squaredNorm(), 2) + g.y.squaredNorm();
    if (N4 == 0.0) throw std::invalid_argument("inversion: identity has no image");
    const int n = rank_of(g);
    const Quaternion pinv = inverse(siegel_p(g));
    GroupPoint r{Eigen::VectorXd(4 * n), -g.y / N4};
    for (int a = 0; a < n; ++a) {
        const Quaternion qa{g.x[4 * a], g.x[4 * a + 1], g.x[4 * a + 2], g.x[4 * a + 3]};
        const Quaternion s = -(pinv * qa);
        for (int c = 0; c < 4; ++c) r.x[4 * a + c] = s[c];
    }
    return r;
}

GroupPoint inversion_via_cayley(const HTypeAlgebra& alg, const GroupPoint& g) {
    require_quaternionic(alg);
    if (g.x.squaredNorm() + g.y.squaredNorm() == 0.0) throw std::invalid_argument("inversion: identity has no image");
    const int n = rank_of(g);
    const QcSpherePoint s = qc_cayley_inverse(g);
    // C₂(q,p) = (-(1-p)⁻¹q, (1-p)⁻¹(1+p)), the Cayley transform from the other pole.
    const Quaternion one{1, 0, 0, 0};
    const Quaternion inv = inverse(one - s.p);
    GroupPoint r{Eigen::VectorXd(4 * n), Eigen::VectorXd(3)};
    for (int a = 0; a < n; ++a) {
        const Quaternion qa = -(inv * s.q[a]);
        for (int c = 0; c < 4; ++c) r.x[4 * a + c] = qa[c];
    }
    const Quaternion ps = inv * (one + s.p);
    for (int c = 0; c < 3; ++c) r.y[c] = -ps[c + 1];
    return r;
}

QcFactorCheck qc_conformal_factor_check(const HTypeAlgebra& alg, const GroupPoint& g) {
    require_quaternionic(alg);
    const int n = rank_of(g);
    const int N = 4 * n + 3;
    std::vector<double> pt(g.x.data(), g.x.data() + g.x.size());
    pt.insert(pt.end(), g.y.data(), g.y.data() + 3);
    const auto vars = seed_variables(pt, 1);
    auto [qj, pj] = cayley_inverse_generic(vars, n);

    const Quaternion one{1, 0, 0, 0};
    const Quaternion pprime = siegel_p(g);
    if (norm(one + pprime) < kPoleTol) throw std::invalid_argument("qc_conformal_factor_check: pole");
    const double factor = 8.0 / (one + pprime).norm2();
    const Quaternion p = value_quat(pj);
    const Quaternion lambda = scale(inverse(one + p), norm(one + p));

    double worst = 0;
    for (int i = 0; i < N; ++i) {
        // η̃(v) = Σ dq·q̄ - q·dq̄ over all quaternion coordinates, p included.
        Quaternion eta{0, 0, 0, 0};
        for (int a = 0; a < n; ++a) {
            const Quaternion qv = value_quat(qj[a]), dq = deriv_quat(qj[a], i);
            eta += dq * qv.conj() - qv * dq.conj();
        }
        const Quaternion dp = deriv_quat(pj, i);
        eta += dp * p.conj() - p * dp.conj();
        const Quaternion lhs = lambda * eta * lambda.conj();

        // Θ̃ = ½(dω - q'·dq̄' + dq'·q̄').
        Quaternion theta{0, 0, 0, 0};
        if (i >= 4 * n) theta[i - 4 * n + 1] = 1.0;
        else {
            const int a = i / 4;
            const Quaternion qa{g.x[4 * a], g.x[4 * a + 1], g.x[4 * a + 2], g.x[4 * a + 3]};
            Quaternion e{0, 0, 0, 0};
            e[i % 4] = 1.0;
            theta = e * qa.conj() - qa * e.conj();
        }
        theta = scale(theta, 0.5 * factor);
        for (int c = 0; c < 4; ++c) worst = std::max(worst, std::abs(lhs[c] - theta[c]));
    }
    return {factor, worst};
}

namespace {

template <class T>
struct Cx {
    T re, im;
};

template <class T> Cx<T> operator+(const Cx<T>& a, const Cx<T>& b) { return {a.re + b.re, a.im + b.im}; }
template <class T> Cx<T> operator-(const Cx<T>& a, const Cx<T>& b) { return {a.re - b.re, a.im - b.im}; }
template <class T> Cx<T> operator*(const Cx<T>& a, const Cx<T>& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
template <class T> Cx<T> operator/(const Cx<T>& a, const Cx<T>& b) {
    const T d = b.re * b.re + b.im * b.im;
    return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
}

// Group coordinates (x_1..x_n, y_1..y_n, t) of C(Z,W); ambient ordering is
// (Re Z_1, Im Z_1, ..., Re Z_n, Im Z_n, Re W, Im W).
template <class T>
std::vector<T> cr_map(const std::vector<T>& v, int n) {
    const T zero = v[0] * 0.0;
    const Cx<T> one{zero + 1.0, zero}, i{zero, zero + 1.0};
    const Cx<T> W{v[2 * n], v[2 * n + 1]};
    const Cx<T> den = one - W;
    std::vector<T> out(2 * n + 1, zero);
    for (int j = 0; j < n; ++j) {
        const Cx<T> z = i * Cx<T>{v[2 * j], v[2 * j + 1]} / den;
        out[j] = z.re;
        out[n + j] = z.im;
    }
    out[2 * n] = (i * (one + W) / den).re;
    return out;
}

} // namespace

GroupPoint cr_cayley(const std::vector<std::complex<double>>& Z, std::complex<double> W) {
    const int n = static_cast<int>(Z.size());
    if (std::abs(1.0 - W) < kPoleTol) throw std::invalid_argument("cr_cayley: pole W = 1");
    std::vector<double> v;
    for (const auto& z : Z) v.push_back(z.real()), v.push_back(z.imag());
    v.push_back(W.real());
    v.push_back(W.imag());
    const auto g = cr_map(v, n);
    return {Eigen::Map<const Eigen::VectorXd>(g.data(), 2 * n), Eigen::VectorXd::Constant(1, g[2 * n])};
}

std::pair<std::vector<std::complex<double>>, std::complex<double>> cr_cayley_inverse(const GroupPoint& g) {
    const int n = static_cast<int>(g.x.size() / 2);
    const std::complex<double> I(0, 1);
    const std::complex<double> w(g.y[0], g.x.squaredNorm());
    std::vector<std::complex<double>> Z(n);
    for (int j = 0; j < n; ++j) Z[j] = 2.0 * std::complex<double>(g.x[j], g.x[n + j]) / (I + w);
    return {Z, (w - I) / (w + I)};
}

CrFactorCheck cr_conformal_factor_check(const std::vector<std::complex<double>>& Z, std::complex<double> W) {
    const int n = static_cast<int>(Z.size());
    const int N = 2 * n + 2;
    std::vector<double> P;
    for (const auto& z : Z) P.push_back(z.real()), P.push_back(z.imag());
    P.push_back(W.real());
    P.push_back(W.imag());
    double r2 = 0;
    for (double c : P) r2 += c * c;
    if (std::abs(r2 - 1) > kConstraintTol) throw std::invalid_argument("cr_conformal_factor_check: point not on the sphere");
    if (std::abs(1.0 - W) < kPoleTol) throw std::invalid_argument("cr_conformal_factor_check: pole W = 1");

    const auto g = cr_map(seed_variables(P, 1), n);
    const double factor = 1.0 / std::norm(1.0 - W);
    // Pullback of Θ̃ = ½dt + Σ(x_j dy_j - y_j dx_j) as an ambient covector.
    Eigen::VectorXd pull(N), eta(N);
    for (int i = 0; i < N; ++i) {
        double s = 0.5 * g[2 * n].d(i);
        for (int j = 0; j < n; ++j) s += g[j].value() * g[n + j].d(i) - g[n + j].value() * g[j].d(i);
        pull[i] = s;
    }
    // η̃ = Im(W̄dW + Z̄·dZ) = Σ (a db - b da) over each complex coordinate a + ib.
    for (int c = 0; c < N / 2; ++c) {
        eta[2 * c] = -P[2 * c + 1];
        eta[2 * c + 1] = P[2 * c];
    }
    const Eigen::Map<const Eigen::VectorXd> nu(P.data(), N);
    const Eigen::VectorXd diff = pull - factor * eta;
    const Eigen::VectorXd tangential = diff - diff.dot(nu) * nu;
    return {factor, tangential.cwiseAbs().maxCoeff()};
}

std::vector<Jet> qc_cayley_inverse_coords(std::span<const Jet> g, int n) {
    if (static_cast<int>(g.size()) != 4 * n + 3) throw std::invalid_argument("qc_cayley_inverse_coords: dimension mismatch");
    auto [q, p] = cayley_inverse_generic(std::vector<Jet>(g.begin(), g.end()), n);
    std::vector<Jet> out;
    for (const auto& qa : q)
        for (int r = 0; r < 4; ++r) out.push_back(qa[r]);
    for (int r = 0; r < 4; ++r) out.push_back(p[r]);
    return out;
}

std::vector<Jet> cr_cayley_inverse_coords(std::span<const Jet> g, int n) {
    if (static_cast<int>(g.size()) != 2 * n + 1) throw std::invalid_argument("cr_cayley_inverse_coords: dimension mismatch");
    const Jet zero = g[0] * 0.0;
    Jet r2 = zero;
    for (int j = 0; j < 2 * n; ++j) r2 += g[j] * g[j];
    const Cx<Jet> I{zero, zero + 1.0};
    const Cx<Jet> w{g[2 * n], r2};
    const Cx<Jet> den = I + w;
    std::vector<Jet> out;
    for (int j = 0; j < n; ++j) {
        const Cx<Jet> Z = Cx<Jet>{2.0 * g[j], 2.0 * g[n + j]} / den;
        out.push_back(Z.re);
        out.push_back(Z.im);
    }
    const Cx<Jet> W = (w - I) / den;
    out.push_back(W.re);
    out.push_back(W.im);
    return out;
}

double qc_contact_factor(const GroupPoint& g) {
    const Quaternion one{1, 0, 0, 0};
    return 8.0 / (one + siegel_p(g)).norm2();
}

double cr_contact_factor(const GroupPoint& g) {
    const double a = 1 + g.x.squaredNorm();
    return 4.0 / (a * a + g.y[0] * g.y[0]);
}

} // namespace carnot
