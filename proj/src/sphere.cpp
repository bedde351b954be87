#include "carnot/sphere.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/random/sobol.hpp>
#include <cmath>
#include <future>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "carnot/conformal_maps.hpp"
#include "carnot/exterior.hpp"
#include "carnot/group_analysis.hpp"
#include "carnot/quaternion.hpp"

namespace carnot {

namespace {

constexpr double kSphereTol = 1e-12;

Quat<Jet> block_of(std::span<const Jet> x, int a) { return {x[4 * a], x[4 * a + 1], x[4 * a + 2], x[4 * a + 3]}; }

Quat<Jet> unit_quat(const Jet& zero, int r) {
    Quat<Jet> e{zero, zero, zero, zero};
    e[r] = zero + 1.0;
    return e;
}

// 1-form coefficients and their exterior derivative at a point.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> covector_with_d(const std::vector<ScalarField>& coeff, std::span<const double> p) {
    const int d = static_cast<int>(coeff.size());
    Eigen::VectorXd v(d);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        const Jet j = coeff[i].jet(p, 1);
        v[i] = j.value();
        // d(c_i dx_i) = Σ_j ∂_j c_i dx_j ∧ dx_i, so M(j, i) += ∂_j c_i and M(i, j) -= ∂_j c_i.
        for (int jj = 0; jj < d; ++jj) {
            M(jj, i) += j.d(jj);
            M(i, jj) -= j.d(jj);
        }
    }
    return {v, M};
}

// Θ̃ on the group in explicit coordinates: ½dt + Σ(x dy - y dx) or ½(dω - q·dq̄ + dq·q̄).
std::vector<std::vector<ScalarField>> group_contact_coefficients(SphereFamily fam, int n) {
    std::vector<std::vector<ScalarField>> out;
    if (fam == SphereFamily::cr) {
        const int d = 2 * n + 1;
        std::vector<ScalarField> c;
        for (int i = 0; i < d; ++i)
            c.emplace_back(d, [i, n](std::span<const Jet> x) {
                if (i == 2 * n) return x[0] * 0.0 + 0.5;
                return i < n ? -1.0 * x[n + i] : x[i - n];
            });
        out.push_back(std::move(c));
        return out;
    }
    const int d = 4 * n + 3;
    for (int s = 0; s < 3; ++s) {
        std::vector<ScalarField> c;
        for (int i = 0; i < d; ++i)
            c.emplace_back(d, [i, s, n](std::span<const Jet> x) {
                const Jet zero = x[0] * 0.0;
                if (i >= 4 * n) return i - 4 * n == s ? zero + 0.5 : zero;
                const Quat<Jet> q = block_of(x, i / 4), e = unit_quat(zero, i % 4);
                return 0.5 * (e * q.conj() - q * e.conj())[s + 1];
            });
        out.push_back(std::move(c));
    }
    return out;
}

double gauss_nodes_check(int p) {
    if (p < 2 || p % 2) throw std::invalid_argument("cayley_grid: per_axis must be even and at least 2");
    return 0;
}

// Golub-Welsch nodes and weights on (-1, 1).
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int p) {
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(p, p);
    for (int i = 1; i < p; ++i) T(i, i - 1) = T(i - 1, i) = i / std::sqrt(4.0 * i * i - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    std::vector<double> x(p), w(p);
    for (int i = 0; i < p; ++i) {
        x[i] = es.eigenvalues()[i];
        w[i] = 2 * es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
    }
    return {x, w};
}

} // namespace

std::string to_string(SphereFamily f) { return f == SphereFamily::cr ? "cr" : "qc"; }

double unit_sphere_area(int d) { return 2 * std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0); }

double contact_volume(const std::vector<Eigen::VectorXd>& eta, const std::vector<Eigen::MatrixXd>& d_eta, int horizontal) {
    const int d = static_cast<int>(eta.at(0).size());
    const int k = static_cast<int>(eta.size());
    Form<double> top = Form<double>::scalar(d, 1.0);
    for (const auto& e : eta) top = top ^ one_form(e);
    if (k == 1) {
        const Form<double> de = two_form(d_eta[0]);
        for (int i = 0; i < horizontal / 2; ++i) top = top ^ de;
    } else {
        Form<double> Omega(d);
        for (const auto& M : d_eta) {
            Eigen::MatrixXd w = 0.5 * M;
            w.rightCols(d - horizontal).setZero();
            w.bottomRows(d - horizontal).setZero();
            const Form<double> om = two_form(w);
            Omega += om ^ om;
        }
        for (int i = 0; i < horizontal / 4; ++i) top = top ^ Omega;
    }
    const std::uint32_t full = d == 32 ? ~0u : (1u << d) - 1;
    const double* c = top.find(full);
    return c ? std::abs(*c) : 0.0;
}

SphereModel::SphereModel(SphereFamily family, int n) : family_(family), n_(n) {
    if (n < 1 || n > 2) throw std::invalid_argument("SphereModel: n must be 1 or 2");
    if (family == SphereFamily::cr) {
        N_ = 2 * n + 2;
        k_ = 1;
        Eigen::MatrixXd I = Eigen::MatrixXd::Zero(N_, N_);
        for (int c = 0; c < N_ / 2; ++c) {
            I(2 * c, 2 * c + 1) = -1;
            I(2 * c + 1, 2 * c) = 1;
        }
        I_.push_back(I);
        // η̃ = Im(Σ z̄ dz) = Σ (a db - b da).
        std::vector<ScalarField> c;
        for (int i = 0; i < N_; ++i)
            c.emplace_back(N_, [i](std::span<const Jet> x) { return i % 2 == 0 ? -1.0 * x[i + 1] : x[i - 1]; });
        coeff_.push_back(std::move(c));
    } else {
        N_ = 4 * n + 4;
        k_ = 3;
        for (int s = 0; s < 3; ++s) {
            Eigen::MatrixXd I = Eigen::MatrixXd::Zero(N_, N_);
            const Quaternion e = imaginary_units()[s];
            for (int b = 0; b < N_ / 4; ++b)
                for (int r = 0; r < 4; ++r) {
                    Quaternion u{0, 0, 0, 0};
                    u[r] = 1;
                    const Quaternion img = e * u;
                    for (int c = 0; c < 4; ++c) I(4 * b + c, 4 * b + r) = img[c];
                }
            I_.push_back(I);
            // η̃ = Σ dq·q̄ - q·dq̄ over all quaternion coordinates, p included.
            std::vector<ScalarField> c;
            for (int i = 0; i < N_; ++i)
                c.emplace_back(N_, [i, s](std::span<const Jet> x) {
                    const Jet zero = x[0] * 0.0;
                    const Quat<Jet> q = block_of(x, i / 4), u = unit_quat(zero, i % 4);
                    return (u * q.conj() - q * u.conj())[s + 1];
                });
            coeff_.push_back(std::move(c));
        }
    }

    // Metric scale: read off at a reference point, then confirmed at seeded points.
    Eigen::VectorXd P0 = Eigen::VectorXd::Zero(N_);
    P0[N_ - 1] = 1;
    metric_scale_ = horizontal_metric(0, P0)(0, 0);
    std::mt19937_64 rng(0x5eed);
    for (int t = 0; t < 4; ++t) {
        const StructureCheck c = check(t == 0 ? P0 : random_point(rng));
        if (c.metric_spread > 1e-12 || c.annihilation > 1e-12 || c.square > 1e-10 || c.invariance > 1e-10 || c.reeb > 1e-10)
            throw std::logic_error("SphereModel: structure check failed for " + label());
    }

    // Volume density on an orthonormal tangent basis ordered (H, vertical).
    Eigen::MatrixXd B(N_, N_ - 1);
    B << horizontal_basis(P0), vertical_basis(P0);
    std::vector<Eigen::VectorXd> eta_r;
    std::vector<Eigen::MatrixXd> d_r;
    for (int s = 0; s < k_; ++s) {
        eta_r.push_back(B.transpose() * eta(s, P0));
        d_r.push_back(B.transpose() * d_eta(s, P0) * B);
    }
    volume_density_ = contact_volume(eta_r, d_r, m());

    // Vol_Θ̃ on the group at the identity (left-invariant, so constant).
    const auto gc = group_contact_coefficients(family_, n_);
    const std::vector<double> origin(N_ - 1, 0.0);
    eta_r.clear();
    d_r.clear();
    for (const auto& c : gc) {
        auto [v, M] = covector_with_d(c, origin);
        eta_r.push_back(v);
        d_r.push_back(M);
    }
    group_density_ = contact_volume(eta_r, d_r, m());

    if (family_ == SphereFamily::qc) {
        scalar_ = 8.0 * n_ * (n_ + 2);
    } else {
        // S̃ = a(-Δ_Θ̃ φ)/φ^{2*-1} with η̃ = φ^{4/(Q-2)} Θ̃; constant, read at the identity.
        const HTypeAlgebra alg = group();
        const double Qd = Q(), e = (Qd - 2) / 4;
        const ScalarField phi(N_ - 1, [n, e](std::span<const Jet> x) {
            Jet r2 = x[0] * x[0];
            for (int i = 1; i < 2 * n; ++i) r2 += x[i] * x[i];
            const Jet a = 1.0 + r2;
            return pow(4.0 / (a * a + x[2 * n] * x[2 * n]), e);
        });
        const GroupPoint o = group_identity(alg);
        const double a = 4 * (Qd + 2) / (Qd - 2);
        scalar_ = -a * sub_laplacian(alg, phi, o) / std::pow(phi.value(std::vector<double>(N_ - 1, 0.0)), (Qd + 2) / (Qd - 2));
    }
}

std::string SphereModel::label() const {
    return family_ == SphereFamily::cr ? "CR S^" + std::to_string(2 * n_ + 1) : "qc S^" + std::to_string(4 * n_ + 3);
}

void SphereModel::require_on_sphere(const Eigen::VectorXd& P) const {
    if (P.size() != N_) throw std::invalid_argument("SphereModel: dimension mismatch");
    if (std::abs(P.norm() - 1) > kSphereTol) throw std::invalid_argument("SphereModel: point not on the unit sphere");
}

Eigen::VectorXd SphereModel::eta(int s, const Eigen::VectorXd& P) const {
    Eigen::VectorXd v(N_);
    for (int i = 0; i < N_; ++i) v[i] = coeff_[s][i].value(std::span<const double>(P.data(), N_));
    return v;
}

Eigen::MatrixXd SphereModel::d_eta(int s, const Eigen::VectorXd& P) const {
    return covector_with_d(coeff_[s], std::span<const double>(P.data(), N_)).second;
}

Eigen::MatrixXd SphereModel::vertical_basis(const Eigen::VectorXd& P) const {
    Eigen::MatrixXd V(N_, k_);
    for (int s = 0; s < k_; ++s) V.col(s) = I_[s] * P;
    return V;
}

Eigen::MatrixXd SphereModel::horizontal_basis(const Eigen::VectorXd& P) const {
    require_on_sphere(P);
    Eigen::MatrixXd U(N_, k_ + 1);
    U << P, vertical_basis(P);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(U);
    const Eigen::MatrixXd Qm = qr.householderQ();
    return Qm.rightCols(m());
}

Eigen::MatrixXd SphereModel::horizontal_metric(int s, const Eigen::VectorXd& P) const {
    const Eigen::MatrixXd B = horizontal_basis(P);
    return 0.5 * B.transpose() * d_eta(s, P) * I_[s] * B;
}

Eigen::MatrixXd SphereModel::reeb(const Eigen::VectorXd& P, double* residual) const {
    const Eigen::MatrixXd B = horizontal_basis(P);
    const int rows = 1 + k_ + k_ * m();
    Eigen::MatrixXd A(rows, N_);
    A.row(0) = P.transpose();
    for (int s = 0; s < k_; ++s) A.row(1 + s) = eta(s, P).transpose();
    for (int s = 0; s < k_; ++s) {
        const Eigen::MatrixXd MB = d_eta(s, P) * B;
        for (int a = 0; a < m(); ++a) A.row(1 + k_ + s * m() + a) = MB.col(a).transpose();
    }
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(rows, k_);
    for (int t = 0; t < k_; ++t) rhs(1 + t, t) = 1;
    const Eigen::MatrixXd xi = A.colPivHouseholderQr().solve(rhs);
    if (residual) *residual = (A * xi - rhs).cwiseAbs().maxCoeff();
    return xi;
}

StructureCheck SphereModel::check(const Eigen::VectorXd& P) const {
    StructureCheck c;
    const Eigen::MatrixXd B = horizontal_basis(P);
    Eigen::MatrixXd U(N_, k_ + 1);
    U << P, vertical_basis(P);
    const double scale = horizontal_metric(0, P)(0, 0);
    for (int s = 0; s < k_; ++s) {
        c.annihilation = std::max(c.annihilation, (eta(s, P).transpose() * B).cwiseAbs().maxCoeff());
        const Eigen::MatrixXd IB = I_[s] * B;
        c.invariance = std::max(c.invariance, (U.transpose() * IB).cwiseAbs().maxCoeff());
        c.square = std::max(c.square, (I_[s] * IB + B).cwiseAbs().maxCoeff());
        const Eigen::MatrixXd G = horizontal_metric(s, P);
        const double ref = metric_scale_ != 0 ? metric_scale_ : scale;
        c.metric_spread = std::max(c.metric_spread, (G - ref * Eigen::MatrixXd::Identity(m(), m())).cwiseAbs().maxCoeff());
    }
    reeb(P, &c.reeb);
    return c;
}

double SphereModel::volume() const { return volume_density_ * unit_sphere_area(N_); }

Eigen::VectorXd SphereModel::project_horizontal(const Eigen::VectorXd& P, const Eigen::VectorXd& v) const {
    Eigen::VectorXd r = v - v.dot(P) * P;
    for (int s = 0; s < k_; ++s) {
        const Eigen::VectorXd u = I_[s] * P;
        r -= v.dot(u) * u;
    }
    return r;
}

Eigen::VectorXd SphereModel::random_point(std::mt19937_64& rng) const {
    std::normal_distribution<double> Nd(0, 1);
    Eigen::VectorXd v(N_);
    do {
        for (int i = 0; i < N_; ++i) v[i] = Nd(rng);
    } while (v.norm() == 0.0);
    return v.normalized();
}

HTypeAlgebra SphereModel::group() const {
    return standard_algebra(family_ == SphereFamily::cr ? Family::complex : Family::quaternionic, n_);
}

double SphereModel::contact_factor(const GroupPoint& g) const {
    return family_ == SphereFamily::cr ? cr_contact_factor(g) : qc_contact_factor(g);
}

Eigen::VectorXd SphereModel::from_group(const GroupPoint& g) const {
    Eigen::VectorXd P(N_);
    if (family_ == SphereFamily::cr) {
        auto [Z, W] = cr_cayley_inverse(g);
        for (int j = 0; j < n_; ++j) P[2 * j] = Z[j].real(), P[2 * j + 1] = Z[j].imag();
        P[2 * n_] = W.real();
        P[2 * n_ + 1] = W.imag();
    } else {
        const QcSpherePoint s = qc_cayley_inverse(g);
        for (int a = 0; a < n_; ++a)
            for (int r = 0; r < 4; ++r) P[4 * a + r] = s.q[a][r];
        for (int r = 0; r < 4; ++r) P[4 * n_ + r] = s.p[r];
    }
    return P;
}

std::vector<Jet> SphereModel::from_group(std::span<const Jet> g) const {
    return family_ == SphereFamily::cr ? cr_cayley_inverse_coords(g, n_) : qc_cayley_inverse_coords(g, n_);
}

GroupPoint SphereModel::to_group(const Eigen::VectorXd& P) const {
    require_on_sphere(P);
    if (family_ == SphereFamily::cr) {
        std::vector<std::complex<double>> Z(n_);
        for (int j = 0; j < n_; ++j) Z[j] = {P[2 * j], P[2 * j + 1]};
        return cr_cayley(Z, {P[2 * n_], P[2 * n_ + 1]});
    }
    QcSpherePoint s;
    for (int a = 0; a < n_; ++a) s.q.push_back({P[4 * a], P[4 * a + 1], P[4 * a + 2], P[4 * a + 3]});
    s.p = {P[4 * n_], P[4 * n_ + 1], P[4 * n_ + 2], P[4 * n_ + 3]};
    return qc_cayley(n_, s);
}

HorizontalGradient horizontal_gradient(const SphereModel& model, const ScalarField& f, const Eigen::VectorXd& P) {
    const Eigen::MatrixXd B = model.horizontal_basis(P);
    const Jet j = f.jet(std::span<const double>(P.data(), P.size()), 1);
    Eigen::VectorXd grad(P.size());
    for (int i = 0; i < P.size(); ++i) grad[i] = j.d(i);
    const Eigen::VectorXd c = B.transpose() * grad;
    const Eigen::VectorXd sol = model.horizontal_metric(0, P).ldlt().solve(c);
    return {B * sol, c.dot(sol)};
}

namespace {

// F(g) = w(g) · f(C⁻¹(g)) as a field on the group, with w an optional weight.
ScalarField pulled_back(const SphereModel& model, const ScalarField& f, std::function<Jet(std::span<const Jet>)> weight = {}) {
    return ScalarField(model.ambient_dim() - 1, [&model, f, weight](std::span<const Jet> g) {
        const std::vector<Jet> P = model.from_group(g);
        Jet v = f(P);
        if (weight) v = weight(g) * v;
        return v;
    });
}

Jet contact_factor_jet(const SphereModel& model, std::span<const Jet> g) {
    const int n = model.n();
    if (model.family() == SphereFamily::cr) {
        Jet r2 = g[0] * g[0];
        for (int i = 1; i < 2 * n; ++i) r2 += g[i] * g[i];
        const Jet a = 1.0 + r2;
        return 4.0 / (a * a + g[2 * n] * g[2 * n]);
    }
    Jet r2 = g[0] * g[0];
    for (int i = 1; i < 4 * n; ++i) r2 += g[i] * g[i];
    const Jet w = 1.0 + r2;
    return 8.0 / (w * w + g[4 * n] * g[4 * n] + g[4 * n + 1] * g[4 * n + 1] + g[4 * n + 2] * g[4 * n + 2]);
}

} // namespace

double horizontal_gradient_transported(const SphereModel& model, const ScalarField& f, const Eigen::VectorXd& P) {
    const GroupPoint g = model.to_group(P);
    const HTypeAlgebra alg = model.group();
    const ScalarField F = pulled_back(model, f);
    const Jet j = F.jet(std::span<const double>(g.flat().data(), alg.m + alg.k), 1);
    return horizontal_gradient_norm2(frame(alg), j, g) / model.contact_factor(g);
}

double sublaplacian_transported(const SphereModel& model, const ScalarField& f, const Eigen::VectorXd& P) {
    const GroupPoint g = model.to_group(P);
    const HTypeAlgebra alg = model.group();
    const double Q = model.Q();
    const double e = (Q - 2) / 4;
    const ScalarField F = pulled_back(model, f, [&model, e](std::span<const Jet> x) { return pow(contact_factor_jet(model, x), e); });
    const double phi = std::pow(model.contact_factor(g), e);
    const double a = 4 * (Q + 2) / (Q - 2);
    return std::pow(phi, 1 - 2 * Q / (Q - 2)) * sub_laplacian(alg, F, g) +
           model.scalar_curvature() / a * f.value(std::span<const double>(P.data(), P.size()));
}

std::string to_string(Scheme s) {
    switch (s) {
    case Scheme::monte_carlo: return "monte_carlo";
    case Scheme::qmc: return "qmc";
    case Scheme::cayley_grid: return "cayley_grid";
    }
    return "?";
}

Scheme scheme_from_string(const std::string& s) {
    if (s == "monte_carlo") return Scheme::monte_carlo;
    if (s == "qmc") return Scheme::qmc;
    if (s == "cayley_grid") return Scheme::cayley_grid;
    throw std::invalid_argument("unknown quadrature scheme: " + s);
}

QuadratureGrid monte_carlo_grid(const SphereModel& model, std::size_t samples, std::uint64_t seed, int batches) {
    if (batches < 2) throw std::invalid_argument("monte_carlo_grid: need at least two batches");
    const std::size_t per = samples / batches / 2 * 2;
    if (per == 0) throw std::invalid_argument("monte_carlo_grid: too few samples");
    QuadratureGrid g;
    g.scheme = Scheme::monte_carlo;
    g.seed = seed;
    g.batches = batches;
    g.ambient_dim = model.ambient_dim();
    std::mt19937_64 rng(seed);
    const double w = model.volume() / static_cast<double>(per * batches);
    for (int b = 0; b < batches; ++b)
        for (std::size_t i = 0; i < per; i += 2) {
            // Antithetic pairs P, -P.
            const Eigen::VectorXd P = model.random_point(rng);
            for (double sgn : {1.0, -1.0}) {
                for (int c = 0; c < P.size(); ++c) g.coords.push_back(sgn * P[c]);
                g.weights.push_back(w);
                g.batch.push_back(b);
            }
        }
    return g;
}

QuadratureGrid qmc_grid(const SphereModel& model, std::size_t samples, std::uint64_t seed, int batches) {
    if (batches < 2) throw std::invalid_argument("qmc_grid: need at least two batches");
    const std::size_t per = samples / batches;
    if (per == 0) throw std::invalid_argument("qmc_grid: too few samples");
    const int N = model.ambient_dim();
    QuadratureGrid g;
    g.scheme = Scheme::qmc;
    g.seed = seed;
    g.batches = batches;
    g.ambient_dim = N;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0, 1);
    const boost::math::normal_distribution<double> normal;
    const double w = model.volume() / static_cast<double>(per * batches);
    for (int b = 0; b < batches; ++b) {
        // Randomly shifted Sobol points pushed through the normal quantile and normalized.
        std::vector<double> shift(N);
        for (double& s : shift) s = U(rng);
        boost::random::sobol eng(N);
        const double scale = 1.0 / (static_cast<double>(eng.max()) - static_cast<double>(eng.min()) + 1.0);
        for (std::size_t i = 0; i < per; ++i) {
            Eigen::VectorXd v(N);
            for (int c = 0; c < N; ++c) {
                double u = (static_cast<double>(eng() - eng.min()) + 0.5) * scale + shift[c];
                u -= std::floor(u);
                u = std::clamp(u, 1e-15, 1 - 1e-15);
                v[c] = boost::math::quantile(normal, u);
            }
            v.normalize();
            for (int c = 0; c < N; ++c) g.coords.push_back(v[c]);
            g.weights.push_back(w);
            g.batch.push_back(b);
        }
    }
    return g;
}

QuadratureGrid cayley_grid(const SphereModel& model, int per_axis) {
    gauss_nodes_check(per_axis);
    const int d = model.ambient_dim() - 1;
    if (std::pow(static_cast<double>(per_axis), d) > 4e6) throw std::invalid_argument("cayley_grid: product grid too large");
    QuadratureGrid g;
    g.scheme = Scheme::cayley_grid;
    g.batches = 2;
    g.refinement = true;
    g.ambient_dim = model.ambient_dim();
    const double half_q = model.Q() / 2.0;
    const HTypeAlgebra alg = model.group();
    for (int level = 0; level < 2; ++level) {
        const int p = level == 0 ? per_axis : per_axis / 2;
        auto [t, w] = gauss_legendre(p);
        // x = tan(πt/2) maps (-1, 1) onto the real line.
        std::vector<double> x(p), wx(p);
        for (int i = 0; i < p; ++i) {
            const double th = std::numbers::pi / 2 * t[i];
            x[i] = std::tan(th);
            wx[i] = w[i] * std::numbers::pi / 2 / (std::cos(th) * std::cos(th));
        }
        std::vector<int> idx(d, 0);
        const long total = std::lround(std::pow(p, d));
        for (long c = 0; c < total; ++c) {
            long r = c;
            double weight = 1;
            Eigen::VectorXd flat(d);
            for (int a = 0; a < d; ++a) {
                const int i = static_cast<int>(r % p);
                r /= p;
                flat[a] = x[i];
                weight *= wx[i];
            }
            const GroupPoint gp = GroupPoint::from_flat(alg, flat);
            const Eigen::VectorXd P = model.from_group(gp);
            for (int k = 0; k < P.size(); ++k) g.coords.push_back(P[k]);
            // Vol_η̃ = f^{Q/2} Vol_Θ̃ under the Cayley map.
            g.weights.push_back(weight * std::pow(model.contact_factor(gp), half_q) * model.group_volume_density());
            g.batch.push_back(level);
        }
    }
    return g;
}

void write_grid_csv(const QuadratureGrid& grid, std::ostream& out) {
    out << "# carnot-grid v1\n";
    out << "# scheme=" << to_string(grid.scheme) << ",seed=" << grid.seed << ",batches=" << grid.batches
        << ",refinement=" << (grid.refinement ? 1 : 0) << ",dim=" << grid.ambient_dim << "\n";
    out << "batch,weight";
    for (int c = 0; c < grid.ambient_dim; ++c) out << ",x" << c;
    out << "\n";
    out.precision(17);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out << grid.batch[i] << "," << grid.weights[i];
        for (int c = 0; c < grid.ambient_dim; ++c) out << "," << grid.coords[i * grid.ambient_dim + c];
        out << "\n";
    }
}

QuadratureGrid read_grid_csv(std::istream& in) {
    QuadratureGrid g;
    std::string line;
    if (!std::getline(in, line) || line != "# carnot-grid v1") throw std::runtime_error("read_grid_csv: missing grid header");
    if (!std::getline(in, line) || line.rfind("# ", 0) != 0) throw std::runtime_error("read_grid_csv: missing metadata");
    std::stringstream meta(line.substr(2));
    std::string kv;
    while (std::getline(meta, kv, ',')) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw std::runtime_error("read_grid_csv: bad metadata entry " + kv);
        const std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
        if (key == "scheme") g.scheme = scheme_from_string(val);
        else if (key == "seed") g.seed = std::stoull(val);
        else if (key == "batches") g.batches = std::stoi(val);
        else if (key == "refinement") g.refinement = val == "1";
        else if (key == "dim") g.ambient_dim = std::stoi(val);
    }
    if (g.ambient_dim <= 0 || g.batches <= 0) throw std::runtime_error("read_grid_csv: incomplete metadata");
    std::getline(in, line); // column names
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream row(line);
        std::string cell;
        std::getline(row, cell, ',');
        const int b = std::stoi(cell);
        if (b < 0 || b >= g.batches) throw std::runtime_error("read_grid_csv: batch index out of range");
        g.batch.push_back(b);
        std::getline(row, cell, ',');
        g.weights.push_back(std::stod(cell));
        for (int c = 0; c < g.ambient_dim; ++c) {
            if (!std::getline(row, cell, ',')) throw std::runtime_error("read_grid_csv: short row");
            g.coords.push_back(std::stod(cell));
        }
    }
    return g;
}

std::vector<Estimate> integrate_functionals(const QuadratureGrid& grid, std::size_t K, const PointVectorFunction& integrand,
                                            const std::vector<Functional>& fs) {
    const int B = grid.batches;
    // Per-batch sums; each batch is summed sequentially so the result does not depend on threading.
    auto batch_sums = [&](int b) {
        std::vector<double> s(K, 0.0), v(K);
        Eigen::VectorXd P(grid.ambient_dim);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (grid.batch[i] != b) continue;
            P = grid.point(i);
            integrand(P, v);
            for (std::size_t k = 0; k < K; ++k) s[k] += grid.weights[i] * v[k];
        }
        return s;
    };
    std::vector<std::vector<double>> S(B);
    if (std::thread::hardware_concurrency() > 1 && B > 1) {
        std::vector<std::future<std::vector<double>>> fut;
        for (int b = 0; b < B; ++b) fut.push_back(std::async(std::launch::async, batch_sums, b));
        for (int b = 0; b < B; ++b) S[b] = fut[b].get();
    } else {
        for (int b = 0; b < B; ++b) S[b] = batch_sums(b);
    }

    std::vector<Estimate> out;
    for (const Functional& f : fs) {
        if (grid.refinement) {
            const double fine = f(S[0]), coarse = f(S[1]);
            out.push_back({fine, std::abs(fine - coarse)});
            continue;
        }
        std::vector<double> total(K, 0.0);
        for (const auto& s : S)
            for (std::size_t k = 0; k < K; ++k) total[k] += s[k];
        const double value = f(total);
        std::vector<double> scaled(K);
        double mean = 0, m2 = 0;
        std::vector<double> vals(B);
        for (int b = 0; b < B; ++b) {
            for (std::size_t k = 0; k < K; ++k) scaled[k] = B * S[b][k];
            vals[b] = f(scaled);
            mean += vals[b] / B;
        }
        for (double v : vals) m2 += (v - mean) * (v - mean);
        out.push_back({value, std::sqrt(m2 / (B - 1) / B)});
    }
    return out;
}

Estimate integrate_combined(const QuadratureGrid& grid, const std::vector<PointFunction>& integrands,
                            const std::function<double(std::span<const double>)>& f) {
    const PointVectorFunction all = [&integrands](const Eigen::VectorXd& P, std::span<double> v) {
        for (std::size_t k = 0; k < integrands.size(); ++k) v[k] = integrands[k](P);
    };
    return integrate_functionals(grid, integrands.size(), all, {f})[0];
}

Estimate integrate(const QuadratureGrid& grid, const PointFunction& u) {
    return integrate_combined(grid, {u}, [](std::span<const double> v) { return v[0]; });
}

PointFunction as_point_function(const ScalarField& f) {
    return [f](const Eigen::VectorXd& P) { return f.value(std::span<const double>(P.data(), P.size())); };
}

namespace {

Eigen::VectorXd ambient_gradient(const ScalarField& f, const Eigen::VectorXd& P) {
    const Jet j = f.jet(std::span<const double>(P.data(), P.size()), 1);
    Eigen::VectorXd g(P.size());
    for (int i = 0; i < P.size(); ++i) g[i] = j.d(i);
    return g;
}

} // namespace

PointFunction gradient_energy(const SphereModel& model, const ScalarField& f) {
    return [&model, f](const Eigen::VectorXd& P) {
        return model.project_horizontal(P, ambient_gradient(f, P)).squaredNorm() / model.metric_scale();
    };
}

PointFunction gradient_pairing(const SphereModel& model, const ScalarField& f, const ScalarField& psi) {
    return [&model, f, psi](const Eigen::VectorXd& P) {
        const Eigen::VectorXd a = model.project_horizontal(P, ambient_gradient(f, P));
        return a.dot(ambient_gradient(psi, P)) / model.metric_scale();
    };
}

Estimate rayleigh(const SphereModel& model, const ScalarField& f, const QuadratureGrid& grid) {
    const ValueGradient vg = value_gradient(f);
    const PointVectorFunction in = [&model, vg](const Eigen::VectorXd& P, std::span<double> I) {
        Eigen::VectorXd g;
        const double v = vg(P, g);
        I[0] = model.project_horizontal(P, g).squaredNorm() / model.metric_scale();
        I[1] = v * v;
        I[2] = v;
        I[3] = 1;
    };
    const Estimate r = integrate_functionals(grid, 4, in, {[](std::span<const double> I) {
                                                 const double var = I[1] - I[2] * I[2] / I[3];
                                                 return I[0] / var;
                                             }})[0];
    if (!std::isfinite(r.value) || r.value < 0) throw std::domain_error("rayleigh: zero variance");
    return r;
}

Estimate weak_eigen_residual(const SphereModel& model, const ScalarField& f, double lambda,
                             const std::vector<ScalarField>& tests, const QuadratureGrid& grid) {
    std::vector<PointFunction> in;
    const PointFunction fv = as_point_function(f);
    in.push_back(gradient_energy(model, f));
    in.push_back([fv](const Eigen::VectorXd& P) { const double v = fv(P); return v * v; });
    for (const auto& psi : tests) {
        const PointFunction pv = as_point_function(psi);
        in.push_back(gradient_pairing(model, f, psi));
        in.push_back([fv, pv](const Eigen::VectorXd& P) { return fv(P) * pv(P); });
        in.push_back(gradient_energy(model, psi));
        in.push_back([pv](const Eigen::VectorXd& P) { const double v = pv(P); return v * v; });
    }
    const std::size_t T = tests.size();
    return integrate_combined(grid, in, [T, lambda](std::span<const double> I) {
        double worst = 0;
        for (std::size_t t = 0; t < T; ++t) {
            const double* J = I.data() + 2 + 4 * t;
            const double num = std::abs(J[0] - lambda * J[1]);
            const double den = std::sqrt(std::max(0.0, I[0] * J[2])) + std::abs(lambda) * std::sqrt(std::max(0.0, I[1] * J[3]));
            if (den > 0) worst = std::max(worst, num / den);
        }
        return worst;
    });
}

ValueGradient value_gradient(const ScalarField& f) {
    return [f](const Eigen::VectorXd& P, Eigen::VectorXd& g) {
        const Jet j = f.jet(std::span<const double>(P.data(), P.size()), 1);
        g.resize(P.size());
        for (int i = 0; i < P.size(); ++i) g[i] = j.d(i);
        return j.value();
    };
}

YamabeFunctionals yamabe_functionals(const SphereModel& model, const ScalarField& phi, const QuadratureGrid& grid,
                                     std::optional<double> scalar) {
    return yamabe_functionals(model, value_gradient(phi), grid, scalar);
}

YamabeFunctionals yamabe_functionals(const SphereModel& model, const ValueGradient& phi, const QuadratureGrid& grid,
                                     std::optional<double> scalar) {
    const double Q = model.Q();
    const double two_star = 2 * Q / (Q - 2);
    const double S = scalar.value_or(model.scalar_curvature());
    const double a = 4 * (Q + 2) / (Q - 2);
    const PointVectorFunction in = [&model, phi, two_star](const Eigen::VectorXd& P, std::span<double> I) {
        Eigen::VectorXd g;
        const double v = phi(P, g);
        if (!(v > 0)) throw DomainError("yamabe_functionals: phi must be positive, got " + std::to_string(v));
        I[0] = model.project_horizontal(P, g).squaredNorm() / model.metric_scale();
        I[1] = v * v;
        I[2] = std::pow(v, two_star);
    };
    auto E = [a, S](std::span<const double> I) { return a * I[0] + S * I[1]; };
    auto Nf = [two_star](std::span<const double> I) { return std::pow(I[2], 2 / two_star); };
    const auto r = integrate_functionals(grid, 3, in, {E, Nf, [E, Nf](std::span<const double> I) { return E(I) / Nf(I); }});
    return {r[0], r[1], r[2]};
}

std::vector<Estimate> center_of_mass(const SphereModel& model, const ScalarField& u, const QuadratureGrid& grid) {
    return center_of_mass(model, as_point_function(u), grid);
}

std::vector<Estimate> center_of_mass(const SphereModel& model, const PointFunction& u, const QuadratureGrid& grid) {
    const double Q = model.Q();
    const double two_star = 2 * Q / (Q - 2);
    const int d = model.ambient_dim();
    const PointVectorFunction in = [u, d, two_star](const Eigen::VectorXd& P, std::span<double> I) {
        const double v = u(P);
        if (!(v > 0)) throw DomainError("center_of_mass: u must be positive");
        const double w = std::pow(v, two_star);
        for (int c = 0; c < d; ++c) I[c] = P[c] * w;
    };
    std::vector<Functional> fs;
    for (int c = 0; c < d; ++c) fs.push_back([c](std::span<const double> I) { return I[c]; });
    return integrate_functionals(grid, d, in, fs);
}

ScalarField coordinate_function(int dim, int i) {
    if (i < 0 || i >= dim) throw std::invalid_argument("coordinate_function: index out of range");
    return ScalarField(dim, [i](std::span<const Jet> x) { return x[i]; });
}

ScalarField monomial(int dim, const std::vector<int>& e) {
    if (static_cast<int>(e.size()) != dim) throw std::invalid_argument("monomial: exponent count mismatch");
    return ScalarField(dim, [e](std::span<const Jet> x) {
        Jet r = x[0] * 0.0 + 1.0;
        for (std::size_t i = 0; i < e.size(); ++i)
            for (int p = 0; p < e[i]; ++p) r *= x[i];
        return r;
    });
}

std::vector<ScalarField> monomials_up_to(int dim, int degree) {
    std::vector<ScalarField> out;
    std::vector<int> e(dim, 0);
    std::function<void(int, int)> rec = [&](int i, int left) {
        if (i == dim) {
            out.push_back(monomial(dim, e));
            return;
        }
        for (int p = 0; p <= left; ++p) {
            e[i] = p;
            rec(i + 1, left - p);
        }
        e[i] = 0;
    };
    rec(0, degree);
    return out;
}

} // namespace carnot
