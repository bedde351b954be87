#include "carnot/algebra.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "carnot/quaternion.hpp"

namespace carnot {

std::array<std::array<double, 3>, 3> conjugation_rotation(const Quaternion& lambda) {
    std::array<std::array<double, 3>, 3> R{};
    const auto& e = imaginary_units();
    for (int c = 0; c < 3; ++c) {
        const Quaternion v = lambda * e[c] * lambda.conj();
        for (int r = 0; r < 3; ++r) R[r][c] = v[r + 1];
    }
    return R;
}

HomogeneousData HTypeAlgebra::homogeneous() const {
    const int q = Q();
    return {q, 2.0 * q / (q - 2.0)};
}

Eigen::MatrixXd HTypeAlgebra::J_of(const Eigen::VectorXd& y) const {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
    for (int s = 0; s < k; ++s) M += y[s] * J[s];
    return M;
}

double HTypeAlgebra::structure_defect() const {
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(m, m);
    double d = 0;
    for (int s = 0; s < k; ++s) {
        d = std::max(d, (J[s].transpose() + J[s]).cwiseAbs().maxCoeff());
        d = std::max(d, (J[s].transpose() * J[s] - I).cwiseAbs().maxCoeff());
        for (int t = 0; t < k; ++t) {
            const Eigen::MatrixXd ac = J[s] * J[t] + J[t] * J[s] + (s == t ? 2.0 : 0.0) * I;
            d = std::max(d, ac.cwiseAbs().maxCoeff());
        }
    }
    return d;
}

HTypeAlgebra make_algebra(std::vector<Eigen::MatrixXd> J, double bracket_scale, std::string label) {
    if (J.empty()) throw std::invalid_argument("make_algebra: need at least one J-map");
    HTypeAlgebra a;
    a.m = static_cast<int>(J[0].rows());
    a.k = static_cast<int>(J.size());
    a.J = std::move(J);
    a.bracket_scale = bracket_scale;
    a.label = std::move(label);
    for (const auto& M : a.J)
        if (M.rows() != a.m || M.cols() != a.m) throw std::invalid_argument("make_algebra: J-maps must be square of equal size");
    if (!(bracket_scale > 0)) throw std::invalid_argument("make_algebra: bracket scale must be positive");
    const double defect = a.structure_defect();
    if (defect > 1e-12) {
        std::ostringstream os;
        os << "make_algebra: J-maps are not of H-type (defect " << defect << ")";
        throw std::invalid_argument(os.str());
    }
    return a;
}

HTypeAlgebra standard_algebra(Family family, int n, Normalization norm) {
    if (n < 1) throw std::invalid_argument("standard_algebra: rank must be at least 1");
    const double cb = norm == Normalization::explicit_coordinates ? 4.0 : 1.0;
    const std::string tag = norm == Normalization::explicit_coordinates ? "" : ",h-type";
    if (family == Family::complex) {
        // Coordinates (x_1..x_n, y_1..y_n); J is multiplication by -i.
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * n, 2 * n);
        for (int j = 0; j < n; ++j) {
            J(j, n + j) = 1.0;
            J(n + j, j) = -1.0;
        }
        return make_algebra({J}, cb, "G(C),n=" + std::to_string(n) + tag);
    }
    // Blocks (t,x,y,z) per quaternion coordinate; J_s is left multiplication by -e_s.
    std::vector<Eigen::MatrixXd> Js;
    const auto& e = imaginary_units();
    for (int s = 0; s < 3; ++s) {
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(4 * n, 4 * n);
        for (int b = 0; b < 4; ++b) {
            Quaternion basis{0, 0, 0, 0};
            basis[b] = 1.0;
            const Quaternion img = -e[s] * basis;
            for (int alpha = 0; alpha < n; ++alpha)
                for (int r = 0; r < 4; ++r) J(4 * alpha + r, 4 * alpha + b) = img[r];
        }
        Js.push_back(J);
    }
    return make_algebra(std::move(Js), cb, "G(H),n=" + std::to_string(n) + tag);
}

Eigen::VectorXd GroupPoint::flat() const {
    Eigen::VectorXd v(x.size() + y.size());
    v << x, y;
    return v;
}

GroupPoint GroupPoint::from_flat(const HTypeAlgebra& alg, const Eigen::VectorXd& v) {
    if (v.size() != alg.m + alg.k) throw std::invalid_argument("GroupPoint::from_flat: size mismatch");
    return {v.head(alg.m), v.tail(alg.k)};
}

namespace {
void check_dims(const HTypeAlgebra& alg, const GroupPoint& p) {
    if (p.x.size() != alg.m || p.y.size() != alg.k) throw std::invalid_argument("GroupPoint: dimension mismatch with algebra");
}
} // namespace

GroupPoint group_identity(const HTypeAlgebra& alg) {
    return {Eigen::VectorXd::Zero(alg.m), Eigen::VectorXd::Zero(alg.k)};
}

GroupPoint group_multiply(const HTypeAlgebra& alg, const GroupPoint& a, const GroupPoint& b) {
    check_dims(alg, a);
    check_dims(alg, b);
    GroupPoint r{a.x + b.x, a.y + b.y};
    for (int s = 0; s < alg.k; ++s) r.y[s] += 0.5 * alg.bracket_scale * (alg.J[s] * a.x).dot(b.x);
    return r;
}

GroupPoint group_inverse(const HTypeAlgebra& alg, const GroupPoint& p) {
    check_dims(alg, p);
    return {-p.x, -p.y};
}

GroupPoint dilate(const HTypeAlgebra& alg, double lambda, const GroupPoint& p) {
    check_dims(alg, p);
    if (!(lambda > 0)) throw std::invalid_argument("dilate: lambda must be positive");
    return {lambda * p.x, lambda * lambda * p.y};
}

double gauge(const HTypeAlgebra& alg, const GroupPoint& p) {
    check_dims(alg, p);
    const double x2 = p.x.squaredNorm();
    const double y2 = p.y.squaredNorm() / (alg.bracket_scale * alg.bracket_scale);
    return std::pow(x2 * x2 + 16.0 * y2, 0.25);
}

double distance(const GroupPoint& a, const GroupPoint& b) {
    return std::sqrt((a.x - b.x).squaredNorm() + (a.y - b.y).squaredNorm());
}

std::vector<Jet> translate_coordinates(const HTypeAlgebra& alg, const GroupPoint& g0, std::span<const Jet> c) {
    std::vector<Jet> out(c.begin(), c.end());
    for (int a = 0; a < alg.m; ++a) out[a] += g0.x[a];
    for (int s = 0; s < alg.k; ++s) {
        out[alg.m + s] += g0.y[s];
        // (c_B/2) <J_s x0, x>
        const Eigen::VectorXd Jx0 = alg.J[s] * g0.x;
        for (int a = 0; a < alg.m; ++a)
            if (Jx0[a] != 0.0) out[alg.m + s] += c[a] * (0.5 * alg.bracket_scale * Jx0[a]);
    }
    return out;
}

namespace {

Eigen::VectorXd vec(const Eigen::MatrixXd& M) { return Eigen::Map<const Eigen::VectorXd>(M.data(), M.size()); }

} // namespace

J2Result check_j2(const HTypeAlgebra& alg, std::uint64_t seed, double tol, int random_pairs) {
    J2Result res;
    if (alg.k < 2) return res;
    Eigen::MatrixXd basis(alg.m * alg.m, alg.k);
    for (int s = 0; s < alg.k; ++s) basis.col(s) = vec(alg.J[s]);
    const auto qr = basis.colPivHouseholderQr();
    const double scale = std::sqrt(static_cast<double>(alg.m));

    auto test_pair = [&](const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
        const Eigen::VectorXd target = vec(alg.J_of(u) * alg.J_of(v));
        const Eigen::VectorXd c = qr.solve(target);
        const double r = (basis * c - target).norm() / scale;
        res.max_residual = std::max(res.max_residual, r);
        res.witnesses.emplace_back(c.data(), c.data() + c.size());
        ++res.pairs_tested;
    };

    for (int s = 0; s < alg.k; ++s)
        for (int t = 0; t < alg.k; ++t) {
            if (s == t) continue;
            test_pair(Eigen::VectorXd::Unit(alg.k, s), Eigen::VectorXd::Unit(alg.k, t));
        }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N(0.0, 1.0);
    for (int i = 0; i < random_pairs; ++i) {
        Eigen::VectorXd u(alg.k), v(alg.k);
        for (int s = 0; s < alg.k; ++s) u[s] = N(rng), v[s] = N(rng);
        u.normalize();
        v -= v.dot(u) * u;
        v.normalize();
        test_pair(u, v);
    }
    res.holds = res.max_residual <= tol;
    return res;
}

HTypeAlgebra rotated_algebra(const HTypeAlgebra& alg, const Eigen::MatrixXd& O) {
    std::vector<Eigen::MatrixXd> Js;
    for (const auto& J : alg.J) Js.push_back(O * J * O.transpose());
    return make_algebra(std::move(Js), alg.bracket_scale, alg.label + ",rotated");
}

} // namespace carnot
