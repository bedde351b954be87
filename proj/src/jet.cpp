#include "carnot/jet.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace carnot {

std::size_t Jet::storage(int dim, int order) {
    std::size_t n = 1;
    std::size_t p = 1;
    for (int r = 1; r <= order; ++r) {
        p *= static_cast<std::size_t>(dim);
        n += p;
    }
    return n;
}

Jet::Jet(int dim, int order, double value) : dim_(dim), order_(order) {
    if (dim < 0 || order < 0 || order > kMaxOrder)
        throw std::invalid_argument("Jet: order must lie in 0..3");
    c_.assign(storage(dim, order), 0.0);
    c_[0] = value;
}

Jet Jet::variable(int dim, int order, int index, double value) {
    Jet j(dim, order, value);
    if (order >= 1) j.c_[1 + index] = 1.0;
    return j;
}

void Jet::set_d(int i, int j, double v) {
    c_[h0() + i * dim_ + j] = v;
    c_[h0() + j * dim_ + i] = v;
}

void Jet::set_d(int i, int j, int k, double v) {
    const int idx[3] = {i, j, k};
    static constexpr int perm[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (const auto& p : perm)
        c_[t0() + (idx[p[0]] * dim_ + idx[p[1]]) * dim_ + idx[p[2]]] = v;
}

std::vector<double> Jet::gradient() const {
    if (order_ < 1) throw std::logic_error("Jet::gradient needs order >= 1");
    return {c_.begin() + 1, c_.begin() + 1 + dim_};
}

double Jet::laplacian() const {
    if (order_ < 2) throw std::logic_error("Jet::laplacian needs order >= 2");
    double s = 0;
    for (int i = 0; i < dim_; ++i) s += d(i, i);
    return s;
}

Jet Jet::derivative(int i) const {
    if (order_ < 1) throw std::logic_error("Jet::derivative of an order-0 jet");
    Jet r(dim_, order_ - 1, d(i));
    if (order_ >= 2)
        for (int j = 0; j < dim_; ++j) r.c_[1 + j] = d(i, j);
    if (order_ >= 3)
        for (int j = 0; j < dim_; ++j)
            for (int k = 0; k < dim_; ++k) r.c_[r.h0() + j * dim_ + k] = d(i, j, k);
    return r;
}

Jet Jet::truncated(int order) const {
    if (order > order_) throw std::logic_error("Jet::truncated cannot raise the order");
    Jet r(dim_, order);
    std::copy(c_.begin(), c_.begin() + static_cast<long>(r.c_.size()), r.c_.begin());
    return r;
}

double Jet::symmetry_defect() const {
    double m = 0;
    if (order_ >= 2)
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j) m = std::max(m, std::abs(d(i, j) - d(j, i)));
    if (order_ >= 3)
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j)
                for (int k = 0; k < dim_; ++k) {
                    const double v = d(i, j, k);
                    m = std::max({m, std::abs(v - d(j, i, k)), std::abs(v - d(k, j, i)), std::abs(v - d(i, k, j))});
                }
    return m;
}

void Jet::require_shape(const Jet& o) const {
    if (!same_shape(*this, o)) {
        std::ostringstream os;
        os << "Jet shape mismatch: (" << dim_ << "," << order_ << ") vs (" << o.dim_ << "," << o.order_ << ")";
        throw std::invalid_argument(os.str());
    }
}

Jet& Jet::operator+=(const Jet& o) {
    require_shape(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
}

Jet& Jet::operator-=(const Jet& o) {
    require_shape(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
}

Jet& Jet::operator*=(double s) {
    for (double& v : c_) v *= s;
    return *this;
}

Jet Jet::operator-() const {
    Jet r = *this;
    for (double& v : r.c_) v = -v;
    return r;
}

Jet& Jet::operator*=(const Jet& o) {
    require_shape(o);
    const int n = dim_;
    Jet r(n, order_);
    const Jet& a = *this;
    const Jet& b = o;
    r.c_[0] = a.value() * b.value();
    if (order_ >= 1)
        for (int i = 0; i < n; ++i) r.c_[1 + i] = a.value() * b.d(i) + a.d(i) * b.value();
    if (order_ >= 2)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                r.c_[r.h0() + i * n + j] =
                    a.value() * b.d(i, j) + a.d(i) * b.d(j) + a.d(j) * b.d(i) + a.d(i, j) * b.value();
    if (order_ >= 3)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    r.c_[r.t0() + (i * n + j) * n + k] =
                        a.value() * b.d(i, j, k) + a.d(i) * b.d(j, k) + a.d(j) * b.d(i, k) + a.d(k) * b.d(i, j) +
                        a.d(i, j) * b.d(k) + a.d(i, k) * b.d(j) + a.d(j, k) * b.d(i) + a.d(i, j, k) * b.value();
    *this = std::move(r);
    return *this;
}

Jet Jet::compose(double g0, double g1, double g2, double g3) const {
    const int n = dim_;
    Jet r(n, order_, g0);
    if (order_ >= 1)
        for (int i = 0; i < n; ++i) r.c_[1 + i] = g1 * d(i);
    if (order_ >= 2)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) r.c_[r.h0() + i * n + j] = g1 * d(i, j) + g2 * d(i) * d(j);
    if (order_ >= 3)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    r.c_[r.t0() + (i * n + j) * n + k] =
                        g1 * d(i, j, k) + g2 * (d(i, j) * d(k) + d(i, k) * d(j) + d(j, k) * d(i)) +
                        g3 * d(i) * d(j) * d(k);
    return r;
}

Jet& Jet::operator/=(const Jet& o) { return *this *= reciprocal(o); }

Jet operator/(double s, const Jet& a) { return reciprocal(a) * s; }

namespace {
[[noreturn]] void domain_fail(const char* fn, double v) {
    std::ostringstream os;
    os << fn << ": argument " << v << " outside the domain";
    throw DomainError(os.str());
}
} // namespace

Jet reciprocal(const Jet& a) {
    const double v = a.value();
    if (v == 0.0) domain_fail("reciprocal", v);
    const double r = 1.0 / v;
    return a.compose(r, -r * r, 2 * r * r * r, -6 * r * r * r * r);
}

Jet exp(const Jet& a) {
    const double e = std::exp(a.value());
    return a.compose(e, e, e, e);
}

Jet log(const Jet& a) {
    const double v = a.value();
    if (!(v > 0)) domain_fail("log", v);
    return a.compose(std::log(v), 1 / v, -1 / (v * v), 2 / (v * v * v));
}

Jet sqrt(const Jet& a) {
    const double v = a.value();
    if (!(v > 0)) domain_fail("sqrt", v);
    const double s = std::sqrt(v);
    return a.compose(s, 0.5 / s, -0.25 / (s * v), 0.375 / (s * v * v));
}

Jet pow(const Jet& a, double p) {
    if (p == std::floor(p) && p >= 0 && p <= 16) {
        Jet r(a.dim(), a.order(), 1.0);
        for (int i = 0; i < static_cast<int>(p); ++i) r *= a;
        return r;
    }
    const double v = a.value();
    if (!(v > 0)) domain_fail("pow", v);
    const double g0 = std::pow(v, p);
    return a.compose(g0, p * g0 / v, p * (p - 1) * g0 / (v * v), p * (p - 1) * (p - 2) * g0 / (v * v * v));
}

Jet sin(const Jet& a) {
    const double s = std::sin(a.value()), c = std::cos(a.value());
    return a.compose(s, c, -s, -c);
}

Jet cos(const Jet& a) {
    const double s = std::sin(a.value()), c = std::cos(a.value());
    return a.compose(c, -s, -c, s);
}

Jet square(const Jet& a) { return a * a; }

std::vector<Jet> seed_variables(std::span<const double> p, int order) {
    const int n = static_cast<int>(p.size());
    std::vector<Jet> v;
    v.reserve(p.size());
    for (int i = 0; i < n; ++i) v.push_back(Jet::variable(n, order, i, p[i]));
    return v;
}

Jet ScalarField::jet(std::span<const double> p, int order) const {
    if (static_cast<int>(p.size()) != dim_) throw std::invalid_argument("ScalarField: point dimension mismatch");
    auto vars = seed_variables(p, order);
    return f_(vars);
}

double ScalarField::value(std::span<const double> p) const { return jet(p, 0).value(); }

namespace {

double mixed_difference(const ScalarField& f, std::vector<double>& p, const int* idx, int count, double h) {
    if (count == 0) return f.value(p);
    const int i = idx[0];
    const double save = p[i];
    p[i] = save + h;
    const double up = mixed_difference(f, p, idx + 1, count - 1, h);
    p[i] = save - h;
    const double dn = mixed_difference(f, p, idx + 1, count - 1, h);
    p[i] = save;
    return (up - dn) / (2 * h);
}

double estimate(const ScalarField& f, std::span<const double> p0, const int* idx, int count, double h, bool rich) {
    std::vector<double> p(p0.begin(), p0.end());
    const double coarse = mixed_difference(f, p, idx, count, h);
    if (!rich) return coarse;
    const double fine = mixed_difference(f, p, idx, count, h / 2);
    return (4 * fine - coarse) / 3;
}

} // namespace

Jet fd_oracle(const ScalarField& field, std::span<const double> p, int order, FdOptions opt) {
    const int n = static_cast<int>(p.size());
    double scale = 1.0;
    for (double v : p) scale = std::max(scale, std::abs(v));
    // Roundoff grows like eps/h^r, so the step widens with the order r.
    const double h1 = opt.step * scale, h2 = 200 * opt.step * scale, h3 = 500 * opt.step * scale;
    Jet r(n, order, field.value(p));
    for (int i = 0; i < n && order >= 1; ++i) {
        const int idx[1] = {i};
        r.set_d(i, estimate(field, p, idx, 1, h1, opt.richardson));
    }
    for (int i = 0; i < n && order >= 2; ++i)
        for (int j = i; j < n; ++j) {
            const int idx[2] = {i, j};
            r.set_d(i, j, estimate(field, p, idx, 2, h2, opt.richardson));
        }
    for (int i = 0; i < n && order >= 3; ++i)
        for (int j = i; j < n; ++j)
            for (int k = j; k < n; ++k) {
                const int idx[3] = {i, j, k};
                r.set_d(i, j, k, estimate(field, p, idx, 3, h3, opt.richardson));
            }
    return r;
}

double jet_distance(const Jet& a, const Jet& b, double floor) {
    if (!same_shape(a, b)) throw std::invalid_argument("jet_distance: shape mismatch");
    const int n = a.dim();
    double m = 0;
    auto upd = [&](double x, double y) { m = std::max(m, std::abs(x - y) / std::max({std::abs(x), std::abs(y), floor})); };
    upd(a.value(), b.value());
    for (int i = 0; i < n && a.order() >= 1; ++i) upd(a.d(i), b.d(i));
    for (int i = 0; i < n && a.order() >= 2; ++i)
        for (int j = 0; j < n; ++j) upd(a.d(i, j), b.d(i, j));
    for (int i = 0; i < n && a.order() >= 3; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) upd(a.d(i, j, k), b.d(i, j, k));
    return m;
}

} // namespace carnot
