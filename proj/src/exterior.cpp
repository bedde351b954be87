#include "carnot/exterior.hpp"

#include <algorithm>
#include <cmath>

namespace carnot {

namespace {

constexpr std::uint32_t bit(int i) { return 1u << i; }
constexpr std::uint32_t pair(int i, int j) { return bit(i) | bit(j); }

// e^{jk} with j < k carrying coefficient s, in sorted order.
void add_pair(Form<double>& f, int j, int k, double s) {
    if (j == k || s == 0.0) return;
    if (j > k) {
        std::swap(j, k);
        s = -s;
    }
    f.add(pair(j, k), s);
}

Jet zero_jet(int order) { return Jet(FrameForm::kBase, order, 0.0); }

Form<double> monomial(std::uint32_t mask) {
    Form<double> f(7);
    f.add(mask, 1.0);
    return f;
}

// d of the constant-coefficient monomial e^I, by the graded Leibniz rule.
Form<double> d_monomial(std::uint32_t mask, const StructureConstants& sc) {
    Form<double> result(7);
    double sign = 1;
    for (int i = 0; i < 7; ++i) {
        if (!(mask & bit(i))) continue;
        const std::uint32_t before = mask & (bit(i) - 1), after = mask & ~(bit(i + 1) - 1);
        result += sign * ((monomial(before) ^ sc.de(i)) ^ monomial(after));
        sign = -sign;
    }
    return result;
}

constexpr int kExpOffset = 8;

// e^{k f} at index k + kExpOffset, k = -8..8.
std::array<Jet, 2 * kExpOffset + 1> exp_multiples(const Jet& f, int order) {
    std::array<Jet, 2 * kExpOffset + 1> e;
    const Jet ft = f.truncated(order);
    for (int k = -kExpOffset; k <= kExpOffset; ++k) e[k + kExpOffset] = exp(static_cast<double>(k) * ft);
    return e;
}

int base_count(std::uint32_t mask) { return std::popcount(mask & FrameForm::kBaseMask); }

} // namespace

Form<double> StructureConstants::de(int i) const {
    Form<double> f(7);
    for (int j = 0; j < 7; ++j)
        for (int k = j + 1; k < 7; ++k)
            if (c[i][j][k] != 0.0) f.add(pair(j, k), c[i][j][k]);
    return f;
}

double StructureConstants::jacobi_residual() const {
    double r = 0;
    for (int i = 0; i < 7; ++i) {
        Form<double> dd(7);
        for (int j = 0; j < 7; ++j)
            for (int k = j + 1; k < 7; ++k) {
                if (c[i][j][k] == 0.0) continue;
                // d(e^j ∧ e^k) = de^j ∧ e^k − e^j ∧ de^k
                dd += c[i][j][k] * ((de(j) ^ Form<double>::basis(7, k, 1.0)) - (Form<double>::basis(7, j, 1.0) ^ de(k)));
            }
        r = std::max(r, max_abs(dd));
    }
    return r;
}

double StructureConstants::distance(const StructureConstants& o) const {
    double r = 0;
    for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 7; ++j)
            for (int k = 0; k < 7; ++k) r = std::max(r, std::abs(c[i][j][k] - o.c[i][j][k]));
    return r;
}

Form<double> sigma_form(int j) {
    Form<double> f(7);
    switch (j) {
    case 0: add_pair(f, 0, 1, 1); add_pair(f, 2, 3, -1); break;
    case 1: add_pair(f, 0, 2, 1); add_pair(f, 1, 3, 1); break;
    case 2: add_pair(f, 0, 3, 1); add_pair(f, 1, 2, -1); break;
    default: throw std::invalid_argument("sigma_form: index out of range");
    }
    return f;
}

Form<double> kahler_form(int j) {
    Form<double> f(7);
    switch (j) {
    case 0: add_pair(f, 0, 1, 1); add_pair(f, 2, 3, 1); break;
    case 1: add_pair(f, 0, 2, 1); add_pair(f, 1, 3, -1); break;
    case 2: add_pair(f, 0, 3, 1); add_pair(f, 1, 2, 1); break;
    default: throw std::invalid_argument("kahler_form: index out of range");
    }
    return f;
}

StructureConstants make_KA(const Eigen::Matrix3d& A) {
    StructureConstants sc;
    sc.A = A;
    for (int i = 0; i < 3; ++i) {
        Form<double> d(7);
        for (int j = 0; j < 3; ++j) d += A(i, j) * sigma_form(j);
        for (const auto& [mask, v] : d.terms()) {
            const int a = std::countr_zero(mask), b = 31 - std::countl_zero(mask);
            sc.c[4 + i][a][b] = v;
            sc.c[4 + i][b][a] = -v;
        }
    }
    return sc;
}

StructureConstants contract(double eps, double a, double b) {
    if (eps < 0) throw std::invalid_argument("contract: eps must be nonnegative");
    Eigen::Matrix3d A;
    A << 0, b, 0,
         a, 0, -b,
         0, 0, eps;
    return make_KA(A);
}

FrameForm::FrameForm(const Form<double>& f, int order) : form_(kDim), order_(order) {
    if (f.dim() != kDim) throw std::invalid_argument("FrameForm: expected a 7-dimensional form");
    for (const auto& [m, v] : f.terms()) form_.add(m, Jet(kBase, order, v));
}

FrameForm FrameForm::term(std::uint32_t mask, const Jet& c) {
    if (c.dim() != kBase) throw std::invalid_argument("FrameForm: coefficients must be jets in x¹..x⁴");
    FrameForm f(c.order());
    f.form_.add(mask, c);
    return f;
}

Jet FrameForm::coefficient(std::uint32_t mask) const {
    const Jet* c = form_.find(mask);
    return c ? *c : zero_jet(order_);
}

void FrameForm::add(std::uint32_t mask, const Jet& c) {
    if (c.dim() != kBase) throw std::invalid_argument("FrameForm: coefficients must be jets in x¹..x⁴");
    if (c.order() < order_) *this = truncated(c.order());
    form_.add(mask, c.truncated(order_));
}

FrameForm FrameForm::truncated(int order) const {
    if (order > order_) throw std::invalid_argument("FrameForm: cannot raise jet order");
    FrameForm r(order);
    for (const auto& [m, c] : form_.terms()) r.form_.add(m, c.truncated(order));
    return r;
}

FrameForm FrameForm::part(int degree) const {
    FrameForm r(order_);
    r.form_ = form_.part(degree);
    return r;
}

double FrameForm::max_value(std::uint32_t skip) const {
    double r = 0;
    for (const auto& [m, c] : form_.terms())
        if (m != skip) r = std::max(r, std::abs(c.value()));
    return r;
}

Form<double> FrameForm::values() const {
    Form<double> r(kDim);
    for (const auto& [m, c] : form_.terms()) r.add(m, c.value());
    return r;
}

FrameForm& FrameForm::operator+=(const FrameForm& o) {
    const int ord = std::min(order_, o.order_);
    if (ord < order_) *this = truncated(ord);
    for (const auto& [m, c] : o.form_.terms()) form_.add(m, c.truncated(ord));
    return *this;
}

FrameForm& FrameForm::operator-=(const FrameForm& o) { return *this += -1.0 * o; }

FrameForm operator*(double s, const FrameForm& a) {
    FrameForm r(a.order_);
    r.form_ = s * a.form_;
    return r;
}

FrameForm operator*(const Jet& s, const FrameForm& a) {
    const int ord = std::min(s.order(), a.order_);
    const Jet st = s.truncated(ord);
    FrameForm r(ord);
    for (const auto& [m, c] : a.form_.terms()) r.form_.add(m, st * c.truncated(ord));
    return r;
}

FrameForm operator^(const FrameForm& a, const FrameForm& b) {
    const int ord = std::min(a.order_, b.order_);
    FrameForm r(ord);
    r.form_ = a.truncated(ord).form_ ^ b.truncated(ord).form_;
    return r;
}

FrameForm ce_differential(const FrameForm& alpha, const StructureConstants& sc) {
    if (alpha.order() < 1) throw std::invalid_argument("ce_differential: jet order too low");
    const int ord = alpha.order() - 1;
    FrameForm r(ord);
    for (const auto& [mask, c] : alpha.form().terms()) {
        if (c.dim() != FrameForm::kBase) throw std::invalid_argument("ce_differential: coefficient depends on fiber variables");
        for (int i = 0; i < FrameForm::kBase; ++i) {
            const int s = wedge_sign(bit(i), mask);
            if (s != 0) r.add(bit(i) | mask, static_cast<double>(s) * c.derivative(i));
        }
        const Jet ct = c.truncated(ord);
        const Form<double> dm = d_monomial(mask, sc);
        for (const auto& [m2, v] : dm.terms())
            if (v != 0.0) r.add(m2, v * ct);
    }
    return r;
}

FrameForm hodge_star(const FrameForm& alpha, const Jet& f) {
    const int ord = std::min(alpha.order(), f.order());
    const auto e = exp_multiples(f, ord);
    FrameForm r(ord);
    for (const auto& [mask, c] : alpha.form().terms()) {
        const std::uint32_t comp = FrameForm::kVolumeMask ^ mask;
        const int s = wedge_sign(mask, comp);
        // c e^I = c e^{-f|I∩B|} ē^I ↦ s c e^{-f|I∩B|} ē^{I^c} = s c e^{f(|I^c∩B| - |I∩B|)} e^{I^c}
        const int k = base_count(comp) - base_count(mask);
        r.add(comp, static_cast<double>(s) * (e[k + kExpOffset] * c.truncated(ord)));
    }
    return r;
}

Jet frame_norm2(const FrameForm& alpha, const Jet& f) {
    const int ord = std::min(alpha.order(), f.order());
    const auto e = exp_multiples(f, ord);
    Jet r = zero_jet(ord);
    for (const auto& [mask, c] : alpha.form().terms()) {
        const Jet ct = c.truncated(ord);
        r += e[kExpOffset - 2 * base_count(mask)] * (ct * ct);
    }
    return r;
}

FrameForm orthonormal_basis(std::uint32_t mask, const Jet& f) {
    return FrameForm::term(mask, exp(static_cast<double>(base_count(mask)) * f));
}

Jet orthonormal_coefficient(const FrameForm& alpha, std::uint32_t mask, const Jet& f) {
    const int ord = std::min(alpha.order(), f.order());
    return exp(-static_cast<double>(base_count(mask)) * f.truncated(ord)) * alpha.coefficient(mask).truncated(ord);
}

} // namespace carnot
