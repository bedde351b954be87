#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <array>
#include <map>
#include <stdexcept>

#include <Eigen/Dense>

#include "carnot/jet.hpp"

namespace carnot {

// Sign of e^A ∧ e^B relative to e^{A∪B} in increasing index order; 0 if A ∩ B ≠ ∅.
inline int wedge_sign(std::uint32_t a, std::uint32_t b) {
    if (a & b) return 0;
    int swaps = 0;
    for (std::uint32_t rest = b; rest; rest &= rest - 1) {
        const int j = std::countr_zero(rest);
        swaps += std::popcount(a >> (j + 1));
    }
    return swaps % 2 ? -1 : 1;
}

// Exterior form on a fixed basis e^0..e^{dim-1}, stored sparsely by index mask.
// Coefficients may be any ring-like type (double, Jet).
template <class T>
class Form {
public:
    using Terms = std::map<std::uint32_t, T>;

    explicit Form(int dim = 0) : dim_(dim) {
        if (dim < 0 || dim > 31) throw std::invalid_argument("Form: dimension out of range");
    }

    static Form basis(int dim, int i, T coeff) {
        Form f(dim);
        f.add(1u << i, std::move(coeff));
        return f;
    }
    static Form scalar(int dim, T c) {
        Form f(dim);
        f.add(0u, std::move(c));
        return f;
    }

    int dim() const { return dim_; }
    const Terms& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

    void add(std::uint32_t mask, const T& c) {
        auto it = terms_.find(mask);
        if (it == terms_.end()) terms_.emplace(mask, c);
        else it->second += c;
    }

    const T* find(std::uint32_t mask) const {
        auto it = terms_.find(mask);
        return it == terms_.end() ? nullptr : &it->second;
    }

    Form& operator+=(const Form& o) {
        check(o);
        for (const auto& [m, c] : o.terms_) add(m, c);
        return *this;
    }
    Form& operator-=(const Form& o) {
        check(o);
        for (const auto& [m, c] : o.terms_) add(m, -1.0 * c);
        return *this;
    }
    friend Form operator+(Form a, const Form& b) { return a += b; }
    friend Form operator-(Form a, const Form& b) { return a -= b; }
    friend Form operator*(double s, Form a) {
        for (auto& [m, c] : a.terms_) c = s * c;
        return a;
    }
    friend Form operator*(const T& s, const Form& a)
        requires(!std::is_same_v<T, double>)
    {
        Form r(a.dim_);
        for (const auto& [m, c] : a.terms_) r.terms_.emplace(m, s * c);
        return r;
    }

    friend Form operator^(const Form& a, const Form& b) {
        a.check(b);
        Form r(a.dim_);
        for (const auto& [ma, ca] : a.terms_)
            for (const auto& [mb, cb] : b.terms_) {
                const int s = wedge_sign(ma, mb);
                if (s != 0) r.add(ma | mb, static_cast<double>(s) * (ca * cb));
            }
        return r;
    }

    // Homogeneous part of a given degree.
    Form part(int degree) const {
        Form r(dim_);
        for (const auto& [m, c] : terms_)
            if (std::popcount(m) == degree) r.terms_.emplace(m, c);
        return r;
    }

    template <class F>
    auto transform(F&& f) const {
        using U = decltype(f(std::declval<const T&>()));
        Form<U> r(dim_);
        for (const auto& [m, c] : terms_) r.add(m, f(c));
        return r;
    }

private:
    void check(const Form& o) const {
        if (o.dim_ != dim_) throw std::invalid_argument("Form: dimension mismatch");
    }

    int dim_;
    Terms terms_;
};

inline double max_abs(const Form<double>& f) {
    double m = 0;
    for (const auto& [k, c] : f.terms()) m = std::max(m, std::abs(c));
    return m;
}

// One-form from covector components, two-form from an antisymmetric matrix β(X,Y) = Xᵀ M Y.
template <class Vec>
Form<double> one_form(const Vec& v) {
    Form<double> f(static_cast<int>(v.size()));
    for (int i = 0; i < static_cast<int>(v.size()); ++i)
        if (v[i] != 0.0) f.add(1u << i, v[i]);
    return f;
}

template <class Mat>
Form<double> two_form(const Mat& M) {
    const int d = static_cast<int>(M.rows());
    Form<double> f(d);
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            if (M(i, j) != 0.0) f.add((1u << i) | (1u << j), M(i, j));
    return f;
}

// Seven-dimensional two-step nilpotent algebras on e¹..e⁷ (indices 0..6 here).
// de^i = Σ_{j<k} c[i][j][k] e^{jk}, stored antisymmetric in (j, k).
struct StructureConstants {
    using Table = std::array<std::array<std::array<double, 7>, 7>, 7>;
    Table c{};
    Eigen::Matrix3d A = Eigen::Matrix3d::Zero();

    Form<double> de(int i) const;
    // max |d(de^i)| over i, computed in the exterior algebra.
    double jacobi_residual() const;
    double distance(const StructureConstants& o) const; // max |c - c'|
};

// σ₁ = e¹²−e³⁴, σ₂ = e¹³+e²⁴, σ₃ = e¹⁴−e²³ and ω₁ = e¹²+e³⁴, ω₂ = e¹³−e²⁴, ω₃ = e¹⁴+e²³ (j = 0, 1, 2).
Form<double> sigma_form(int j);
Form<double> kahler_form(int j);
StructureConstants make_KA(const Eigen::Matrix3d& A);
// A_ε = [[0, b, 0], [a, 0, −b], [0, 0, ε]].
StructureConstants contract(double eps, double a, double b);

// Form on the coframe e¹..e⁷ whose coefficients are jets (at a fixed base point) in
// the base variables x¹..x⁴. All coefficients share one jet order; binary operations
// truncate to the smaller order.
class FrameForm {
public:
    static constexpr int kDim = 7;
    static constexpr int kBase = 4;
    static constexpr std::uint32_t kBaseMask = 0xF;
    static constexpr std::uint32_t kVolumeMask = 0x7F;

    explicit FrameForm(int order = Jet::kMaxOrder) : form_(kDim), order_(order) {}
    FrameForm(const Form<double>& f, int order);

    static FrameForm term(std::uint32_t mask, const Jet& c);
    static FrameForm function(const Jet& c) { return term(0u, c); }

    int order() const { return order_; }
    const Form<Jet>& form() const { return form_; }
    Jet coefficient(std::uint32_t mask) const;
    void add(std::uint32_t mask, const Jet& c);

    FrameForm truncated(int order) const;
    FrameForm part(int degree) const;
    // Largest |value| of any coefficient, optionally ignoring one mask.
    double max_value(std::uint32_t skip = ~0u) const;
    // Constant-coefficient values.
    Form<double> values() const;

    FrameForm& operator+=(const FrameForm& o);
    FrameForm& operator-=(const FrameForm& o);
    friend FrameForm operator+(FrameForm a, const FrameForm& b) { return a += b; }
    friend FrameForm operator-(FrameForm a, const FrameForm& b) { return a -= b; }
    friend FrameForm operator*(double s, const FrameForm& a);
    friend FrameForm operator*(const Jet& s, const FrameForm& a);
    friend FrameForm operator^(const FrameForm& a, const FrameForm& b);

private:
    Form<Jet> form_;
    int order_;
};

// Chevalley–Eilenberg differential with function coefficients: coefficient
// differentials along e¹..e⁴ plus the structure-constant part. The jet order drops by one.
FrameForm ce_differential(const FrameForm& alpha, const StructureConstants& sc);

// Hodge star of ḡ with oriented orthonormal coframe ē^i = e^f e^i (i ≤ 4), ē^i = e^i (i > 4),
// volume ē¹∧…∧ē⁷. `f` is the jet of the conformal function.
FrameForm hodge_star(const FrameForm& alpha, const Jet& f);
// Pointwise ḡ-norm² of a form, from its coefficients.
Jet frame_norm2(const FrameForm& alpha, const Jet& f);
// ē^I as a form in the e-basis; and a conversion of coefficients between the bases.
FrameForm orthonormal_basis(std::uint32_t mask, const Jet& f);
// Coefficient of ē^I given a form in the e-basis.
Jet orthonormal_coefficient(const FrameForm& alpha, std::uint32_t mask, const Jet& f);

} // namespace carnot
