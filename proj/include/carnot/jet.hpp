#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace carnot {

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Truncated Taylor data of a scalar function of `dim` variables at a point.
// Derivative tensors are stored in full (not packed) and kept symmetric.
class Jet {
public:
    static constexpr int kMaxOrder = 3;

    Jet() = default;
    Jet(int dim, int order, double value = 0.0);

    static Jet constant(int dim, int order, double value) { return Jet(dim, order, value); }
    static Jet variable(int dim, int order, int index, double value);

    int dim() const { return dim_; }
    int order() const { return order_; }

    double value() const { return c_.empty() ? 0.0 : c_[0]; }
    double d(int i) const { return c_[1 + i]; }
    double d(int i, int j) const { return c_[h0() + i * dim_ + j]; }
    double d(int i, int j, int k) const { return c_[t0() + (i * dim_ + j) * dim_ + k]; }

    void set_value(double v) { c_[0] = v; }
    void set_d(int i, double v) { c_[1 + i] = v; }
    // Symmetric setters write every permutation.
    void set_d(int i, int j, double v);
    void set_d(int i, int j, int k, double v);

    std::vector<double> gradient() const;
    double laplacian() const;

    // ∂f/∂x_i as a jet of one order less.
    Jet derivative(int i) const;
    Jet truncated(int order) const;

    // Max deviation from symmetry of the stored tensors.
    double symmetry_defect() const;

    Jet& operator+=(const Jet& o);
    Jet& operator-=(const Jet& o);
    Jet& operator*=(const Jet& o);
    Jet& operator/=(const Jet& o);
    Jet& operator+=(double s) { c_[0] += s; return *this; }
    Jet& operator-=(double s) { c_[0] -= s; return *this; }
    Jet& operator*=(double s);
    Jet& operator/=(double s) { return *this *= (1.0 / s); }

    Jet operator-() const;

    // Outer function given by its derivatives g, g', g'', g''' at value().
    Jet compose(double g0, double g1, double g2, double g3) const;

    friend bool same_shape(const Jet& a, const Jet& b) { return a.dim_ == b.dim_ && a.order_ == b.order_; }

private:
    int h0() const { return 1 + dim_; }
    int t0() const { return 1 + dim_ + dim_ * dim_; }
    static std::size_t storage(int dim, int order);
    void require_shape(const Jet& o) const;

    int dim_ = 0;
    int order_ = 0;
    std::vector<double> c_;
};

inline Jet operator+(Jet a, const Jet& b) { return a += b; }
inline Jet operator-(Jet a, const Jet& b) { return a -= b; }
inline Jet operator*(Jet a, const Jet& b) { return a *= b; }
inline Jet operator/(Jet a, const Jet& b) { return a /= b; }
inline Jet operator+(Jet a, double s) { return a += s; }
inline Jet operator+(double s, Jet a) { return a += s; }
inline Jet operator-(Jet a, double s) { return a -= s; }
inline Jet operator-(double s, const Jet& a) { return (-a) += s; }
inline Jet operator*(Jet a, double s) { return a *= s; }
inline Jet operator*(double s, Jet a) { return a *= s; }
inline Jet operator/(Jet a, double s) { return a /= s; }
Jet operator/(double s, const Jet& a);

Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet sqrt(const Jet& a);
Jet pow(const Jet& a, double p);
Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet square(const Jet& a);
Jet reciprocal(const Jet& a);

// Scalar helpers so generic code can be instantiated with double or Jet.
inline double square(double a) { return a * a; }
inline double value_of(double a) { return a; }
inline double value_of(const Jet& a) { return a.value(); }

using JetFunction = std::function<Jet(std::span<const Jet>)>;

class ScalarField {
public:
    ScalarField() = default;
    ScalarField(int dim, JetFunction f) : dim_(dim), f_(std::move(f)) {}

    int dim() const { return dim_; }
    Jet jet(std::span<const double> p, int order) const;
    double value(std::span<const double> p) const;
    Jet operator()(std::span<const Jet> vars) const { return f_(vars); }
    explicit operator bool() const { return static_cast<bool>(f_); }

private:
    int dim_ = 0;
    JetFunction f_;
};

std::vector<Jet> seed_variables(std::span<const double> p, int order);

struct FdOptions {
    double step = 1e-5;     // first derivatives
    bool richardson = true; // one level of extrapolation
};

// Central-difference estimate of the jet of `field` at p. Truncation error is
// O(h^4) after Richardson; higher orders use larger steps to contain roundoff.
Jet fd_oracle(const ScalarField& field, std::span<const double> p, int order, FdOptions opt = {});

// Largest relative deviation between two jets of equal shape, per component,
// with relative scale max(|a|,|b|,floor).
double jet_distance(const Jet& a, const Jet& b, double floor = 1.0);

} // namespace carnot
