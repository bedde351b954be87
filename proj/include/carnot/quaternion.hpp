#pragma once

#include <array>
#include <cmath>

#include "carnot/jet.hpp"

namespace carnot {

// q = w + x i + y j + z k. Templated so the same formulas run on doubles and on jets.
template <class T>
struct Quat {
    T w{}, x{}, y{}, z{};

    Quat() = default;
    Quat(T w_, T x_, T y_, T z_) : w(std::move(w_)), x(std::move(x_)), y(std::move(y_)), z(std::move(z_)) {}

    T& operator[](int i) { return i == 0 ? w : i == 1 ? x : i == 2 ? y : z; }
    const T& operator[](int i) const { return i == 0 ? w : i == 1 ? x : i == 2 ? y : z; }

    Quat conj() const { return {w, -x, -y, -z}; }
    T norm2() const { return w * w + x * x + y * y + z * z; }

    Quat& operator+=(const Quat& o) { w += o.w; x += o.x; y += o.y; z += o.z; return *this; }
    Quat& operator-=(const Quat& o) { w -= o.w; x -= o.x; y -= o.y; z -= o.z; return *this; }
    Quat operator-() const { return {-w, -x, -y, -z}; }
};

template <class T> Quat<T> operator+(Quat<T> a, const Quat<T>& b) { return a += b; }
template <class T> Quat<T> operator-(Quat<T> a, const Quat<T>& b) { return a -= b; }

template <class T>
Quat<T> operator*(const Quat<T>& a, const Quat<T>& b) {
    return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

template <class T, class S>
Quat<T> scale(const Quat<T>& a, const S& s) { return {a.w * s, a.x * s, a.y * s, a.z * s}; }

template <class T>
Quat<T> inverse(const Quat<T>& a) {
    const T n = a.norm2();
    const Quat<T> c = a.conj();
    return {c.w / n, c.x / n, c.y / n, c.z / n};
}

template <class T>
Quat<T> real_quat(const T& r, const T& zero) { return {r, zero, zero, zero}; }

using Quaternion = Quat<double>;

inline double norm(const Quaternion& q) { return std::sqrt(q.norm2()); }

inline const std::array<Quaternion, 3>& imaginary_units() {
    static const std::array<Quaternion, 3> u{Quaternion{0, 1, 0, 0}, Quaternion{0, 0, 1, 0}, Quaternion{0, 0, 0, 1}};
    return u;
}

// The 3x3 rotation of Im H given by v -> λ v λ̄ for a unit quaternion λ.
std::array<std::array<double, 3>, 3> conjugation_rotation(const Quaternion& lambda);

} // namespace carnot
