#pragma once

#include <cmath>
#include <ostream>

#include "qrnn/errors.hpp"

namespace qrnn {

/// Quaternion q = a + i b + j c + k d over doubles. Value type; all
/// operations are pure. Multiplication follows the Hamilton rules
/// i^2 = j^2 = k^2 = ijk = -1, ij = k, jk = i, ki = j (noncommutative).
struct Quaternion {
    double a = 0.0;  ///< real (scalar) part
    double b = 0.0;  ///< i coefficient
    double c = 0.0;  ///< j coefficient
    double d = 0.0;  ///< k coefficient

    constexpr Quaternion() = default;
    constexpr Quaternion(double a_, double b_, double c_, double d_) : a(a_), b(b_), c(c_), d(d_) {}

    /// Embeds a real scalar.
    static constexpr Quaternion real(double r) { return {r, 0.0, 0.0, 0.0}; }
    /// Embeds a 3-D point as a pure quaternion (zero real part).
    static constexpr Quaternion pure(double x, double y, double z) { return {0.0, x, y, z}; }

    static constexpr Quaternion zero() { return {}; }
    static constexpr Quaternion one() { return {1.0, 0.0, 0.0, 0.0}; }
    static constexpr Quaternion unit_i() { return {0.0, 1.0, 0.0, 0.0}; }
    static constexpr Quaternion unit_j() { return {0.0, 0.0, 1.0, 0.0}; }
    static constexpr Quaternion unit_k() { return {0.0, 0.0, 0.0, 1.0}; }

    constexpr Quaternion operator+(const Quaternion& o) const { return {a + o.a, b + o.b, c + o.c, d + o.d}; }
    constexpr Quaternion operator-(const Quaternion& o) const { return {a - o.a, b - o.b, c - o.c, d - o.d}; }
    constexpr Quaternion operator-() const { return {-a, -b, -c, -d}; }

    Quaternion& operator+=(const Quaternion& o) {
        a += o.a; b += o.b; c += o.c; d += o.d;
        return *this;
    }
    Quaternion& operator-=(const Quaternion& o) {
        a -= o.a; b -= o.b; c -= o.c; d -= o.d;
        return *this;
    }

    constexpr Quaternion operator*(double s) const { return {a * s, b * s, c * s, d * s}; }
    friend constexpr Quaternion operator*(double s, const Quaternion& q) { return q * s; }

    constexpr bool operator==(const Quaternion& o) const = default;

    bool finite() const {
        return std::isfinite(a) && std::isfinite(b) && std::isfinite(c) && std::isfinite(d);
    }
};

/// Hamilton product p (x) q. Order matters: hamilton_mul(i, j) = k while
/// hamilton_mul(j, i) = -k.
constexpr Quaternion hamilton_mul(const Quaternion& p, const Quaternion& q) {
    return {
        p.a * q.a - p.b * q.b - p.c * q.c - p.d * q.d,
        p.a * q.b + p.b * q.a + p.c * q.d - p.d * q.c,
        p.a * q.c - p.b * q.d + p.c * q.a + p.d * q.b,
        p.a * q.d + p.b * q.c - p.c * q.b + p.d * q.a,
    };
}

constexpr Quaternion operator*(const Quaternion& p, const Quaternion& q) { return hamilton_mul(p, q); }

/// q* = a - ib - jc - kd.
constexpr Quaternion conjugate(const Quaternion& q) { return {q.a, -q.b, -q.c, -q.d}; }

/// |q|^2 = a^2 + b^2 + c^2 + d^2.
constexpr double modulus_squared(const Quaternion& q) {
    return q.a * q.a + q.b * q.b + q.c * q.c + q.d * q.d;
}

/// |q| = sqrt(q q*).
inline double modulus(const Quaternion& q) { return std::sqrt(modulus_squared(q)); }

/// q^{-1} = q* / |q|^2 for q != 0.
inline Quaternion inverse(const Quaternion& q) {
    double m2 = modulus_squared(q);
    if (m2 == 0.0) raise(ErrorKind::domain_error, "inverse of zero quaternion");
    return conjugate(q) * (1.0 / m2);
}

/// Axis selector for the involution q^mu = mu q mu^{-1}.
enum class Involution { one, i, j, k };

/// q^mu = mu q mu^{-1}. Identity for mu = 1; for mu in {i, j, k} a sign
/// flip of the two other imaginary parts (an algebra automorphism and a
/// self-inverse map).
constexpr Quaternion rotate(const Quaternion& q, Involution mu) {
    switch (mu) {
        case Involution::one: return q;
        case Involution::i: return {q.a, q.b, -q.c, -q.d};
        case Involution::j: return {q.a, -q.b, q.c, -q.d};
        case Involution::k: return {q.a, -q.b, -q.c, q.d};
    }
    return q;
}

/// The unit quaternion corresponding to an involution axis.
constexpr Quaternion involution_unit(Involution mu) {
    switch (mu) {
        case Involution::one: return Quaternion::one();
        case Involution::i: return Quaternion::unit_i();
        case Involution::j: return Quaternion::unit_j();
        case Involution::k: return Quaternion::unit_k();
    }
    return Quaternion::one();
}

inline constexpr Involution kInvolutions[4] = {Involution::one, Involution::i, Involution::j,
                                               Involution::k};

inline std::ostream& operator<<(std::ostream& os, const Quaternion& q) {
    return os << "(" << q.a << ", " << q.b << "i, " << q.c << "j, " << q.d << "k)";
}

}  // namespace qrnn
