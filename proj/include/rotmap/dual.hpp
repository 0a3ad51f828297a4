#pragma once

#include <cmath>

namespace rotmap {

// First-order dual number a + ε·b with ε² = 0. Seeding b = 1 on one input
// coordinate and running a (templated) forward computation yields the exact
// partial derivative in .d, no step-size choice involved.
struct Dual {
    double v = 0.0;  // value
    double d = 0.0;  // derivative

    Dual() = default;
    Dual(double value) : v(value) {}  // NOLINT: implicit promotion wanted
    Dual(double value, double deriv) : v(value), d(deriv) {}
};

inline Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
inline Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
inline Dual operator-(Dual a) { return {-a.v, -a.d}; }
inline Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
inline Dual operator/(Dual a, Dual b) {
    return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)};
}

inline Dual& operator+=(Dual& a, Dual b) { a = a + b; return a; }
inline Dual& operator-=(Dual& a, Dual b) { a = a - b; return a; }
inline Dual& operator*=(Dual& a, Dual b) { a = a * b; return a; }
inline Dual& operator/=(Dual& a, Dual b) { a = a / b; return a; }

// Comparisons act on the value part; branches in templated code therefore
// follow the primal control flow.
inline bool operator<(Dual a, Dual b) { return a.v < b.v; }
inline bool operator>(Dual a, Dual b) { return a.v > b.v; }
inline bool operator<=(Dual a, Dual b) { return a.v <= b.v; }
inline bool operator>=(Dual a, Dual b) { return a.v >= b.v; }
inline bool operator==(Dual a, Dual b) { return a.v == b.v; }
inline bool operator!=(Dual a, Dual b) { return a.v != b.v; }

inline Dual sqrt(Dual a) {
    const double s = std::sqrt(a.v);
    return {s, a.d / (2.0 * s)};
}
inline Dual sin(Dual a) { return {std::sin(a.v), a.d * std::cos(a.v)}; }
inline Dual cos(Dual a) { return {std::cos(a.v), -a.d * std::sin(a.v)}; }
inline Dual tan(Dual a) {
    const double c = std::cos(a.v);
    return {std::tan(a.v), a.d / (c * c)};
}
inline Dual tanh(Dual a) {
    const double t = std::tanh(a.v);
    return {t, a.d * (1.0 - t * t)};
}
inline Dual exp(Dual a) {
    const double e = std::exp(a.v);
    return {e, a.d * e};
}
inline Dual log(Dual a) { return {std::log(a.v), a.d / a.v}; }
inline Dual abs(Dual a) { return a.v < 0.0 ? -a : a; }
inline Dual atan2(Dual y, Dual x) {
    const double denom = x.v * x.v + y.v * y.v;
    return {std::atan2(y.v, x.v), (x.v * y.d - y.v * x.d) / denom};
}

// Value extraction usable from code templated on the scalar type.
inline double value_of(double x) { return x; }
inline double value_of(Dual x) { return x.v; }

}  // namespace rotmap
