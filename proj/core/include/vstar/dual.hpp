/**
 * @file dual.hpp
 * @brief Minimal forward-mode dual numbers with a fixed number of directional derivatives.
 */
#pragma once

#include <array>
#include <cstddef>

namespace vstar {

template <std::size_t N>
struct Dual {
  double val = 0.0;
  std::array<double, N> d{};

  Dual() = default;
  Dual(double v) : val(v) {}  // NOLINT(google-explicit-constructor): constants promote
  static Dual variable(double v, std::size_t k) {
    Dual x(v);
    x.d[k] = 1.0;
    return x;
  }

  Dual& operator+=(const Dual& o) {
    val += o.val;
    for (std::size_t k = 0; k < N; ++k) d[k] += o.d[k];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    val -= o.val;
    for (std::size_t k = 0; k < N; ++k) d[k] -= o.d[k];
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    for (std::size_t k = 0; k < N; ++k) d[k] = d[k] * o.val + val * o.d[k];
    val *= o.val;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    const double inv = 1.0 / o.val;
    val *= inv;
    for (std::size_t k = 0; k < N; ++k) d[k] = (d[k] - val * o.d[k]) * inv;
    return *this;
  }
};

template <std::size_t N>
Dual<N> operator-(Dual<N> a) {
  a.val = -a.val;
  for (auto& x : a.d) x = -x;
  return a;
}
template <std::size_t N>
Dual<N> operator+(Dual<N> a, const Dual<N>& b) { return a += b; }
template <std::size_t N>
Dual<N> operator-(Dual<N> a, const Dual<N>& b) { return a -= b; }
template <std::size_t N>
Dual<N> operator*(Dual<N> a, const Dual<N>& b) { return a *= b; }
template <std::size_t N>
Dual<N> operator/(Dual<N> a, const Dual<N>& b) { return a /= b; }
template <std::size_t N>
Dual<N> operator+(Dual<N> a, double b) { a.val += b; return a; }
template <std::size_t N>
Dual<N> operator+(double b, Dual<N> a) { a.val += b; return a; }
template <std::size_t N>
Dual<N> operator-(Dual<N> a, double b) { a.val -= b; return a; }
template <std::size_t N>
Dual<N> operator-(double b, const Dual<N>& a) { return -a + b; }
template <std::size_t N>
Dual<N> operator*(Dual<N> a, double b) {
  a.val *= b;
  for (auto& x : a.d) x *= b;
  return a;
}
template <std::size_t N>
Dual<N> operator*(double b, Dual<N> a) { return a * b; }
template <std::size_t N>
Dual<N> operator/(Dual<N> a, double b) { return a * (1.0 / b); }
template <std::size_t N>
Dual<N> operator/(double b, const Dual<N>& a) { return Dual<N>(b) / a; }

/// f(a) given f(a.val) and f'(a.val).
template <std::size_t N>
Dual<N> chain(const Dual<N>& a, double f, double df) {
  Dual<N> out(f);
  for (std::size_t k = 0; k < N; ++k) out.d[k] = df * a.d[k];
  return out;
}

inline double value_of(double x) { return x; }
template <std::size_t N>
double value_of(const Dual<N>& x) { return x.val; }

}  // namespace vstar
