#pragma once

#include <array>
#include <cmath>

#include "helf/geometry.hpp"

// Jacobi elliptic functions sn, cn, dn and the complete elliptic integrals,
// all by arithmetic-geometric-mean descent with amplitude back-substitution.
// Modulus convention: p in [0,1] with cn(u,0) = cos u and cn(u,1) = sech u.

namespace helf {

namespace detail {

struct AgmScale {
  std::array<double, 64> a{};
  std::array<double, 64> c{};
  int levels = 0;
};

inline AgmScale agm_descend(double p) {
  AgmScale s;
  double a = 1.0, b = std::sqrt(1.0 - p * p), c = p;
  int i = 0;
  s.a[0] = a;
  s.c[0] = c;
  while (std::abs(c) > 1e-16 && i < 60) {
    const double an = 0.5 * (a + b);
    const double cn = 0.5 * (a - b);
    b = std::sqrt(a * b);
    a = an;
    c = cn;
    ++i;
    s.a[i] = a;
    s.c[i] = c;
  }
  s.levels = i;
  return s;
}

}  // namespace detail

struct JacobiValues {
  double sn = 0, cn = 1, dn = 1;
};

inline JacobiValues jacobi_elliptic(double u, double p) {
  if (p < 0.0 || p > 1.0) throw error("jacobi_elliptic: modulus outside [0,1]");
  JacobiValues v;
  if (p == 0.0) {
    v.sn = std::sin(u);
    v.cn = std::cos(u);
    v.dn = 1.0;
    return v;
  }
  if (p == 1.0) {
    v.sn = std::tanh(u);
    v.cn = 1.0 / std::cosh(u);
    v.dn = v.cn;
    return v;
  }
  const auto s = detail::agm_descend(p);
  double phi = std::ldexp(s.a[s.levels], s.levels) * u;
  for (int i = s.levels; i >= 1; --i) {
    const double t = std::clamp(s.c[i] * std::sin(phi) / s.a[i], -1.0, 1.0);
    phi = 0.5 * (phi + std::asin(t));
  }
  v.sn = std::sin(phi);
  v.cn = std::cos(phi);
  v.dn = std::sqrt(std::max(0.0, 1.0 - p * p * v.sn * v.sn));
  return v;
}

inline double jacobi_sn(double u, double p) { return jacobi_elliptic(u, p).sn; }
inline double jacobi_cn(double u, double p) { return jacobi_elliptic(u, p).cn; }
inline double jacobi_dn(double u, double p) { return jacobi_elliptic(u, p).dn; }

// Complete elliptic integral of the first kind, K(p). K(1) is infinite.
inline double elliptic_K(double p) {
  if (p < 0.0 || p > 1.0) throw error("elliptic_K: modulus outside [0,1]");
  if (p == 1.0) return std::numeric_limits<double>::infinity();
  const auto s = detail::agm_descend(p);
  return pi / (2.0 * s.a[s.levels]);
}

// Complete elliptic integral of the second kind, E(p).
inline double elliptic_E(double p) {
  if (p < 0.0 || p > 1.0) throw error("elliptic_E: modulus outside [0,1]");
  if (p == 1.0) return 1.0;
  const auto s = detail::agm_descend(p);
  double sum = 0.0;
  for (int i = 0; i <= s.levels; ++i) sum += std::ldexp(s.c[i] * s.c[i], i - 1);
  return elliptic_K(p) * (1.0 - sum);
}

}  // namespace helf
