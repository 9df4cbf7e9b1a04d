#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "helf/geometry.hpp"

// Test-only helpers: random curve generators and independent oracles. These
// stay independent of the implementation paths they are used to check.

namespace testsupport {

using helf::Model;
using helf::SampledCurve;
using helf::Topology;
using helf::Vec2;

// Smooth random closed disk curve: circle of moderate radius plus a handful
// of low-order Fourier modes. Kept well inside the disk.
inline SampledCurve random_closed_disk_curve(std::mt19937_64& rng, int n, double base_radius = 0.45,
                                             double amp = 0.035, int max_mode = 4) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<double> ar(max_mode + 1), br(max_mode + 1), at(max_mode + 1), bt(max_mode + 1);
  for (int k = 0; k <= max_mode; ++k) {
    ar[k] = amp * U(rng);
    br[k] = amp * U(rng);
    at[k] = amp * U(rng);
    bt[k] = amp * U(rng);
  }
  SampledCurve c;
  c.model = Model::disk;
  c.topology = Topology::closed;
  c.param_a = -2.0;
  c.param_b = 2.0;
  c.nodes.resize(n);
  for (int i = 0; i < n; ++i) {
    const double t = 2.0 * helf::pi * i / n;
    double r = base_radius, dx = 0.0, dy = 0.0;
    for (int k = 1; k <= max_mode; ++k) {
      r += ar[k] * std::cos(k * t) + br[k] * std::sin(k * t);
      dx += at[k] * std::cos(k * t + 0.7 * k);
      dy += bt[k] * std::sin(k * t + 0.3 * k);
    }
    c.nodes[i] = {r * std::cos(t) + 0.3 * amp * dx, r * std::sin(t) + 0.3 * amp * dy};
  }
  return c;
}

// Smooth random open half-plane curve, bounded away from u2 = 0.
inline SampledCurve random_open_halfplane_curve(std::mt19937_64& rng, int n, double base_height = 1.0,
                                                double amp = 0.15, int max_mode = 3) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<double> a(max_mode + 1), b(max_mode + 1);
  for (int k = 0; k <= max_mode; ++k) {
    a[k] = amp * U(rng);
    b[k] = amp * U(rng);
  }
  SampledCurve c;
  c.model = Model::half_plane;
  c.topology = Topology::open;
  c.param_a = 0.0;
  c.param_b = 1.0;
  c.nodes.resize(n);
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / (n - 1);
    double y = base_height, x = 1.2 * t;
    for (int k = 1; k <= max_mode; ++k) {
      y += a[k] * std::sin(helf::pi * k * t);
      x += 0.5 * b[k] * std::sin(helf::pi * k * t);
    }
    c.nodes[i] = {x, y};
  }
  return c;
}

// Composite-trapezoid quadrature oracle on a lambda, refined until stable.
template <typename F>
inline double quad_trapezoid(F f, double a, double b, int n) {
  double acc = 0.5 * (f(a) + f(b));
  const double h = (b - a) / n;
  for (int i = 1; i < n; ++i) acc += f(a + i * h);
  return acc * h;
}

// Independent Jacobi-elliptic oracle: RK4 on sn' = cn dn, cn' = -sn dn,
// dn' = -p^2 sn cn from u = 0 with a small fixed step.
struct JacobiOracle {
  double sn, cn, dn;
};

inline JacobiOracle jacobi_ode_oracle(double u, double p, double step = 1e-4) {
  double s = 0.0, sn = 0.0, cn = 1.0, dn = 1.0;
  const double dir = u >= 0.0 ? 1.0 : -1.0;
  const double target = std::abs(u);
  auto rhs = [&](double S, double C, double D, double& dS, double& dC, double& dD) {
    dS = C * D;
    dC = -S * D;
    dD = -p * p * S * C;
  };
  while (s < target) {
    const double h = dir * std::min(step, target - s);
    double k1s, k1c, k1d, k2s, k2c, k2d, k3s, k3c, k3d, k4s, k4c, k4d;
    rhs(sn, cn, dn, k1s, k1c, k1d);
    rhs(sn + 0.5 * h * k1s, cn + 0.5 * h * k1c, dn + 0.5 * h * k1d, k2s, k2c, k2d);
    rhs(sn + 0.5 * h * k2s, cn + 0.5 * h * k2c, dn + 0.5 * h * k2d, k3s, k3c, k3d);
    rhs(sn + h * k3s, cn + h * k3c, dn + h * k3d, k4s, k4c, k4d);
    sn += (h / 6.0) * (k1s + 2 * k2s + 2 * k3s + k4s);
    cn += (h / 6.0) * (k1c + 2 * k2c + 2 * k3c + k4c);
    dn += (h / 6.0) * (k1d + 2 * k2d + 2 * k3d + k4d);
    s += std::abs(h);
  }
  return {sn, cn, dn};
}

// Arc-length table inversion oracle for reparametrization checks: positions
// along a polyline at equal fractions of total length, computed directly.
inline std::vector<Vec2> equal_arclength_points(const std::vector<Vec2>& poly, bool closed,
                                                int n_out) {
  const int n = static_cast<int>(poly.size());
  const int segs = closed ? n : n - 1;
  std::vector<double> cum(segs + 1, 0.0);
  for (int i = 0; i < segs; ++i)
    cum[i + 1] = cum[i] + helf::norm(poly[(i + 1) % n] - poly[i]);
  std::vector<Vec2> out(n_out);
  for (int j = 0; j < n_out; ++j) {
    double target = closed ? cum[segs] * j / n_out : cum[segs] * j / (n_out - 1);
    int seg = 0;
    while (seg < segs - 1 && cum[seg + 1] < target) ++seg;
    const double den = cum[seg + 1] - cum[seg];
    const double t = den > 0 ? (target - cum[seg]) / den : 0.0;
    out[j] = poly[seg % n] + t * (poly[(seg + 1) % n] - poly[seg % n]);
  }
  return out;
}

}  // namespace testsupport
