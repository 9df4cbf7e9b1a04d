#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

// Geometry of the hyperbolic plane in its two conformal models (Poincare disk
// and upper half plane), discretized curves, curvature, lengths, elastic
// energy and reparametrization.

namespace helf {

inline constexpr double pi = 3.14159265358979323846;

// --------------------------------------------------------------------------
// Errors

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct boundary_error : error { using error::error; };     // point at/over the model boundary
struct pole_error : error { using error::error; };         // disk_to_half at the pole (0,1)
struct immersion_error : error { using error::error; };    // degenerate edge / zero speed
struct topology_error : error { using error::error; };     // op applied to wrong topology
struct no_elastica_error : error { using error::error; };  // kappa0^2 in (0, lambda+2)
struct construction_error : error { using error::error; }; // shooting failed to close
struct window_error : error { using error::error; };       // blow-up window not clean
struct shoulder_error : error { using error::error; };     // dip count without shoulders
struct monitor_error : error { using error::error; };      // symmetry monitor on bad grid
struct io_error : error { using error::error; };

// --------------------------------------------------------------------------
// Vec2

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 b) const { return {x + b.x, y + b.y}; }
  Vec2 operator-(Vec2 b) const { return {x - b.x, y - b.y}; }
  Vec2 operator*(double a) const { return {x * a, y * a}; }
  Vec2 operator/(double a) const { return {x / a, y / a}; }
  Vec2 operator-() const { return {-x, -y}; }
  Vec2& operator+=(Vec2 b) { x += b.x; y += b.y; return *this; }
  Vec2& operator-=(Vec2 b) { x -= b.x; y -= b.y; return *this; }
};

inline Vec2 operator*(double a, Vec2 v) { return {a * v.x, a * v.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm2(Vec2 a) { return a.x * a.x + a.y * a.y; }
inline double norm(Vec2 a) { return std::sqrt(norm2(a)); }
// rotate by +90 degrees; used as the normal convention n = rot90(tangent)
inline Vec2 rot90(Vec2 v) { return {-v.y, v.x}; }

inline std::complex<double> to_complex(Vec2 v) { return {v.x, v.y}; }
inline Vec2 from_complex(std::complex<double> z) { return {z.real(), z.imag()}; }

// --------------------------------------------------------------------------
// Models and points

enum class Model { disk, half_plane };
enum class Topology { closed, open };

// Interior points keep |p| < 1; closure points relax to |p| <= 1 so that
// singular-limit traces can be stored without violating invariants.
struct DiskPoint { double x = 0, y = 0; };
struct ClosureDiskPoint { double x = 0, y = 0; };
struct HalfPlanePoint { double x = 0, y = 0; };

// Floor on 1-|p|^2 (resp. u2): below this the conformal factor is treated as
// a boundary evaluation and raises boundary_error instead of returning Inf.
inline constexpr double boundary_floor = 1e-14;

// Conformal speed factor f with |v|_g = f * |v|.
inline double metric_factor(Vec2 p, Model model) {
  if (model == Model::disk) {
    const double d = 1.0 - norm2(p);
    if (d < boundary_floor)
      throw boundary_error("metric_factor: disk point at or beyond the boundary");
    return 2.0 / d;
  }
  if (p.y < boundary_floor)
    throw boundary_error("metric_factor: half-plane point at or below u2 = 0");
  return 1.0 / p.y;
}

// Isometry Phi : disk -> half plane.
inline Vec2 disk_to_half(Vec2 p, bool allow_closure = false) {
  const double r2 = norm2(p);
  if (!allow_closure && r2 >= 1.0)
    throw boundary_error("disk_to_half: |p| >= 1");
  if (r2 > 1.0 + 1e-12)
    throw boundary_error("disk_to_half: |p| > 1");
  const double den = p.x * p.x + (p.y - 1.0) * (p.y - 1.0);
  if (den == 0.0)
    throw pole_error("disk_to_half: pole at p = (0,1)");
  return {2.0 * p.x / den, (1.0 - r2) / den};
}

// Inverse of Phi.
inline Vec2 half_to_disk(Vec2 u, bool allow_closure = false) {
  if (!allow_closure && u.y <= 0.0)
    throw boundary_error("half_to_disk: u2 <= 0");
  if (u.y < 0.0)
    throw boundary_error("half_to_disk: u2 < 0");
  const double den = u.x * u.x + (u.y + 1.0) * (u.y + 1.0);
  return {2.0 * u.x / den, (u.x * u.x + u.y * u.y - 1.0) / den};
}

// Differential of Phi applied to a tangent vector v at p. Phi is conformal:
// |DPhi v| = 2 |v| / |p - (0,1)|^2.
inline Vec2 disk_to_half_differential(Vec2 p, Vec2 v) {
  const double a = (p.y - 1.0) * (p.y - 1.0) - p.x * p.x;
  const double b = -2.0 * p.x * (p.y - 1.0);
  const double den = p.x * p.x + (p.y - 1.0) * (p.y - 1.0);
  const double s = 2.0 / (den * den);
  return {s * (a * v.x + b * v.y), s * (-b * v.x + a * v.y)};
}

// --------------------------------------------------------------------------
// Mobius isometries of the disk: F(z) = e^{i theta} (z - c) / (conj(c) z - 1).

struct MobiusIsometry {
  double theta = 0.0;
  Vec2 c{0.0, 0.0};

  Vec2 operator()(Vec2 p) const {
    const auto z = to_complex(p);
    const auto cc = to_complex(c);
    const auto w = std::polar(1.0, theta) * (z - cc) / (std::conj(cc) * z - 1.0);
    return from_complex(w);
  }

  // Complex derivative dF/dz (the map is holomorphic).
  std::complex<double> derivative(Vec2 p) const {
    const auto z = to_complex(p);
    const auto cc = to_complex(c);
    const auto den = std::conj(cc) * z - 1.0;
    return std::polar(1.0, theta) * (std::norm(cc) - 1.0) / (den * den);
  }
};

inline MobiusIsometry random_mobius(double theta, Vec2 c) { return {theta, c}; }

// --------------------------------------------------------------------------
// Sampled curves

// A discretized immersion. Closed curves sample [a,b) on n nodes with the
// wrap b ~ a; open curves sample [a,b] endpoints included.
struct SampledCurve {
  Model model = Model::disk;
  Topology topology = Topology::closed;
  std::vector<Vec2> nodes;
  double param_a = 0.0;
  double param_b = 1.0;

  int n() const { return static_cast<int>(nodes.size()); }
  bool closed() const { return topology == Topology::closed; }
  double dx() const {
    return closed() ? (param_b - param_a) / n() : (param_b - param_a) / (n() - 1);
  }
  double param(int i) const { return param_a + i * dx(); }
};

inline void validate_curve(const SampledCurve& c, bool allow_closure = false) {
  if (c.n() < 8) throw error("curve: fewer than 8 nodes");
  if (!(c.param_b > c.param_a)) throw error("curve: empty parameter domain");
  for (int i = 0; i < c.n(); ++i) {
    const Vec2 p = c.nodes[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw error("curve: non-finite node");
    if (c.model == Model::disk) {
      const double r2 = norm2(p);
      if (r2 >= 1.0 && !allow_closure) throw boundary_error("curve: node outside the open disk");
      if (r2 > 1.0 + 1e-12) throw boundary_error("curve: node outside the closed disk");
    } else {
      if (p.y <= 0.0 && !allow_closure) throw boundary_error("curve: node with u2 <= 0");
      if (p.y < -1e-12) throw boundary_error("curve: node with u2 < 0");
    }
  }
  const int m = c.closed() ? c.n() : c.n() - 1;
  for (int i = 0; i < m; ++i) {
    const Vec2 e = c.nodes[(i + 1) % c.n()] - c.nodes[i];
    if (norm2(e) == 0.0) throw immersion_error("curve: repeated consecutive nodes");
  }
}

// --------------------------------------------------------------------------
// Finite differences (4th order, uniform grid)

namespace detail {

// First derivative. Periodic uses the central 5-point stencil everywhere;
// open grids switch to one-sided 5-point stencils at the two nodes next to
// each end.
template <typename T>
inline void diff1(std::span<const T> f, double h, bool periodic, std::span<T> out) {
  const int n = static_cast<int>(f.size());
  const double s = 1.0 / (12.0 * h);
  auto central = [&](int im2, int im1, int ip1, int ip2) {
    return (f[im2] - 8.0 * f[im1] + 8.0 * f[ip1] - f[ip2]) * s;
  };
  if (periodic) {
    for (int i = 0; i < n; ++i) {
      const int im2 = (i - 2 + n) % n, im1 = (i - 1 + n) % n;
      const int ip1 = (i + 1) % n, ip2 = (i + 2) % n;
      out[i] = central(im2, im1, ip1, ip2);
    }
    return;
  }
  out[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) * s;
  out[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) * s;
  for (int i = 2; i < n - 2; ++i) out[i] = central(i - 2, i - 1, i + 1, i + 2);
  out[n - 2] = (-f[n - 5] + 6.0 * f[n - 4] - 18.0 * f[n - 3] + 10.0 * f[n - 2] + 3.0 * f[n - 1]) * s;
  out[n - 1] = (3.0 * f[n - 5] - 16.0 * f[n - 4] + 36.0 * f[n - 3] - 48.0 * f[n - 2] + 25.0 * f[n - 1]) * s;
}

// Second derivative, 4th order.
template <typename T>
inline void diff2(std::span<const T> f, double h, bool periodic, std::span<T> out) {
  const int n = static_cast<int>(f.size());
  const double s = 1.0 / (12.0 * h * h);
  auto central = [&](int im2, int im1, int i, int ip1, int ip2) {
    return (-f[im2] + 16.0 * f[im1] - 30.0 * f[i] + 16.0 * f[ip1] - f[ip2]) * s;
  };
  if (periodic) {
    for (int i = 0; i < n; ++i) {
      const int im2 = (i - 2 + n) % n, im1 = (i - 1 + n) % n;
      const int ip1 = (i + 1) % n, ip2 = (i + 2) % n;
      out[i] = central(im2, im1, i, ip1, ip2);
    }
    return;
  }
  out[0] = (45.0 * f[0] - 154.0 * f[1] + 214.0 * f[2] - 156.0 * f[3] + 61.0 * f[4] - 10.0 * f[5]) * s;
  out[1] = (10.0 * f[0] - 15.0 * f[1] - 4.0 * f[2] + 14.0 * f[3] - 6.0 * f[4] + f[5]) * s;
  for (int i = 2; i < n - 2; ++i) out[i] = central(i - 2, i - 1, i, i + 1, i + 2);
  out[n - 2] = (f[n - 6] - 6.0 * f[n - 5] + 14.0 * f[n - 4] - 4.0 * f[n - 3] - 15.0 * f[n - 2] + 10.0 * f[n - 1]) * s;
  out[n - 1] = (-10.0 * f[n - 6] + 61.0 * f[n - 5] - 156.0 * f[n - 4] + 214.0 * f[n - 3] - 154.0 * f[n - 2] + 45.0 * f[n - 1]) * s;
}

// Christoffel contraction Gamma(u, v) of the conformal metric e^{2 phi} delta
// at p, with grad phi supplied as (gx, gy):
//   Gamma^1 = gx u1 v1 + gy (u1 v2 + u2 v1) - gx u2 v2
//   Gamma^2 = -gy u1 v1 + gx (u1 v2 + u2 v1) + gy u2 v2
inline Vec2 christoffel(double gx, double gy, Vec2 u, Vec2 v) {
  const double s = u.x * v.y + u.y * v.x;
  return {gx * u.x * v.x + gy * s - gx * u.y * v.y,
          -gy * u.x * v.x + gx * s + gy * u.y * v.y};
}

// grad phi for the model's conformal factor: disk phi = log(2/(1-|p|^2)),
// half plane phi = -log u2.
inline void grad_phi(Vec2 p, Model model, double metric_f, double& gx, double& gy) {
  if (model == Model::disk) {
    gx = p.x * metric_f;
    gy = p.y * metric_f;
  } else {
    gx = 0.0;
    gy = -1.0 / p.y;
  }
}

}  // namespace detail

// --------------------------------------------------------------------------
// Derived per-node geometry of a sampled curve

struct CurveGeometry {
  std::vector<Vec2> d1;             // dgamma/dx
  std::vector<double> euc_speed;    // |dgamma/dx|
  std::vector<double> factor;       // conformal factor at the node
  std::vector<double> hyp_speed;    // |dgamma/dx|_g
  std::vector<Vec2> tangent;        // unit (hyperbolic) tangent d_s gamma
  std::vector<Vec2> normal;         // rot90(tangent)
  std::vector<Vec2> curvature_vec;  // kappa_vec = nabla_s d_s gamma
  std::vector<double> kappa;        // signed curvature <kappa_vec, normal>_g
};

inline CurveGeometry curve_geometry(const SampledCurve& c) {
  const int n = c.n();
  if (n < 5) throw error("curve_geometry: need at least 5 nodes");
  CurveGeometry g;
  g.d1.resize(n);
  g.euc_speed.resize(n);
  g.factor.resize(n);
  g.hyp_speed.resize(n);
  g.tangent.resize(n);
  g.normal.resize(n);
  g.curvature_vec.resize(n);
  g.kappa.resize(n);

  detail::diff1<Vec2>(c.nodes, c.dx(), c.closed(), g.d1);
  for (int i = 0; i < n; ++i) {
    g.euc_speed[i] = norm(g.d1[i]);
    if (g.euc_speed[i] == 0.0) throw immersion_error("curve_geometry: zero euclidean speed");
    g.factor[i] = metric_factor(c.nodes[i], c.model);
    g.hyp_speed[i] = g.factor[i] * g.euc_speed[i];
    g.tangent[i] = g.d1[i] / g.hyp_speed[i];
    g.normal[i] = rot90(g.tangent[i]);
  }
  std::vector<Vec2> dT(n);
  detail::diff1<Vec2>(g.tangent, c.dx(), c.closed(), dT);
  for (int i = 0; i < n; ++i) {
    double gx, gy;
    detail::grad_phi(c.nodes[i], c.model, g.factor[i], gx, gy);
    const Vec2 cov = dT[i] + detail::christoffel(gx, gy, g.d1[i], g.tangent[i]);
    g.curvature_vec[i] = cov / g.hyp_speed[i];
    const double f2 = g.factor[i] * g.factor[i];
    g.kappa[i] = f2 * dot(g.curvature_vec[i], g.normal[i]);
  }
  return g;
}

// Trapezoid quadrature of per-node values against the arc-length element.
inline double integrate_ds(const SampledCurve& c, std::span<const double> values,
                           std::span<const double> hyp_speed) {
  const int n = c.n();
  double acc = 0.0;
  if (c.closed()) {
    for (int i = 0; i < n; ++i) acc += values[i] * hyp_speed[i];
  } else {
    acc += 0.5 * values[0] * hyp_speed[0];
    for (int i = 1; i < n - 1; ++i) acc += values[i] * hyp_speed[i];
    acc += 0.5 * values[n - 1] * hyp_speed[n - 1];
  }
  return acc * c.dx();
}

// Signed curvature by the explicit half-plane formula
// (d2u2 du1 u2 - d2u1 du2 u2 + du1 |du|^2) / |du|^3.
inline std::vector<double> signed_curvature_halfplane_formula(const SampledCurve& c) {
  if (c.model != Model::half_plane)
    throw error("signed_curvature_halfplane_formula: half-plane curves only");
  const int n = c.n();
  std::vector<Vec2> d1(n), d2(n);
  detail::diff1<Vec2>(c.nodes, c.dx(), c.closed(), d1);
  detail::diff2<Vec2>(c.nodes, c.dx(), c.closed(), d2);
  std::vector<double> kappa(n);
  for (int i = 0; i < n; ++i) {
    const double speed2 = norm2(d1[i]);
    const double speed = std::sqrt(speed2);
    if (speed == 0.0) throw immersion_error("signed_curvature: zero euclidean speed");
    const double u2 = c.nodes[i].y;
    kappa[i] = (d2[i].y * d1[i].x * u2 - d2[i].x * d1[i].y * u2 + d1[i].x * speed2) /
               (speed2 * speed);
  }
  return kappa;
}

// Signed curvature of a discrete immersion. Half-plane curves use the
// explicit formula, disk curves the covariant-derivative path.
inline std::vector<double> signed_curvature(const SampledCurve& c) {
  if (c.n() < 5) throw error("signed_curvature: need at least 5 nodes");
  if (c.model == Model::half_plane) return signed_curvature_halfplane_formula(c);
  return curve_geometry(c).kappa;
}

// Covariant-derivative path in the native model (used for cross checks).
inline std::vector<double> signed_curvature_covariant(const SampledCurve& c) {
  return curve_geometry(c).kappa;
}

inline double elastic_energy(const SampledCurve& c) {
  const CurveGeometry g = curve_geometry(c);
  std::vector<double> k2(c.n());
  // |kappa_vec|_g^2 rather than the squared signed curvature: the two agree
  // up to the discrete curvature vector's spurious tangential part.
  for (int i = 0; i < c.n(); ++i)
    k2[i] = g.factor[i] * g.factor[i] * norm2(g.curvature_vec[i]);
  return integrate_ds(c, k2, g.hyp_speed);
}

inline double hyperbolic_length(const SampledCurve& c) {
  const CurveGeometry g = curve_geometry(c);
  std::vector<double> one(c.n(), 1.0);
  return integrate_ds(c, one, g.hyp_speed);
}

inline double euclidean_length(const SampledCurve& c) {
  const CurveGeometry g = curve_geometry(c);
  std::vector<double> one(c.n(), 1.0);
  return integrate_ds(c, one, g.euc_speed);
}

// --------------------------------------------------------------------------
// Polyline helpers

inline double polyline_length(const SampledCurve& c) {
  double acc = 0.0;
  const int m = c.closed() ? c.n() : c.n() - 1;
  for (int i = 0; i < m; ++i) acc += norm(c.nodes[(i + 1) % c.n()] - c.nodes[i]);
  return acc;
}

// Reparametrization by constant Euclidean speed: output nodes sit on the
// input polyline at equal increments of polyline arc length. Node 0 of a
// closed curve stays fixed (the base point of the parameter change).
inline SampledCurve reparam_constant_euclidean_speed(const SampledCurve& c, double a, double b,
                                                     int n_out = -1) {
  validate_curve(c, true);
  const int n = c.n();
  if (n_out < 0) n_out = n;
  const int segs = c.closed() ? n : n - 1;
  std::vector<double> cum(segs + 1, 0.0);
  for (int i = 0; i < segs; ++i)
    cum[i + 1] = cum[i] + norm(c.nodes[(i + 1) % n] - c.nodes[i]);
  const double total = cum[segs];
  if (total <= 0.0) throw immersion_error("reparam: zero-length curve");

  SampledCurve out;
  out.model = c.model;
  out.topology = c.topology;
  out.param_a = a;
  out.param_b = b;
  out.nodes.resize(n_out);
  int seg = 0;
  for (int j = 0; j < n_out; ++j) {
    double target = (c.closed() ? static_cast<double>(j) / n_out
                                : static_cast<double>(j) / (n_out - 1)) * total;
    if (j == n_out - 1 && !c.closed()) target = total;
    while (seg < segs - 1 && cum[seg + 1] < target) ++seg;
    const double seg_len = cum[seg + 1] - cum[seg];
    const double t = seg_len > 0.0 ? (target - cum[seg]) / seg_len : 0.0;
    const Vec2 p0 = c.nodes[seg % n];
    const Vec2 p1 = c.nodes[(seg + 1) % n];
    out.nodes[j] = p0 + t * (p1 - p0);
  }
  return out;
}

// Winding number of a closed curve: total turning of the Euclidean tangent
// divided by 2 pi, rounded to the nearest integer.
inline int winding_number(const SampledCurve& c) {
  if (!c.closed()) throw topology_error("winding_number: closed curves only");
  const int n = c.n();
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec2 e0 = c.nodes[(i + 1) % n] - c.nodes[i];
    const Vec2 e1 = c.nodes[(i + 2) % n] - c.nodes[(i + 1) % n];
    total += std::atan2(cross(e0, e1), dot(e0, e1));
  }
  return static_cast<int>(std::lround(total / (2.0 * pi)));
}

inline SampledCurve apply_mobius(const MobiusIsometry& F, const SampledCurve& c) {
  if (c.model != Model::disk) throw error("apply_mobius: disk curves only");
  SampledCurve out = c;
  for (auto& p : out.nodes) p = F(p);
  return out;
}

inline SampledCurve map_disk_to_half(const SampledCurve& c, bool allow_closure = false) {
  if (c.model != Model::disk) throw error("map_disk_to_half: disk curves only");
  SampledCurve out = c;
  out.model = Model::half_plane;
  for (auto& p : out.nodes) p = disk_to_half(p, allow_closure);
  return out;
}

inline SampledCurve map_half_to_disk(const SampledCurve& c, bool allow_closure = false) {
  if (c.model != Model::half_plane) throw error("map_half_to_disk: half-plane curves only");
  SampledCurve out = c;
  out.model = Model::disk;
  for (auto& p : out.nodes) p = half_to_disk(p, allow_closure);
  return out;
}

// --------------------------------------------------------------------------
// Hausdorff distance between two polylines (point-to-segment based).

namespace detail {

inline double point_segment_dist(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = norm2(ab);
  if (len2 == 0.0) return norm(p - a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return norm(p - (a + t * ab));
}

inline double directed_hausdorff(std::span<const Vec2> from, std::span<const Vec2> to,
                                 bool to_closed) {
  const int n = static_cast<int>(to.size());
  const int m = to_closed ? n : n - 1;
  double worst = 0.0;
  for (const Vec2& p : from) {
    double best = std::numeric_limits<double>::max();
    for (int i = 0; i < m; ++i)
      best = std::min(best, point_segment_dist(p, to[i], to[(i + 1) % n]));
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace detail

inline double hausdorff_distance(const SampledCurve& a, const SampledCurve& b) {
  const double d1 = detail::directed_hausdorff(a.nodes, b.nodes, b.closed());
  const double d2 = detail::directed_hausdorff(b.nodes, a.nodes, a.closed());
  return std::max(d1, d2);
}

}  // namespace helf
