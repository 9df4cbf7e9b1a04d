#pragma once

#include <cmath>
#include <vector>

#include "helf/geometry.hpp"

// Smooth resampling of sampled curves to constant Euclidean speed. The
// polyline-exact operator in geometry.hpp realizes the reparametrization
// contract; the flow needs a variant that keeps nodes on a smooth
// reconstruction of the curve so that measured curvature (and with it the
// elastic energy) does not pick up grid-scale noise at each resampling.
// Closed curves use the trigonometric interpolant of the periodic node data,
// open curves a not-a-knot cubic spline.

namespace helf {

namespace detail {

// Cyclic tridiagonal solve (diagonal 4, off-diagonals 1, wrap entries 1) by
// Sherman-Morrison on the Thomas algorithm.
inline std::vector<double> solve_cyclic_144(std::vector<double> r) {
  const int n = static_cast<int>(r.size());
  auto thomas = [&](std::vector<double> rhs, double b0, double bn1) {
    std::vector<double> diag(n, 4.0);
    diag[0] = b0;
    diag[n - 1] = bn1;
    for (int i = 1; i < n; ++i) {
      const double w = 1.0 / diag[i - 1];
      diag[i] -= w;
      rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (int i = n - 2; i >= 0; --i) rhs[i] = (rhs[i] - rhs[i + 1]) / diag[i];
    return rhs;
  };
  const double gamma = -4.0;
  auto x1 = thomas(r, 4.0 - gamma, 4.0 - 1.0 / gamma);
  std::vector<double> u(n, 0.0);
  u[0] = gamma;
  u[n - 1] = 1.0;
  auto x2 = thomas(u, 4.0 - gamma, 4.0 - 1.0 / gamma);
  const double fact = (x1[0] + x1[n - 1] / gamma) / (1.0 + x2[0] + x2[n - 1] / gamma);
  for (int i = 0; i < n; ++i) x1[i] -= fact * x2[i];
  return x1;
}

// Periodic cubic spline through values at t = 0, 1, ..., n-1 (period n).
struct PeriodicCubicSpline {
  std::vector<double> y, m;  // values and second derivatives

  void build(const std::vector<double>& values) {
    y = values;
    const int n = static_cast<int>(y.size());
    std::vector<double> rhs(n);
    for (int i = 0; i < n; ++i)
      rhs[i] = 6.0 * (y[(i - 1 + n) % n] - 2.0 * y[i] + y[(i + 1) % n]);
    m = solve_cyclic_144(std::move(rhs));
  }

  double eval(double t) const {
    const int n = static_cast<int>(y.size());
    t -= std::floor(t / n) * n;
    int i = static_cast<int>(std::floor(t));
    if (i >= n) i = n - 1;
    const double u = t - i;
    const int j = (i + 1) % n;
    const double b = (y[j] - y[i]) - (2.0 * m[i] + m[j]) / 6.0;
    return y[i] + u * (b + u * (m[i] / 2.0 + u * (m[j] - m[i]) / 6.0));
  }
};

// Not-a-knot cubic spline through values at t = 0, 1, ..., n-1. With unit
// spacing the not-a-knot conditions pin the second derivatives at the nodes
// next to each end, m1 = y0 - 2 y1 + y2 and m_{n-2} = y_{n-3} - 2 y_{n-2} +
// y_{n-1}, so only the interior unknowns remain tridiagonal.
struct CubicSpline {
  std::vector<double> a, b, c, d;  // per-interval coefficients

  void build(const std::vector<double>& y) {
    const int n = static_cast<int>(y.size());
    if (n < 4) throw error("cubic spline: need at least 4 points");
    std::vector<double> m(n, 0.0);
    m[1] = y[0] - 2.0 * y[1] + y[2];
    m[n - 2] = y[n - 3] - 2.0 * y[n - 2] + y[n - 1];
    const int k = n - 4;  // unknowns m[2..n-3]
    if (k == 1) {
      m[2] = (6.0 * (y[1] - 2.0 * y[2] + y[3]) - m[1] - m[3]) / 4.0;
    } else if (k > 1) {
      std::vector<double> diag(k, 4.0), rhs(k);
      for (int i = 0; i < k; ++i) rhs[i] = 6.0 * (y[i + 1] - 2.0 * y[i + 2] + y[i + 3]);
      rhs[0] -= m[1];
      rhs[k - 1] -= m[n - 2];
      for (int i = 1; i < k; ++i) {
        const double w = 1.0 / diag[i - 1];
        diag[i] -= w;
        rhs[i] -= w * rhs[i - 1];
      }
      m[k + 1] = rhs[k - 1] / diag[k - 1];
      for (int i = k - 2; i >= 0; --i) m[i + 2] = (rhs[i] - m[i + 3]) / diag[i];
    }
    m[0] = 2.0 * m[1] - m[2];
    m[n - 1] = 2.0 * m[n - 2] - m[n - 3];

    a.resize(n - 1);
    b.resize(n - 1);
    c.resize(n - 1);
    d.resize(n - 1);
    for (int i = 0; i < n - 1; ++i) {
      a[i] = y[i];
      b[i] = (y[i + 1] - y[i]) - (2.0 * m[i] + m[i + 1]) / 6.0;
      c[i] = m[i] / 2.0;
      d[i] = (m[i + 1] - m[i]) / 6.0;
    }
  }

  double eval(double t, int n_points) const {
    int i = static_cast<int>(std::floor(t));
    i = std::max(0, std::min(n_points - 2, i));
    const double u = t - i;
    return a[i] + u * (b[i] + u * (c[i] + u * d[i]));
  }
};

}  // namespace detail

enum class ArcMeter { euclidean, hyperbolic };

// Resample a disk-model curve to constant hyperbolic speed, interpolating in
// local Moebius-normalized charts: the neighborhood of each target point is
// mapped so its metric factor is O(1) before fitting, which keeps the
// interpolation error hyperbolically uniform along the curve. Plain chart
// interpolation loses many digits where the conformal factor varies strongly
// across a stencil (the near-boundary bubbles).
inline SampledCurve resample_uniform_hyperbolic_local(const SampledCurve& c, int n_out = -1) {
  if (c.model != Model::disk) throw error("resample_local: disk curves only");
  const int n = c.n();
  if (n_out < 0) n_out = n;
  const bool per = c.closed();
  const int segs = per ? n : n - 1;
  std::vector<double> cum(segs + 1, 0.0);
  for (int i = 0; i < segs; ++i) {
    const double w = 0.5 * (metric_factor(c.nodes[i], c.model) +
                            metric_factor(c.nodes[(i + 1) % n], c.model));
    cum[i + 1] = cum[i] + w * norm(c.nodes[(i + 1) % n] - c.nodes[i]);
  }
  const double total = cum[segs];
  if (total <= 0.0) throw immersion_error("resample_local: zero-length curve");

  SampledCurve out;
  out.model = c.model;
  out.topology = c.topology;
  out.param_a = c.param_a;
  out.param_b = c.param_b;
  out.nodes.resize(n_out);

  // 8-point Lagrange weights at integer nodes 0..7 evaluated at u.
  constexpr int win = 8;
  auto lagrange = [](double u, double w[win]) {
    for (int k = 0; k < win; ++k) {
      double num = 1.0, den = 1.0;
      for (int l = 0; l < win; ++l) {
        if (l == k) continue;
        num *= u - l;
        den *= k - l;
      }
      w[k] = num / den;
    }
  };

  int seg = 0;
  for (int j = 0; j < n_out; ++j) {
    double target = (per ? static_cast<double>(j) / n_out
                         : static_cast<double>(j) / (n_out - 1)) * total;
    if (!per && j == n_out - 1) target = total;
    while (seg < segs - 1 && cum[seg + 1] < target) ++seg;
    const double den = cum[seg + 1] - cum[seg];
    const double frac = den > 0.0 ? (target - cum[seg]) / den : 0.0;

    const int base = per ? seg - 3 : std::clamp(seg - 3, 0, n - win);
    const double u_eval = (seg + frac) - base;

    // Moebius involution z -> (z - c)/(conj(c) z - 1) centering the window.
    const std::complex<double> ctr = to_complex(c.nodes[seg]);
    auto center = [&](Vec2 p) {
      const auto z = to_complex(p);
      return from_complex((z - ctr) / (std::conj(ctr) * z - 1.0));
    };
    double w8[win];
    lagrange(u_eval, w8);
    Vec2 acc{0.0, 0.0};
    for (int k = 0; k < win; ++k) {
      const int idx = per ? ((base + k) % n + n) % n : base + k;
      acc += w8[k] * center(c.nodes[idx]);
    }
    out.nodes[j] = center(acc);  // the centering map is an involution
  }
  if (per) out.nodes[0] = c.nodes[0];
  if (!per) {
    out.nodes[0] = c.nodes[0];
    out.nodes[n_out - 1] = c.nodes[n - 1];
  }
  return out;
}

// Resample to constant speed (in the chosen meter) on the same parameter
// domain, keeping the nodes on a smooth reconstruction of the curve. Node 0
// of a closed curve stays the base point.
inline SampledCurve resample_uniform_speed_smooth(const SampledCurve& c, int n_out = -1,
                                                  ArcMeter meter = ArcMeter::euclidean) {
  const int n = c.n();
  if (n_out < 0) n_out = n;
  const int segs = c.closed() ? n : n - 1;
  std::vector<double> cum(segs + 1, 0.0);
  for (int i = 0; i < segs; ++i) {
    double w = 1.0;
    if (meter == ArcMeter::hyperbolic)
      w = 0.5 * (metric_factor(c.nodes[i], c.model) +
                 metric_factor(c.nodes[(i + 1) % n], c.model));
    cum[i + 1] = cum[i] + w * norm(c.nodes[(i + 1) % n] - c.nodes[i]);
  }
  const double total = cum[segs];
  if (total <= 0.0) throw immersion_error("resample: zero-length curve");

  // Target original-grid parameters (in node index units) at equal arc
  // length fractions, from the piecewise-linear arc length table.
  std::vector<double> t(n_out);
  int seg = 0;
  for (int j = 0; j < n_out; ++j) {
    double target = (c.closed() ? static_cast<double>(j) / n_out
                                : static_cast<double>(j) / (n_out - 1)) * total;
    while (seg < segs - 1 && cum[seg + 1] < target) ++seg;
    const double den = cum[seg + 1] - cum[seg];
    t[j] = seg + (den > 0.0 ? (target - cum[seg]) / den : 0.0);
  }

  SampledCurve out;
  out.model = c.model;
  out.topology = c.topology;
  out.param_a = c.param_a;
  out.param_b = c.param_b;
  out.nodes.resize(n_out);
  if (c.closed()) {
    std::vector<double> xs(n), ys(n);
    for (int i = 0; i < n; ++i) {
      xs[i] = c.nodes[i].x;
      ys[i] = c.nodes[i].y;
    }
    detail::PeriodicCubicSpline sx, sy;
    sx.build(xs);
    sy.build(ys);
    for (int j = 0; j < n_out; ++j) out.nodes[j] = {sx.eval(t[j]), sy.eval(t[j])};
    out.nodes[0] = c.nodes[0];
  } else {
    std::vector<double> xs(n), ys(n);
    for (int i = 0; i < n; ++i) {
      xs[i] = c.nodes[i].x;
      ys[i] = c.nodes[i].y;
    }
    detail::CubicSpline sx, sy;
    sx.build(xs);
    sy.build(ys);
    for (int j = 0; j < n_out; ++j)
      out.nodes[j] = {sx.eval(t[j], n), sy.eval(t[j], n)};
    out.nodes[0] = c.nodes[0];
    out.nodes[n_out - 1] = c.nodes[n - 1];
  }
  return out;
}

}  // namespace helf
