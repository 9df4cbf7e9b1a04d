#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "helf/elliptic.hpp"
#include "helf/geometry.hpp"

// Closed-form and ODE-based synthesis of the hyperbolic elastica families,
// the lambda-figure-eight construction, and the explicit asymptotically
// geodesic parametrizations with their transversality constants.

namespace helf {

// --------------------------------------------------------------------------
// Classification. A lambda-constrained elastica satisfies
//   2 kappa'' + kappa^3 - (lambda + 2) kappa = 0,
// whose first integral is (kappa')^2 + kappa^4/4 - (lambda+2) kappa^2/2 = C.

enum class ElasticaFamily { geodesic, circular, orbit_like, asymptotically_geodesic, wave_like };

struct ElasticaParams {
  double lambda = 0.0;
  double kappa0_sq = 0.0;     // peak squared curvature
  double first_integral = 0;  // C, evaluated at the peak (kappa' = 0)
  double modulus = 0.0;       // Jacobi modulus p (orbit-like / wave-like)
  double rate = 0.0;          // r
  ElasticaFamily family = ElasticaFamily::geodesic;
};

inline const char* family_name(ElasticaFamily f) {
  switch (f) {
    case ElasticaFamily::geodesic: return "geodesic";
    case ElasticaFamily::circular: return "circular";
    case ElasticaFamily::orbit_like: return "orbit_like";
    case ElasticaFamily::asymptotically_geodesic: return "asymptotically_geodesic";
    case ElasticaFamily::wave_like: return "wave_like";
  }
  return "?";
}

inline ElasticaParams classify(double lambda, double kappa0_sq) {
  if (!(lambda > -2.0)) throw error("classify: lambda must exceed -2");
  if (kappa0_sq < 0.0) throw error("classify: kappa0^2 must be nonnegative");
  ElasticaParams e;
  e.lambda = lambda;
  e.kappa0_sq = kappa0_sq;
  e.first_integral = kappa0_sq * kappa0_sq / 4.0 - (lambda + 2.0) * kappa0_sq / 2.0;
  const double lp2 = lambda + 2.0;
  const double tlp4 = 2.0 * lambda + 4.0;
  const double tol = 1e-12 * (1.0 + lp2);
  if (kappa0_sq == 0.0) {
    e.family = ElasticaFamily::geodesic;
    return e;
  }
  if (std::abs(kappa0_sq - lp2) <= tol) {
    e.family = ElasticaFamily::circular;
    return e;
  }
  if (kappa0_sq < lp2)
    throw no_elastica_error("there exist no lambda-constrained elastica with kappa0^2 in (0, lambda+2)");
  if (std::abs(kappa0_sq - tlp4) <= tol) {
    e.family = ElasticaFamily::asymptotically_geodesic;
    e.first_integral = 0.0;
    e.rate = 0.5 * std::sqrt(tlp4);
    return e;
  }
  if (kappa0_sq < tlp4) {
    e.family = ElasticaFamily::orbit_like;
    const double p2 = 2.0 - tlp4 / kappa0_sq;
    e.modulus = std::sqrt(p2);
    e.rate = 0.5 * std::sqrt(tlp4 / (2.0 - p2));
    return e;
  }
  e.family = ElasticaFamily::wave_like;
  const double p2 = kappa0_sq / (2.0 * kappa0_sq - tlp4);
  e.modulus = std::sqrt(p2);
  e.rate = 0.5 * std::sqrt(tlp4 / (2.0 * p2 - 1.0));
  return e;
}

// kappa(s) with the convention kappa(0) = +kappa0 at the profile peak.
inline double curvature_profile(const ElasticaParams& e, double s) {
  const double k0 = std::sqrt(e.kappa0_sq);
  switch (e.family) {
    case ElasticaFamily::geodesic: return 0.0;
    case ElasticaFamily::circular: return k0;
    case ElasticaFamily::orbit_like: return k0 * jacobi_dn(e.rate * s, e.modulus);
    case ElasticaFamily::asymptotically_geodesic: return k0 / std::cosh(e.rate * s);
    case ElasticaFamily::wave_like: return k0 * jacobi_cn(e.rate * s, e.modulus);
  }
  return 0.0;
}

// Total energy of the full asymptotically geodesic elastica: the closed form
// of the integral of kappa0^2 sech^2(r s) over the whole line.
inline double energy_asymptotically_geodesic(double lambda) {
  if (!(lambda > -2.0)) throw error("energy_asymptotically_geodesic: lambda must exceed -2");
  return 4.0 * std::sqrt(2.0 * lambda + 4.0);
}

// --------------------------------------------------------------------------
// Explicit arc-length parametrizations of the free asymptotically geodesic
// elastica, half-plane and disk versions.

inline Vec2 asymptotically_geodesic_halfplane(double x) {
  const double ch = std::cosh(x);
  const double den = x * x + ch * ch;
  return {x / den, ch / den};
}

inline Vec2 asymptotically_geodesic_disk(double x) {
  const double ch = std::cosh(x);
  const double den = 1.0 + x * x + ch * (2.0 + ch);
  return {2.0 * x / den, (1.0 - x * x - ch * ch) / den};
}

inline Vec2 asymptotically_geodesic_halfplane_derivative(double x) {
  const double ch = std::cosh(x), sh = std::sinh(x);
  const double den = x * x + ch * ch;
  const double dden = 2.0 * x + 2.0 * ch * sh;
  return {(den - x * dden) / (den * den), (sh * den - ch * dden) / (den * den)};
}

inline SampledCurve sample_asymptotically_geodesic(Model model, double x_min, double x_max,
                                                   int n_nodes) {
  SampledCurve c;
  c.model = model;
  c.topology = Topology::open;
  c.param_a = x_min;
  c.param_b = x_max;
  c.nodes.resize(n_nodes);
  for (int i = 0; i < n_nodes; ++i) {
    const double x = x_min + (x_max - x_min) * i / (n_nodes - 1);
    c.nodes[i] = model == Model::half_plane ? asymptotically_geodesic_halfplane(x)
                                            : asymptotically_geodesic_disk(x);
  }
  return c;
}

// --------------------------------------------------------------------------
// Frame integration: the fundamental theorem of curve theory. Solves
//   d gamma / ds = T,   nabla_s T = kappa(s) * rot90(T)
// with |T|_g = 1, by classical RK4 with a fixed substep and tangent
// renormalization after every step.

struct FramePose {
  Vec2 position;
  double tangent_angle = 0.0;  // Euclidean angle of the unit-hyperbolic-speed tangent
};

struct FrameIntegration {
  SampledCurve curve;
  bool truncated = false;  // trajectory left the model domain and was cut short
};

namespace detail {

struct FrameState {
  Vec2 p;
  Vec2 t;  // chart components of the unit tangent
};

inline FrameState frame_rhs(const FrameState& s, double kappa, Model model) {
  const double f = metric_factor(s.p, model);
  double gx, gy;
  grad_phi(s.p, model, f, gx, gy);
  FrameState d;
  d.p = s.t;
  d.t = kappa * rot90(s.t) - christoffel(gx, gy, s.t, s.t);
  return d;
}

inline void frame_renormalize(FrameState& s, Model model) {
  const double f = metric_factor(s.p, model);
  const double len = f * norm(s.t);
  s.t = s.t / len;
}

}  // namespace detail

// Integrates the frame ODE over [s0, s1] and returns n_nodes samples plus the
// final tangent (chart components). The substep keeps unit-speed drift below
// ~1e-8 per unit of arc length on curvature scales up to |kappa| ~ 5.
inline FrameIntegration integrate_frame_with_tangent(const std::function<double(double)>& kappa,
                                                     FramePose start, Model model, double s0,
                                                     double s1, int n_nodes, Vec2& end_tangent,
                                                     double max_substep = 2e-3) {
  if (n_nodes < 2) throw error("integrate_frame: need at least 2 nodes");
  FrameIntegration out;
  out.curve.model = model;
  out.curve.topology = Topology::open;
  out.curve.param_a = s0;
  out.curve.param_b = s1;
  out.curve.nodes.reserve(n_nodes);

  detail::FrameState st;
  st.p = start.position;
  const double f0 = metric_factor(start.position, model);
  st.t = Vec2{std::cos(start.tangent_angle), std::sin(start.tangent_angle)} / f0;

  const double node_step = (s1 - s0) / (n_nodes - 1);
  const int sub = std::max(1, static_cast<int>(std::ceil(std::abs(node_step) / max_substep)));
  const double h = node_step / sub;

  out.curve.nodes.push_back(st.p);
  double s = s0;
  for (int i = 1; i < n_nodes; ++i) {
    for (int k = 0; k < sub; ++k) {
      const auto k1 = detail::frame_rhs(st, kappa(s), model);
      detail::FrameState m2{st.p + 0.5 * h * k1.p, st.t + 0.5 * h * k1.t};
      const auto k2 = detail::frame_rhs(m2, kappa(s + 0.5 * h), model);
      detail::FrameState m3{st.p + 0.5 * h * k2.p, st.t + 0.5 * h * k2.t};
      const auto k3 = detail::frame_rhs(m3, kappa(s + 0.5 * h), model);
      detail::FrameState m4{st.p + h * k3.p, st.t + h * k3.t};
      const auto k4 = detail::frame_rhs(m4, kappa(s + h), model);
      st.p += (h / 6.0) * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p);
      st.t += (h / 6.0) * (k1.t + 2.0 * k2.t + 2.0 * k3.t + k4.t);
      s += h;
      const bool outside = model == Model::disk ? norm2(st.p) >= 1.0 - boundary_floor
                                                : st.p.y <= boundary_floor;
      if (outside) {
        out.truncated = true;
        out.curve.param_b = s;
        end_tangent = st.t;
        return out;
      }
      detail::frame_renormalize(st, model);
    }
    out.curve.nodes.push_back(st.p);
  }
  end_tangent = st.t;
  return out;
}

inline FrameIntegration integrate_frame(const std::function<double(double)>& kappa,
                                        FramePose start, Model model, double s0, double s1,
                                        int n_nodes, double max_substep = 2e-3) {
  Vec2 unused;
  return integrate_frame_with_tangent(kappa, start, model, s0, s1, n_nodes, unused, max_substep);
}

// --------------------------------------------------------------------------
// Transversality constants of Appendix-style intersection of the explicit
// asymptotically geodesic elastica u with the geodesic half circle
// v(x) = h (cos x + 1, sin x).

struct TransversalityConstants {
  double x_u = 0.0;
  double x_v = 0.0;
  double det_value = 0.0;
};

inline TransversalityConstants transversality_constants(double h) {
  if (!(h > 0.0)) throw error("transversality_constants: h must be positive");
  TransversalityConstants t;
  t.x_u = 1.0 / (2.0 * h);
  t.x_v = 2.0 * std::atan(2.0 * h * std::cosh(1.0 / (2.0 * h)));
  t.det_value = -4.0 * h * h * h /
                (2.0 * h * h + 2.0 * h * h * std::cosh(1.0 / h) + 1.0);
  return t;
}

// --------------------------------------------------------------------------
// lambda-figure-eights.
//
// A lambda-figure-eight is a closed lambda-constrained elastica with winding
// number zero that is odd through the origin (S1) and mirror-symmetric across
// the vertical axis through its lobe tips (S2). Its curvature profile is one
// full period of the wave-like profile kappa0 cn(r s, p), so one quarter of
// the curve runs from the crossing at the origin (kappa = 0) to a lobe tip
// (kappa = kappa0) in arc length Q = K(p) / r.
//
// Construction: fix the crossing at the origin with vertical start tangent
// (a gauge choice), integrate the quarter profile, and shoot over the free
// modulus p until the tip tangent is orthogonal to the diameter through the
// tip; then the reflection across that diameter and the point reflection in
// the origin close the curve smoothly. One scalar residual in one unknown.

struct FigureEightDiagnostics {
  double modulus = 0.0;
  double kappa0 = 0.0;
  double rate = 0.0;
  double quarter_length = 0.0;   // hyperbolic arc length of a quarter
  double closure_residual = 0.0; // |<tip, tip tangent>| / |tip| at the root
  double energy = 0.0;
};

namespace detail {

struct QuarterShot {
  Vec2 tip;
  Vec2 tip_tangent;
};

// Integrate one quarter for trial modulus p at given lambda; the profile runs
// from kappa = 0 (origin end) to kappa = kappa0 (tip end).
inline QuarterShot shoot_quarter(double lambda, double p, int n_nodes, double max_substep) {
  const double tlp4 = 2.0 * lambda + 4.0;
  const double kappa0_sq = tlp4 * p * p / (2.0 * p * p - 1.0);
  const double kappa0 = std::sqrt(kappa0_sq);
  const double r = 0.5 * std::sqrt(tlp4 / (2.0 * p * p - 1.0));
  const double K = elliptic_K(p);
  const double Q = K / r;
  auto kappa = [=](double s) { return kappa0 * jacobi_cn(r * (s - Q), p); };
  Vec2 end_tan;
  FramePose start{{0.0, 0.0}, 0.5 * pi};
  auto res = integrate_frame_with_tangent(kappa, start, Model::disk, 0.0, Q, n_nodes, end_tan,
                                          max_substep);
  if (res.truncated) throw construction_error("figure-eight quarter left the disk");
  return {res.curve.nodes.back(), end_tan};
}

inline double shoot_residual(double lambda, double p) {
  const auto shot = shoot_quarter(lambda, p, 33, 2e-3);
  const double tip_norm = norm(shot.tip);
  if (tip_norm < 1e-12) throw construction_error("figure-eight quarter collapsed");
  return dot(shot.tip, shot.tip_tangent) / (tip_norm * norm(shot.tip_tangent));
}

}  // namespace detail

namespace detail {

// Assemble the closed grid on [-2, 2) from one finely integrated quarter at
// modulus p: index i holds parameter -2 + 4 i / N.
inline SampledCurve assemble_figure_eight(double lambda, double p, int n_nodes) {
  const double tlp4 = 2.0 * lambda + 4.0;
  const double kappa0 = std::sqrt(tlp4 * p * p / (2.0 * p * p - 1.0));
  const double r = 0.5 * std::sqrt(tlp4 / (2.0 * p * p - 1.0));
  const double Q = elliptic_K(p) / r;
  auto kappa = [=](double s) { return kappa0 * jacobi_cn(r * (s - Q), p); };

  const int quarter_nodes = n_nodes / 4 + 1;
  Vec2 end_tan;
  auto quarter = integrate_frame_with_tangent(kappa, FramePose{{0.0, 0.0}, 0.5 * pi}, Model::disk,
                                              0.0, Q, quarter_nodes, end_tan, 5e-4);
  if (quarter.truncated) throw construction_error("figure-eight quarter left the disk");

  // Rotate the quarter so the tip lands on the positive vertical axis; at the
  // closure root the tip tangent is then horizontal.
  const Vec2 tip = quarter.curve.nodes.back();
  const double beta = 0.5 * pi - std::atan2(tip.y, tip.x);
  const double cb = std::cos(beta), sb = std::sin(beta);
  auto rotate = [&](Vec2 v) { return Vec2{cb * v.x - sb * v.y, sb * v.x + cb * v.y}; };
  std::vector<Vec2> q(quarter_nodes);
  for (int i = 0; i < quarter_nodes; ++i) q[i] = rotate(quarter.curve.nodes[i]);
  q[0] = {0.0, 0.0};
  q.back().x = 0.0;  // tip sits on the axis up to the closure residual

  SampledCurve c;
  c.model = Model::disk;
  c.topology = Topology::closed;
  c.param_a = -2.0;
  c.param_b = 2.0;
  const int N = n_nodes;
  c.nodes.assign(N, Vec2{});
  for (int j = 0; j <= N / 4; ++j) c.nodes[(N / 2 + j) % N] = q[j];
  for (int j = 0; j <= N / 4; ++j) {
    const Vec2 v = q[N / 4 - j];
    c.nodes[(3 * N / 4 + j) % N] = Vec2{-v.x, v.y};  // (S2) mirror
  }
  for (int i = 1; i < N / 2; ++i) c.nodes[i] = -c.nodes[N - i];  // (S1)
  c.nodes[0] = {0.0, 0.0};
  return c;
}

}  // namespace detail

inline SampledCurve construct_lambda_figure_eight(double lambda, double tol, int n_nodes = 512,
                                                  FigureEightDiagnostics* diag = nullptr) {
  if (!(lambda > 0.0) || !(lambda < 64.0 / (pi * pi) - 2.0))
    throw error("construct_lambda_figure_eight: lambda outside (0, 64/pi^2 - 2)");
  if (n_nodes % 4 != 0) throw error("construct_lambda_figure_eight: n_nodes must be divisible by 4");

  // Scan the admissible moduli for closure-residual sign changes, refine each
  // bracket, and keep the first root whose assembled curve is a genuine
  // figure-eight (winding number zero, energy above 16).
  const double p_lo = 1.0 / std::sqrt(2.0) + 1e-4;
  const double p_hi = 1.0 - 1e-6;
  const int scan = 220;
  double prev_p = p_lo;
  double prev_g = detail::shoot_residual(lambda, p_lo);
  for (int i = 1; i <= scan; ++i) {
    const double p = p_lo + (p_hi - p_lo) * i / scan;
    const double g = detail::shoot_residual(lambda, p);
    if (prev_g == 0.0 || g == 0.0 || (prev_g < 0.0) != (g < 0.0)) {
      double a = prev_p, b = p, ga = prev_g;
      for (int it = 0; it < 90; ++it) {
        const double m = 0.5 * (a + b);
        const double gm = detail::shoot_residual(lambda, m);
        if ((gm < 0.0) == (ga < 0.0)) {
          a = m;
          ga = gm;
        } else {
          b = m;
        }
      }
      const double root_p = 0.5 * (a + b);
      const double residual = std::abs(detail::shoot_residual(lambda, root_p));
      if (residual <= tol) {
        SampledCurve c = detail::assemble_figure_eight(lambda, root_p, n_nodes);
        const double energy = elastic_energy(c);
        if (winding_number(c) == 0 && energy > 16.0) {
          if (diag) {
            const double tlp4 = 2.0 * lambda + 4.0;
            diag->modulus = root_p;
            diag->kappa0 = std::sqrt(tlp4 * root_p * root_p / (2.0 * root_p * root_p - 1.0));
            diag->rate = 0.5 * std::sqrt(tlp4 / (2.0 * root_p * root_p - 1.0));
            diag->quarter_length = elliptic_K(root_p) / diag->rate;
            diag->closure_residual = residual;
            diag->energy = energy;
          }
          return c;
        }
      }
    }
    prev_p = p;
    prev_g = g;
  }
  throw construction_error(
      "figure-eight shooting found no closure root with winding 0 in the modulus range");
}

// Closed-form energy of the assembled figure-eight profile: integral of
// kappa0^2 cn^2 over one full period.
inline double figure_eight_energy_closed_form(double lambda, double p) {
  const double tlp4 = 2.0 * lambda + 4.0;
  const double kappa0_sq = tlp4 * p * p / (2.0 * p * p - 1.0);
  const double r = 0.5 * std::sqrt(tlp4 / (2.0 * p * p - 1.0));
  const double K = elliptic_K(p), E = elliptic_E(p);
  return (kappa0_sq / r) * 4.0 * (E - (1.0 - p * p) * K) / (p * p);
}

// --------------------------------------------------------------------------
// Vertically clamped symmetric initial data: a smooth drop through the
// origin, gamma(+-1) = (0,0), end tangents +-(0,1), mirror symmetric across
// the vertical axis (S2'). The width parameter is tuned so the measured
// elastic energy hits the requested target.

inline SampledCurve clamped_drop_curve(double depth, double width, int n_nodes) {
  SampledCurve c;
  c.model = Model::disk;
  c.topology = Topology::open;
  c.param_a = -1.0;
  c.param_b = 1.0;
  c.nodes.resize(n_nodes);
  for (int i = 0; i < n_nodes; ++i) {
    const double x = -1.0 + 2.0 * i / (n_nodes - 1);
    c.nodes[i] = {width * std::sin(pi * x) * (1.0 - x * x), -depth * (1.0 - x * x)};
  }
  return c;
}

inline SampledCurve clamped_drop_with_energy(double target_energy, int n_nodes,
                                             double depth = 0.7) {
  auto energy_of = [&](double w) { return elastic_energy(clamped_drop_curve(depth, w, n_nodes)); };
  // E(width) dips (narrow drops have a tight hairpin at the bottom) and then
  // grows again; bisect on the increasing branch past the minimum.
  double a = 0.05, b = 0.6;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
  double f1 = energy_of(c1), f2 = energy_of(c2);
  for (int it = 0; it < 60; ++it) {
    if (f1 < f2) {
      b = c2; c2 = c1; f2 = f1; c1 = b - gr * (b - a); f1 = energy_of(c1);
    } else {
      a = c1; c1 = c2; f1 = f2; c2 = a + gr * (b - a); f2 = energy_of(c2);
    }
  }
  double lo = 0.5 * (a + b), hi = 0.6;
  if (!(energy_of(lo) < target_energy && energy_of(hi) > target_energy))
    throw construction_error("clamped_drop_with_energy: target outside the width family's range");
  for (int i = 0; i < 70; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (energy_of(mid) < target_energy)
      lo = mid;
    else
      hi = mid;
  }
  return clamped_drop_curve(depth, 0.5 * (lo + hi), n_nodes);
}

}  // namespace helf
