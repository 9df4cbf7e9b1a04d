#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "helf/elastica.hpp"
#include "helf/flow.hpp"
#include "helf/geometry.hpp"

// Post-hoc diagnostics over flow runs: singular-parameter detection, energy
// quantization accounting, blow-up rescaling, and checkers for the energy
// inequalities.

namespace helf {

// --------------------------------------------------------------------------
// Parameter bookkeeping. Singular parameters live in the constant-Euclidean-
// speed parametrization of each frame (closed frames on [-2,2), clamped
// frames on [-1,1]); energies are integrated on the native grid, whose nodes
// are mapped to that parameter by the arc-length table. Resampling a frame
// to measure energy would lose the near-boundary detail the native grid
// carries.

namespace detail {

// Euclidean-speed parameter of every native node.
inline std::vector<double> euclidean_params(const SampledCurve& c) {
  const int n = c.n();
  const int segs = c.closed() ? n : n - 1;
  std::vector<double> out(n, 0.0);
  double acc = 0.0;
  std::vector<double> cum(n, 0.0);
  for (int i = 1; i < n; ++i) {
    acc += norm(c.nodes[i] - c.nodes[i - 1]);
    cum[i] = acc;
  }
  double total = acc;
  if (c.closed()) total += norm(c.nodes[0] - c.nodes[n - 1]);
  const double span = c.param_b - c.param_a;
  for (int i = 0; i < n; ++i) out[i] = c.param_a + span * cum[i] / total;
  (void)segs;
  return out;
}

// Wrap a parameter difference into [-span/2, span/2) on a periodic domain.
inline double wrap_param(double d, double span) {
  d = std::fmod(d, span);
  if (d < -0.5 * span) d += span;
  if (d >= 0.5 * span) d -= span;
  return d;
}

}  // namespace detail

// --------------------------------------------------------------------------
// Singular-parameter detection: parameters where the late frames approach
// the boundary circle, clustered with a minimum separation of 2*delta.

inline std::vector<double> detect_singular_params(const FlowRun& run, double eps = 1e-3,
                                                  double delta = 0.1) {
  if (run.frames.empty()) return {};
  const std::size_t first_late = run.frames.size() - std::max<std::size_t>(1, run.frames.size() / 4);

  // Max of |gamma| over late frames per parameter bin.
  const int bins = 512;
  const auto& f0 = run.frames.front().curve;
  const double a = f0.param_a, span = f0.param_b - f0.param_a;
  std::vector<double> peak(bins, 0.0);
  for (std::size_t k = first_late; k < run.frames.size(); ++k) {
    const auto& c = run.frames[k].curve;
    const auto params = detail::euclidean_params(c);
    for (int i = 0; i < c.n(); ++i) {
      int b = static_cast<int>((params[i] - a) / span * bins);
      b = std::clamp(b, 0, bins - 1);
      peak[b] = std::max(peak[b], norm(c.nodes[i]));
    }
  }

  // Collect singular bins and cluster them.
  struct Cluster {
    double lo, hi, weight_sum, weighted;
  };
  std::vector<Cluster> clusters;
  const bool per = f0.closed();
  for (int b = 0; b < bins; ++b) {
    if (peak[b] < 1.0 - eps) continue;
    const double x = a + span * (b + 0.5) / bins;
    const double w = peak[b] - (1.0 - eps);
    bool merged = false;
    for (auto& cl : clusters) {
      double d = x - cl.weighted / cl.weight_sum;
      if (per) d = detail::wrap_param(d, span);
      if (std::abs(d) < 2.0 * delta) {
        cl.lo = std::min(cl.lo, x);
        cl.hi = std::max(cl.hi, x);
        cl.weight_sum += w;
        cl.weighted += w * x;
        merged = true;
        break;
      }
    }
    if (!merged) clusters.push_back({x, x, w, w * x});
  }
  std::vector<double> out;
  for (const auto& cl : clusters) out.push_back(cl.weighted / cl.weight_sum);
  std::sort(out.begin(), out.end());
  return out;
}

// --------------------------------------------------------------------------
// Quantization accounting

enum class SegmentClass { geodesic, asymptotically_geodesic, undetermined };

inline const char* segment_class_name(SegmentClass s) {
  switch (s) {
    case SegmentClass::geodesic: return "geodesic";
    case SegmentClass::asymptotically_geodesic: return "asymptotically_geodesic";
    case SegmentClass::undetermined: return "undetermined";
  }
  return "?";
}

struct QuantizationReport {
  bool conclusive = false;          // false while the run is far from its limit
  std::vector<double> singular_params;
  int count = 0;                    // m
  std::vector<double> per_singularity_energy;
  double residual_energy = 0.0;     // final-frame energy away from the windows
  double initial_energy = 0.0;
  bool budget_ok = false;           // residual <= E0 - 8 m + tolerance
  std::vector<SegmentClass> segment_classes;
  std::vector<double> segment_max_kappa;
};

namespace detail {

// Energy of a frame restricted to a set of parameter windows (or to their
// complement), integrated on the native grid.
inline double energy_in_windows(const SampledCurve& c, const std::vector<double>& params,
                                const std::vector<std::pair<double, double>>& windows,
                                bool complement, double span) {
  const auto g = curve_geometry(c);
  const int n = c.n();
  const bool per = c.closed();
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    bool inside = false;
    for (const auto& wdw : windows) {
      const double mid = 0.5 * (wdw.first + wdw.second);
      const double half = 0.5 * (wdw.second - wdw.first);
      double d = params[i] - mid;
      if (per) d = wrap_param(d, span);
      if (std::abs(d) <= half) {
        inside = true;
        break;
      }
    }
    if (inside == complement) continue;
    const double tw = (!per && (i == 0 || i == n - 1)) ? 0.5 : 1.0;
    const double f2 = g.factor[i] * g.factor[i];
    acc += tw * f2 * norm2(g.curvature_vec[i]) * g.hyp_speed[i];
  }
  return acc * c.dx();
}

}  // namespace detail

// Classify a limit segment by its curvature statistics: flat profiles are
// geodesic, profiles matching kappa = 2 sech(s - s0) after alignment are
// asymptotically geodesic arcs.
inline SegmentClass classify_segment(const std::vector<double>& kappa,
                                     const std::vector<double>& arclen, double& max_abs_kappa) {
  max_abs_kappa = 0.0;
  for (double k : kappa) max_abs_kappa = std::max(max_abs_kappa, std::abs(k));
  if (max_abs_kappa < 0.05) return SegmentClass::geodesic;
  // align the sech profile at the curvature peak
  std::size_t ipk = 0;
  for (std::size_t i = 0; i < kappa.size(); ++i)
    if (std::abs(kappa[i]) > std::abs(kappa[ipk])) ipk = i;
  double worst = 0.0;
  for (std::size_t i = 0; i < kappa.size(); ++i) {
    const double model = 2.0 / std::cosh(arclen[i] - arclen[ipk]);
    worst = std::max(worst, std::abs(std::abs(kappa[i]) - model));
  }
  if (worst < 0.05) return SegmentClass::asymptotically_geodesic;
  return SegmentClass::undetermined;
}

inline QuantizationReport quantization_report(const FlowRun& run, double initial_energy,
                                              double eps = 1e-3, double delta = 0.1,
                                              double grad_threshold = 0.5) {
  QuantizationReport rep;
  rep.initial_energy = initial_energy;
  if (run.frames.empty()) return rep;

  // Quantization statements concern the singular limit; a run still moving
  // fast is reported inconclusive. The trailing median is robust against
  // the spikes that reparametrization events leave in h(t).
  {
    std::vector<double> tail;
    const std::size_t first = run.frames.size() - std::max<std::size_t>(1, run.frames.size() / 10);
    for (std::size_t k = first; k < run.frames.size(); ++k)
      tail.push_back(run.frames[k].grad_norm_sq);
    std::sort(tail.begin(), tail.end());
    const double med = tail[tail.size() / 2];
    if (med > grad_threshold) return rep;  // inconclusive
  }
  rep.conclusive = true;

  rep.singular_params = detect_singular_params(run, eps, delta);
  rep.count = static_cast<int>(rep.singular_params.size());

  const auto& last = run.frames.back().curve;
  const double span = last.param_b - last.param_a;
  std::vector<std::pair<double, double>> windows;
  for (double x : rep.singular_params) windows.push_back({x - delta, x + delta});

  // Per-singularity energies: limsup over frames of the window energy.
  rep.per_singularity_energy.assign(rep.count, 0.0);
  for (const auto& fr : run.frames) {
    const auto params = detail::euclidean_params(fr.curve);
    for (int j = 0; j < rep.count; ++j) {
      const double e =
          detail::energy_in_windows(fr.curve, params, {windows[j]}, false, span);
      rep.per_singularity_energy[j] = std::max(rep.per_singularity_energy[j], e);
    }
  }
  {
    const auto params = detail::euclidean_params(last);
    rep.residual_energy = detail::energy_in_windows(last, params, windows, true, span);
  }
  rep.budget_ok = rep.residual_energy <= initial_energy - 8.0 * rep.count + 0.5;

  // Classify the limit segments between consecutive singular parameters.
  if (rep.count > 0) {
    const auto params = detail::euclidean_params(last);
    const auto g = curve_geometry(last);
    const int segments = last.closed() ? rep.count : rep.count + 1;
    for (int j = 0; j < segments; ++j) {
      double lo, hi;
      if (last.closed()) {
        lo = rep.singular_params[j] + delta;
        hi = rep.singular_params[(j + 1) % rep.count] - delta;
        if (j + 1 >= rep.count) hi += span;
      } else {
        lo = j == 0 ? last.param_a : rep.singular_params[j - 1] + delta;
        hi = j == rep.count ? last.param_b : rep.singular_params[j] - delta;
      }
      std::vector<double> kap, arl;
      double s_acc = 0.0;
      for (int i = 0; i < last.n(); ++i) {
        double x = params[i];
        if (last.closed() && x < lo) x += span;
        if (x >= lo && x <= hi) {
          kap.push_back(g.kappa[i]);
          arl.push_back(s_acc);
        }
        if (i + 1 < last.n())
          s_acc += 0.5 * (g.hyp_speed[i] + g.hyp_speed[i + 1]) * last.dx();
      }
      double mk = 0.0;
      rep.segment_classes.push_back(kap.empty() ? SegmentClass::undetermined
                                                : classify_segment(kap, arl, mk));
      rep.segment_max_kappa.push_back(mk);
    }
  }
  return rep;
}

// --------------------------------------------------------------------------
// Blow-up rescaling at a singular parameter: rotate the disk so the singular
// point sits at (0,-1), pass to the half plane, translate/scale at the
// height minimizer, and return to the disk.

struct BlowUpResult {
  SampledCurve rescaled;               // constant-Euclidean-speed on [-1,1]
  std::vector<double> interior_singular_params;
  int segment_count = 0;               // n_j
  std::vector<double> fit_distances;   // Hausdorff to the aligned elastica
  double containment_excess = 0.0;     // max distance beyond the half-disk
  Vec2 endpoint_a, endpoint_b;
};

namespace detail {

// Standard free asymptotically geodesic elastica opening upward: apex at the
// origin, both ends at (0,1).
inline SampledCurve blowup_model_curve(int n = 801, double x_max = 9.0) {
  SampledCurve m = sample_asymptotically_geodesic(Model::disk, -x_max, x_max, n);
  for (auto& p : m.nodes) p = -1.0 * p;
  return m;
}

}  // namespace detail

inline BlowUpResult blow_up(const FlowRun& run, double x_j, double delta, double eps = 1e-3) {
  if (run.frames.empty()) throw error("blow_up: empty run");
  const auto& frame = run.frames.back().curve;
  const double span = frame.param_b - frame.param_a;
  const auto params = detail::euclidean_params(frame);

  // Any other singular parameter inside the window is a configuration error.
  for (double other : detect_singular_params(run, eps, delta / 2.0)) {
    double d = other - x_j;
    if (frame.closed()) d = detail::wrap_param(d, span);
    if (std::abs(d) > 1e-9 && std::abs(d) < delta)
      throw window_error("blow_up: window contains a second singular cluster");
  }

  // Collect the window nodes in parameter order around x_j.
  std::vector<Vec2> pts;
  const int n = frame.n();
  int start = 0;
  if (frame.closed()) {
    // first index whose wrapped distance enters the window
    for (int i = 0; i < n; ++i) {
      const double d = detail::wrap_param(params[i] - x_j, span);
      const double dprev = detail::wrap_param(params[(i - 1 + n) % n] - x_j, span);
      if (std::abs(d) <= delta && std::abs(dprev) > delta) {
        start = i;
        break;
      }
    }
    for (int k = 0; k < n; ++k) {
      const int i = (start + k) % n;
      if (std::abs(detail::wrap_param(params[i] - x_j, span)) <= delta)
        pts.push_back(frame.nodes[i]);
      else
        break;
    }
  } else {
    for (int i = 0; i < n; ++i)
      if (std::abs(params[i] - x_j) <= delta) pts.push_back(frame.nodes[i]);
  }
  if (pts.size() < 8) throw window_error("blow_up: window contains too few nodes");

  // Rotate so the deepest point maps to (0,-1).
  Vec2 deepest = pts[0];
  for (const Vec2& p : pts)
    if (norm2(p) > norm2(deepest)) deepest = p;
  const double beta = -0.5 * pi - std::atan2(deepest.y, deepest.x);
  const double cb = std::cos(beta), sb = std::sin(beta);
  auto rot = [&](Vec2 v) { return Vec2{cb * v.x - sb * v.y, sb * v.x + cb * v.y}; };

  // Half-plane picture, scaled at the height minimizer (interpolated to
  // sub-grid accuracy through the three nodes around the discrete minimum).
  std::vector<Vec2> u(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) u[i] = disk_to_half(rot(pts[i]));
  std::size_t imin = 0;
  for (std::size_t i = 0; i < u.size(); ++i)
    if (u[i].y < u[imin].y) imin = i;
  double u1c = u[imin].x, u2c = u[imin].y;
  if (imin > 0 && imin + 1 < u.size()) {
    const double ym = u[imin - 1].y, y0 = u[imin].y, yp = u[imin + 1].y;
    const double den = ym - 2.0 * y0 + yp;
    if (den > 0.0) {
      const double off = 0.5 * (ym - yp) / den;  // vertex offset in node units
      u2c = y0 - 0.125 * (ym - yp) * (ym - yp) / den;
      const double xm = u[imin - 1].x, x0 = u[imin].x, xp = u[imin + 1].x;
      u1c = x0 + 0.5 * off * (xp - xm) + 0.5 * off * off * (xm - 2.0 * x0 + xp);
    }
  }

  BlowUpResult out;
  SampledCurve tau;
  tau.model = Model::disk;
  tau.topology = Topology::open;
  tau.param_a = -1.0;
  tau.param_b = 1.0;
  tau.nodes.resize(u.size());
  double excess = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Vec2 v{(u[i].x - u1c) / u2c, u[i].y / u2c};
    tau.nodes[i] = half_to_disk(v);
    excess = std::max(excess, norm(tau.nodes[i] - Vec2{0.0, 0.5}) - 0.5);
  }
  out.containment_excess = excess;
  out.endpoint_a = tau.nodes.front();
  out.endpoint_b = tau.nodes.back();

  out.rescaled = resample_uniform_speed_smooth(tau, 4 * static_cast<int>(u.size()));

  // Interior singular parameters of the rescaled window.
  const auto rparams = detail::euclidean_params(out.rescaled);
  std::vector<double> interior;
  {
    bool in_cluster = false;
    double lo = 0, hi = 0;
    for (int i = 0; i < out.rescaled.n(); ++i) {
      const bool sing = norm(out.rescaled.nodes[i]) >= 1.0 - eps;
      const bool at_edge = rparams[i] < -1.0 + 0.05 || rparams[i] > 1.0 - 0.05;
      if (sing && !at_edge) {
        if (!in_cluster) {
          lo = rparams[i];
          in_cluster = true;
        }
        hi = rparams[i];
      } else if (in_cluster) {
        interior.push_back(0.5 * (lo + hi));
        in_cluster = false;
      }
    }
    if (in_cluster) interior.push_back(0.5 * (lo + hi));
  }
  out.interior_singular_params = interior;
  out.segment_count = static_cast<int>(interior.size()) + 1;

  // Fit each segment to the rigid model elastica, aligned by the rotation
  // about the origin that the apex tangent dictates (rotations are the only
  // isometries fixing the rescaled base point).
  const SampledCurve model = detail::blowup_model_curve();
  std::vector<double> bounds{-1.0};
  for (double y : interior) bounds.push_back(y);
  bounds.push_back(1.0);
  for (int seg = 0; seg + 1 < static_cast<int>(bounds.size()); ++seg) {
    SampledCurve piece;
    piece.model = Model::disk;
    piece.topology = Topology::open;
    piece.param_a = bounds[seg];
    piece.param_b = bounds[seg + 1];
    for (int i = 0; i < out.rescaled.n(); ++i)
      if (rparams[i] >= bounds[seg] && rparams[i] <= bounds[seg + 1])
        piece.nodes.push_back(out.rescaled.nodes[i]);
    if (piece.n() < 4) {
      out.fit_distances.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    // fit distance: how far the window sits from the rigid model curve
    // (directed, since the window covers only part of the ideal elastica)
    auto dist_at = [&](double theta) {
      SampledCurve rotated = model;
      const double ct = std::cos(theta), st = std::sin(theta);
      for (auto& p : rotated.nodes) p = Vec2{ct * p.x - st * p.y, st * p.x + ct * p.y};
      return detail::directed_hausdorff(piece.nodes, rotated.nodes, false);
    };
    double best = std::numeric_limits<double>::max(), best_theta = 0.0;
    for (int k = 0; k < 64; ++k) {
      const double th = 2.0 * pi * k / 64;
      const double d = dist_at(th);
      if (d < best) {
        best = d;
        best_theta = th;
      }
    }
    double lo = best_theta - pi / 64, hi = best_theta + pi / 64;
    for (int it = 0; it < 40; ++it) {
      const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
      if (dist_at(m1) < dist_at(m2))
        hi = m2;
      else
        lo = m1;
    }
    out.fit_distances.push_back(dist_at(0.5 * (lo + hi)));
  }
  return out;
}

// --------------------------------------------------------------------------
// Dip counting in the half plane

struct DipReport {
  int count = 0;
  std::vector<double> energies;
  std::vector<double> min_heights;
};

inline DipReport dip_count(const SampledCurve& u_curve, double alpha, double delta_height) {
  if (u_curve.model != Model::half_plane) throw error("dip_count: half-plane curves only");
  if (!(alpha > delta_height && delta_height > 0.0))
    throw error("dip_count: need alpha > delta_height > 0");
  const int n = u_curve.n();
  const bool per = u_curve.closed();
  if (!per) {
    if (u_curve.nodes.front().y < alpha || u_curve.nodes.back().y < alpha)
      throw shoulder_error("dip_count: curve endpoints below the shoulder height");
  } else {
    bool any = false;
    for (const auto& p : u_curve.nodes) any = any || p.y >= alpha;
    if (!any) throw shoulder_error("dip_count: no shoulder above alpha on the closed curve");
  }

  const auto g = curve_geometry(u_curve);
  const double dx = u_curve.dx();
  DipReport rep;

  // scan connected components of {u2 < alpha}; count those that dip below
  // delta_height, integrating the energy over the whole component
  int i0 = 0;
  if (per) {
    while (i0 < n && u_curve.nodes[i0].y < alpha) ++i0;  // start on a shoulder
  }
  int len = per ? n : n;
  bool open_comp = false;
  double comp_energy = 0.0, comp_min = std::numeric_limits<double>::max();
  auto flush = [&]() {
    if (open_comp && comp_min < delta_height) {
      ++rep.count;
      rep.energies.push_back(comp_energy);
      rep.min_heights.push_back(comp_min);
    }
    open_comp = false;
    comp_energy = 0.0;
    comp_min = std::numeric_limits<double>::max();
  };
  for (int k = 0; k < len; ++k) {
    const int i = per ? (i0 + k) % n : k;
    const double y = u_curve.nodes[i].y;
    if (y < alpha) {
      open_comp = true;
      const double tw = (!per && (i == 0 || i == n - 1)) ? 0.5 : 1.0;
      const double f2 = g.factor[i] * g.factor[i];
      comp_energy += tw * f2 * norm2(g.curvature_vec[i]) * g.hyp_speed[i] * dx;
      comp_min = std::min(comp_min, y);
    } else {
      flush();
    }
  }
  flush();
  return rep;
}

// --------------------------------------------------------------------------
// Inequality checkers

// lhs = int (dx u1)^2 / (|dx u| u2) dx, rhs = E(u) + 4.
inline std::pair<double, double> est_dxu1_check(const SampledCurve& u_curve) {
  if (u_curve.model != Model::half_plane) throw error("est_dxu1_check: half-plane curves only");
  const int n = u_curve.n();
  std::vector<Vec2> d1(n);
  detail::diff1<Vec2>(u_curve.nodes, u_curve.dx(), u_curve.closed(), d1);
  std::vector<double> vals(n), ones(n, 1.0);
  for (int i = 0; i < n; ++i)
    vals[i] = d1[i].x * d1[i].x / (norm(d1[i]) * u_curve.nodes[i].y);
  double lhs = 0.0;
  if (u_curve.closed()) {
    for (int i = 0; i < n; ++i) lhs += vals[i];
  } else {
    lhs += 0.5 * (vals[0] + vals[n - 1]);
    for (int i = 1; i < n - 1; ++i) lhs += vals[i];
  }
  lhs *= u_curve.dx();
  return {lhs, elastic_energy(u_curve) + 4.0};
}

// --------------------------------------------------------------------------
// Willmore energy of the associated surface of revolution.
//
// Identity route: W = (pi/2) (E(u) - 4 [dx u2 / |dx u|] at the ends); the
// boundary term telescopes away on closed profiles. Direct route: quadrature
// of H^2 over the revolution surface with the principal-curvature formulas.

inline double willmore_energy(const SampledCurve& u_curve) {
  if (u_curve.model != Model::half_plane) throw error("willmore_energy: half-plane profiles only");
  const double e = elastic_energy(u_curve);
  if (u_curve.closed()) return 0.5 * pi * e;
  const int n = u_curve.n();
  std::vector<Vec2> d1(n);
  detail::diff1<Vec2>(u_curve.nodes, u_curve.dx(), false, d1);
  const double boundary = d1[n - 1].y / norm(d1[n - 1]) - d1[0].y / norm(d1[0]);
  return 0.5 * pi * (e - 4.0 * boundary);
}

inline double willmore_energy_direct(const SampledCurve& u_curve) {
  if (u_curve.model != Model::half_plane) throw error("willmore_energy_direct: half-plane profiles only");
  const int n = u_curve.n();
  std::vector<Vec2> d1(n), d2(n);
  detail::diff1<Vec2>(u_curve.nodes, u_curve.dx(), u_curve.closed(), d1);
  detail::diff2<Vec2>(u_curve.nodes, u_curve.dx(), u_curve.closed(), d2);
  std::vector<double> vals(n);
  for (int i = 0; i < n; ++i) {
    const double a1 = d1[i].x, r1 = d1[i].y;
    const double a2 = d2[i].x, r2 = d2[i].y;
    const double r = u_curve.nodes[i].y;
    const double w = std::sqrt(a1 * a1 + r1 * r1);
    const double km = (a2 * r1 - r2 * a1) / (w * w * w);
    const double kp = a1 / (r * w);
    const double H = 0.5 * (km + kp);
    vals[i] = H * H * r * w;
  }
  double acc = 0.0;
  if (u_curve.closed()) {
    for (int i = 0; i < n; ++i) acc += vals[i];
  } else {
    acc += 0.5 * (vals[0] + vals[n - 1]);
    for (int i = 1; i < n - 1; ++i) acc += vals[i];
  }
  return 2.0 * pi * acc * u_curve.dx();
}

// Total Gauss curvature of the revolution surface, int_Sigma K dmu =
// 2 pi int K u2 dx for a unit-Euclidean-speed profile; bounded by 4 pi.
inline double gauss_bonnet_total(const SampledCurve& u_curve) {
  if (u_curve.model != Model::half_plane) throw error("gauss_bonnet_total: half-plane profiles only");
  SampledCurve uu = resample_uniform_speed_smooth(u_curve);
  const double total = polyline_length(uu);
  uu.param_a = 0.0;
  uu.param_b = total;  // unit Euclidean speed parametrization
  const int n = uu.n();
  std::vector<Vec2> d1(n), d2(n);
  detail::diff1<Vec2>(uu.nodes, uu.dx(), uu.closed(), d1);
  detail::diff2<Vec2>(uu.nodes, uu.dx(), uu.closed(), d2);
  std::vector<double> vals(n);
  for (int i = 0; i < n; ++i) {
    const double K = (d2[i].x * d1[i].y - d2[i].y * d1[i].x) * d1[i].x / uu.nodes[i].y;
    vals[i] = K * uu.nodes[i].y;
  }
  double acc = 0.0;
  if (uu.closed()) {
    for (int i = 0; i < n; ++i) acc += vals[i];
  } else {
    acc += 0.5 * (vals[0] + vals[n - 1]);
    for (int i = 1; i < n - 1; ++i) acc += vals[i];
  }
  return 2.0 * pi * acc * uu.dx();
}

}  // namespace helf
