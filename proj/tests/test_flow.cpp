#include <catch2/catch.hpp>

#include <random>

#include "helf/elastica.hpp"
#include "helf/flow.hpp"
#include "support.hpp"

using namespace helf;
using testsupport::random_closed_disk_curve;

namespace {

// Smooth periodic variation field with low Fourier content.
std::vector<Vec2> random_variation(std::mt19937_64& rng, int n, double amp = 1.0) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<double> ax(5), bx(5), ay(5), by(5);
  for (int k = 0; k < 5; ++k) {
    ax[k] = U(rng); bx[k] = U(rng); ay[k] = U(rng); by[k] = U(rng);
  }
  std::vector<Vec2> v(n);
  for (int i = 0; i < n; ++i) {
    const double t = 2.0 * pi * i / n;
    Vec2 w{0.0, 0.0};
    for (int k = 1; k < 5; ++k) {
      w.x += ax[k] * std::cos(k * t) + bx[k] * std::sin(k * t);
      w.y += ay[k] * std::cos(k * t) + by[k] * std::sin(k * t);
    }
    v[i] = amp * w;
  }
  return v;
}

double pairing_vs_fd_error(const SampledCurve& c, const std::vector<Vec2>& v) {
  const auto grad = elastic_gradient(c);
  const double paired = pair_ds(c, grad, v);
  double best = 1e300;
  for (double eps : {1e-4, 1e-5, 1e-6}) {
    SampledCurve plus = c, minus = c;
    for (int i = 0; i < c.n(); ++i) {
      plus.nodes[i] += eps * v[i];
      minus.nodes[i] -= eps * v[i];
    }
    const double fd = (elastic_energy(plus) - elastic_energy(minus)) / (2.0 * eps);
    best = std::min(best, std::abs(paired - fd) / std::max(1e-12, std::abs(fd)));
  }
  return best;
}

SampledCurve disk_circle(double radius, int n) {
  SampledCurve c;
  c.model = Model::disk;
  c.topology = Topology::closed;
  c.param_a = -2.0;
  c.param_b = 2.0;
  c.nodes.resize(n);
  for (int i = 0; i < n; ++i) {
    const double t = 2.0 * pi * i / n;
    c.nodes[i] = {radius * std::cos(t), radius * std::sin(t)};
  }
  return c;
}

// Disk radius of the hyperbolic circle with geodesic curvature sqrt(2):
// hyperbolic radius arcoth(sqrt(2)), Euclidean radius tanh(rho/2).
double critical_circle_radius() {
  const double rho = std::atanh(1.0 / std::sqrt(2.0));
  return std::tanh(0.5 * rho);
}

}  // namespace

TEST_CASE("gradient vanishes on critical curves", "[flow]") {
  // Geodesic segment (diameter piece).
  SampledCurve seg;
  seg.model = Model::disk;
  seg.topology = Topology::open;
  seg.param_a = -0.6;
  seg.param_b = 0.6;
  seg.nodes.resize(257);
  for (int i = 0; i < 257; ++i) {
    const double t = -0.6 + 1.2 * i / 256;
    seg.nodes[i] = {t, 0.0};
  }
  for (const Vec2& g : elastic_gradient(seg)) CHECK(norm(g) < 1e-8);

  // Circular elastica kappa = sqrt(2): free critical point. Composed
  // finite-difference roundoff grows ~ n^4, so this holds at moderate n.
  for (int n : {256, 384}) {
    auto circ = disk_circle(critical_circle_radius(), n);
    for (const Vec2& g : elastic_gradient(circ)) CHECK(norm(g) < 1e-8);
  }
}

TEST_CASE("gradient pairing matches finite differences of the energy", "[flow]") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    auto c = random_closed_disk_curve(rng, 256, 0.45, 0.02, 4);
    // pick the best-aligned of a few candidate variations so the relative
    // error is measured against a well-conditioned directional derivative
    const auto grad = elastic_gradient(c);
    std::vector<Vec2> v;
    double best_align = -1.0;
    for (int cand = 0; cand < 4; ++cand) {
      auto w = random_variation(rng, 256);
      const double p = std::abs(pair_ds(c, grad, w));
      double gn = 0.0, wn = 0.0;
      for (int i = 0; i < 256; ++i) {
        gn += norm2(grad[i]);
        wn += norm2(w[i]);
      }
      const double align = p / std::sqrt(gn * wn);
      if (align > best_align) {
        best_align = align;
        v = std::move(w);
      }
    }
    const double err = pairing_vs_fd_error(c, v);
    CHECK(err < 1e-4);
  }
}

TEST_CASE("gradient pairing for clamped admissible variations", "[flow]") {
  std::mt19937_64 rng(33);
  auto drop = clamped_drop_with_energy(14.0, 257);
  const auto grad = elastic_gradient(drop);
  const int n = drop.n();
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<Vec2> v(n);
    const double a1 = U(rng), a2 = U(rng), b1 = U(rng), b2 = U(rng);
    for (int i = 0; i < n; ++i) {
      const double x = -1.0 + 2.0 * i / (n - 1);
      const double bump = std::pow(1.0 - x * x, 2);  // V and V' vanish at the ends
      v[i] = {bump * (a1 + a2 * std::sin(pi * x)), bump * (b1 + b2 * std::cos(pi * x))};
    }
    const double paired = pair_ds(drop, grad, v);
    double best = 1e300;
    for (double eps : {1e-4, 1e-5, 1e-6}) {
      SampledCurve plus = drop, minus = drop;
      for (int i = 0; i < n; ++i) {
        plus.nodes[i] += eps * v[i];
        minus.nodes[i] -= eps * v[i];
      }
      const double fd = (elastic_energy(plus) - elastic_energy(minus)) / (2.0 * eps);
      best = std::min(best, std::abs(paired - fd) / std::max(1e-12, std::abs(fd)));
    }
    CHECK(best < 1e-3);
  }
}

TEST_CASE("explicit steps: stationary data stays put, energy dissipates", "[flow]") {
  // Geodesic: zero velocity.
  SampledCurve seg;
  seg.model = Model::disk;
  seg.topology = Topology::open;
  seg.param_a = -0.5;
  seg.param_b = 0.5;
  seg.nodes.resize(65);
  for (int i = 0; i < 65; ++i) seg.nodes[i] = {0.0, -0.5 + static_cast<double>(i) / 64};
  auto stepped = flow_step(seg, 1e-8, BoundaryCondition::clamped);
  for (int i = 0; i < seg.n(); ++i) CHECK(norm(stepped.nodes[i] - seg.nodes[i]) < 1e-12);

  // Random smooth closed curve: energy decreases for dt below stability.
  std::mt19937_64 rng(8);
  auto c = random_closed_disk_curve(rng, 128);
  FlowConfig cfg;
  cfg.n_nodes = 128;
  cfg.t_end = 1e-5;
  cfg.frame_every = 50;
  auto run = run_flow(cfg, c);
  REQUIRE(run.termination == Termination::reached_t_end);
  CHECK(run.max_step_energy_increase <= 1e-10 * run.initial_energy);
  for (size_t i = 1; i < run.frames.size(); ++i)
    CHECK(run.frames[i].energy <= run.frames[i - 1].energy + 1e-10 * run.initial_energy);
  CHECK(run.frames.back().energy < run.initial_energy);

  // Clamped run: boundary data re-imposed exactly after every step.
  auto drop = clamped_drop_with_energy(14.0, 65);
  const auto data = clamped_data_from_curve(drop);
  FlowConfig ccfg;
  ccfg.bc = BoundaryCondition::clamped;
  ccfg.t_end = 1e-5;
  ccfg.frame_every = 20;
  ccfg.monitor_s2prime = true;
  auto crun = run_flow(ccfg, drop);
  REQUIRE(crun.termination == Termination::reached_t_end);
  for (const auto& fr : crun.frames) {
    CHECK(norm(fr.curve.nodes.front() - data.pos_a) < 1e-12);
    CHECK(norm(fr.curve.nodes.back() - data.pos_b) < 1e-12);
    const Vec2 ea = fr.curve.nodes[1] - fr.curve.nodes[0];
    const Vec2 eb = fr.curve.nodes[fr.curve.n() - 1] - fr.curve.nodes[fr.curve.n() - 2];
    CHECK(norm(ea / norm(ea) - data.dir_a) < 1e-8);
    CHECK(norm(eb / norm(eb) - data.dir_b) < 1e-8);
    REQUIRE(fr.symmetry.has_value());
    CHECK(fr.symmetry->s2prime < 1e-8);
  }
}

TEST_CASE("circular elastica is stationary under the flow", "[flow]") {
  auto circ = disk_circle(critical_circle_radius(), 64);
  FlowConfig cfg;
  cfg.t_end = 1e-4;
  cfg.frame_every = 1000;
  auto run = run_flow(cfg, circ);
  REQUIRE(run.termination == Termination::reached_t_end);
  for (int i = 0; i < circ.n(); ++i)
    CHECK(norm(run.frames.back().curve.nodes[i] - circ.nodes[i]) < 1e-10);
}

TEST_CASE("order of accuracy: first in time, at least second in space", "[flow]") {
  std::mt19937_64 rng(55);

  auto initial_of = [&](int n) {
    std::mt19937_64 local(55);
    return random_closed_disk_curve(local, n, 0.45, 0.03, 3);
  };

  // Time order at fixed space: halving dt roughly halves the change.
  {
    const int n = 64;
    auto base = initial_of(n);
    auto final_with_dt = [&](double dt) {
      FlowConfig cfg;
      cfg.dt_policy = DtPolicy::fixed;
      cfg.dt_initial = dt;
      cfg.t_end = 4e-4;
      cfg.frame_every = 1 << 30;
      cfg.reparam_every = 1 << 30;
      auto run = run_flow(cfg, base);
      REQUIRE(run.termination == Termination::reached_t_end);
      return run.frames.back().curve;
    };
    auto c1 = final_with_dt(2e-7);
    auto c2 = final_with_dt(1e-7);
    auto c4 = final_with_dt(5e-8);
    double d12 = 0.0, d24 = 0.0;
    for (int i = 0; i < n; ++i) {
      d12 = std::max(d12, norm(c1.nodes[i] - c2.nodes[i]));
      d24 = std::max(d24, norm(c2.nodes[i] - c4.nodes[i]));
    }
    CHECK(d12 / d24 == Approx(2.0).margin(0.7));
  }

  // Space order at tiny fixed dt: doubling n shrinks the change by >= 3.
  {
    auto final_with_n = [&](int n) {
      FlowConfig cfg;
      cfg.dt_policy = DtPolicy::fixed;
      cfg.dt_initial = 1e-9;
      cfg.t_end = 4e-6;
      cfg.frame_every = 1 << 30;
      cfg.reparam_every = 1 << 30;
      auto run = run_flow(cfg, initial_of(n));
      REQUIRE(run.termination == Termination::reached_t_end);
      return run.frames.back().curve;
    };
    auto c64 = final_with_n(64);
    auto c128 = final_with_n(128);
    auto c256 = final_with_n(256);
    double coarse = 0.0, fine = 0.0;
    for (int i = 0; i < 64; ++i) coarse = std::max(coarse, norm(c64.nodes[i] - c128.nodes[2 * i]));
    for (int i = 0; i < 128; ++i) fine = std::max(fine, norm(c128.nodes[i] - c256.nodes[2 * i]));
    CHECK(coarse / fine > 3.0);
  }
}

TEST_CASE("energy dissipation rate matches the gradient norm", "[flow]") {
  std::mt19937_64 rng(77);
  auto c = random_closed_disk_curve(rng, 96);
  // estimate the stability bound, then run fixed steps at a quarter of it
  FlowConfig probe;
  probe.t_end = 1e-9;
  auto prun = run_flow(probe, c);
  const double dt_stab = prun.frames.back().dt > 0 ? prun.frames.back().dt : 1e-8;

  FlowConfig cfg;
  cfg.dt_policy = DtPolicy::fixed;
  cfg.dt_initial = 0.25 * dt_stab;
  cfg.t_end = 400 * cfg.dt_initial;
  cfg.frame_every = 1;
  cfg.reparam_every = 1 << 30;
  auto run = run_flow(cfg, c);
  REQUIRE(run.termination == Termination::reached_t_end);
  int checked = 0;
  for (size_t i = 1; i + 1 < run.frames.size(); ++i) {
    const auto& a = run.frames[i];
    const auto& b = run.frames[i + 1];
    const double quotient = (b.energy - a.energy) / (b.t - a.t);
    const double mid = -0.5 * (a.grad_norm_sq + b.grad_norm_sq);
    if (std::abs(mid) < 1e-12) continue;
    CHECK(std::abs(quotient - mid) / std::abs(mid) < 0.05);
    ++checked;
  }
  CHECK(checked > 100);
}

TEST_CASE("fenchel bound along closed runs", "[flow]") {
  std::mt19937_64 rng(101);
  auto c = random_closed_disk_curve(rng, 128);
  FlowConfig cfg;
  cfg.t_end = 1e-5;
  cfg.frame_every = 100;
  auto run = run_flow(cfg, c);
  for (const auto& fr : run.frames)
    CHECK(fenchel_check(fr.hyp_length, run.initial_energy));

  // Closed-form circle check: L * E = (2 pi cosh(rho))^2 >= 4 pi^2.
  const double rho = 0.7;
  const double r = std::tanh(0.5 * rho);
  auto circ = disk_circle(r, 512);
  const double L = hyperbolic_length(circ);
  const double E = elastic_energy(circ);
  CHECK(L == Approx(2.0 * pi * std::sinh(rho)).epsilon(1e-6));
  CHECK(E == Approx(2.0 * pi * std::cosh(rho) / std::tanh(rho)).epsilon(1e-4));
  CHECK(fenchel_check(L, E));

  // Negative control: a fabricated frame violates the bound.
  CHECK(!fenchel_check(0.1, 4.0));
}

TEST_CASE("symmetry preservation along the figure-eight flow", "[flow][fig8]") {
  auto eight = construct_lambda_figure_eight(0.5, 1e-6, 128);
  FlowConfig cfg;
  cfg.t_end = 5e-3;
  cfg.frame_every = 200;
  cfg.monitor_s1s2 = true;
  auto run = run_flow(cfg, eight);
  REQUIRE(run.termination == Termination::reached_t_end);
  REQUIRE(run.total_steps > 500);
  for (const auto& fr : run.frames) {
    REQUIRE(fr.symmetry.has_value());
    CHECK(fr.symmetry->s1 < 1e-8);
    CHECK(fr.symmetry->s2 < 1e-8);
    const int n = fr.curve.n();
    CHECK(norm(fr.curve.nodes[n / 2]) < 1e-10);  // origin node pinned
    CHECK(norm(fr.curve.nodes[0]) < 1e-10);
  }

  // Reparametrization leaves the symmetry residuals unchanged.
  const auto& last = run.frames.back().curve;
  auto res = resample_uniform_speed_smooth(last);
  CHECK(std::abs(symmetry_residual(res, SymmetryKind::S1) -
                 symmetry_residual(last, SymmetryKind::S1)) < 1e-10);
  CHECK(std::abs(symmetry_residual(res, SymmetryKind::S2) -
                 symmetry_residual(last, SymmetryKind::S2)) < 1e-10);
}

TEST_CASE("discrete-energy gradient is the exact derivative", "[flow]") {
  std::mt19937_64 rng(91);
  // closed disk curve
  {
    auto c = random_closed_disk_curve(rng, 96);
    const auto grad = discrete_energy_gradient(c);
    for (int trial = 0; trial < 4; ++trial) {
      auto v = random_variation(rng, 96);
      const double paired = pair_ds(c, grad, v);
      auto fd_at = [&](double eps) {
        SampledCurve p = c, m = c;
        for (int i = 0; i < c.n(); ++i) {
          p.nodes[i] += eps * v[i];
          m.nodes[i] -= eps * v[i];
        }
        return (elastic_energy(p) - elastic_energy(m)) / (2.0 * eps);
      };
      // Richardson-extrapolated central differences: the eps^2 term cancels,
      // leaving the oracle accurate enough to certify an exact derivative.
      const double fd = (4.0 * fd_at(5e-6) - fd_at(1e-5)) / 3.0;
      CHECK(paired == Approx(fd).epsilon(1e-9).margin(1e-8));
    }
    // agrees with the first-variation formula on resolved smooth curves
    const auto formula = elastic_gradient(c);
    double worst = 0.0, scale = 0.0;
    for (int i = 0; i < c.n(); ++i) {
      worst = std::max(worst, norm(formula[i] - grad[i]));
      scale = std::max(scale, norm(formula[i]));
    }
    CHECK(worst < 0.02 * (1.0 + scale));
  }
  // open half-plane curve (interior nodes; ends are pinned by convention)
  {
    auto u = testsupport::random_open_halfplane_curve(rng, 81);
    const auto grad = discrete_energy_gradient(u);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::vector<Vec2> v(81);
    for (int i = 0; i < 81; ++i) {
      const double x = static_cast<double>(i) / 80;
      const double bump = std::pow(x * (1.0 - x), 2);
      v[i] = {bump * std::sin(5 * x), bump * std::cos(3 * x)};
    }
    // pair against the flow's own mass (its boundary closures differ from
    // the measurement stencils)
    double paired = 0.0;
    {
      const int nn = u.n();
      std::vector<Vec2> d1(nn);
      helf::detail::diff1_flow<Vec2>(u.nodes, u.dx(), false, d1);
      for (int i = 0; i < nn; ++i) {
        const double f = metric_factor(u.nodes[i], u.model);
        const double hs = f * norm(d1[i]);
        const double tw = (i == 0 || i == nn - 1) ? 0.5 : 1.0;
        paired += dot(grad[i], v[i]) * u.dx() * tw * f * f * hs;
      }
    }
    // open grids: differentiate the flow's own discrete energy
    auto fd_at = [&](double eps) {
      SampledCurve p = u, m = u;
      for (int i = 0; i < 81; ++i) {
        p.nodes[i] += eps * v[i];
        m.nodes[i] -= eps * v[i];
      }
      return (flow_discrete_energy(p) - flow_discrete_energy(m)) / (2.0 * eps);
    };
    const double fd = (4.0 * fd_at(5e-6) - fd_at(1e-5)) / 3.0;
    CHECK(paired == Approx(fd).epsilon(1e-8).margin(1e-8));
  }
}
