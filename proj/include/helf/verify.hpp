#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "helf/analysis.hpp"
#include "helf/io.hpp"

// The archive verification suite: every run-level invariant of the flow and
// analysis modules, evaluated over a stored run and reported as JSON
// verdicts.

namespace helf {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

namespace detail {

inline void add_check(std::vector<CheckResult>& out, const std::string& name, bool pass,
                      const std::string& detail) {
  out.push_back({name, pass, detail});
}

}  // namespace detail

inline std::vector<CheckResult> verify_archive(const RunArchive& archive) {
  std::vector<CheckResult> checks;
  const FlowRun run = run_from_archive(archive);
  const double e0 = run.initial_energy;
  const double step_tol = 1e-10 * e0;
  char buf[256];

  // per accepted step the energy is non-increasing (up to the guard slack)
  {
    const double inc = archive.summary.at("max_step_energy_increase").get<double>();
    std::snprintf(buf, sizeof buf, "max step increase %.3e vs %.3e", inc, step_tol);
    detail::add_check(checks, "energy_dissipation_per_step", inc <= step_tol, buf);
  }

  // frame times strictly increasing, max_abs inside the disk
  {
    bool times_ok = true, inside = true;
    for (std::size_t i = 0; i < run.frames.size(); ++i) {
      if (i > 0 && !(run.frames[i].t > run.frames[i - 1].t)) times_ok = false;
      if (run.frames[i].max_abs >= 1.0) inside = false;
    }
    detail::add_check(checks, "frame_times_increasing", times_ok, "");
    detail::add_check(checks, "max_abs_inside_disk", inside, "");
  }

  // frame-level energy accounting: decrease up to the per-step slack plus
  // the recorded reparametrization deltas
  {
    std::vector<std::pair<std::int64_t, double>> events;
    for (const auto& e : archive.summary.at("reparam_events"))
      events.push_back({e.at("step").get<std::int64_t>(), e.at("denergy").get<double>()});
    bool ok = true;
    double worst = 0.0;
    for (std::size_t i = 1; i < run.frames.size(); ++i) {
      const auto& a = run.frames[i - 1];
      const auto& b = run.frames[i];
      double allowance = (b.step - a.step) * step_tol;
      for (const auto& ev : events)
        if (ev.first > a.step && ev.first <= b.step && ev.second > 0.0) allowance += ev.second;
      const double rise = b.energy - a.energy;
      worst = std::max(worst, rise - allowance);
      if (rise > allowance + 1e-12 * e0) ok = false;
    }
    std::snprintf(buf, sizeof buf, "worst unexplained rise %.3e", worst);
    detail::add_check(checks, "energy_dissipation_frames", ok, buf);
  }

  // stored frame energies match the stored curves (budget bookkeeping)
  {
    bool ok = true;
    double worst = 0.0;
    const std::size_t idx[3] = {0, run.frames.size() / 2, run.frames.size() - 1};
    for (std::size_t k : idx) {
      const double stored = run.frames[k].energy;
      const double recomputed = flow_discrete_energy(run.frames[k].curve);
      const double diff = std::abs(stored - recomputed);
      worst = std::max(worst, diff);
      if (diff > 1e-6 * (1.0 + stored)) ok = false;
    }
    std::snprintf(buf, sizeof buf, "worst |stored - recomputed| %.3e", worst);
    detail::add_check(checks, "energy_matches_frames", ok, buf);
  }
  {
    const double stored = e0;
    const double recomputed = flow_discrete_energy(run.frames.front().curve);
    const bool ok = std::abs(stored - recomputed) <= 1e-6 * (1.0 + recomputed);
    std::snprintf(buf, sizeof buf, "stored %.6f recomputed %.6f", stored, recomputed);
    detail::add_check(checks, "initial_energy_matches", ok, buf);
  }

  // Fenchel bound along closed runs
  if (run.config.bc == BoundaryCondition::closed) {
    bool ok = true;
    for (const auto& fr : run.frames)
      if (!fenchel_check(fr.hyp_length, e0)) ok = false;
    detail::add_check(checks, "fenchel_length_bound", ok, "");
  }

  // Euclidean length boundedness (finite-time proxy)
  {
    const double t_final = run.frames.back().t;
    std::vector<double> tail;
    for (const auto& fr : run.frames)
      if (fr.t > 0.25 * t_final) tail.push_back(fr.euc_length);
    if (tail.size() >= 3) {
      std::sort(tail.begin(), tail.end());
      const double median = tail[tail.size() / 2];
      double worst = 0.0;
      for (const auto& fr : run.frames) worst = std::max(worst, fr.euc_length);
      std::snprintf(buf, sizeof buf, "max %.4f vs 1.2 x median %.4f", worst, median);
      detail::add_check(checks, "euclidean_length_bounded", worst <= 1.2 * median, buf);
    }
  }

  // gradient-energy consistency dE/dt = -h(t), on frame pairs taken at
  // steps below half the stability bound with slowly varying h
  {
    int eligible = 0, passed = 0;
    for (std::size_t i = 1; i < run.frames.size(); ++i) {
      const auto& a = run.frames[i - 1];
      const auto& b = run.frames[i];
      if (a.guard <= 0.0 || a.min_hyp_edge <= 0.0) continue;
      const double bound = a.guard * std::pow(a.min_hyp_edge, 4);
      if (!(a.dt > 0.0) || a.dt > 0.5 * bound) continue;
      const double ga = a.grad_norm_sq, gb = b.grad_norm_sq;
      if (ga <= 0.0 || gb <= 0.0) continue;
      if (std::abs(ga - gb) > 0.1 * std::max(ga, gb)) continue;
      ++eligible;
      const double quotient = (b.energy - a.energy) / (b.t - a.t);
      const double mid = -0.5 * (ga + gb);
      if (std::abs(quotient - mid) <= 0.05 * std::abs(mid)) ++passed;
    }
    std::snprintf(buf, sizeof buf, "%d/%d eligible pairs within 5%%", passed, eligible);
    detail::add_check(checks, "dissipation_rate_consistency", eligible == passed, buf);
  }

  // symmetry residual bound, when monitored
  {
    bool any = false, ok = true;
    double worst = 0.0;
    for (const auto& fr : run.frames) {
      if (!fr.symmetry) continue;
      any = true;
      const double r = std::max({fr.symmetry->s1, fr.symmetry->s2, fr.symmetry->s2prime});
      worst = std::max(worst, r);
      if (r > 1e-8) ok = false;
    }
    if (any) {
      std::snprintf(buf, sizeof buf, "worst residual %.3e", worst);
      detail::add_check(checks, "symmetry_residuals", ok, buf);
    }
  }

  // quantization accounting for singular runs
  if (run.termination == Termination::singular_proximity) {
    const auto rep = quantization_report(run, e0);
    if (!rep.conclusive) {
      detail::add_check(checks, "quantization_conclusive", false, "run far from its limit");
    } else {
      detail::add_check(checks, "quantization_conclusive", true, "");
      std::snprintf(buf, sizeof buf, "m = %d, floor(E0/8) = %d", rep.count,
                    static_cast<int>(std::floor(e0 / 8.0)));
      detail::add_check(checks, "singularity_count_bound",
                        rep.count <= static_cast<int>(std::floor(e0 / 8.0)), buf);
      std::snprintf(buf, sizeof buf, "residual %.4f vs budget %.4f", rep.residual_energy,
                    e0 - 8.0 * rep.count + 0.5);
      detail::add_check(checks, "quantization_budget", rep.budget_ok, buf);
      bool cost_ok = true;
      for (double e : rep.per_singularity_energy)
        if (e < 7.5) cost_ok = false;
      detail::add_check(checks, "per_singularity_cost", cost_ok, "each window >= 7.5");
      if (rep.count >= 1) {
        const auto bu = blow_up(run, rep.singular_params.front(), 0.1);
        std::snprintf(buf, sizeof buf, "containment excess %.2e", bu.containment_excess);
        detail::add_check(checks, "blowup_containment", bu.containment_excess <= 1e-9, buf);
        bool fit_ok = !bu.fit_distances.empty();
        for (double d : bu.fit_distances)
          if (!(d < 0.05)) fit_ok = false;
        std::snprintf(buf, sizeof buf, "fit distance %.4f",
                      bu.fit_distances.empty() ? -1.0 : bu.fit_distances.front());
        detail::add_check(checks, "blowup_elastica_fit", fit_ok, buf);
      }
    }
  }

  return checks;
}

inline nlohmann::json verify_report(const std::vector<std::string>& dirs) {
  nlohmann::json report;
  report["archives"] = nlohmann::json::array();
  bool all = true;
  for (const auto& dir : dirs) {
    const auto archive = read_run_archive(dir);
    const auto checks = verify_archive(archive);
    nlohmann::json ja;
    ja["directory"] = dir;
    ja["checks"] = nlohmann::json::array();
    bool pass = true;
    for (const auto& c : checks) {
      ja["checks"].push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
      pass = pass && c.pass;
    }
    ja["pass"] = pass;
    all = all && pass;
    report["archives"].push_back(std::move(ja));
  }
  report["pass"] = all;
  return report;
}

}  // namespace helf
