#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "helf/analysis.hpp"
#include "helf/flow.hpp"
#include "helf/geometry.hpp"

// Persistence: curve CSV, frames CSV, run-summary JSON. All numeric output
// is printed with enough digits to round-trip bit-exactly.

namespace helf {

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

// --------------------------------------------------------------------------
// Curve CSV: header "model,topology,n" then rows "index,x,y".

inline void write_curve_csv(const SampledCurve& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open for writing: " + path);
  out << (c.model == Model::disk ? "disk" : "half-plane") << ','
      << (c.closed() ? "closed" : "open") << ',' << c.n() << '\n';
  for (int i = 0; i < c.n(); ++i)
    out << i << ',' << detail::fmt_double(c.nodes[i].x) << ','
        << detail::fmt_double(c.nodes[i].y) << '\n';
  if (!out) throw io_error("write failed: " + path);
}

inline SampledCurve read_curve_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open: " + path);
  std::string header;
  if (!std::getline(in, header)) throw io_error("empty curve file: " + path);
  SampledCurve c;
  {
    std::stringstream ss(header);
    std::string model, topo, count;
    if (!std::getline(ss, model, ',') || !std::getline(ss, topo, ',') ||
        !std::getline(ss, count, ','))
      throw io_error("bad curve header in " + path);
    if (model == "disk")
      c.model = Model::disk;
    else if (model == "half-plane")
      c.model = Model::half_plane;
    else
      throw io_error("unknown model '" + model + "' in " + path);
    if (topo == "closed")
      c.topology = Topology::closed;
    else if (topo == "open")
      c.topology = Topology::open;
    else
      throw io_error("unknown topology '" + topo + "' in " + path);
    c.nodes.resize(std::stoi(count));
  }
  c.param_a = c.closed() ? -2.0 : -1.0;
  c.param_b = c.closed() ? 2.0 : 1.0;
  std::string line;
  std::size_t seen = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string idx, x, y;
    if (!std::getline(ss, idx, ',') || !std::getline(ss, x, ',') || !std::getline(ss, y, ','))
      throw io_error("bad curve row in " + path);
    const std::size_t i = std::stoul(idx);
    if (i >= c.nodes.size()) throw io_error("node index out of range in " + path);
    c.nodes[i] = {std::stod(x), std::stod(y)};
    ++seen;
  }
  if (seen != c.nodes.size()) throw io_error("node count mismatch in " + path);
  return c;
}

// --------------------------------------------------------------------------
// Frames CSV: rows "t,node,x,y,kappa"; frames appear in time order.

inline void write_frames_csv(const FlowRun& run, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open for writing: " + path);
  out << "t,node,x,y,kappa\n";
  for (const auto& fr : run.frames) {
    const auto kappa = signed_curvature_covariant(fr.curve);
    const std::string t = detail::fmt_double(fr.t);
    for (int i = 0; i < fr.curve.n(); ++i)
      out << t << ',' << i << ',' << detail::fmt_double(fr.curve.nodes[i].x) << ','
          << detail::fmt_double(fr.curve.nodes[i].y) << ',' << detail::fmt_double(kappa[i])
          << '\n';
  }
  if (!out) throw io_error("write failed: " + path);
}

// Rebuilds the frame curves (the per-frame scalars live in the summary).
inline std::vector<SampledCurve> read_frames_csv(const std::string& path, Model model,
                                                 Topology topology) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) throw io_error("empty frames file: " + path);
  std::vector<SampledCurve> frames;
  std::string current_t;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string t, node, x, y, kappa;
    if (!std::getline(ss, t, ',') || !std::getline(ss, node, ',') || !std::getline(ss, x, ',') ||
        !std::getline(ss, y, ',') || !std::getline(ss, kappa, ','))
      throw io_error("bad frame row in " + path);
    if (t != current_t) {
      frames.emplace_back();
      frames.back().model = model;
      frames.back().topology = topology;
      frames.back().param_a = topology == Topology::closed ? -2.0 : -1.0;
      frames.back().param_b = topology == Topology::closed ? 2.0 : 1.0;
      current_t = t;
    }
    frames.back().nodes.push_back({std::stod(x), std::stod(y)});
  }
  return frames;
}

// --------------------------------------------------------------------------
// Run summary JSON and the on-disk archive (a directory holding
// summary.json + frames.csv).

inline nlohmann::json summary_json(const FlowRun& run, double wall_seconds,
                                   const std::string& frames_file) {
  nlohmann::json j;
  j["tool"] = "helf 0.1.0";
  j["wall_seconds"] = wall_seconds;
  j["config"] = {
      {"n_nodes", run.config.n_nodes},
      {"dt_initial", run.config.dt_initial},
      {"dt_policy", run.config.dt_policy == DtPolicy::fixed ? "fixed" : "adaptive_energy_guard"},
      {"t_end", run.config.t_end},
      {"bc", run.config.bc == BoundaryCondition::closed ? "closed" : "clamped"},
      {"reparam_every", run.config.reparam_every},
      {"reparam_drift", run.config.reparam_drift},
      {"singular_eps", run.config.singular_eps},
      {"frame_every", run.config.frame_every},
      {"guard_start", run.config.guard_start},
      {"symmetrize", run.config.symmetrize},
      {"refine_spacing", run.config.refine_spacing},
      {"max_nodes", run.config.max_nodes},
  };
  j["initial_energy"] = run.initial_energy;
  j["final_time"] = run.final_time;
  j["total_steps"] = run.total_steps;
  j["rejected_steps"] = run.rejected_steps;
  j["max_step_energy_increase"] = run.max_step_energy_increase;
  switch (run.termination) {
    case Termination::reached_t_end: j["termination"] = "reached_t_end"; break;
    case Termination::singular_proximity: j["termination"] = "singular_proximity"; break;
    case Termination::step_failure: j["termination"] = "step_failure"; break;
  }
  nlohmann::json frames = nlohmann::json::array();
  for (const auto& fr : run.frames) {
    nlohmann::json f{{"t", fr.t},
                     {"step", fr.step},
                     {"energy", fr.energy},
                     {"hyp_length", fr.hyp_length},
                     {"euc_length", fr.euc_length},
                     {"grad_norm_sq", fr.grad_norm_sq},
                     {"max_abs", fr.max_abs},
                     {"dt", fr.dt},
                     {"guard", fr.guard},
                     {"min_hyp_edge", fr.min_hyp_edge},
                     {"n", fr.curve.n()}};
    if (fr.symmetry) {
      f["s1_residual"] = fr.symmetry->s1;
      f["s2_residual"] = fr.symmetry->s2;
      f["s2prime_residual"] = fr.symmetry->s2prime;
    }
    frames.push_back(std::move(f));
  }
  j["frames"] = std::move(frames);
  nlohmann::json reps = nlohmann::json::array();
  for (const auto& e : run.reparam_events)
    reps.push_back({{"step", e.step}, {"denergy", e.energy_delta}});
  j["reparam_events"] = std::move(reps);
  j["frames_csv"] = frames_file;
  return j;
}

struct RunArchive {
  nlohmann::json summary;
  std::vector<SampledCurve> frames;
  std::string directory;

  Model model() const { return Model::disk; }
  Topology topology() const {
    return summary.at("config").at("bc") == "closed" ? Topology::closed : Topology::open;
  }
};

inline void write_run_archive(const FlowRun& run, const std::string& dir, double wall_seconds) {
  std::filesystem::create_directories(dir);
  write_frames_csv(run, dir + "/frames.csv");
  std::ofstream out(dir + "/summary.json");
  if (!out) throw io_error("cannot open for writing: " + dir + "/summary.json");
  out << summary_json(run, wall_seconds, "frames.csv").dump(2) << '\n';
}

inline RunArchive read_run_archive(const std::string& dir) {
  RunArchive a;
  a.directory = dir;
  std::ifstream in(dir + "/summary.json");
  if (!in) throw io_error("cannot open: " + dir + "/summary.json");
  try {
    in >> a.summary;
  } catch (const std::exception& e) {
    throw io_error("corrupt summary in " + dir + ": " + e.what());
  }
  const Topology topo =
      a.summary.at("config").at("bc") == "closed" ? Topology::closed : Topology::open;
  a.frames = read_frames_csv(dir + "/" + a.summary.at("frames_csv").get<std::string>(),
                             Model::disk, topo);
  return a;
}

// Reconstruct a FlowRun (geometry plus the stored scalars) from an archive,
// for the post-hoc analysis passes.
inline FlowRun run_from_archive(const RunArchive& a) {
  FlowRun run;
  run.initial_energy = a.summary.at("initial_energy").get<double>();
  run.final_time = a.summary.at("final_time").get<double>();
  run.total_steps = a.summary.at("total_steps").get<std::int64_t>();
  const std::string term = a.summary.at("termination").get<std::string>();
  run.termination = term == "singular_proximity" ? Termination::singular_proximity
                    : term == "step_failure"     ? Termination::step_failure
                                                 : Termination::reached_t_end;
  run.config.bc = a.topology() == Topology::closed ? BoundaryCondition::closed
                                                   : BoundaryCondition::clamped;
  const auto& fr = a.summary.at("frames");
  for (std::size_t i = 0; i < a.frames.size() && i < fr.size(); ++i) {
    FlowFrame f;
    f.curve = a.frames[i];
    f.t = fr[i].at("t").get<double>();
    f.step = fr[i].at("step").get<std::int64_t>();
    f.energy = fr[i].at("energy").get<double>();
    f.hyp_length = fr[i].at("hyp_length").get<double>();
    f.euc_length = fr[i].at("euc_length").get<double>();
    f.grad_norm_sq = fr[i].at("grad_norm_sq").get<double>();
    f.max_abs = fr[i].at("max_abs").get<double>();
    f.dt = fr[i].at("dt").get<double>();
    if (fr[i].contains("guard")) f.guard = fr[i].at("guard").get<double>();
    if (fr[i].contains("min_hyp_edge")) f.min_hyp_edge = fr[i].at("min_hyp_edge").get<double>();
    if (fr[i].contains("s1_residual")) {
      SymmetryResiduals s;
      s.s1 = fr[i].at("s1_residual").get<double>();
      s.s2 = fr[i].at("s2_residual").get<double>();
      s.s2prime = fr[i].at("s2prime_residual").get<double>();
      f.symmetry = s;
    }
    run.frames.push_back(std::move(f));
  }
  return run;
}

}  // namespace helf
