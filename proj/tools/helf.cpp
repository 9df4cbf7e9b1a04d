// Command-line laboratory for the elastic flow of curves in the hyperbolic
// plane: simulate runs, synthesize elastica, rescale singularities, verify
// stored archives, and plot curves or runs as SVG.

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "helf/analysis.hpp"
#include "helf/elastica.hpp"
#include "helf/flow.hpp"
#include "helf/io.hpp"
#include "helf/svg.hpp"
#include "helf/verify.hpp"

namespace {

using namespace helf;

std::string output_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("HELF_OUT_DIR")) return env;
  return ".";
}

SampledCurve resolve_initial(const std::string& spec, int n, FlowConfig& cfg) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "lambda-eight") {
    cfg.bc = BoundaryCondition::closed;
    cfg.monitor_s1s2 = true;
    cfg.symmetrize = true;
    return construct_lambda_figure_eight(std::stod(arg), 1e-6, n);
  }
  if (kind == "clamped-drop") {
    cfg.bc = BoundaryCondition::clamped;
    cfg.monitor_s2prime = true;
    cfg.symmetrize = true;
    return clamped_drop_with_energy(arg.empty() ? 14.0 : std::stod(arg), n | 1);
  }
  if (kind == "clamped-symmetric" || kind == "file") {
    SampledCurve c = read_curve_csv(arg);
    cfg.bc = c.closed() ? BoundaryCondition::closed : BoundaryCondition::clamped;
    if (kind == "clamped-symmetric") {
      cfg.monitor_s2prime = true;
      cfg.symmetrize = true;
    }
    return c;
  }
  throw CLI::ValidationError("--initial", "unknown initial-data kind '" + kind + "'");
}

int cmd_simulate(const std::string& initial_spec, FlowConfig cfg, int n, const std::string& out,
                 const std::string& tag) {
  SampledCurve init = resolve_initial(initial_spec, n, cfg);
  cfg.n_nodes = init.n();
  const auto t0 = std::chrono::steady_clock::now();
  FlowRun run = run_flow(cfg, init);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const std::string dir = output_dir(out) + "/" + (tag.empty() ? "run" : tag);
  write_run_archive(run, dir, wall);
  const auto& last = run.frames.back();
  std::cout << "termination: "
            << (run.termination == Termination::reached_t_end        ? "reached_t_end"
                : run.termination == Termination::singular_proximity ? "singular_proximity"
                                                                     : "step_failure")
            << "\n  t = " << run.final_time << ", steps = " << run.total_steps
            << ", energy = " << last.energy << ", max|gamma| = " << last.max_abs
            << "\n  archive: " << dir << "\n";
  return run.termination == Termination::step_failure ? 1 : 0;
}

int cmd_elastica(const std::string& kind, double lambda, double energy, int n,
                 const std::string& out) {
  const std::string dir = output_dir(out);
  if (kind == "asym-geodesic") {
    auto curve = sample_asymptotically_geodesic(Model::disk, -12.0, 12.0, n);
    write_curve_csv(curve, dir + "/asym_geodesic.csv");
    SvgWriter svg;
    svg.add_curve(curve);
    svg.write(dir + "/asym_geodesic.svg");
    std::cout << "wrote " << dir << "/asym_geodesic.{csv,svg}\n";
    return 0;
  }
  if (kind == "geodesics") {
    SvgWriter svg;
    std::vector<SampledCurve> all;
    for (int k = 0; k < 6; ++k) {
      const double angle = pi * k / 6.0;
      FramePose pose{{0.35 * std::cos(angle + 1.0), 0.35 * std::sin(angle + 1.0)}, angle};
      auto arc = integrate_frame([](double) { return 0.0; }, pose, Model::disk, -4.0, 4.0, 129);
      svg.add_curve(arc.curve, "#2a7a2a");
      all.push_back(arc.curve);
    }
    svg.write(dir + "/geodesics.svg");
    write_curve_csv(all.front(), dir + "/geodesic.csv");
    std::cout << "wrote " << dir << "/geodesics.svg\n";
    return 0;
  }
  if (kind == "lambda-eight") {
    FigureEightDiagnostics diag;
    auto curve = construct_lambda_figure_eight(lambda, 1e-6, n, &diag);
    char name[64];
    std::snprintf(name, sizeof name, "lambda_eight_%g", lambda);
    write_curve_csv(curve, dir + "/" + name + ".csv");
    SvgWriter svg;
    svg.add_curve(curve);
    svg.write(dir + "/" + name + ".svg");
    std::cout << "wrote " << dir << "/" << name << ".{csv,svg}  energy = " << diag.energy
              << ", modulus = " << diag.modulus << "\n";
    return 0;
  }
  if (kind == "drop") {
    auto curve = clamped_drop_with_energy(energy, n | 1);
    write_curve_csv(curve, dir + "/clamped_drop.csv");
    SvgWriter svg;
    svg.add_curve(curve);
    svg.write(dir + "/clamped_drop.svg");
    std::cout << "wrote " << dir << "/clamped_drop.{csv,svg}  energy = " << energy << "\n";
    return 0;
  }
  throw CLI::ValidationError("--kind", "unknown elastica kind '" + kind + "'");
}

int cmd_blowup(const std::string& run_dir, double xj, double delta, const std::string& out) {
  const auto archive = read_run_archive(run_dir);
  const FlowRun run = run_from_archive(archive);
  const auto result = blow_up(run, xj, delta);
  const std::string dir = output_dir(out);
  write_curve_csv(result.rescaled, dir + "/blowup.csv");
  nlohmann::json j;
  j["x_j"] = xj;
  j["delta"] = delta;
  j["segment_count"] = result.segment_count;
  j["fit_distances"] = result.fit_distances;
  j["containment_excess"] = result.containment_excess;
  j["interior_singular_params"] = result.interior_singular_params;
  j["endpoint_a"] = {result.endpoint_a.x, result.endpoint_a.y};
  j["endpoint_b"] = {result.endpoint_b.x, result.endpoint_b.y};
  std::ofstream outf(dir + "/blowup.json");
  outf << j.dump(2) << '\n';
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_verify(const std::vector<std::string>& dirs, const std::string& out) {
  const auto report = verify_report(dirs);
  if (!out.empty()) {
    std::ofstream f(out);
    f << report.dump(2) << '\n';
  }
  std::cout << report.dump(2) << '\n';
  return report.at("pass").get<bool>() ? 0 : 1;
}

int cmd_plot(const std::string& input, const std::string& style, const std::string& out) {
  SvgWriter svg;
  if (style == "overlay") {
    const auto archive = read_run_archive(input);
    std::vector<SampledCurve> picks;
    const std::size_t stride = std::max<std::size_t>(1, archive.frames.size() / 24);
    for (std::size_t i = 0; i < archive.frames.size(); i += stride)
      picks.push_back(archive.frames[i]);
    picks.push_back(archive.frames.back());
    svg.add_overlay(picks);
  } else {
    svg.add_curve(read_curve_csv(input));
  }
  svg.write(out);
  std::cout << "wrote " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"elastic flow of curves in the hyperbolic plane"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "run the elastic flow");
  std::string initial, out_dir, tag = "run";
  FlowConfig cfg;
  int n = 128;
  std::string dt_policy = "adaptive";
  sim->add_option("--initial", initial,
                  "initial data: lambda-eight:L | clamped-drop:E | clamped-symmetric:FILE | file:PATH")
      ->required();
  sim->add_option("--n", n, "node count");
  sim->add_option("--t-end", cfg.t_end, "final time")->required();
  sim->add_option("--dt", cfg.dt_initial, "step size for the fixed policy");
  sim->add_option("--dt-policy", dt_policy, "fixed | adaptive");
  sim->add_option("--reparam-every", cfg.reparam_every, "steps between drift checks");
  sim->add_option("--reparam-drift", cfg.reparam_drift, "edge-ratio trigger");
  sim->add_option("--singular-eps", cfg.singular_eps, "stop when max|gamma| >= 1 - eps");
  sim->add_option("--frame-every", cfg.frame_every, "steps between recorded frames");
  sim->add_option("--guard", cfg.guard_start, "step-size guard coefficient");
  sim->add_option("--refine-spacing", cfg.refine_spacing, "refine when mean spacing exceeds this");
  sim->add_option("--max-nodes", cfg.max_nodes, "refinement ceiling");
  sim->add_flag("--symmetrize,!--no-symmetrize", cfg.symmetrize, "enforce curve symmetries");
  sim->add_option("--out", out_dir, "output directory (default $HELF_OUT_DIR or .)");
  sim->add_option("--tag", tag, "archive subdirectory name");

  // elastica
  auto* ela = app.add_subcommand("elastica", "synthesize elastica curves and figures");
  std::string kind = "lambda-eight", ela_out;
  double lambda = 0.5, energy = 14.0;
  int ela_n = 512;
  ela->add_option("--kind", kind, "asym-geodesic | geodesics | lambda-eight | drop");
  ela->add_option("--lambda", lambda, "constraint multiplier for lambda-eight");
  ela->add_option("--energy", energy, "target elastic energy for drop");
  ela->add_option("--n", ela_n, "node count");
  ela->add_option("--out", ela_out, "output directory");

  // blowup
  auto* blo = app.add_subcommand("blowup", "rescale a run at a singular parameter");
  std::string blo_run, blo_out;
  double xj = 1.0, delta = 0.1;
  blo->add_option("--run", blo_run, "run archive directory")->required();
  blo->add_option("--xj", xj, "singular parameter")->required();
  blo->add_option("--delta", delta, "parameter half-window");
  blo->add_option("--out", blo_out, "output directory");

  // verify
  auto* ver = app.add_subcommand("verify", "check run archives against the invariant suite");
  std::vector<std::string> ver_dirs;
  std::string ver_out;
  unsigned ver_seed = 0;
  ver->add_option("archives", ver_dirs, "run archive directories");
  ver->add_option("--out", ver_out, "write the JSON report here");
  ver->add_option("--seed", ver_seed, "seed for randomized checks");

  // plot
  auto* plo = app.add_subcommand("plot", "render a curve or run as SVG");
  std::string plot_in, plot_style = "curve", plot_out = "plot.svg";
  plo->add_option("--input", plot_in, "curve CSV or run archive directory")->required();
  plo->add_option("--style", plot_style, "curve | overlay");
  plo->add_option("--out", plot_out, "output SVG path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    if (*sim) {
      cfg.dt_policy = dt_policy == "fixed" ? DtPolicy::fixed : DtPolicy::adaptive_energy_guard;
      return cmd_simulate(initial, cfg, n, out_dir, tag);
    }
    if (*ela) return cmd_elastica(kind, lambda, energy, ela_n, ela_out);
    if (*blo) return cmd_blowup(blo_run, xj, delta, blo_out);
    if (*ver) return cmd_verify(ver_dirs, ver_out);
    if (*plo) return cmd_plot(plot_in, plot_style, plot_out);
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
