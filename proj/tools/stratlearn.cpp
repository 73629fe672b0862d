// stratlearn: singular parameter spaces, their smooth resolutions, and
// (natural) gradient descent on both.

#include <cmath>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "stratlearn/config.hpp"
#include "stratlearn/experiment.hpp"
#include "stratlearn/plot.hpp"
#include "stratlearn/poly.hpp"
#include "stratlearn/resolve.hpp"
#include "stratlearn/stratify.hpp"
#include "stratlearn/verify.hpp"

using namespace stratlearn;

namespace {

// "lo,hi" for every axis or "lo,hi;lo,hi;..." per axis.
Region parse_region(const std::string& text, int dim) {
  std::vector<std::pair<double, double>> axes;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ';')) {
    auto comma = part.find(',');
    if (comma == std::string::npos) throw std::invalid_argument(fmt::format("bad region '{}'", text));
    axes.emplace_back(std::stod(part.substr(0, comma)), std::stod(part.substr(comma + 1)));
  }
  if (axes.size() == 1) return Region::cube(dim, axes[0].first, axes[0].second);
  if (static_cast<int>(axes.size()) != dim)
    throw std::invalid_argument(fmt::format("region has {} axes, polynomial has {} variables", axes.size(), dim));
  Vector lo(dim), hi(dim);
  for (int i = 0; i < dim; ++i) {
    lo[i] = axes[static_cast<std::size_t>(i)].first;
    hi[i] = axes[static_cast<std::size_t>(i)].second;
  }
  return Region(lo, hi);
}

std::string point_str(const AmbientPoint& x) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < x.size(); ++i) s += (i ? ", " : "") + fmt::format("{:.6g}", std::abs(x[i]) < 1e-300 ? 0.0 : x[i]);
  return s + ")";
}

void write_points_csv(const std::vector<AmbientPoint>& pts, int dim, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path));
  for (int i = 0; i < dim; ++i) out << (i ? "," : "") << 'x' << i;
  out << '\n';
  for (const auto& p : pts) {
    for (int i = 0; i < dim; ++i) out << (i ? "," : "") << format_real(p[i]);
    out << '\n';
  }
}

int cmd_stratify(const std::string& poly_text, int nvars, double level, const std::string& region_text,
                 const std::string& csv) {
  Polynomial p = Polynomial::parse(poly_text, nvars);
  Region region = parse_region(region_text, p.nvars());
  Stratification st = stratify(p, level, region);
  fmt::print("variety: {} = {}\n", p.to_string(), format_real(level));
  fmt::print("ambient_dim: {}\n", p.nvars());
  fmt::print("regular_dim: {}\n", st.regular_dim);
  fmt::print("singular_points: {}\n", st.singular_points.size());
  for (std::size_t i = 0; i < st.singular_points.size(); ++i)
    fmt::print("  s{} = {} enclosing_radius = {:.6g}\n", i, point_str(st.singular_points[i]), st.balls[i].radius);
  fmt::print("strata: {}\n", st.singular_points.empty()
                                 ? fmt::format("S^{} only (smooth)", st.regular_dim)
                                 : fmt::format("S^0 ({} points) + S^{}", st.singular_points.size(), st.regular_dim));
  for (const auto& w : st.warnings) fmt::print("warning: {}\n", w);
  if (!csv.empty()) write_points_csv(st.singular_points, p.nvars(), csv);
  return 0;
}

int cmd_resolve(const std::string& poly_text, int nvars, double eps, const std::string& region_text, int grid_n,
                int samples, std::uint64_t seed, double exclusion, const std::string& csv) {
  Polynomial p = Polynomial::parse(poly_text, nvars);
  Region region = parse_region(region_text, p.nvars());
  ResolutionChoice choice = choose_resolution(p, eps, region, grid_n, samples, seed);
  fmt::print("variety: {} = 0\n", p.to_string());
  fmt::print("level +{}: components = {} occupied_cells = {} smooth = {}\n", format_real(eps), choice.plus.count,
             choice.plus.occupied_cells, choice.plus_smooth);
  fmt::print("level -{}: components = {} occupied_cells = {} smooth = {}\n", format_real(eps), choice.minus.count,
             choice.minus.occupied_cells, choice.minus_smooth);
  fmt::print("chosen_level: {}\n", format_real(choice.chosen.level));
  try {
    double d = proximity_check(choice.chosen, exclusion, samples, seed);
    fmt::print("max_distance_outside_r{}: {:.6g}\n", exclusion, d);
  } catch (const ResolutionError& e) {
    fmt::print("proximity: {}\n", e.what());
  }
  if (!csv.empty())
    write_points_csv(sample_level_set(p, choice.chosen.level, region, samples, seed), p.nvars(), csv);
  return 0;
}

int cmd_run(const std::string& config, const std::string& preset_name, const std::string& out, int workers) {
  std::vector<ExperimentSpec> specs;
  if (!preset_name.empty()) {
    specs = preset(preset_name);
  } else if (!config.empty()) {
    specs = load_config(config);
  } else {
    throw CLI::ValidationError("run", "need a config file or --preset NAME");
  }
  int failed = 0;
  for (const auto& spec : specs) {
    ExperimentOutcome res = run_experiment(spec, out, workers);
    fmt::print("{}: wrote {}\n", spec.name, res.dir.string());
    for (std::size_t i = 0; i < res.trajectories.size(); ++i) {
      const auto& t = res.trajectories[i];
      fmt::print("  traj {:03d}: {} after {} steps, loss {:.6g}, stalled {}{}\n", i, to_string(t.terminated_by),
                 t.last().step, t.last().loss, res.stalls[i].stalled ? "yes" : "no",
                 t.failed() ? " error: " + t.error : "");
    }
    failed += res.failed;
  }
  if (failed) fmt::print(stderr, "{} trajectories ended with an error\n", failed);
  return failed ? 1 : 0;
}

int cmd_check(int workers) {
  bool ok = true;
  for (const auto& r : run_oracle_suite(20240611, workers)) {
    fmt::print("[{}] {}: worst {:.3g} (tol {:.3g})\n", r.passed ? "PASS" : "FAIL", r.name, r.worst, r.tolerance);
    ok &= r.passed;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stratlearn: singular parameter spaces, resolutions and learning dynamics"};
  app.set_version_flag("--version", STRATLEARN_VERSION);
  app.require_subcommand(1);

  std::string poly_text, region_text = "-2,2", csv;
  int nvars = 0;
  double level = 0.0;
  auto* st = app.add_subcommand("stratify", "locate singular points and strata of p = level");
  st->add_option("poly", poly_text, "polynomial, e.g. \"x1^2 + x2^2 - x0^2\"")->required();
  st->add_option("--level", level, "level value");
  st->add_option("--region", region_text, "box 'lo,hi' or 'lo,hi;lo,hi;...'");
  st->add_option("--nvars", nvars, "number of variables (default: inferred)");
  st->add_option("--csv", csv, "write singular points to CSV");

  double eps = 0.1, exclusion = 0.5;
  int grid_n = 64, samples = 10000;
  std::uint64_t seed = 1;
  auto* rs = app.add_subcommand("resolve", "choose a smooth deformation p = +/-eps");
  rs->add_option("poly", poly_text, "polynomial")->required();
  rs->add_option("--eps", eps, "deformation size")->required();
  rs->add_option("--region", region_text, "box 'lo,hi' or 'lo,hi;lo,hi;...'");
  rs->add_option("--nvars", nvars, "number of variables (default: inferred)");
  rs->add_option("--grid", grid_n, "occupancy grid cells per axis");
  rs->add_option("--samples", samples, "samples for smoothness and proximity checks");
  rs->add_option("--seed", seed, "sampling seed");
  rs->add_option("--exclusion", exclusion, "exclusion radius around singular points for the proximity check");
  rs->add_option("--csv", csv, "write sampled points of the chosen deformation to CSV");

  std::string config, preset_name, out;
  int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  auto* rn = app.add_subcommand("run", "run an experiment config or preset");
  rn->add_option("config", config, "config file");
  rn->add_option("--preset", preset_name, "preset name")->check(CLI::IsMember(preset_names()));
  rn->add_option("--out", out, "output root directory (default: output_dir from the config)");
  rn->add_option("--workers", workers, "worker threads");

  std::string kind, plot_out, title;
  std::vector<std::string> inputs;
  std::vector<double> target;
  auto* pl = app.add_subcommand("plot", "render CSV output as SVG");
  pl->add_option("--kind", kind, "loss_curves | topview_trajectories | quiver")->required();
  pl->add_option("--out", plot_out, "output SVG")->required();
  pl->add_option("--target", target, "target marker mu2 mu3 (topview)")->expected(2);
  pl->add_option("--title", title, "plot title");
  pl->add_option("csv", inputs, "input CSV files")->required();

  auto* ck = app.add_subcommand("check", "run the oracle suite; nonzero exit on any violation");
  ck->add_option("--workers", workers, "worker threads for Monte-Carlo sampling");

  auto* ps = app.add_subcommand("presets", "list presets or print one");
  std::string dump;
  ps->add_option("name", dump, "preset to print");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*st) return cmd_stratify(poly_text, nvars, level, region_text, csv);
    if (*rs) return cmd_resolve(poly_text, nvars, eps, region_text, grid_n, samples, seed, exclusion, csv);
    if (*rn) return cmd_run(config, preset_name, out, workers);
    if (*pl) {
      PlotOptions opts;
      opts.title = title;
      if (target.size() == 2) opts.target = Eigen::Vector2d(target[0], target[1]);
      std::vector<std::filesystem::path> files(inputs.begin(), inputs.end());
      plot(parse_plot_kind(kind), files, plot_out, opts);
      return 0;
    }
    if (*ck) return cmd_check(workers);
    if (*ps) {
      if (dump.empty()) {
        for (const auto& n : preset_names()) fmt::print("{}\n", n);
      } else {
        fmt::print("{}", preset_text(dump));
      }
      return 0;
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
  return 0;
}
