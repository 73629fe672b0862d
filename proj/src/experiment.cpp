#include "stratlearn/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "stratlearn/resolve.hpp"

namespace stratlearn {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

ExperimentOutcome run_cusp(const ExperimentSpec& spec, const fs::path& dir) {
  ExperimentOutcome res;
  res.dir = dir;
  res.quiver_file = dir / "quiver.csv";
  const Polynomial cusp = varieties::cusp();
  const Vector target = spec.cusp_target;
  VectorField field = [&](const AmbientPoint& x) -> Vector { return x - target; };

  auto out = open_out(res.quiver_file);
  out << kQuiverHeader << '\n';
  const double t_min = -1.2;
  const int n = spec.quiver_points;
  for (double level : spec.levels) {
    double t_max = std::cbrt(level);
    std::vector<AmbientPoint> pts;
    for (int branch : {1, -1}) {
      for (int k = 0; k < n; ++k) {
        double t = t_min + (t_max - t_min) * k / (n - 1);
        double x0 = branch * std::sqrt(std::max(0.0, level - t * t * t));
        if (branch < 0 && k == n - 1) continue;  // shared tip of both branches
        AmbientPoint x(2);
        x << x0, t;
        pts.push_back(x);
      }
    }
    auto grads = projected_gradient_field(cusp, level, field, pts);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      out << format_real(level) << ',' << format_real(pts[i][0]) << ',' << format_real(pts[i][1]) << ',';
      if (grads[i]) {
        out << format_real((*grads[i])[0]) << ',' << format_real((*grads[i])[1]) << ",ok\n";
      } else {
        out << ",,UNDEFINED\n";
      }
    }
  }
  return res;
}

}  // namespace

void write_trajectory_csv(const Trajectory& t, const fs::path& path) {
  auto out = open_out(path);
  out << kTrajectoryHeader << '\n';
  for (const auto& r : t.records) {
    out << r.step << ',' << format_real(r.q.xi) << ',' << format_real(r.q.theta) << ',' << format_real(r.mu[0]) << ','
        << format_real(r.mu[1]) << ',' << format_real(r.mu[2]) << ',' << format_real(r.loss) << ','
        << format_real(r.grad_norm) << '\n';
  }
}

std::vector<AggregateRow> aggregate_losses(const std::vector<std::vector<std::pair<long long, double>>>& series) {
  std::set<long long> steps;
  for (const auto& s : series)
    for (const auto& [step, l] : s) steps.insert(step);
  std::vector<AggregateRow> out;
  std::vector<std::size_t> cursor(series.size(), 0);
  for (long long step : steps) {
    std::vector<double> values;
    for (std::size_t i = 0; i < series.size(); ++i) {
      const auto& s = series[i];
      while (cursor[i] + 1 < s.size() && s[cursor[i] + 1].first <= step) ++cursor[i];
      if (!s.empty() && s[cursor[i]].first <= step) values.push_back(s[cursor[i]].second);
    }
    if (values.empty()) continue;
    double sum = 0.0;
    for (double v : values) sum += v;
    out.push_back({step, sum / static_cast<double>(values.size()), median(values), static_cast<int>(values.size())});
  }
  return out;
}

ExperimentOutcome run_experiment(const ExperimentSpec& spec, const fs::path& out_root, int workers) {
  spec.validate();
  const fs::path dir = (out_root.empty() ? spec.output_dir : out_root) / spec.name;
  fs::create_directories(dir);

  ExperimentOutcome res;
  if (spec.model == ModelKind::Cusp) {
    res = run_cusp(spec, dir);
  } else {
    res.dir = dir;
    const GaussianLocationModel model{spec.chart(), spec.target_mean()};
    const auto inits = spec.initializations();
    const std::vector<AmbientPoint> apex = {AmbientPoint::Zero(3)};
    const std::size_t n = inits.size();
    res.trajectories.resize(n);
    res.stalls.resize(n);
    res.trajectory_files.resize(n);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < n; i = next++) {
        Trajectory t = run(model, inits[i], spec.optimizer);
        StallReport s;
        if (t.records.size() >= static_cast<std::size_t>(spec.plateau_window)) {
          s = detect_stall(t, spec.plateau_window, spec.plateau_tol, spec.optimizer.loss_tol, apex);
        } else {
          s.mean_rel_decrease = std::numeric_limits<double>::quiet_NaN();
          s.nearest_singularity_distance = t.last().mu.norm();
        }
        fs::path file = dir / fmt::format("traj_{:03d}.csv", i);
        write_trajectory_csv(t, file);
        res.trajectory_files[i] = file;
        res.trajectories[i] = std::move(t);
        res.stalls[i] = s;
      }
    };
    const int n_workers = std::clamp(workers, 1, static_cast<int>(std::max<std::size_t>(n, 1)));
    if (n_workers == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }

    std::vector<std::vector<std::pair<long long, double>>> series;
    for (const auto& t : res.trajectories) {
      auto& s = series.emplace_back();
      for (const auto& r : t.records) s.emplace_back(r.step, r.loss);
      if (t.failed()) ++res.failed;
    }
    res.aggregate_file = dir / "aggregate.csv";
    {
      auto out = open_out(res.aggregate_file);
      out << kAggregateHeader << '\n';
      for (const auto& row : aggregate_losses(series))
        out << row.step << ',' << format_real(row.mean_loss) << ',' << format_real(row.median_loss) << ','
            << row.count << '\n';
    }
    res.stall_file = dir / "stall.csv";
    {
      auto out = open_out(res.stall_file);
      out << kStallHeader << '\n';
      for (std::size_t i = 0; i < n; ++i) {
        const auto& t = res.trajectories[i];
        const auto& s = res.stalls[i];
        std::string err = t.error;
        std::replace(err.begin(), err.end(), ',', ';');
        out << i << ',' << format_real(inits[i].xi) << ',' << format_real(inits[i].theta) << ',' << (s.stalled ? 1 : 0)
            << ',' << s.window_start << ',' << format_real(s.mean_rel_decrease) << ','
            << format_real(s.nearest_singularity_distance) << ',' << to_string(t.terminated_by) << ','
            << t.last().step << ',' << format_real(t.last().loss) << ',' << err << '\n';
      }
    }
  }

  res.metadata_file = dir / "metadata.cfg";
  auto meta = open_out(res.metadata_file);
  meta << "# stratlearn " << STRATLEARN_VERSION << "\n";
  meta << "# Resolved settings; re-run with: stratlearn run <this file>\n";
  if (spec.model != ModelKind::Cusp) {
    const auto inits = spec.initializations();
    for (std::size_t i = 0; i < inits.size(); ++i)
      meta << fmt::format("# init {:03d}: {}, {}\n", i, format_real(inits[i].xi), format_real(inits[i].theta));
    const Vector3 xbar = spec.target_mean();
    meta << fmt::format("# target mean: {}, {}, {}\n", format_real(xbar[0]), format_real(xbar[1]), format_real(xbar[2]));
  }
  ExperimentSpec echo = spec;
  echo.output_dir = out_root.empty() ? spec.output_dir : out_root;
  meta << to_config_text(echo);
  return res;
}

}  // namespace stratlearn
