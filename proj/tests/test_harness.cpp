#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "stratlearn/config.hpp"
#include "stratlearn/experiment.hpp"
#include "stratlearn/plot.hpp"

namespace stratlearn {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  fs::path p = fs::path(::testing::TempDir()) / ("stratlearn_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_rows(const fs::path& p, std::string* header = nullptr) {
  std::ifstream in(p, std::ios::binary);
  std::string line;
  std::getline(in, line);
  if (header) *header = line;
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

constexpr const char* kMinimal = R"(# a comment
[experiment]
name = tiny
model = cone
method = gd
target = 1, 0
init = 0.5, 0.2
)";

TEST(Config, MinimalFileGetsDefaults) {
  auto specs = parse_config(kMinimal);
  ASSERT_EQ(specs.size(), 1u);
  const ExperimentSpec& s = specs[0];
  OptimizerConfig d;
  EXPECT_EQ(s.name, "tiny");
  EXPECT_EQ(s.model, ModelKind::Cone);
  EXPECT_EQ(s.optimizer.step_size, d.step_size);
  EXPECT_EQ(s.optimizer.max_steps, d.max_steps);
  EXPECT_EQ(s.optimizer.damping, d.damping);
  EXPECT_EQ(s.optimizer.step_cap, d.step_cap);
  EXPECT_EQ(s.plateau_window, 100);
  ASSERT_EQ(s.inits.size(), 1u);
  EXPECT_EQ(s.inits[0], (ChartPoint{0.5, 0.2}));
  EXPECT_EQ(s.target, (ChartPoint{1, 0}));
  EXPECT_EQ(s.target_mean(), Vector3(1, 1, 0));
}

TEST(Config, HyperboloidNeedsEps) {
  std::string text = std::string(kMinimal);
  text.replace(text.find("model = cone"), 12, "model = hyperboloid");
  EXPECT_THROW(parse_config(text), ConfigError);
  EXPECT_NO_THROW(parse_config(text + "eps = 0.05\n"));
}

TEST(Config, MalformedNumberNamesLine) {
  std::string text = "[experiment]\nname = x\nmodel = cone\nstep_size = 0.0.5\n";
  try {
    parse_config(text);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
  }
}

TEST(Config, UnknownKeyIsAnError) {
  EXPECT_THROW(parse_config(std::string(kMinimal) + "stepsize = 0.1\n"), ConfigError);
  EXPECT_THROW(parse_config("name = outside\n"), ConfigError);
  EXPECT_THROW(parse_config("# nothing\n"), ConfigError);
}

TEST(Config, RandomInitsAreSeeded) {
  std::string text = "[experiment]\nname = r\nmodel = cone\ntarget = 1, 0\n"
                     "init_xi = 0.2, 1.8\ninit_theta = -pi, pi\ninit_count = 7\ninit_seed = 3\n";
  auto a = parse_config(text)[0].initializations();
  auto b = parse_config(text)[0].initializations();
  ASSERT_EQ(a.size(), 7u);
  EXPECT_EQ(a, b);
  for (const auto& q : a) {
    EXPECT_GE(q.xi, 0.2);
    EXPECT_LT(q.xi, 1.8);
    EXPECT_GE(q.theta, -3.14159265358979323846);
    EXPECT_LT(q.theta, 3.14159265358979323846);
  }
}

TEST(Config, TextRoundTrip) {
  for (const auto& name : preset_names()) {
    for (const auto& spec : preset(name)) {
      std::string text = to_config_text(spec);
      auto again = parse_config(text);
      ASSERT_EQ(again.size(), 1u);
      EXPECT_EQ(to_config_text(again[0]), text) << name;
    }
  }
}

TEST(Config, FormatRealKeepsSeventeenDigits) {
  EXPECT_EQ(format_real(0.1), "0.10000000000000001");
  EXPECT_EQ(std::strtod(format_real(1.0 / 3.0).c_str(), nullptr), 1.0 / 3.0);
}

TEST(Presets, NamesAndContents) {
  auto names = preset_names();
  for (const char* n : {"fig1-cusp", "fig5a", "fig5b-gd", "fig5b-ngd", "fig6-cone", "fig6-hyp"})
    EXPECT_NE(std::find(names.begin(), names.end(), n), names.end()) << n;
  EXPECT_THROW(preset("fig7"), ConfigError);

  auto ngd = preset("fig5b-ngd");
  ASSERT_EQ(ngd.size(), 2u);
  EXPECT_EQ(ngd[0].model, ModelKind::Cone);
  EXPECT_EQ(ngd[1].model, ModelKind::Hyperboloid);
  for (const auto& s : ngd) {
    EXPECT_EQ(s.optimizer.method, Method::NGD);
    EXPECT_EQ(s.optimizer.damping, 1e-8);
    EXPECT_GE(s.initializations().size(), 20u);
  }

  auto a = preset("fig5a");
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a[0].inits, a[1].inits);
  EXPECT_EQ(a[0].inits.size(), 3u);
  EXPECT_EQ(a[0].target, a[1].target);
}

TEST(RunExperiment, WritesSchemaExactCsvs) {
  fs::path root = scratch("schema");
  ExperimentSpec spec = parse_config(std::string(kMinimal) + "init = 0.5, 0.2; 1.5, -2\nmax_steps = 300\n")[0];
  ExperimentOutcome out = run_experiment(spec, root);
  ASSERT_EQ(out.trajectory_files.size(), 2u);
  EXPECT_EQ(out.dir, root / "tiny");
  for (std::size_t i = 0; i < 2; ++i) {
    std::string raw = slurp(out.trajectory_files[i]);
    EXPECT_EQ(raw.find('\r'), std::string::npos);
    EXPECT_EQ(raw.substr(0, raw.find('\n')), "step,xi,theta,mu1,mu2,mu3,loss,grad_norm");
    EXPECT_EQ(raw.back(), '\n');
    // Every real round-trips to the recorded double.
    auto rows = read_rows(out.trajectory_files[i]);
    const auto& t = out.trajectories[i];
    ASSERT_EQ(rows.size(), t.records.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
      EXPECT_EQ(std::stoll(rows[k][0]), t.records[k].step);
      EXPECT_EQ(std::strtod(rows[k][1].c_str(), nullptr), t.records[k].q.xi);
      EXPECT_EQ(std::strtod(rows[k][6].c_str(), nullptr), t.records[k].loss);
    }
  }
  EXPECT_TRUE(fs::exists(out.aggregate_file));
  EXPECT_TRUE(fs::exists(out.stall_file));
  EXPECT_TRUE(fs::exists(out.metadata_file));
}

// Oracle: recompute mean and median per step straight from the CSV files.
TEST(RunExperiment, AggregateMatchesRecomputation) {
  fs::path root = scratch("aggregate");
  auto spec = preset("fig5b-gd")[0];
  spec.optimizer.max_steps = 400;
  spec.init_distribution->count = 5;
  ExperimentOutcome out = run_experiment(spec, root, 3);

  std::vector<std::map<long long, double>> per;
  for (const auto& f : out.trajectory_files) {
    auto& m = per.emplace_back();
    for (const auto& r : read_rows(f)) m[std::stoll(r[0])] = std::strtod(r[6].c_str(), nullptr);
  }
  std::string header;
  auto agg = read_rows(out.aggregate_file, &header);
  EXPECT_EQ(header, "step,mean_loss,median_loss,count");
  ASSERT_FALSE(agg.empty());
  for (const auto& row : agg) {
    long long step = std::stoll(row[0]);
    std::vector<double> v;
    for (const auto& m : per) {
      auto it = m.upper_bound(step);
      if (it != m.begin()) v.push_back(std::prev(it)->second);
    }
    std::sort(v.begin(), v.end());
    double mean = 0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double med = v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
    EXPECT_NEAR(std::strtod(row[1].c_str(), nullptr), mean, 1e-15 * std::max(1.0, mean));
    EXPECT_EQ(std::strtod(row[2].c_str(), nullptr), med);
    EXPECT_EQ(std::stoi(row[3]), static_cast<int>(v.size()));
  }
}

TEST(AggregateLosses, CarriesLastValueForward) {
  auto rows = aggregate_losses({{{0, 4.0}, {10, 2.0}}, {{0, 1.0}, {10, 0.5}, {20, 0.25}}});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[2].step, 20);
  EXPECT_EQ(rows[2].mean_loss, (2.0 + 0.25) / 2);
  EXPECT_EQ(rows[2].count, 2);
}

TEST(RunExperiment, MetadataReproducesOutput) {
  fs::path root = scratch("rerun_a");
  auto spec = preset("fig5a")[1];
  spec.optimizer.max_steps = 500;
  ExperimentOutcome first = run_experiment(spec, root);

  auto again = load_config(first.metadata_file);
  ASSERT_EQ(again.size(), 1u);
  fs::path root2 = scratch("rerun_b");
  ExperimentOutcome second = run_experiment(again[0], root2, 4);
  ASSERT_EQ(first.trajectory_files.size(), second.trajectory_files.size());
  for (std::size_t i = 0; i < first.trajectory_files.size(); ++i)
    EXPECT_EQ(slurp(first.trajectory_files[i]), slurp(second.trajectory_files[i]));
  EXPECT_EQ(slurp(first.aggregate_file), slurp(second.aggregate_file));
  EXPECT_EQ(slurp(first.stall_file), slurp(second.stall_file));
}

TEST(RunExperiment, ErrorsAreRecordedPerTrajectory) {
  fs::path root = scratch("errors");
  std::string text = "[experiment]\nname = apex\nmodel = cone\nmethod = ngd\ndamping = 0\n"
                     "target = -1, 3.14159\ninit = 0, 0.5; 1, 0\nmax_steps = 200\n";
  ExperimentOutcome out = run_experiment(parse_config(text)[0], root);
  EXPECT_EQ(out.failed, 1);
  EXPECT_TRUE(out.trajectories[0].failed());
  EXPECT_FALSE(out.trajectories[1].failed());
  auto rows = read_rows(out.stall_file);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0][7], "error");
  EXPECT_FALSE(rows[0][10].empty());
}

TEST(RunExperiment, CuspQuiverMarksSingularity) {
  fs::path root = scratch("cusp");
  ExperimentOutcome out = run_experiment(preset("fig1-cusp")[0], root);
  std::string header;
  auto rows = read_rows(out.quiver_file, &header);
  EXPECT_EQ(header, "level,x0,x1,g0,g1,status");
  int undefined = 0;
  std::set<std::string> levels;
  for (const auto& r : rows) {
    levels.insert(r[0]);
    if (r[5] == "UNDEFINED") {
      ++undefined;
      EXPECT_EQ(std::strtod(r[0].c_str(), nullptr), 0.0);
      EXPECT_EQ(std::strtod(r[1].c_str(), nullptr), 0.0);
      EXPECT_EQ(std::strtod(r[2].c_str(), nullptr), 0.0);
      EXPECT_TRUE(r[3].empty());
    } else {
      EXPECT_EQ(r[5], "ok");
      // Projected gradient is tangent: orthogonal to grad p = (2 x0, 3 x1^2).
      double x0 = std::strtod(r[1].c_str(), nullptr), x1 = std::strtod(r[2].c_str(), nullptr);
      double g0 = std::strtod(r[3].c_str(), nullptr), g1 = std::strtod(r[4].c_str(), nullptr);
      Eigen::Vector2d n(2 * x0, 3 * x1 * x1);
      EXPECT_LT(std::abs(n.normalized().dot(Eigen::Vector2d(g0, g1))), 1e-10);
    }
  }
  EXPECT_EQ(undefined, 1);
  EXPECT_EQ(levels.size(), 3u);
}

TEST(Plot, LossCurvesHaveOneSeriesPerFile) {
  fs::path root = scratch("plot");
  auto spec = preset("fig5a")[0];
  spec.optimizer.max_steps = 200;
  ExperimentOutcome out = run_experiment(spec, root);
  fs::path svg = root / "loss.svg";
  plot(PlotKind::LossCurves, out.trajectory_files, svg);
  std::string s = slurp(svg);
  EXPECT_EQ(s.rfind("<svg", 0), 0u);
  std::size_t n = 0;
  for (std::size_t p = s.find("<polyline"); p != std::string::npos; p = s.find("<polyline", p + 1)) ++n;
  EXPECT_EQ(n, 3u);
  for (const char* label : {"fig5a-cone/traj_000", "fig5a-cone/traj_001", "fig5a-cone/traj_002"})
    EXPECT_NE(s.find(label), std::string::npos) << label;

  fs::path top = root / "top.svg";
  plot(PlotKind::TopView, out.trajectory_files, top, {Eigen::Vector2d(1, 0), "top"});
  EXPECT_TRUE(fs::exists(top));
}

TEST(Plot, EmptyCsvWritesNothing) {
  fs::path root = scratch("plot_empty");
  fs::path csv = root / "empty.csv";
  std::ofstream(csv) << "";
  fs::path svg = root / "out.svg";
  EXPECT_THROW(plot(PlotKind::LossCurves, {csv}, svg), PlotError);
  EXPECT_FALSE(fs::exists(svg));

  fs::path header_only = root / "header.csv";
  std::ofstream(header_only) << "step,xi,theta,mu1,mu2,mu3,loss,grad_norm\n";
  EXPECT_THROW(plot(PlotKind::LossCurves, {header_only}, svg), PlotError);
  EXPECT_FALSE(fs::exists(svg));
}

TEST(Plot, SchemaMismatch) {
  fs::path root = scratch("plot_schema");
  fs::path csv = root / "bad.csv";
  std::ofstream(csv) << "a,b\n1,2\n";
  fs::path svg = root / "out.svg";
  EXPECT_THROW(plot(PlotKind::Quiver, {csv}, svg), PlotError);
  EXPECT_FALSE(fs::exists(svg));
  EXPECT_THROW(parse_plot_kind("bars"), PlotError);
}

}  // namespace
}  // namespace stratlearn
