#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "stratlearn/config.hpp"
#include "stratlearn/optim.hpp"

namespace stratlearn {

inline constexpr std::string_view kTrajectoryHeader = "step,xi,theta,mu1,mu2,mu3,loss,grad_norm";
inline constexpr std::string_view kAggregateHeader = "step,mean_loss,median_loss,count";
inline constexpr std::string_view kQuiverHeader = "level,x0,x1,g0,g1,status";
inline constexpr std::string_view kStallHeader =
    "init,xi0,theta0,stalled,window_start,mean_rel_decrease,nearest_singularity_distance,terminated_by,last_step,"
    "final_loss,error";

/// Frozen experiment definitions; each name maps to one or more sections.
std::vector<std::string> preset_names();
std::vector<ExperimentSpec> preset(const std::string& name);
/// Config text of a preset, as shipped.
std::string preset_text(const std::string& name);

struct ExperimentOutcome {
  std::filesystem::path dir;
  std::vector<std::filesystem::path> trajectory_files;
  std::vector<Trajectory> trajectories;
  std::vector<StallReport> stalls;
  std::filesystem::path aggregate_file;
  std::filesystem::path stall_file;
  std::filesystem::path quiver_file;
  std::filesystem::path metadata_file;
  int failed = 0;  // trajectories that ended with an error marker
};

/// Runs one experiment and writes its artifacts under <out_root>/<spec.name>/
/// (out_root defaults to spec.output_dir). Trajectories run on `workers`
/// threads; files are written per trajectory and the aggregate pass runs after
/// the sweep, so the output does not depend on the worker count.
ExperimentOutcome run_experiment(const ExperimentSpec& spec, const std::filesystem::path& out_root = {},
                                 int workers = 1);

void write_trajectory_csv(const Trajectory& t, const std::filesystem::path& path);

struct AggregateRow {
  long long step;
  double mean_loss;
  double median_loss;
  int count;
};

/// Per-step mean and median loss across trajectories. A trajectory that
/// stopped early contributes its last recorded loss to later steps.
std::vector<AggregateRow> aggregate_losses(const std::vector<std::vector<std::pair<long long, double>>>& series);

}  // namespace stratlearn
