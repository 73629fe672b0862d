#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace stratlearn {

enum class PlotKind { LossCurves, TopView, Quiver };

PlotKind parse_plot_kind(const std::string& s);

class PlotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PlotOptions {
  std::optional<Eigen::Vector2d> target;  // (mu2, mu3) marker for the top view
  std::string title;
};

/// Renders a static SVG from CSV files written by run_experiment.
/// loss_curves accepts trajectory or aggregate CSVs, topview trajectory CSVs,
/// quiver the cusp quiver CSV. Nothing is written when an input is empty or
/// has the wrong header.
void plot(PlotKind kind, const std::vector<std::filesystem::path>& csvs, const std::filesystem::path& out,
          const PlotOptions& opts = {});

}  // namespace stratlearn
