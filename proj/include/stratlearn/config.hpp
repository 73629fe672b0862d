#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stratlearn/model.hpp"
#include "stratlearn/optim.hpp"

namespace stratlearn {

enum class ModelKind { Cone, Hyperboloid, Cusp };

std::string to_string(ModelKind k);

struct InitDistribution {
  double xi_lo = 0.0, xi_hi = 0.0;
  double theta_lo = 0.0, theta_hi = 0.0;
  int count = 0;
  std::uint64_t seed = 0;
};

/// One `[experiment]` section of a config file.
struct ExperimentSpec {
  std::string name;
  ModelKind model = ModelKind::Cone;
  std::optional<double> eps;  // required for hyperboloid
  OptimizerConfig optimizer;
  std::vector<ChartPoint> inits;  // fixed initializations
  std::optional<InitDistribution> init_distribution;
  ChartPoint target;  // x̄ = embed(cone, target)
  std::filesystem::path output_dir = "out";
  int plateau_window = 100;
  double plateau_tol = 1e-5;

  // cusp quiver settings
  std::vector<double> levels = {0.0, 0.05, 0.2};
  int quiver_points = 15;  // per branch and level
  Vector2 cusp_target = Vector2(1.0, -1.0);

  void validate() const;

  /// Chart the trajectories run on; cone or hyperboloid only.
  Chart chart() const;
  Vector3 target_mean() const;

  /// Fixed inits followed by the seeded random draws.
  std::vector<ChartPoint> initializations() const;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses `key = value` lines grouped in `[experiment]` sections; `#` starts
/// a comment. Unknown keys and malformed values are errors naming the line.
std::vector<ExperimentSpec> parse_config(std::string_view text);
std::vector<ExperimentSpec> load_config(const std::filesystem::path& path);

/// Serializes every field (including defaults) in the format parse_config reads.
std::string to_config_text(const ExperimentSpec& spec);

/// Formats a double with 17 significant digits.
std::string format_real(double v);

}  // namespace stratlearn
