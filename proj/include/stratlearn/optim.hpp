#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stratlearn/model.hpp"

namespace stratlearn {

enum class Method { GD, NGD };
enum class SampleMode { Population, Stochastic };
enum class Termination { GradTol, LossTol, MaxSteps, Error };

std::string to_string(Method m);
std::string to_string(Termination t);

struct OptimizerConfig {
  Method method = Method::GD;
  double step_size = 0.01;  // learning rate
  long long max_steps = 100000;
  double grad_tol = 1e-10;
  double loss_tol = 1e-10;
  double damping = 1e-8;  // NGD only
  double step_cap = 1.0;  // max norm of a single update
  SampleMode mode = SampleMode::Population;
  long long batch = 1;  // stochastic mode
  std::uint64_t seed = 0;
  long long thin = 1;  // record every thin-th step; first and last always kept

  void validate() const;
};

class SingularFimError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonFiniteGradientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ChartPoint gd_step(const GaussianLocationModel& m, const ChartPoint& q, const OptimizerConfig& cfg);

/// Solves (F + damping I) d = grad and steps q - step_size * d.
/// Throws SingularFimError when damping is 0 and F is singular.
ChartPoint ngd_step(const GaussianLocationModel& m, const ChartPoint& q, const OptimizerConfig& cfg);

/// Update vector before capping, for the configured method.
Vector2 raw_update(const GaussianLocationModel& m, const ChartPoint& q, const OptimizerConfig& cfg);

struct TrajectoryRecord {
  long long step;
  ChartPoint q;
  Vector3 mu;
  double loss;
  double grad_norm;
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;
  Termination terminated_by = Termination::MaxSteps;
  std::string error;  // set when terminated_by == Error

  bool failed() const { return terminated_by == Termination::Error; }
  const TrajectoryRecord& last() const { return records.back(); }
};

/// Iterates the configured step from q0. Loss and gradient norm are always
/// recorded against the population mean; stochastic mode only perturbs the
/// step direction.
Trajectory run(const GaussianLocationModel& m, const ChartPoint& q0, const OptimizerConfig& cfg);

/// First recorded step with loss < threshold, if any.
std::optional<long long> steps_to_loss(const Trajectory& t, double threshold);

struct StallReport {
  bool stalled = false;
  long long window_start = -1;  // record index
  double mean_rel_decrease = 0.0;
  double nearest_singularity_distance = 0.0;
};

/// A window of `window` consecutive records stalls when the mean relative
/// loss decrease over it is below plateau_tol while the loss is still above
/// loss_tol. Reports the first such window, or the slowest window otherwise.
StallReport detect_stall(const Trajectory& t, int window, double plateau_tol, double loss_tol,
                         const std::vector<AmbientPoint>& singularities);

}  // namespace stratlearn
