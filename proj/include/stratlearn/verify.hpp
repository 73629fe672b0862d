#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "stratlearn/model.hpp"

// Independent oracles for the analytic gradient and Fisher information.
// The oracles never call loss_grad() or fim(); the Monte-Carlo estimate uses
// only embed(), chart_jacobian() and raw Gaussian sampling. The suite runner
// compares them against the analytic routes.

namespace stratlearn {

struct FDSpec {
  double h = 1e-6;

  void validate() const;
};

using ChartFunction = std::function<double(const ChartPoint&)>;

/// Central differences (f(q + h e_i) - f(q - h e_i)) / 2h per coordinate.
Vector2 finite_diff_grad(const ChartFunction& f, const ChartPoint& q, const FDSpec& spec = {});

/// Empirical covariance of the score J^T (x - embed(q)) over n draws
/// x ~ N(embed(q), I). Samples are split into fixed blocks with derived
/// seeds, so the estimate does not depend on the number of workers.
Matrix2 monte_carlo_fim(const GaussianLocationModel& m, const ChartPoint& q, long long n, std::uint64_t seed,
                        int workers = 1);

struct OracleResult {
  std::string name;
  bool passed;
  double worst;  // worst observed error
  double tolerance;
};

/// Full oracle suite behind the `check` subcommand.
std::vector<OracleResult> run_oracle_suite(std::uint64_t seed = 20240611, int workers = 1);

}  // namespace stratlearn
