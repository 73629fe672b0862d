#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "stratlearn/poly.hpp"

namespace stratlearn {

using Vector2 = Eigen::Vector2d;
using Vector3 = Eigen::Vector3d;
using Matrix2 = Eigen::Matrix2d;
using Jacobian = Eigen::Matrix<double, 3, 2>;

/// Intrinsic coordinates on the cone or hyperboloid. theta is never wrapped.
struct ChartPoint {
  double xi = 0.0;
  double theta = 0.0;

  Vector2 vec() const { return {xi, theta}; }
  static ChartPoint from(const Vector2& v) { return {v[0], v[1]}; }
  bool operator==(const ChartPoint&) const = default;
};

/// Parameterization (xi, theta) -> R^3 of the double cone
///   (xi, xi cos theta, xi sin theta)
/// or of the one-sheet hyperboloid x1^2 + x2^2 - x0^2 = eps
///   (xi, r cos theta, r sin theta),  r = sqrt(xi^2 + eps).
class Chart {
 public:
  enum class Kind { Cone, Hyperboloid };

  static Chart cone() { return Chart(Kind::Cone, 0.0); }
  static Chart hyperboloid(double eps);

  Kind kind() const { return kind_; }
  double eps() const { return eps_; }
  std::string name() const;

  static constexpr int intrinsic_dim = 2;
  static constexpr int ambient_dim = 3;

  /// Implicit equation of the chart image, x1^2 + x2^2 - x0^2 - eps.
  Polynomial variety() const;

 private:
  Chart(Kind kind, double eps) : kind_(kind), eps_(eps) {}
  Kind kind_;
  double eps_;
};

Vector3 embed(const Chart& chart, const ChartPoint& q);

/// Columns d(mu)/d(xi) and d(mu)/d(theta).
Jacobian chart_jacobian(const Chart& chart, const ChartPoint& q);

/// Unit-covariance Gaussian in R^3 whose mean is constrained to a chart.
/// target_mean is the population mean E[x] the model is fitted to.
struct GaussianLocationModel {
  Chart chart;
  Vector3 target_mean;
};

/// 0.5 * ||target_mean - embed(q)||^2 (negative log-likelihood up to a constant).
double loss(const GaussianLocationModel& m, const ChartPoint& q);

/// Chain rule J^T (embed(q) - target_mean).
Vector2 loss_grad(const GaussianLocationModel& m, const ChartPoint& q);

/// J^T J, the exact Fisher information of the chart-constrained Gaussian.
Matrix2 fim(const GaussianLocationModel& m, const ChartPoint& q);

/// Empirical mean of n draws from N(mu_star, I_3).
Vector3 sample_mean(const Vector3& mu_star, long long n, std::uint64_t seed);

}  // namespace stratlearn
