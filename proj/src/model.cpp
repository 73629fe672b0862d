#include "stratlearn/model.hpp"

#include <cmath>

#include <fmt/format.h>

#include "stratlearn/rng.hpp"

namespace stratlearn {

Chart Chart::hyperboloid(double eps) {
  if (!(eps > 0) || !std::isfinite(eps))
    throw std::invalid_argument(fmt::format("hyperboloid chart requires eps > 0, got {}", eps));
  return Chart(Kind::Hyperboloid, eps);
}

std::string Chart::name() const {
  return kind_ == Kind::Cone ? std::string("cone") : fmt::format("hyperboloid(eps={})", eps_);
}

Polynomial Chart::variety() const {
  Polynomial p = varieties::cone();
  if (kind_ == Kind::Hyperboloid) p = p - Polynomial::constant(3, eps_);
  return p;
}

Vector3 embed(const Chart& chart, const ChartPoint& q) {
  const double c = std::cos(q.theta), s = std::sin(q.theta);
  const double r = chart.kind() == Chart::Kind::Cone ? q.xi : std::sqrt(q.xi * q.xi + chart.eps());
  return {q.xi, r * c, r * s};
}

Jacobian chart_jacobian(const Chart& chart, const ChartPoint& q) {
  const double c = std::cos(q.theta), s = std::sin(q.theta);
  double r, dr;
  if (chart.kind() == Chart::Kind::Cone) {
    r = q.xi;
    dr = 1.0;
  } else {
    r = std::sqrt(q.xi * q.xi + chart.eps());
    dr = q.xi / r;
  }
  Jacobian j;
  j << 1.0, 0.0,
       dr * c, -r * s,
       dr * s, r * c;
  return j;
}

double loss(const GaussianLocationModel& m, const ChartPoint& q) {
  return 0.5 * (m.target_mean - embed(m.chart, q)).squaredNorm();
}

Vector2 loss_grad(const GaussianLocationModel& m, const ChartPoint& q) {
  return chart_jacobian(m.chart, q).transpose() * (embed(m.chart, q) - m.target_mean);
}

Matrix2 fim(const GaussianLocationModel& m, const ChartPoint& q) {
  Jacobian j = chart_jacobian(m.chart, q);
  Matrix2 f = j.transpose() * j;
  // JᵀJ is symmetric in exact arithmetic; pin it bitwise.
  f(1, 0) = f(0, 1);
  return f;
}

Vector3 sample_mean(const Vector3& mu_star, long long n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_mean requires n >= 1");
  StableRng rng(seed);
  Vector3 sum = Vector3::Zero();
  for (long long k = 0; k < n; ++k)
    for (int i = 0; i < 3; ++i) sum[i] += rng.normal();
  return mu_star + sum / static_cast<double>(n);
}

}  // namespace stratlearn
