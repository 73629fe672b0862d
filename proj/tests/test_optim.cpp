#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "stratlearn/optim.hpp"

namespace stratlearn {
namespace {

constexpr double kPi = 3.14159265358979323846;

OptimizerConfig gd(double step) {
  OptimizerConfig c;
  c.method = Method::GD;
  c.step_size = step;
  return c;
}

OptimizerConfig ngd(double step, double damping) {
  OptimizerConfig c;
  c.method = Method::NGD;
  c.step_size = step;
  c.damping = damping;
  return c;
}

TEST(GdStep, Examples) {
  GaussianLocationModel m{Chart::cone(), Vector3::Zero()};
  ChartPoint q = gd_step(m, {1, 0}, gd(0.1));
  EXPECT_DOUBLE_EQ(q.xi, 0.8);
  EXPECT_EQ(q.theta, 0.0);

  GaussianLocationModel at_opt{Chart::cone(), embed(Chart::cone(), {0.6, -0.4})};
  EXPECT_EQ(gd_step(at_opt, {0.6, -0.4}, gd(0.1)), (ChartPoint{0.6, -0.4}));
}

TEST(GdStep, CapRescalesToExactLength) {
  // |grad| = 10 at q = (5, 0) when xbar = 0: grad = (2 xi, 0).
  GaussianLocationModel m{Chart::cone(), Vector3::Zero()};
  OptimizerConfig c = gd(1.0);
  c.step_cap = 0.5;
  ASSERT_DOUBLE_EQ(loss_grad(m, {5, 0}).norm(), 10.0);
  ChartPoint q = gd_step(m, {5, 0}, c);
  EXPECT_DOUBLE_EQ(5.0 - q.xi, 0.5);
}

TEST(GdStep, WrongMethodRejected) {
  GaussianLocationModel m{Chart::cone(), Vector3::Zero()};
  EXPECT_THROW(gd_step(m, {1, 0}, ngd(0.1, 0)), std::invalid_argument);
  EXPECT_THROW(ngd_step(m, {1, 0}, gd(0.1)), std::invalid_argument);
}

TEST(NgdStep, DiagonalFimExample) {
  GaussianLocationModel m{Chart::cone(), Vector3(0.2, -0.7, 0.4)};
  Vector2 g = loss_grad(m, {1, 0.3});
  ChartPoint q = ngd_step(m, {1, 0.3}, ngd(0.1, 0.0));
  EXPECT_NEAR(q.xi, 1 - 0.1 * g[0] / 2, 1e-15);
  EXPECT_NEAR(q.theta, 0.3 - 0.1 * g[1], 1e-15);
}

TEST(NgdStep, SingularAtApexWithoutDamping) {
  GaussianLocationModel m{Chart::cone(), Vector3(-1, 1, 0)};
  EXPECT_THROW(ngd_step(m, {0, 0.2}, ngd(0.1, 0.0)), SingularFimError);
  // Damping makes it solvable.
  EXPECT_NO_THROW(ngd_step(m, {0, 0.2}, ngd(0.1, 1e-8)));
}

TEST(NgdStep, HyperboloidAlwaysSolvable) {
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> u(-2, 2);
  for (double eps : {1e-3, 0.05, 1.0}) {
    GaussianLocationModel m{Chart::hyperboloid(eps), Vector3(u(gen), u(gen), u(gen))};
    for (int k = 0; k < 300; ++k) EXPECT_NO_THROW(ngd_step(m, {u(gen), 2 * u(gen)}, ngd(0.1, 0.0)));
  }
}

TEST(NgdStep, PreconditionedGradientDescent) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int k = 0; k < 100; ++k) {
    Chart c = k % 2 ? Chart::cone() : Chart::hyperboloid(0.1);
    GaussianLocationModel m{c, Vector3(u(gen), u(gen), u(gen))};
    ChartPoint q{u(gen), u(gen)};
    if (std::abs(q.xi) < 0.2) continue;
    Matrix2 f = fim(m, q);
    Vector2 g = loss_grad(m, q);
    OptimizerConfig cfg = ngd(0.05, 0.0);
    cfg.step_cap = 1e9;
    ChartPoint next = ngd_step(m, q, cfg);
    EXPECT_NEAR(next.xi, q.xi - 0.05 / f(0, 0) * g[0], 1e-12);
    EXPECT_NEAR(next.theta, q.theta - 0.05 / f(1, 1) * g[1], 1e-12);
  }
}

TEST(RawUpdate, ScalesLinearlyWithStep) {
  GaussianLocationModel m{Chart::hyperboloid(0.05), Vector3(1, 0.3, -0.2)};
  for (Method meth : {Method::GD, Method::NGD}) {
    OptimizerConfig a = meth == Method::GD ? gd(0.01) : ngd(0.01, 1e-8);
    OptimizerConfig b = a;
    b.step_size = 0.02;
    Vector2 ua = raw_update(m, {0.4, 1.2}, a), ub = raw_update(m, {0.4, 1.2}, b);
    EXPECT_EQ(ub, 2.0 * ua);
  }
}

TEST(Run, OptimumStopsAtStepZero) {
  GaussianLocationModel m{Chart::cone(), embed(Chart::cone(), {0.5, 0.5})};
  Trajectory t = run(m, {0.5, 0.5}, gd(0.05));
  ASSERT_EQ(t.records.size(), 1u);
  EXPECT_EQ(t.records[0].step, 0);
  EXPECT_EQ(t.terminated_by, Termination::GradTol);
}

TEST(Run, RecordsAreOrderedAndThinned) {
  GaussianLocationModel m{Chart::cone(), embed(Chart::cone(), {1, 0.2})};
  OptimizerConfig c = gd(0.05);
  c.max_steps = 95;
  c.thin = 10;
  c.grad_tol = 0;
  c.loss_tol = 0;
  Trajectory t = run(m, {1.5, -0.3}, c);
  EXPECT_EQ(t.terminated_by, Termination::MaxSteps);
  ASSERT_EQ(t.records.size(), 11u);
  EXPECT_EQ(t.records.front().step, 0);
  EXPECT_EQ(t.records.back().step, 95);
  for (std::size_t i = 1; i < t.records.size(); ++i) EXPECT_LT(t.records[i - 1].step, t.records[i].step);
  EXPECT_EQ(t.records[0].q, (ChartPoint{1.5, -0.3}));
}

TEST(Run, ErrorIsRecordedNotThrown) {
  // Start exactly at the apex (off the stationary direction theta = 0) with undamped NGD.
  GaussianLocationModel m{Chart::cone(), Vector3(-1, 1, 0)};
  Trajectory t = run(m, {0, 0.5}, ngd(0.1, 0.0));
  EXPECT_TRUE(t.failed());
  EXPECT_FALSE(t.error.empty());
  ASSERT_EQ(t.records.size(), 1u);
  EXPECT_EQ(t.records[0].step, 0);
}

TEST(Run, InvalidConfig) {
  GaussianLocationModel m{Chart::cone(), Vector3::Zero()};
  EXPECT_THROW(run(m, {1, 0}, gd(0.0)), std::invalid_argument);
  OptimizerConfig c = gd(0.1);
  c.step_cap = 0;
  EXPECT_THROW(run(m, {1, 0}, c), std::invalid_argument);
}

// Oracle: hand-derived cone gradient, stepped with no cap in a bare loop.
//   dL/dxi    = (xi - x1) + cos(th) (xi cos th - x2) + sin(th) (xi sin th - x3)
//   dL/dtheta = xi (x2 sin th - x3 cos th)
struct ConeSim {
  double xi, theta, loss;
};
ConeSim simulate_cone_gd(Vector3 xb, double xi, double th, double step, long long steps) {
  for (long long k = 0; k < steps; ++k) {
    double c = std::cos(th), s = std::sin(th);
    double gx = (xi - xb[0]) + c * (xi * c - xb[1]) + s * (xi * s - xb[2]);
    double gt = xi * (xb[1] * s - xb[2] * c);
    xi -= step * gx;
    th -= step * gt;
  }
  double c = std::cos(th), s = std::sin(th);
  double l = 0.5 * ((xb[0] - xi) * (xb[0] - xi) + (xb[1] - xi * c) * (xb[1] - xi * c) + (xb[2] - xi * s) * (xb[2] - xi * s));
  return {xi, th, l};
}

// The stalling configuration: the target sits on the opposite nappe, and GD on
// the cone can only reach it by passing xi = 0, where the loss is 1.
TEST(Run, ConeStallsAtApex) {
  const Vector3 xbar = embed(Chart::cone(), {-1, kPi});
  EXPECT_NEAR(0.5 * xbar.squaredNorm(), 1.0, 1e-15);
  GaussianLocationModel m{Chart::cone(), xbar};
  OptimizerConfig c = gd(0.05);
  c.max_steps = 50000;
  c.grad_tol = 0;
  c.thin = 10;
  Trajectory t = run(m, {1, 0}, c);
  EXPECT_EQ(t.terminated_by, Termination::MaxSteps);
  EXPECT_NEAR(t.last().loss, 1.0, 1e-6);
  EXPECT_LT(std::abs(t.last().q.xi), 0.05);

  ConeSim sim = simulate_cone_gd(xbar, 1, 0, 0.05, 50000);
  EXPECT_NEAR(t.last().q.xi, sim.xi, 1e-9);
  EXPECT_NEAR(t.last().loss, sim.loss, 1e-9);

  StallReport s = detect_stall(t, 100, 1e-5, 1e-4, {AmbientPoint::Zero(3)});
  EXPECT_TRUE(s.stalled);
  EXPECT_LT(s.nearest_singularity_distance, 0.1);
}

// On the hyperboloid the same run goes around the waist and converges to the
// closest point of the surface. The target is not on the surface, so the
// attainable loss is the 1-D minimum of
//   0.5 ((xi + 1)^2 + (sqrt(xi^2 + eps) - 1)^2)   (theta = 0 is optimal).
TEST(Run, HyperboloidCrossesToClosestPoint) {
  const double eps = 0.05;
  auto f = [eps](double x) { return 0.5 * ((x + 1) * (x + 1) + std::pow(std::sqrt(x * x + eps) - 1, 2)); };
  double lo = -2, hi = 0;
  const double phi = (std::sqrt(5.0) - 1) / 2;
  for (int k = 0; k < 200; ++k) {
    double a = hi - phi * (hi - lo), b = lo + phi * (hi - lo);
    if (f(a) < f(b)) {
      hi = b;
    } else {
      lo = a;
    }
  }
  const double min_loss = f(0.5 * (lo + hi));
  EXPECT_NEAR(min_loss, 1.5622559836e-4, 1e-12);

  GaussianLocationModel m{Chart::hyperboloid(eps), embed(Chart::cone(), {-1, kPi})};
  OptimizerConfig c = gd(0.05);
  c.max_steps = 50000;
  c.grad_tol = 0;
  c.thin = 100;
  Trajectory t = run(m, {1, 0}, c);
  EXPECT_NEAR(t.last().loss, min_loss, 1e-10);
  EXPECT_LT(t.last().q.xi, -0.9);

  StallReport s = detect_stall(t, 100, 1e-5, 1e-3, {AmbientPoint::Zero(3)});
  EXPECT_FALSE(s.stalled);
}

TEST(Run, GdIsMonotoneAtSmallSteps) {
  std::mt19937_64 gen(10);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int k = 0; k < 20; ++k) {
    Chart ch = k % 2 ? Chart::cone() : Chart::hyperboloid(0.05);
    GaussianLocationModel m{ch, Vector3(u(gen), u(gen), u(gen))};
    OptimizerConfig c = gd(1e-3);
    c.max_steps = 2000;
    Trajectory t = run(m, {u(gen), u(gen)}, c);
    for (std::size_t i = 1; i < t.records.size(); ++i) ASSERT_LE(t.records[i].loss, t.records[i - 1].loss);
  }
}

TEST(Run, Deterministic) {
  GaussianLocationModel m{Chart::hyperboloid(0.05), Vector3(1, 0.5, 0.2)};
  OptimizerConfig c = gd(0.05);
  c.mode = SampleMode::Stochastic;
  c.batch = 16;
  c.seed = 99;
  c.max_steps = 500;
  Trajectory a = run(m, {0.3, 2.0}, c), b = run(m, {0.3, 2.0}, c);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].q, b.records[i].q);
    EXPECT_EQ(a.records[i].loss, b.records[i].loss);
  }
  c.seed = 100;
  Trajectory d = run(m, {0.3, 2.0}, c);
  EXPECT_NE(a.last().q, d.last().q);
}

TEST(StepsToLoss, FirstCrossing) {
  Trajectory t;
  for (int k = 0; k < 5; ++k) t.records.push_back({k * 10, {}, Vector3::Zero(), 1.0 / (k + 1), 0});
  EXPECT_EQ(steps_to_loss(t, 0.3), 30);
  EXPECT_EQ(steps_to_loss(t, 0.01), std::nullopt);
}

Trajectory from_losses(const std::vector<double>& losses) {
  Trajectory t;
  for (std::size_t k = 0; k < losses.size(); ++k)
    t.records.push_back({static_cast<long long>(k), {}, Vector3(1, 1, 0), losses[k], 0});
  return t;
}

TEST(DetectStall, GeometricDecayDoesNotStall) {
  std::vector<double> l(300);
  for (std::size_t k = 0; k < l.size(); ++k) l[k] = std::pow(0.9, static_cast<double>(k));
  StallReport s = detect_stall(from_losses(l), 50, 1e-5, 0.0, {});
  EXPECT_FALSE(s.stalled);
  EXPECT_NEAR(s.mean_rel_decrease, 0.1, 1e-12);
}

TEST(DetectStall, ConstantLossStalls) {
  std::vector<double> l(200, 0.7);
  StallReport s = detect_stall(from_losses(l), 50, 1e-5, 1e-3, {AmbientPoint::Zero(3)});
  EXPECT_TRUE(s.stalled);
  EXPECT_EQ(s.window_start, 0);
  EXPECT_LT(s.mean_rel_decrease, 1e-5);
  EXPECT_NEAR(s.nearest_singularity_distance, std::sqrt(2.0), 1e-15);
}

TEST(DetectStall, ConvergedLossIsNotAStall) {
  std::vector<double> l(200, 1e-12);
  EXPECT_FALSE(detect_stall(from_losses(l), 50, 1e-5, 1e-6, {}).stalled);
}

TEST(DetectStall, Errors) {
  EXPECT_THROW(detect_stall(from_losses({1, 0.5}), 5, 1e-5, 0, {}), std::invalid_argument);
  EXPECT_THROW(detect_stall(from_losses({1, 0.5, 0.2}), 1, 1e-5, 0, {}), std::invalid_argument);
}

}  // namespace
}  // namespace stratlearn
