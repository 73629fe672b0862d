#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "stratlearn/verify.hpp"

namespace stratlearn {
namespace {

TEST(FiniteDiff, Examples) {
  EXPECT_EQ(finite_diff_grad([](const ChartPoint&) { return 3.0; }, {0.4, -1}), Vector2::Zero());

  GaussianLocationModel m{Chart::cone(), Vector3::Zero()};
  Vector2 g = finite_diff_grad([&](const ChartPoint& q) { return loss(m, q); }, {1, 0});
  EXPECT_NEAR(g[0], 2.0, 1e-6);
  EXPECT_NEAR(g[1], 0.0, 1e-6);

  Vector2 quad = finite_diff_grad([](const ChartPoint& q) { return 0.5 * (q.xi * q.xi + q.theta * q.theta); }, {1, 2});
  EXPECT_NEAR(quad[0], 1.0, 1e-9);
  EXPECT_NEAR(quad[1], 2.0, 1e-9);
}

TEST(FiniteDiff, ExactForQuadratics) {
  auto f = [](const ChartPoint& q) { return 1.5 * q.xi * q.xi - 0.7 * q.xi * q.theta + 2 * q.theta - 4; };
  for (double xi : {-1.3, 0.0, 0.8})
    for (double th : {-2.0, 0.5}) {
      Vector2 g = finite_diff_grad(f, {xi, th});
      EXPECT_NEAR(g[0], 3 * xi - 0.7 * th, 1e-9);
      EXPECT_NEAR(g[1], -0.7 * xi + 2, 1e-9);
    }
}

TEST(FiniteDiff, Errors) {
  auto f = [](const ChartPoint& q) { return q.xi; };
  EXPECT_THROW(finite_diff_grad(f, {0, 0}, FDSpec{1e-10}), std::invalid_argument);
  EXPECT_THROW(finite_diff_grad(f, {0, 0}, FDSpec{1e-2}), std::invalid_argument);
  auto bad = [](const ChartPoint& q) { return q.xi > 0 ? std::numeric_limits<double>::infinity() : 0.0; };
  EXPECT_THROW(finite_diff_grad(bad, {0, 0}), std::domain_error);
}

double frob_rel(const Matrix2& a, const Matrix2& b) { return (a - b).norm() / b.norm(); }

TEST(MonteCarloFim, Examples) {
  GaussianLocationModel cone{Chart::cone(), Vector3::Zero()};
  EXPECT_LT(frob_rel(monte_carlo_fim(cone, {1, 0.3}, 200000, 1), Matrix2(Vector2(2, 1).asDiagonal())), 0.05);
  GaussianLocationModel hyp{Chart::hyperboloid(0.1), Vector3::Zero()};
  EXPECT_LT(frob_rel(monte_carlo_fim(hyp, {0, 1.0}, 200000, 2), Matrix2(Vector2(1, 0.1).asDiagonal())), 0.05);
}

TEST(MonteCarloFim, ErrorShrinksWithMoreSamples) {
  GaussianLocationModel m{Chart::hyperboloid(0.05), Vector3::Zero()};
  ChartPoint q{0.7, 2.0};
  Matrix2 exact = fim(m, q);
  double small = 0, large = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    small += frob_rel(monte_carlo_fim(m, q, 20000, 100 + s), exact);
    large += frob_rel(monte_carlo_fim(m, q, 80000, 200 + s), exact);
  }
  EXPECT_LT(large, small);
}

TEST(MonteCarloFim, WorkerCountDoesNotMatter) {
  GaussianLocationModel m{Chart::cone(), Vector3::Zero()};
  Matrix2 a = monte_carlo_fim(m, {1.2, 0.4}, 50000, 9, 1);
  Matrix2 b = monte_carlo_fim(m, {1.2, 0.4}, 50000, 9, 4);
  EXPECT_EQ(a, b);
}

TEST(MonteCarloFim, SymmetricPsdAndValidated) {
  GaussianLocationModel m{Chart::cone(), Vector3::Zero()};
  Matrix2 f = monte_carlo_fim(m, {0, 0}, 20000, 3);
  EXPECT_EQ(f(0, 1), f(1, 0));
  EXPECT_GE(Eigen::SelfAdjointEigenSolver<Matrix2>(f).eigenvalues().minCoeff(), 0.0);
  EXPECT_THROW(monte_carlo_fim(m, {1, 0}, 9999, 3), std::invalid_argument);
}

TEST(OracleSuite, AllChecksPass) {
  auto results = run_oracle_suite(20240611, 2);
  ASSERT_EQ(results.size(), 4u);
  for (const auto& r : results) EXPECT_TRUE(r.passed) << r.name << " worst " << r.worst;
}

}  // namespace
}  // namespace stratlearn
