#include "stratlearn/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

#include <fmt/format.h>

#include "stratlearn/rng.hpp"

namespace stratlearn {

namespace {

constexpr long long kBlock = 4096;

struct BlockSums {
  Vector2 s = Vector2::Zero();
  Matrix2 ss = Matrix2::Zero();
};

BlockSums score_block(const Jacobian& j, long long count, std::uint64_t seed) {
  StableRng rng(seed);
  BlockSums out;
  for (long long k = 0; k < count; ++k) {
    // x - embed(q) ~ N(0, I)
    Vector3 z(rng.normal(), rng.normal(), rng.normal());
    Vector2 score = j.transpose() * z;
    out.s += score;
    out.ss += score * score.transpose();
  }
  return out;
}

double rel_error(const Eigen::Ref<const Eigen::MatrixXd>& a, const Eigen::Ref<const Eigen::MatrixXd>& b,
                 double floor) {
  return (a - b).norm() / std::max(b.norm(), floor);
}

Polynomial random_polynomial(StableRng& rng, int nvars, int max_degree) {
  std::vector<std::pair<Exponent, double>> terms;
  int n_terms = 1 + static_cast<int>(rng.uniform() * 6);
  for (int t = 0; t < n_terms; ++t) {
    Exponent e(static_cast<std::size_t>(nvars), 0);
    int budget = static_cast<int>(rng.uniform() * (max_degree + 1));
    for (int k = 0; k < budget; ++k) ++e[static_cast<std::size_t>(rng.uniform() * nvars)];
    terms.emplace_back(e, rng.uniform(-2.0, 2.0));
  }
  return Polynomial(nvars, terms);
}

Chart random_chart(StableRng& rng) {
  static const double eps_choices[] = {0.0, 0.01, 0.05, 0.1, 1.0};
  double eps = eps_choices[static_cast<int>(rng.uniform() * 5)];
  return eps == 0.0 ? Chart::cone() : Chart::hyperboloid(eps);
}

}  // namespace

void FDSpec::validate() const {
  if (!(h >= 1e-9 && h <= 1e-3)) throw std::invalid_argument(fmt::format("FD step must be in [1e-9, 1e-3], got {}", h));
}

Vector2 finite_diff_grad(const ChartFunction& f, const ChartPoint& q, const FDSpec& spec) {
  spec.validate();
  Vector2 g;
  for (int i = 0; i < 2; ++i) {
    Vector2 plus = q.vec(), minus = q.vec();
    plus[i] += spec.h;
    minus[i] -= spec.h;
    double fp = f(ChartPoint::from(plus)), fm = f(ChartPoint::from(minus));
    if (!std::isfinite(fp) || !std::isfinite(fm)) throw std::domain_error("non-finite function value in finite differences");
    g[i] = (fp - fm) / (2.0 * spec.h);
  }
  return g;
}

Matrix2 monte_carlo_fim(const GaussianLocationModel& m, const ChartPoint& q, long long n, std::uint64_t seed,
                        int workers) {
  if (n < 10000) throw std::invalid_argument(fmt::format("monte_carlo_fim requires n >= 10000, got {}", n));
  const Jacobian j = chart_jacobian(m.chart, q);
  const long long n_blocks = (n + kBlock - 1) / kBlock;
  std::vector<BlockSums> blocks(static_cast<std::size_t>(n_blocks));
  auto work = [&](long long first) {
    for (long long b = first; b < n_blocks; b += std::max(workers, 1)) {
      long long count = std::min(kBlock, n - b * kBlock);
      blocks[static_cast<std::size_t>(b)] = score_block(j, count, mix_seed(seed, static_cast<std::uint64_t>(b)));
    }
  };
  if (workers <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  BlockSums total;
  for (const auto& b : blocks) {
    total.s += b.s;
    total.ss += b.ss;
  }
  const double nn = static_cast<double>(n);
  Vector2 mean = total.s / nn;
  Matrix2 cov = (total.ss - nn * mean * mean.transpose()) / (nn - 1.0);
  cov(1, 0) = cov(0, 1);
  return cov;
}

std::vector<OracleResult> run_oracle_suite(std::uint64_t seed, int workers) {
  std::vector<OracleResult> out;
  StableRng rng(seed);
  const double two_pi = 2.0 * std::numbers::pi;

  {  // polynomial gradient vs ambient central differences
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
      int nvars = 1 + static_cast<int>(rng.uniform() * 4);
      Polynomial p = random_polynomial(rng, nvars, 4);
      AmbientPoint x(nvars);
      for (int i = 0; i < nvars; ++i) x[i] = rng.uniform(-1.5, 1.5);
      Vector fd(nvars);
      const double h = 1e-6;
      for (int i = 0; i < nvars; ++i) {
        AmbientPoint xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        fd[i] = (p.eval(xp) - p.eval(xm)) / (2 * h);
      }
      worst = std::max(worst, rel_error(fd, p.grad(x), 1.0));
    }
    out.push_back({"polynomial gradient vs finite differences", worst < 1e-6, worst, 1e-6});
  }

  {  // chart loss gradient vs central differences
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
      GaussianLocationModel m{random_chart(rng), Vector3::Zero()};
      m.target_mean = embed(Chart::cone(), {rng.uniform(-2, 2), rng.uniform(0, two_pi)});
      ChartPoint q{rng.uniform(-2, 2), rng.uniform(0, two_pi)};
      Vector2 fd = finite_diff_grad([&](const ChartPoint& p) { return loss(m, p); }, q);
      worst = std::max(worst, rel_error(fd, loss_grad(m, q), 1.0));
    }
    out.push_back({"loss gradient vs finite differences", worst < 1e-6, worst, 1e-6});
  }

  {  // closed-form Fisher information
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
      double xi = rng.uniform(-2, 2), th = rng.uniform(0, two_pi);
      Matrix2 cone = fim({Chart::cone(), Vector3::Zero()}, {xi, th});
      worst = std::max(worst, (cone - Vector2(2.0, xi * xi).asDiagonal().toDenseMatrix()).cwiseAbs().maxCoeff());
      for (double eps : {0.01, 0.1, 1.0}) {
        Matrix2 hyp = fim({Chart::hyperboloid(eps), Vector3::Zero()}, {xi, th});
        Matrix2 closed = Vector2((eps + 2 * xi * xi) / (eps + xi * xi), eps + xi * xi).asDiagonal();
        worst = std::max(worst, (hyp - closed).cwiseAbs().maxCoeff());
      }
    }
    out.push_back({"Fisher information closed forms", worst < 1e-12, worst, 1e-12});
  }

  {  // Monte-Carlo Fisher information
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
      GaussianLocationModel m{random_chart(rng), Vector3::Zero()};
      ChartPoint q{rng.uniform(-2, 2), rng.uniform(0, two_pi)};
      Matrix2 mc = monte_carlo_fim(m, q, 200000, mix_seed(seed, 1000 + static_cast<std::uint64_t>(t)), workers);
      worst = std::max(worst, rel_error(mc, fim(m, q), 0.0));
    }
    out.push_back({"Monte-Carlo Fisher information", worst < 0.05, worst, 0.05});
  }
  return out;
}

}  // namespace stratlearn
