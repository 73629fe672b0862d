#include "stratlearn/optim.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "stratlearn/rng.hpp"

namespace stratlearn {

std::string to_string(Method m) { return m == Method::GD ? "gd" : "ngd"; }

std::string to_string(Termination t) {
  switch (t) {
    case Termination::GradTol: return "grad_tol";
    case Termination::LossTol: return "loss_tol";
    case Termination::MaxSteps: return "max_steps";
    case Termination::Error: return "error";
  }
  return "unknown";
}

void OptimizerConfig::validate() const {
  if (!(step_size > 0)) throw std::invalid_argument("step_size must be > 0");
  if (!(step_cap > 0)) throw std::invalid_argument("step_cap must be > 0");
  if (!(damping >= 0)) throw std::invalid_argument("damping must be >= 0");
  if (max_steps < 0) throw std::invalid_argument("max_steps must be >= 0");
  if (thin < 1) throw std::invalid_argument("thin must be >= 1");
  if (mode == SampleMode::Stochastic && batch < 1) throw std::invalid_argument("batch must be >= 1");
}

namespace {

Vector2 natural_direction(const GaussianLocationModel& m, const ChartPoint& q, const Vector2& g, double damping) {
  Matrix2 f = fim(m, q);
  f.diagonal().array() += damping;
  if (damping == 0.0) {
    Eigen::SelfAdjointEigenSolver<Matrix2> es(f, Eigen::EigenvaluesOnly);
    double lo = es.eigenvalues()[0], hi = es.eigenvalues()[1];
    if (lo <= 16.0 * std::numeric_limits<double>::epsilon() * std::max(hi, 1.0))
      throw SingularFimError(fmt::format("Fisher information is singular at xi={}, theta={}", q.xi, q.theta));
  }
  return f.ldlt().solve(g);
}

Vector2 capped(Vector2 u, double cap) {
  double n = u.norm();
  if (n > cap) u *= cap / n;
  return u;
}

ChartPoint apply(const ChartPoint& q, const Vector2& u) { return {q.xi - u[0], q.theta - u[1]}; }

}  // namespace

Vector2 raw_update(const GaussianLocationModel& m, const ChartPoint& q, const OptimizerConfig& cfg) {
  Vector2 g = loss_grad(m, q);
  if (!g.allFinite()) throw NonFiniteGradientError("non-finite loss gradient");
  if (cfg.method == Method::GD) return cfg.step_size * g;
  Vector2 d = natural_direction(m, q, g, cfg.damping);
  if (!d.allFinite()) throw NonFiniteGradientError("non-finite natural gradient");
  return cfg.step_size * d;
}

ChartPoint gd_step(const GaussianLocationModel& m, const ChartPoint& q, const OptimizerConfig& cfg) {
  if (cfg.method != Method::GD) throw std::invalid_argument("gd_step requires method = gd");
  return apply(q, capped(raw_update(m, q, cfg), cfg.step_cap));
}

ChartPoint ngd_step(const GaussianLocationModel& m, const ChartPoint& q, const OptimizerConfig& cfg) {
  if (cfg.method != Method::NGD) throw std::invalid_argument("ngd_step requires method = ngd");
  return apply(q, capped(raw_update(m, q, cfg), cfg.step_cap));
}

Trajectory run(const GaussianLocationModel& m, const ChartPoint& q0, const OptimizerConfig& cfg) {
  cfg.validate();
  Trajectory t;
  ChartPoint q = q0;
  auto record = [&](long long step) {
    double l = loss(m, q);
    double gn = loss_grad(m, q).norm();
    t.records.push_back({step, q, embed(m.chart, q), l, gn});
  };

  for (long long step = 0;; ++step) {
    double l = loss(m, q);
    double gn = loss_grad(m, q).norm();
    bool stop = true;
    if (gn < cfg.grad_tol) {
      t.terminated_by = Termination::GradTol;
    } else if (l < cfg.loss_tol) {
      t.terminated_by = Termination::LossTol;
    } else if (step >= cfg.max_steps) {
      t.terminated_by = Termination::MaxSteps;
    } else {
      stop = false;
    }
    if (stop || step % cfg.thin == 0) t.records.push_back({step, q, embed(m.chart, q), l, gn});
    if (stop) break;

    try {
      GaussianLocationModel step_model = m;
      if (cfg.mode == SampleMode::Stochastic)
        step_model.target_mean = sample_mean(m.target_mean, cfg.batch, mix_seed(cfg.seed, static_cast<std::uint64_t>(step)));
      q = apply(q, capped(raw_update(step_model, q, cfg), cfg.step_cap));
      if (!std::isfinite(q.xi) || !std::isfinite(q.theta)) throw NonFiniteGradientError("iterate became non-finite");
    } catch (const std::exception& e) {
      t.terminated_by = Termination::Error;
      t.error = e.what();
      if (t.records.back().step != step) record(step);
      break;
    }
  }
  return t;
}

std::optional<long long> steps_to_loss(const Trajectory& t, double threshold) {
  for (const auto& r : t.records)
    if (r.loss < threshold) return r.step;
  return std::nullopt;
}

StallReport detect_stall(const Trajectory& t, int window, double plateau_tol, double loss_tol,
                         const std::vector<AmbientPoint>& singularities) {
  if (window < 2) throw std::invalid_argument("stall window must be >= 2");
  const auto& rec = t.records;
  if (rec.size() < static_cast<std::size_t>(window))
    throw std::invalid_argument(fmt::format("trajectory has {} records, shorter than window {}", rec.size(), window));

  // prefix[k] = sum of relative decreases over record pairs (0,1) .. (k-1,k)
  std::vector<double> prefix(rec.size(), 0.0);
  for (std::size_t k = 1; k < rec.size(); ++k) {
    double prev = rec[k - 1].loss;
    double rel = prev > 0 ? (prev - rec[k].loss) / prev : 0.0;
    prefix[k] = prefix[k - 1] + rel;
  }

  StallReport out;
  double slowest = std::numeric_limits<double>::infinity();
  std::size_t slowest_start = 0;
  const std::size_t w = static_cast<std::size_t>(window);
  for (std::size_t s = 0; s + w <= rec.size(); ++s) {
    std::size_t e = s + w - 1;
    double mean = (prefix[e] - prefix[s]) / static_cast<double>(w - 1);
    if (mean < plateau_tol && rec[e].loss > loss_tol) {
      out.stalled = true;
      slowest_start = s;
      slowest = mean;
      break;
    }
    if (mean < slowest) {
      slowest = mean;
      slowest_start = s;
    }
  }
  out.window_start = static_cast<long long>(slowest_start);
  out.mean_rel_decrease = slowest;

  const Vector3& end = rec[slowest_start + w - 1].mu;
  double nearest = std::numeric_limits<double>::infinity();
  for (const auto& s : singularities) {
    if (s.size() != 3) throw DimensionError("singularity must be a point of R^3");
    nearest = std::min(nearest, (end - Vector3(s)).norm());
  }
  out.nearest_singularity_distance = nearest;
  return out;
}

}  // namespace stratlearn
