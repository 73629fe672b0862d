#include "stratlearn/stratify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "stratlearn/rng.hpp"

namespace stratlearn {

Region::Region(Vector lo, Vector hi) : lower(std::move(lo)), upper(std::move(hi)) {
  if (lower.size() != upper.size() || lower.size() == 0) throw DimensionError("region bounds have mismatched size");
  for (Eigen::Index i = 0; i < lower.size(); ++i)
    if (!(lower[i] < upper[i])) throw std::invalid_argument("region requires lower < upper componentwise");
}

Region Region::cube(int dim, double lo, double hi) {
  return Region(Vector::Constant(dim, lo), Vector::Constant(dim, hi));
}

bool Region::contains(const AmbientPoint& x, double slack) const {
  for (Eigen::Index i = 0; i < lower.size(); ++i)
    if (x[i] < lower[i] - slack || x[i] > upper[i] + slack) return false;
  return true;
}

namespace {

bool lex_less(const AmbientPoint& a, const AmbientPoint& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

AmbientPoint newton_critical(const Polynomial& p, AmbientPoint x, int max_iters) {
  for (int k = 0; k < max_iters; ++k) {
    Vector g = p.grad(x);
    if (g.squaredNorm() == 0.0) break;
    Vector step = p.hessian(x).completeOrthogonalDecomposition().solve(g);
    if (!step.allFinite() || step.squaredNorm() == 0.0) break;
    x -= step;
    if (!x.allFinite()) break;
  }
  return x;
}

// Critical points of rho(x) = |x - center|^2 restricted to p = level solve the
// Lagrange system  x - center = lambda * grad p(x),  p(x) = level.
// Newton on that system from sampled points of the variety; returns the
// distance to the nearest critical point other than `center` inside r_max.
double nearest_distance_critical(const Polynomial& p, double level, const AmbientPoint& center, double r_max,
                                 const StratifyOptions& opts, std::uint64_t seed) {
  const int n = p.nvars();
  StableRng rng(seed);
  double nearest = std::numeric_limits<double>::infinity();
  for (int s = 0; s < opts.ball_samples; ++s) {
    AmbientPoint x0(n);
    for (int i = 0; i < n; ++i) x0[i] = center[i] + rng.uniform(-r_max, r_max);
    auto y = project_to_level(p, level, x0, opts.tol_on);
    if (!y) continue;
    Vector x = *y;
    Vector g = p.grad(x);
    if (g.squaredNorm() == 0.0) continue;
    double lambda = (x - center).dot(g) / g.squaredNorm();
    bool converged = false;
    for (int it = 0; it < opts.max_newton_iters; ++it) {
      g = p.grad(x);
      Vector r(n + 1);
      r.head(n) = x - center - lambda * g;
      r[n] = p.eval(x) - level;
      if (r.norm() < 1e-12) {
        converged = true;
        break;
      }
      Matrix j = Matrix::Zero(n + 1, n + 1);
      j.topLeftCorner(n, n) = Matrix::Identity(n, n) - lambda * p.hessian(x);
      j.topRightCorner(n, 1) = -g;
      j.bottomLeftCorner(1, n) = g.transpose();
      Vector step = j.colPivHouseholderQr().solve(r);
      if (!step.allFinite()) break;
      x -= step.head(n);
      lambda -= step[n];
      if (!x.allFinite()) break;
    }
    if (!converged) continue;
    double d = (x - center).norm();
    if (d <= opts.merge_radius || d > r_max) continue;
    if (p.grad(x).norm() < opts.tol_crit) continue;  // another singular point
    nearest = std::min(nearest, d);
  }
  return nearest;
}

}  // namespace

std::optional<AmbientPoint> project_to_level(const Polynomial& p, double level, const AmbientPoint& x, double tol,
                                             int max_iters) {
  AmbientPoint y = x;
  for (int k = 0; k <= max_iters; ++k) {
    double f = p.eval(y) - level;
    if (std::abs(f) < tol) return y;
    if (k == max_iters) break;
    Vector g = p.grad(y);
    double g2 = g.squaredNorm();
    if (g2 == 0.0 || !std::isfinite(g2)) return std::nullopt;
    y -= (f / g2) * g;
    if (!y.allFinite()) return std::nullopt;
  }
  return std::nullopt;
}

std::vector<AmbientPoint> find_singular_points(const Polynomial& p, double level, const Region& region,
                                               const StratifyOptions& opts) {
  const int n = p.nvars();
  if (region.dim() != n)
    throw DimensionError(fmt::format("region has dimension {}, polynomial has {} variables", region.dim(), n));
  if (opts.seeds_per_axis < 2) throw std::invalid_argument("seeds_per_axis must be >= 2");

  struct Candidate {
    AmbientPoint x;
    double gnorm;
  };
  std::vector<Candidate> found;

  const int m = opts.seeds_per_axis;
  long long total = 1;
  for (int i = 0; i < n; ++i) total *= m;
  const double slack = 1e-9 * region.diameter();
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  for (long long s = 0; s < total; ++s) {
    long long rem = s;
    AmbientPoint seed(n);
    for (int i = 0; i < n; ++i) {
      int k = static_cast<int>(rem % m);
      rem /= m;
      seed[i] = region.lower[i] + (region.upper[i] - region.lower[i]) * k / (m - 1);
    }
    AmbientPoint x = newton_critical(p, seed, opts.max_newton_iters);
    if (!x.allFinite() || !region.contains(x, slack)) continue;
    double gn = p.grad(x).norm();
    if (gn >= opts.tol_crit) continue;
    if (std::abs(p.eval(x) - level) >= opts.tol_on) continue;
    found.push_back({x, gn});
  }

  // Greedy merge in seed order; a cluster keeps its smallest-gradient member.
  std::vector<Candidate> merged;
  for (const auto& c : found) {
    bool absorbed = false;
    for (auto& m2 : merged) {
      if ((m2.x - c.x).norm() <= opts.merge_radius) {
        if (c.gnorm < m2.gnorm) m2 = c;
        absorbed = true;
        break;
      }
    }
    if (!absorbed) merged.push_back(c);
  }
  std::vector<AmbientPoint> out;
  out.reserve(merged.size());
  for (auto& c : merged) out.push_back(std::move(c.x));
  std::sort(out.begin(), out.end(), lex_less);
  return out;
}

std::optional<int> tangent_dimension(const Polynomial& p, double level, const AmbientPoint& x,
                                     const StratifyOptions& opts) {
  double off = std::abs(p.eval(x) - level);
  if (off >= opts.tol_on) throw NotOnVarietyError(fmt::format("point is off the variety by {:.3g}", off));
  if (p.grad(x).norm() >= opts.tol_crit) return p.nvars() - 1;
  return std::nullopt;
}

Stratification stratify(const Polynomial& p, double level, const Region& region, const StratifyOptions& opts) {
  Stratification st{p, level, find_singular_points(p, level, region, opts), p.nvars() - 1, {}, {}};
  const auto& pts = st.singular_points;
  double half_width = (region.upper - region.lower).minCoeff() / 2.0;
  double max_radius = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double r_max = half_width;
    for (std::size_t j = 0; j < pts.size(); ++j)
      if (j != i) r_max = std::min(r_max, 0.5 * (pts[i] - pts[j]).norm());
    double crit = nearest_distance_critical(p, level, pts[i], r_max, opts, mix_seed(0x5eed, i));
    double r = std::min(r_max, 0.5 * crit);
    st.balls.push_back({pts[i], r});
    max_radius = std::max(max_radius, r);
  }
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      if ((pts[i] - pts[j]).norm() < 4.0 * max_radius)
        st.warnings.push_back(fmt::format("singular points {} and {} are closer than 4 * max enclosing radius", i, j));
  return st;
}

Stratification stratify(const std::vector<Polynomial>& system, double level, const Region& region,
                        const StratifyOptions& opts) {
  if (system.size() != 1)
    throw std::invalid_argument(
        fmt::format("only hypersurfaces (one polynomial) are supported, got a system of {}", system.size()));
  return stratify(system.front(), level, region, opts);
}

long long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

SimplexStrata simplex_strata(int n) {
  if (n < 0 || n > 20) throw std::out_of_range(fmt::format("simplex dimension must be in [0, 20], got {}", n));
  SimplexStrata s{n, {}};
  for (int i = 0; i <= n; ++i) s.counts[i] = binomial(n + 1, i + 1);
  return s;
}

}  // namespace stratlearn
