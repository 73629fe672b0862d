#include "stratlearn/resolve.hpp"

#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "stratlearn/rng.hpp"

namespace stratlearn {

namespace {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), rank_(n, 0) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<int> rank_;
};

AmbientPoint uniform_point(const Region& region, StableRng& rng) {
  AmbientPoint x(region.dim());
  for (int i = 0; i < region.dim(); ++i) x[i] = rng.uniform(region.lower[i], region.upper[i]);
  return x;
}

}  // namespace

Deformation deform(const Polynomial& p, double c) { return deform(p, c, Region::cube(p.nvars(), -2.0, 2.0)); }

Deformation deform(const Polynomial& p, double c, const Region& region) {
  if (region.dim() != p.nvars()) throw DimensionError("region dimension does not match polynomial");
  if (!std::isfinite(c)) throw std::invalid_argument("deformation level must be finite");
  return Deformation{p, c, region};
}

ComponentReport count_components(const Deformation& d, int grid_n) {
  if (grid_n < 16) throw std::invalid_argument(fmt::format("grid_n must be >= 16, got {}", grid_n));
  const int dim = d.region.dim();
  const std::size_t nv = static_cast<std::size_t>(grid_n) + 1;
  double vertices = std::pow(static_cast<double>(nv), dim);
  if (vertices > 2e8) throw std::invalid_argument("occupancy grid too large");

  std::vector<std::size_t> vstride(static_cast<std::size_t>(dim)), cstride(static_cast<std::size_t>(dim));
  std::size_t n_vert = 1, n_cell = 1;
  for (int i = 0; i < dim; ++i) {
    vstride[static_cast<std::size_t>(i)] = n_vert;
    cstride[static_cast<std::size_t>(i)] = n_cell;
    n_vert *= nv;
    n_cell *= static_cast<std::size_t>(grid_n);
  }
  Vector h = (d.region.upper - d.region.lower) / grid_n;

  // Signs of base - level at grid vertices: -1, 0, +1.
  std::vector<signed char> sign(n_vert);
  AmbientPoint x(dim);
  for (std::size_t v = 0; v < n_vert; ++v) {
    std::size_t rem = v;
    for (int i = 0; i < dim; ++i) {
      x[i] = d.region.lower[i] + h[i] * static_cast<double>(rem % nv);
      rem /= nv;
    }
    double f = d.base.eval(x) - d.level;
    sign[v] = static_cast<signed char>((f > 0) - (f < 0));
  }

  const std::size_t n_corner = std::size_t{1} << dim;
  std::vector<std::size_t> corner_offset(n_corner, 0);
  for (std::size_t c = 0; c < n_corner; ++c)
    for (int i = 0; i < dim; ++i)
      if (c & (std::size_t{1} << i)) corner_offset[c] += vstride[static_cast<std::size_t>(i)];

  std::vector<char> occupied(n_cell, 0);
  long long n_occupied = 0;
  std::vector<std::size_t> coord(static_cast<std::size_t>(dim));
  for (std::size_t cell = 0; cell < n_cell; ++cell) {
    std::size_t rem = cell, base = 0;
    for (int i = 0; i < dim; ++i) {
      base += (rem % static_cast<std::size_t>(grid_n)) * vstride[static_cast<std::size_t>(i)];
      rem /= static_cast<std::size_t>(grid_n);
    }
    bool pos = false, neg = false, zero = false;
    for (std::size_t c = 0; c < n_corner; ++c) {
      signed char s = sign[base + corner_offset[c]];
      pos |= s > 0;
      neg |= s < 0;
      zero |= s == 0;
    }
    if ((pos && neg) || zero) {
      occupied[cell] = 1;
      ++n_occupied;
    }
  }

  UnionFind uf(n_cell);
  for (std::size_t cell = 0; cell < n_cell; ++cell) {
    if (!occupied[cell]) continue;
    std::size_t rem = cell;
    for (int i = 0; i < dim; ++i) {
      std::size_t ci = rem % static_cast<std::size_t>(grid_n);
      rem /= static_cast<std::size_t>(grid_n);
      if (ci + 1 < static_cast<std::size_t>(grid_n)) {
        std::size_t nb = cell + cstride[static_cast<std::size_t>(i)];
        if (occupied[nb]) uf.unite(cell, nb);
      }
    }
  }
  int count = 0;
  for (std::size_t cell = 0; cell < n_cell; ++cell)
    if (occupied[cell] && uf.find(cell) == cell) ++count;

  return ComponentReport{count, h.maxCoeff(), n_occupied};
}

SmoothnessResult smoothness_report(const Deformation& d, int samples, std::uint64_t seed, const ResolveOptions& opts) {
  if (samples < 100) throw std::invalid_argument(fmt::format("smoothness check needs >= 100 samples, got {}", samples));
  SmoothnessResult r;
  StableRng rng(seed);
  for (int s = 0; s < samples; ++s) {
    auto y = project_to_level(d.base, d.level, uniform_point(d.region, rng), opts.tol_on, opts.projection_iters);
    if (!y) {
      ++r.divergent;
      continue;
    }
    ++r.projected;
    if (d.base.grad(*y).norm() < opts.tol_crit) ++r.critical;
  }
  StratifyOptions so = opts.stratify;
  so.tol_crit = opts.tol_crit;
  so.tol_on = opts.tol_on;
  r.singular_points = find_singular_points(d.base, d.level, d.region, so).size();
  r.smooth = r.critical == 0 && r.singular_points == 0 &&
             r.divergent <= static_cast<int>(opts.max_divergent_fraction * samples);
  return r;
}

bool smoothness_check(const Deformation& d, int samples, std::uint64_t seed, const ResolveOptions& opts) {
  return smoothness_report(d, samples, seed, opts).smooth;
}

ResolutionChoice choose_resolution(const Polynomial& p, double eps, const Region& region, int grid_n, int samples,
                                   std::uint64_t seed, const ResolveOptions& opts) {
  if (!(eps > 0)) throw std::invalid_argument("resolution eps must be > 0");
  Deformation plus = deform(p, eps, region);
  Deformation minus = deform(p, -eps, region);
  ResolutionChoice out{plus, count_components(plus, grid_n), count_components(minus, grid_n), false, false};
  out.plus_smooth = out.plus.count > 0 && smoothness_check(plus, samples, seed, opts);
  out.minus_smooth = out.minus.count > 0 && smoothness_check(minus, samples, seed, opts);
  if (!out.plus_smooth && !out.minus_smooth)
    throw ResolutionError(fmt::format("both candidate levels +/-{} are empty or singular", eps));
  if (!out.plus_smooth || (out.minus_smooth && out.minus.count < out.plus.count)) out.chosen = minus;
  return out;
}

std::vector<AmbientPoint> sample_level_set(const Polynomial& p, double level, const Region& region, int count,
                                           std::uint64_t seed, const ResolveOptions& opts) {
  StableRng rng(seed);
  std::vector<AmbientPoint> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int s = 0; s < count; ++s) {
    auto y = project_to_level(p, level, uniform_point(region, rng), opts.tol_on, opts.projection_iters);
    if (y && region.contains(*y)) out.push_back(std::move(*y));
  }
  return out;
}

double proximity_check(const Deformation& d, double exclusion_radius, int samples, std::uint64_t seed,
                       const ResolveOptions& opts) {
  if (!(exclusion_radius > 0)) throw std::invalid_argument("exclusion_radius must be > 0");
  StratifyOptions so = opts.stratify;
  so.tol_crit = opts.tol_crit;
  so.tol_on = opts.tol_on;
  const auto singular = find_singular_points(d.base, 0.0, d.region, so);
  double max_distance = 0.0;
  int used = 0;
  for (const auto& x : sample_level_set(d.base, d.level, d.region, samples, seed, opts)) {
    bool excluded = false;
    for (const auto& s : singular)
      if ((x - s).norm() <= exclusion_radius) excluded = true;
    if (excluded) continue;
    auto y = project_to_level(d.base, 0.0, x, opts.tol_on, opts.projection_iters);
    if (!y) continue;
    ++used;
    max_distance = std::max(max_distance, (x - *y).norm());
  }
  if (used == 0)
    throw ResolutionError(fmt::format("no samples of the deformation lie outside exclusion radius {}", exclusion_radius));
  return max_distance;
}

std::vector<std::optional<Vector>> projected_gradient_field(const Polynomial& p, double level,
                                                            const VectorField& loss_grad_ambient,
                                                            const std::vector<AmbientPoint>& points,
                                                            const ResolveOptions& opts) {
  if (p.nvars() != 2 && p.nvars() != 3)
    throw DimensionError("projected gradient fields are defined for curves in R^2 and surfaces in R^3");
  std::vector<std::optional<Vector>> out;
  out.reserve(points.size());
  for (const auto& x : points) {
    double off = std::abs(p.eval(x) - level);
    if (off >= opts.tol_on) throw NotOnVarietyError(fmt::format("point is off the level set by {:.3g}", off));
    Vector n = p.grad(x);
    double nn = n.norm();
    if (nn < opts.tol_crit) {
      out.emplace_back(std::nullopt);
      continue;
    }
    n /= nn;
    Vector g = loss_grad_ambient(x);
    if (g.size() != p.nvars()) throw DimensionError("vector field dimension does not match polynomial");
    out.emplace_back(g - g.dot(n) * n);
  }
  return out;
}

}  // namespace stratlearn
