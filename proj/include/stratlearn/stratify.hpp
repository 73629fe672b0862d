#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stratlearn/poly.hpp"

namespace stratlearn {

/// Axis-aligned box, lower < upper componentwise.
struct Region {
  Vector lower;
  Vector upper;

  Region(Vector lo, Vector hi);
  static Region cube(int dim, double lo, double hi);

  int dim() const { return static_cast<int>(lower.size()); }
  bool contains(const AmbientPoint& x, double slack = 0.0) const;
  double diameter() const { return (upper - lower).norm(); }
};

struct StratifyOptions {
  double tol_crit = 1e-8;      // ||grad p|| below this is critical
  double tol_on = 1e-9;        // |p - level| below this is on the variety
  double merge_radius = 1e-4;  // singular points closer than this are merged
  int seeds_per_axis = 21;
  int max_newton_iters = 50;
  int ball_samples = 400;  // Newton seeds for the enclosing-ball search
};

/// Enclosing-ball metadata for one isolated singular point: the squared
/// distance to the point has no critical value on the variety inside the ball.
struct EnclosingBall {
  AmbientPoint center;
  double radius;
};

struct Stratification {
  Polynomial variety;
  double level;
  std::vector<AmbientPoint> singular_points;  // the 0-stratum
  int regular_dim;                            // dimension of the top stratum
  std::vector<EnclosingBall> balls;           // one per singular point
  std::vector<std::string> warnings;
};

/// Open i-faces of the standard n-simplex, keyed by i.
struct SimplexStrata {
  int n;
  std::map<int, long long> counts;
};

/// Finds isolated points of p^{-1}(level) inside `region` where grad p vanishes.
///
/// Newton's method on grad p = 0 is seeded from a uniform grid; converged
/// points are filtered by |p - level| < tol_on, merged within merge_radius
/// and returned in lexicographic order.
std::vector<AmbientPoint> find_singular_points(const Polynomial& p, double level, const Region& region,
                                               const StratifyOptions& opts = {});

class NotOnVarietyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Tangent-space dimension of the hypersurface p = level at x; nullopt marks a
/// singular point (no tangent space).
std::optional<int> tangent_dimension(const Polynomial& p, double level, const AmbientPoint& x,
                                     const StratifyOptions& opts = {});

Stratification stratify(const Polynomial& p, double level, const Region& region, const StratifyOptions& opts = {});

/// Only hypersurfaces are supported; throws for systems of more than one polynomial.
Stratification stratify(const std::vector<Polynomial>& system, double level, const Region& region,
                        const StratifyOptions& opts = {});

/// Newton projection of x onto p = level along grad p. Returns nullopt when
/// the iteration does not reach |p - level| < tol within max_iters, hits a
/// vanishing gradient, or produces a non-finite point.
std::optional<AmbientPoint> project_to_level(const Polynomial& p, double level, const AmbientPoint& x,
                                             double tol = 1e-9, int max_iters = 100);

SimplexStrata simplex_strata(int n);

long long binomial(int n, int k);

}  // namespace stratlearn
