#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "stratlearn/poly.hpp"
#include "stratlearn/stratify.hpp"

namespace stratlearn {

/// The level set base^{-1}(level) viewed as a deformation of base^{-1}(0).
struct Deformation {
  Polynomial base;
  double level;
  Region region;
};

struct ComponentReport {
  int count = 0;
  double grid_spacing = 0.0;
  long long occupied_cells = 0;
};

struct ResolveOptions {
  double tol_crit = 1e-8;
  double tol_on = 1e-9;
  int projection_iters = 100;
  double max_divergent_fraction = 0.01;
  StratifyOptions stratify{};
};

class ResolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Deformation deform(const Polynomial& p, double c);
Deformation deform(const Polynomial& p, double c, const Region& region);

/// Connected components of the level set inside d.region, counted on a grid
/// of grid_n cells per axis. A cell is occupied when base - level changes sign
/// (or vanishes) over its corners; occupied cells sharing a face are joined.
ComponentReport count_components(const Deformation& d, int grid_n);

struct ResolutionChoice {
  Deformation chosen;
  ComponentReport plus;  // level +eps
  ComponentReport minus;  // level -eps
  bool plus_smooth = false;
  bool minus_smooth = false;
};

/// Picks between the levels +eps and -eps: non-empty and smooth candidates
/// only, fewest components wins, ties go to +eps.
ResolutionChoice choose_resolution(const Polynomial& p, double eps, const Region& region, int grid_n,
                                   int samples = 10000, std::uint64_t seed = 1, const ResolveOptions& opts = {});

struct SmoothnessResult {
  bool smooth = false;
  int projected = 0;
  int divergent = 0;
  int critical = 0;
  std::size_t singular_points = 0;
};

/// Samples the region, projects each sample onto the level set and checks the
/// gradient there; also runs the grid Newton search for critical points of the
/// level set so isolated singularities are not missed by sampling.
SmoothnessResult smoothness_report(const Deformation& d, int samples, std::uint64_t seed,
                                   const ResolveOptions& opts = {});

bool smoothness_check(const Deformation& d, int samples, std::uint64_t seed, const ResolveOptions& opts = {});

/// Maximum distance from sampled points of the deformation (outside balls of
/// exclusion_radius around the base singularities) to base^{-1}(0).
double proximity_check(const Deformation& d, double exclusion_radius, int samples, std::uint64_t seed,
                       const ResolveOptions& opts = {});

/// Ambient loss gradient as a function of the point.
using VectorField = std::function<Vector(const AmbientPoint&)>;

/// Projection of the ambient field onto the tangent space of p^{-1}(level) at
/// each point. nullopt where grad p vanishes (no tangent space).
std::vector<std::optional<Vector>> projected_gradient_field(const Polynomial& p, double level,
                                                            const VectorField& loss_grad_ambient,
                                                            const std::vector<AmbientPoint>& points,
                                                            const ResolveOptions& opts = {});

/// Samples `count` points of p^{-1}(level) inside region by Newton projection
/// of uniformly drawn points.
std::vector<AmbientPoint> sample_level_set(const Polynomial& p, double level, const Region& region, int count,
                                           std::uint64_t seed, const ResolveOptions& opts = {});

}  // namespace stratlearn
