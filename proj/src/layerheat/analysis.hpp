#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "layerheat/geometry.hpp"
#include "layerheat/potentials.hpp"
#include "layerheat/report.hpp"

namespace layerheat::analysis {

using geometry::BoundaryMap;
using potentials::OperatorKind;
using quadrature::GridSamples;
using quadrature::SpaceGrid;
using quadrature::TimeGrid;

// f(t_i, x_j). When periodic_radius > 0 the points are the equispaced nodes of the
// circle of that radius and spatial derivatives are spectral (d/dtheta over R).
struct SampledField {
  std::vector<double> t;
  std::vector<Point2> x;
  GridSamples values;
  double periodic_radius = 0.0;

  static SampledField on_grid(const TimeGrid& time, const SpaceGrid& space, GridSamples values, double radius = 1.0);
};

struct PairSampling {
  std::size_t max_pairs = 4096;  // per seminorm; below this every pair is used
  std::uint64_t seed = 1;
};

struct HolderEstimate {
  int order = 0;
  double time_exponent = 0.0;
  double space_exponent = 0.0;
  double sup_part = 0.0;
  double time_seminorm = 0.0;
  double space_seminorm = 0.0;
  // order 1: the tangential derivative g = (1/R) df/dtheta
  double gradient_sup = 0.0;
  double gradient_time_seminorm = 0.0;
  double gradient_space_seminorm = 0.0;

  double total() const;
};

// Discrete C^{a/2; a} (order 0) or C^{(1+a)/2; 1+a} (order 1) norm. Seminorms are
// maxima of difference quotients over node pairs; pair selection depends only on
// the grid shape and the seed, so the estimate is a seminorm on the sample lattice.
HolderEstimate parabolic_norm(const SampledField& f, double alpha, int order, const PairSampling& sampling = {});

using CausalField = std::function<double(double t, const Point2& x)>;
using Domain = std::function<bool(const Point2& x)>;

// F(t_i, phi(theta_j)). F is only called for t > 0; row t_0 holds the zero
// extension (h^T convention). Throws if a sampled phi(theta) leaves the domain.
GridSamples superpose(const CausalField& F, const BoundaryMap& phi, const TimeGrid& time, const SpaceGrid& space,
                      const Domain& domain = {});

// F(t_i, phi(theta_j) - phi(theta_k)) as (M + 1) slices of N x N, row-major in (j, k).
std::vector<double> superpose_pair(const CausalField& F, const BoundaryMap& phi, const TimeGrid& time,
                                   const SpaceGrid& space, const Domain& domain = {});

struct ShapePath {
  BoundaryMap base;
  BoundaryMap direction;  // only the coefficients matter
  std::string name;

  BoundaryMap at(double s) const { return base.axpy(s, direction); }
  // validates phi_s on [-s_max, s_max] at the given number of parameter samples
  void certify(double s_max, int samples = 9) const;
};

// phi_s = c + (1 + s eps cos(m theta)) (phi - c), c the constant term; on the
// circle of radius R this is rho_s = R (1 + s eps cos(m theta))
ShapePath radial_path(const BoundaryMap& base, double eps, int m);
ShapePath translation_path(const BoundaryMap& base, const Point2& shift);

// Assembled operator sets along a path, cached by parameter value.
class PathAssembly {
 public:
  PathAssembly(ShapePath path, TimeGrid time, SpaceGrid space);
  const ShapePath& path() const { return path_; }
  // lag and initial blocks of (kind, component) at s, concatenated
  const std::vector<double>& entries(OperatorKind kind, int component, double s);

 private:
  ShapePath path_;
  TimeGrid time_;
  SpaceGrid space_;
  std::map<std::pair<double, int>, std::vector<double>> cache_;
};

struct ShapeDerivative {
  int order = 1;
  double h = 0.0;
  std::vector<double> estimate;  // at step h
  double norm = 0.0;             // max |entry| at h
  // from the triple h, h/2, h/4: log2 of successive difference ratios; NaN when the
  // differences vanish
  double observed_order = 0.0;
  // norm at h over norm at h/2; 1 when both vanish
  double stabilization_ratio = 1.0;
  bool flagged = false;
};

// Central stencils of second-order accuracy for d^k/ds^k at s = 0, k = 1..4.
ShapeDerivative shape_derivative(PathAssembly& assembly, OperatorKind kind, int component, int order, double h);

struct KindSpec {
  OperatorKind kind;
  int component = 0;
};

// One row per (path, kind, order): estimate norm, observed order, stabilization ratio.
report::Table smoothness_report(std::vector<PathAssembly*> paths, const std::vector<KindSpec>& kinds, int max_order,
                        double h);

// ||V mu||_{order 1} / ||mu||_{order 0} with the same sampling for both.
double operator_norm_ratio(const potentials::BoundaryOperatorMatrix& op, const potentials::SpaceTimeDensity& mu,
                           double alpha, const PairSampling& sampling);

// smooth random density t (c0 + c1 t) sum_{k <= 4} (a_k cos k theta + b_k sin k theta)
std::function<double(double, double)> random_density(std::uint64_t seed, int index);

}  // namespace layerheat::analysis
