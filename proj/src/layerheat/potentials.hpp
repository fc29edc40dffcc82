#pragma once

#include <functional>
#include <initializer_list>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "layerheat/geometry.hpp"
#include "layerheat/quadrature.hpp"

namespace layerheat::potentials {

using geometry::BoundaryMap;
using quadrature::GridSamples;
using quadrature::SpaceGrid;
using quadrature::TimeGrid;

class SpaceTimeDensity {
 public:
  SpaceTimeDensity(TimeGrid time, SpaceGrid space);
  SpaceTimeDensity(TimeGrid time, SpaceGrid space, GridSamples values);
  static SpaceTimeDensity from_function(const TimeGrid& time, const SpaceGrid& space,
                                        const std::function<double(double t, double theta)>& f);

  const TimeGrid& time() const { return time_; }
  const SpaceGrid& space() const { return space_; }
  const GridSamples& values() const { return values_; }
  GridSamples& values() { return values_; }
  double operator()(int i, int j) const { return values_(i, j); }

  // mu(t_0, .) = 0; densities failing this are still usable but lie outside C_0
  bool satisfies_c0() const;

 private:
  TimeGrid time_;
  SpaceGrid space_;
  GridSamples values_;
};

enum class OperatorKind { V, V_l, W_star, W };
std::string kind_name(OperatorKind kind, int component = 0);

// Causal block-Toeplitz Nystrom matrix. Output at t_i:
//   sum_{l=0}^{i-1} lag(l) mu_{i-l} + initial(i-1) mu_0.
class BoundaryOperatorMatrix {
 public:
  BoundaryOperatorMatrix() = default;
  BoundaryOperatorMatrix(OperatorKind kind, int component, TimeGrid time, SpaceGrid space, std::uint64_t shape_hash);

  OperatorKind kind() const { return kind_; }
  int component() const { return component_; }
  const TimeGrid& time() const { return time_; }
  const SpaceGrid& space() const { return space_; }
  std::uint64_t shape_hash() const { return hash_; }

  double* lag(int l) { return lag_.data() + block_offset(l); }
  const double* lag(int l) const { return lag_.data() + block_offset(l); }
  double* initial(int l) { return init_.data() + block_offset(l); }
  const double* initial(int l) const { return init_.data() + block_offset(l); }
  const std::vector<double>& lag_data() const { return lag_; }
  const std::vector<double>& initial_data() const { return init_; }

  GridSamples apply(const SpaceTimeDensity& mu) const;

  void write(const std::string& path) const;
  static BoundaryOperatorMatrix read(const std::string& path);

 private:
  std::size_t block_offset(int l) const { return static_cast<std::size_t>(l) * space_.N * space_.N; }

  OperatorKind kind_ = OperatorKind::V;
  int component_ = 0;
  TimeGrid time_;
  SpaceGrid space_;
  std::uint64_t hash_ = 0;
  std::vector<double> lag_, init_;
};

struct OperatorSet {
  BoundaryOperatorMatrix V, V1, V2, W_star, W;
  const BoundaryOperatorMatrix& get(OperatorKind kind, int component = 0) const;
};

// component selects l in {1, 2} for V_l and is ignored otherwise
BoundaryOperatorMatrix assemble(OperatorKind kind, const BoundaryMap& phi, const TimeGrid& time,
                                const SpaceGrid& space, int component = 0);
OperatorSet assemble_all(const BoundaryMap& phi, const TimeGrid& time, const SpaceGrid& space);
// only the listed (kind, component) pairs are filled
OperatorSet assemble_some(const BoundaryMap& phi, const TimeGrid& time, const SpaceGrid& space,
                          std::initializer_list<std::pair<OperatorKind, int>> kinds);

enum class LayerKind { single, double_layer };

struct EvalResult {
  double value = 0.0;
  Point2 gradient{0.0, 0.0};
  bool near_boundary = false;
  bool degraded = false;
};

struct History {
  std::vector<double> value;  // t_0..t_M
  std::vector<Point2> gradient;
  bool near_boundary = false;
  bool degraded = false;
};

// Off-boundary layer potentials of a density on phi. The slab [a, b] of lags is
// integrated exactly in time; in space the trapezoid rule runs on an upsampled
// copy of the curve fine enough for the distance to the curve (or for sqrt(a)).
class LayerEvaluator {
 public:
  LayerEvaluator(BoundaryMap phi, SpaceTimeDensity mu);

  const BoundaryMap& shape() const { return phi_; }
  const SpaceTimeDensity& density() const { return mu_; }

  // all grid times at once
  History history(LayerKind kind, const Point2& x, bool with_gradient = false) const;
  // any t in [0, T]; the gradient is filled for the single layer only
  EvalResult eval(LayerKind kind, double t, const Point2& x, bool with_gradient = false) const;

  int max_level() const { return max_level_; }

 private:
  struct Level {
    int nf = 0;
    std::vector<Point2> pos;  // phi without the constant term
    std::vector<Point2> normal;
    std::vector<double> speed;
    GridSamples mu;
  };
  const Level& level(int p) const;
  int choose_level(double dist, double a) const;
  double distance(const Point2& x) const;

  BoundaryMap phi_;
  SpaceTimeDensity mu_;
  Point2 center_{0.0, 0.0};
  double h0_ = 0.0;
  int max_level_ = 0;
  mutable std::mutex mutex_;
  mutable std::map<int, std::unique_ptr<Level>> levels_;
};

EvalResult single_layer_eval(const LayerEvaluator& ev, double t, const Point2& x);
EvalResult double_layer_eval(const LayerEvaluator& ev, double t, const Point2& x);

enum class JumpQuantity { single_value, single_normal, single_partial, double_value };
enum class Side { plus, minus };  // plus: interior

struct JumpProbe {
  std::vector<double> limit;  // per grid time
  std::vector<double> ratio;
  bool converged = true;
  std::string diagnostic;
};

// One-sided limits at phi(theta) approached along nu_phi from the interior (plus)
// or exterior (minus), Richardson extrapolated over eps in {1e-2, 5e-3, 2.5e-3}.
JumpProbe jump_probe(const LayerEvaluator& ev, JumpQuantity quantity, Side side, double theta, int component = 1,
                     std::array<double, 3> eps = {1e-2, 5e-3, 2.5e-3});

struct CrosscheckReport {
  double v1_discrepancy = 0.0;
  double v2_discrepancy = 0.0;
  double w_star_discrepancy = 0.0;
  double max_discrepancy() const { return std::max({v1_discrepancy, v2_discrepancy, w_star_discrepancy}); }
};

// V_l = -(n_l/2) mu + (DV^+ (DE)^{-1})_l and W_* = -mu/2 + DV^+ (DE)^{-1} n, the
// right sides from one-sided differences of V^+ on the inner shell.
CrosscheckReport identity_crosscheck(const BoundaryMap& phi, const TimeGrid& time, const SpaceGrid& space,
                                     const SpaceTimeDensity& mu, double fd_step = 5e-3);

}  // namespace layerheat::potentials
