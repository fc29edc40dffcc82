#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "layerheat/geometry.hpp"
#include "layerheat/potentials.hpp"

namespace layerheat::pullback {

using geometry::TubularExtension;
using potentials::LayerEvaluator;
using potentials::Side;
using potentials::SpaceTimeDensity;
using quadrature::TimeGrid;

// Chart grid of one shell. Inner shell (plus): s from -delta up to the interface,
// so row n_s - 1 is s = 0. Outer shell (minus): row 0 is s = 0, the last row s = delta.
struct ChartGrid {
  int n_theta = 8;
  int n_s = 3;
  double delta = 0.1;
  Side side = Side::plus;
  double radius = 1.0;  // of the reference circle

  ChartGrid() = default;
  ChartGrid(int nt, int ns, double d, Side sd, double r = 1.0);
  static ChartGrid of(const TubularExtension& ext, int nt, int ns, Side sd);
  double theta(int j) const;
  double s(int k) const;
  double hs() const { return delta / (n_s - 1); }
  int interface_row() const { return side == Side::plus ? n_s - 1 : 0; }
  int edge_row() const { return side == Side::plus ? 0 : n_s - 1; }
};

// u(t_i, theta_j, s_k). The C_0 setting asks for u(t_0) = 0; fields violating it
// (the negative controls) are allowed and reported by satisfies_c0.
class AnnulusField {
 public:
  AnnulusField() = default;
  AnnulusField(TimeGrid time, ChartGrid grid);
  static AnnulusField from_function(const TubularExtension& ext, const TimeGrid& time, const ChartGrid& grid,
                                    const std::function<double(double t, const Point2& y)>& f);

  const TimeGrid& time() const { return time_; }
  const ChartGrid& grid() const { return grid_; }
  double& operator()(int i, int k, int j) { return v_[index(i, k, j)]; }
  double operator()(int i, int k, int j) const { return v_[index(i, k, j)]; }
  const std::vector<double>& values() const { return v_; }
  double max_abs() const;
  bool satisfies_c0() const;

 private:
  std::size_t index(int i, int k, int j) const {
    return (static_cast<std::size_t>(i) * grid_.n_s + k) * grid_.n_theta + j;
  }
  TimeGrid time_;
  ChartGrid grid_;
  std::vector<double> v_;
};

struct WeakPair {
  TimeGrid time;
  ChartGrid grid;
  std::vector<double> w0;  // (i, k, j) as in AnnulusField
  std::vector<Point2> w1;

  static WeakPair zero(const TimeGrid& time, const ChartGrid& grid);
};

// (-|det DPhi| u, (DPhi)^{-1} (DPhi)^{-T} (Du)^T |det DPhi|)
WeakPair b_omega(const TubularExtension& ext, const AnnulusField& u);

// bump(t) * bump(s) * trig(theta); supports are fractions of [0, T] and of the shell
struct TestFunction {
  double t_lo = 0.15, t_hi = 0.95;
  double s_lo = 0.15, s_hi = 0.85;
  int mode = 0;
  bool sine = false;
};

// The fixed family of 10 used throughout.
std::vector<TestFunction> default_test_family();

// max over the family of |pairing of (pair - rhs)| divided by the pairing of the
// absolute values, so each term is a relative cancellation in [0, 1].
double weak_heat_residual(const WeakPair& pair, const WeakPair& rhs,
                          const std::vector<TestFunction>& family = default_test_family());

enum class ShellKind { V_shell, W_shell };

// Shell traces on s = -delta (plus) or s = +delta (minus), by convolve on the
// boundary nodes of the density. Rows are times, columns theta_j of the density grid.
quadrature::GridSamples shell_operator(ShellKind kind, const TubularExtension& ext, const SpaceTimeDensity& mu,
                                       Side side);

struct LayerFields {
  AnnulusField plus, minus;
  bool interface_converged = true;
  std::string diagnostic;
};

// Pullbacks of the off-boundary layer potential onto both shells; the interface
// rows are the one-sided Richardson limits.
LayerFields layer_fields(const TubularExtension& ext, const LayerEvaluator& ev, potentials::LayerKind kind,
                         int n_s);

struct TransmissionResiduals {
  double interface_value_residual = 0.0;
  double conormal_jump_residual = 0.0;
  double shell_trace_residual_plus = 0.0;
  double shell_trace_residual_minus = 0.0;
  double weak_residual_plus = 0.0;
  double weak_residual_minus = 0.0;
  double initial_residual = 0.0;
  bool interface_converged = true;
  bool conormal_converged = true;
  std::string diagnostic;

  double max() const;
  static std::vector<std::string> labels();
  std::vector<double> as_vector() const;
};

struct TransmissionOptions {
  int n_s = 16;
  int conormal_stride = 2;  // every stride-th theta for the conormal ladder
};

TransmissionResiduals transmission_verify(const TubularExtension& ext, const SpaceTimeDensity& mu,
                                          potentials::LayerKind kind, const TransmissionOptions& opt = {});

struct EnergyReport {
  std::vector<double> t, e, dedt, dissipation, boundary, residual;
  // residual / max(|de/dt|, 2 dissipation) at t_i, 0 where both vanish
  std::vector<double> relative;
  double max_relative(double t_from) const;
};

// e = sum over both shells of int v^2; identity de/dt = -2 int |Dv|^2 + 2 sum of
// boundary integrals of v dv/dn over all four edge curves with outward normals.
EnergyReport energy_monitor(const TubularExtension& ext, const AnnulusField& plus, const AnnulusField& minus);

}  // namespace layerheat::pullback
