#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace layerheat::quadrature {

struct TimeGrid {
  double T = 1.0;
  int M = 2;

  TimeGrid() = default;
  TimeGrid(double horizon, int steps);
  double dt() const { return T / M; }
  double node(int i) const { return T * i / M; }
  std::vector<double> nodes() const;
};

struct SpaceGrid {
  int N = 8;

  SpaceGrid() = default;
  explicit SpaceGrid(int n);
  double h() const;
  double theta(int j) const;
};

// Row-major samples f(t_i, x_j), i = 0..M, j = 0..N-1.
struct GridSamples {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;

  GridSamples() = default;
  GridSamples(int r, int c) : rows(r), cols(c), values(static_cast<std::size_t>(r) * c, 0.0) {}
  double& operator()(int i, int j) { return values[static_cast<std::size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return values[static_cast<std::size_t>(i) * cols + j]; }
  std::span<const double> row(int i) const { return {values.data() + static_cast<std::size_t>(i) * cols, static_cast<std::size_t>(cols)}; }
  std::span<double> row(int i) { return {values.data() + static_cast<std::size_t>(i) * cols, static_cast<std::size_t>(cols)}; }
};

// Trigonometric interpolant of N (even) equispaced samples; the Nyquist mode is
// kept as a cosine so the interpolant is real and reproduces the samples.
class TrigInterpolant {
 public:
  explicit TrigInterpolant(std::span<const double> samples);
  double operator()(double theta) const;
  double derivative(double theta) const;
  // values at N * factor equispaced nodes
  std::vector<double> upsample(int factor) const;

 private:
  int n_ = 0;
  std::vector<double> a_, b_;
};

// Spectral derivative of periodic samples (d/dtheta), N even.
std::vector<double> spectral_derivative(std::span<const double> samples);

// Weights for int_0^{2pi} ln(4 sin^2((t_i - tau)/2)) f(tau) dtau, indexed by the
// node offset k = (l - i) mod N.
std::vector<double> log_weights(int N);

// Weights for the principal value int_0^{2pi} cot((tau - t_i)/2)/2 f(tau) dtau,
// indexed by k = (l - i) mod N: (2pi/N) cot(pi k/N) for odd k, 0 for even k.
std::vector<double> hilbert_weights(int N);

// A causal kernel seen through its time moments: over the lag slab [a, b]
// returns {int_a^b G(s) ds, int_a^b s G(s) ds} for target i and source j.
class SlabKernel {
 public:
  virtual ~SlabKernel() = default;
  virtual std::array<double, 2> moments(double a, double b, int target, int source) const = 0;
};

enum class SingularityClass { smooth, inverse_sqrt_time };

using LagFunction = std::function<double(double lag, int target, int source)>;

// smooth: G(lag, i, j) integrated by the trapezoid rule on each slab.
// inverse_sqrt_time: G = lag^{-1/2} g(lag, i, j); g taken at the slab midpoint and
// the weight lag^{-1/2} (c0 + c1 lag) integrated exactly.
std::unique_ptr<SlabKernel> make_kernel(SingularityClass cls, LagFunction g);

struct ConvolveResult {
  GridSamples values;
  // f(t_0, .) != 0 is accepted but lies outside the C_0 setting
  bool nonzero_initial = false;
};

// K[G, f](t_i, x) = int_0^{t_i} int G(t_i - tau, x, y) f(tau, y) dsigma_y dtau with f
// piecewise linear in time and the space integral given by source weights.
ConvolveResult convolve(const SlabKernel& kernel, const GridSamples& f, std::span<const double> space_weights,
                        int n_targets, const TimeGrid& grid);

struct ToeplitzReport {
  bool applicable = false;
  bool toeplitz = false;
  double max_deviation = 0.0;
};

// Assembles the hat-basis time blocks once from actual node differences and once
// from the lag index, and compares them entrywise.
ToeplitzReport toeplitz_check(std::span<const double> time_nodes, const SlabKernel& kernel, int n_targets,
                              int n_sources, double tolerance = 1e-14);

struct NormBound {
  double convolution_sup = 0.0;
  double bound = 0.0;  // sup|G| * ||f||_{L^1}
};

NormBound norm_bound_probe(const LagFunction& G, const GridSamples& f, std::span<const double> space_weights,
                           int n_targets, const TimeGrid& grid, int lag_samples = 64);

}  // namespace layerheat::quadrature
