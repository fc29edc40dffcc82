#pragma once

#include <array>
#include <span>
#include <vector>

namespace layerheat {

using Point2 = std::array<double, 2>;

namespace kernels {

struct KernelParams {
  int dim = 2;
};

// S_n(t, x); exactly zero for t <= 0. Throws on (t, x) = (0, 0).
double eval_s(const KernelParams& params, double t, std::span<const double> x);
double eval_s2(double t, const Point2& x);

// -x / (2t) S_n(t, x).
std::vector<double> eval_grad_s(const KernelParams& params, double t, std::span<const double> x);
Point2 eval_grad_s2(double t, const Point2& x);

// int_a^b S_n(s, x) ds with |x| = r > 0.
//
// n = 2: with z = r^2/(4s) the substitution ds/s = -dz/z gives
//   int_a^b (4 pi s)^{-1} e^{-r^2/(4s)} ds = (E1(r^2/4b) - E1(r^2/4a)) / (4 pi),
// and E1(+inf) = 0 covers a = 0. Other n use adaptive Gauss-Kronrod, tol 1e-12.
double slab_integral_s(const KernelParams& params, double r, double a, double b);

// Time moments of S_2 over a slab [a, b], r = |x| >= 0.
//   m0  = int S ds
//   m1  = int s S ds = (b e^{-z_b} - a e^{-z_a} - r^2/4 (E1(z_b) - E1(z_a))) / (4 pi)
//   mm1 = int S / s ds = (e^{-z_b} - e^{-z_a}) / (pi r^2)
// r = 0 needs a > 0.
struct SlabMoments {
  double m0 = 0.0;
  double m1 = 0.0;
  double mm1 = 0.0;
};
SlabMoments heat_moments_2d(double r2, double a, double b);

// E1 and e^{-z} at a slab end s (z = r^2/4s, s = 0 maps to z = inf); adjacent
// slabs share an end, so callers sweeping the lags can reuse these.
struct HeatEdge {
  double z = 0.0;
  double e1 = 0.0;
  double ex = 0.0;
};
HeatEdge heat_edge(double r2, double s);
SlabMoments heat_moments_2d(double r2, double a, double b, const HeatEdge& ea, const HeatEdge& eb);

// Finite-difference derivatives of s -> S_n(s, xi) at s = t, orders 0..max_order (<= 4).
std::vector<double> flatness_probe(const KernelParams& params, std::span<const double> xi, double t,
                                   int max_order);

// Tensor trapezoid of S_2(t, .) over [-L, L]^2 with L = 10 sqrt(t).
double gaussian_mass(double t, int nodes = 400);

}  // namespace kernels
}  // namespace layerheat
