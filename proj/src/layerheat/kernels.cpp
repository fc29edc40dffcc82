#include "layerheat/kernels.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>

#include "layerheat/error.hpp"
#include "layerheat/special_functions.hpp"

namespace layerheat::kernels {

namespace {

double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

void check_params(const KernelParams& p, std::size_t size) {
  require(p.dim >= 2, "kernel dimension must be at least 2");
  require(size == static_cast<std::size_t>(p.dim), "point dimension does not match kernel dimension");
}

double s_of_r2(int dim, double t, double r2) {
  if (t <= 0.0) return 0.0;
  return std::pow(4.0 * kPi * t, -0.5 * dim) * std::exp(-r2 / (4.0 * t));
}

}  // namespace

double eval_s(const KernelParams& params, double t, std::span<const double> x) {
  check_params(params, x.size());
  const double r2 = norm2(x);
  require(!(t == 0.0 && r2 == 0.0), "S_n is undefined at (t, x) = (0, 0)");
  return s_of_r2(params.dim, t, r2);
}

double eval_s2(double t, const Point2& x) { return eval_s({2}, t, x); }

std::vector<double> eval_grad_s(const KernelParams& params, double t, std::span<const double> x) {
  const double s = eval_s(params, t, x);
  std::vector<double> g(x.size(), 0.0);
  if (t <= 0.0) return g;
  for (std::size_t i = 0; i < x.size(); ++i) g[i] = -x[i] / (2.0 * t) * s;
  return g;
}

Point2 eval_grad_s2(double t, const Point2& x) {
  const auto g = eval_grad_s({2}, t, x);
  return {g[0], g[1]};
}

double slab_integral_s(const KernelParams& params, double r, double a, double b) {
  require(params.dim >= 2, "kernel dimension must be at least 2");
  require(r > 0.0, "slab_integral_s: r must be positive");
  require(a >= 0.0 && b >= a, "slab_integral_s: need 0 <= a <= b");
  if (a == b) return 0.0;
  if (params.dim == 2) return heat_moments_2d(r * r, a, b).m0;
  const double r2 = r * r;
  auto f = [&](double s) { return s_of_r2(params.dim, s, r2); };
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 30, 1e-12, &err);
}

HeatEdge heat_edge(double r2, double s) {
  HeatEdge e;
  if (s <= 0.0 || r2 / (4.0 * s) > 740.0) {
    e.z = s <= 0.0 ? std::numeric_limits<double>::infinity() : r2 / (4.0 * s);
    return e;
  }
  e.z = r2 / (4.0 * s);
  // small z goes through the Ein form in heat_moments_2d, E1 is not needed there
  e.e1 = e.z >= 0.5 ? expint_e1(e.z) : 0.0;
  e.ex = std::exp(-e.z);
  return e;
}

SlabMoments heat_moments_2d(double r2, double a, double b) {
  require(a >= 0.0 && b >= a, "heat_moments_2d: need 0 <= a <= b");
  if (r2 == 0.0 || a == b) return heat_moments_2d(r2, a, b, HeatEdge{}, HeatEdge{});
  return heat_moments_2d(r2, a, b, heat_edge(r2, a), heat_edge(r2, b));
}

SlabMoments heat_moments_2d(double r2, double a, double b, const HeatEdge& ea, const HeatEdge& eb) {
  SlabMoments m;
  if (a == b) return m;
  constexpr double inv4pi = 1.0 / (4.0 * kPi);
  if (r2 == 0.0) {
    require(a > 0.0, "heat_moments_2d: r = 0 requires a > 0");
    m.m0 = inv4pi * std::log(b / a);
    m.m1 = inv4pi * (b - a);
    m.mm1 = inv4pi * (1.0 / a - 1.0 / b);
    return m;
  }
  const double zb = eb.z, za = ea.z;
  if (zb > 740.0) return m;
  double d;
  if (a == 0.0)
    d = zb >= 0.5 ? eb.e1 : expint_e1(zb);
  else if (za < 0.5)
    d = expint_e1_diff(zb, za);
  else
    d = (zb >= 0.5 ? eb.e1 : expint_e1(zb)) - ea.e1;
  const double ebx = eb.ex;
  const double eax = a > 0.0 ? ea.ex : 0.0;
  m.m0 = inv4pi * d;
  m.m1 = inv4pi * (b * ebx - a * eax - 0.25 * r2 * d);
  if (a > 0.0) {
    // e^{-zb} - e^{-za} = e^{-zb} (1 - e^{-(za - zb)})
    const double dz = 0.25 * r2 * (1.0 / a - 1.0 / b);
    m.mm1 = -ebx * std::expm1(-dz) / (kPi * r2);
  } else {
    m.mm1 = ebx / (kPi * r2);
  }
  return m;
}

std::vector<double> flatness_probe(const KernelParams& params, std::span<const double> xi, double t,
                                   int max_order) {
  check_params(params, xi.size());
  const double r2 = norm2(xi);
  require(r2 > 0.0, "flatness_probe: xi must be nonzero");
  require(t > 0.0, "flatness_probe: t must be positive");
  require(max_order >= 0 && max_order <= 4, "flatness_probe: max_order must be in 0..4");
  // step on the natural time scale of s -> S(s, xi): min(t, t^2 / (r^2/4))
  const double scale = std::min(t, t * t / (0.25 * r2));
  const double h = 0.05 * scale;
  auto f = [&](int k) { return s_of_r2(params.dim, t + k * h, r2); };
  // central stencils, second-order accurate
  static const double c1[] = {-0.5, 0.0, 0.5};
  static const double c2[] = {1.0, -2.0, 1.0};
  static const double c3[] = {-0.5, 1.0, 0.0, -1.0, 0.5};
  static const double c4[] = {1.0, -4.0, 6.0, -4.0, 1.0};
  std::vector<double> out;
  out.push_back(f(0));
  auto apply = [&](const double* c, int half, int order) {
    double s = 0.0;
    for (int k = -half; k <= half; ++k) s += c[k + half] * f(k);
    return s / std::pow(h, order);
  };
  if (max_order >= 1) out.push_back(apply(c1, 1, 1));
  if (max_order >= 2) out.push_back(apply(c2, 1, 2));
  if (max_order >= 3) out.push_back(apply(c3, 2, 3));
  if (max_order >= 4) out.push_back(apply(c4, 2, 4));
  return out;
}

double gaussian_mass(double t, int nodes) {
  require(t > 0.0 && nodes >= 2, "gaussian_mass: need t > 0 and at least 2 nodes");
  const double L = 10.0 * std::sqrt(t);
  const double h = 2.0 * L / (nodes - 1);
  // S_2 factorizes, so the tensor trapezoid is the square of a 1D rule
  double line = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double x = -L + i * h;
    const double w = (i == 0 || i == nodes - 1) ? 0.5 : 1.0;
    line += w * std::exp(-x * x / (4.0 * t));
  }
  line *= h;
  return line * line / (4.0 * kPi * t);
}

}  // namespace layerheat::kernels
