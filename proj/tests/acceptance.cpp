// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
//   acceptance --cli <path to layerheat> --work <scratch dir> [--only N]
#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "layerheat/analysis.hpp"
#include "layerheat/geometry.hpp"
#include "layerheat/kernels.hpp"
#include "layerheat/potentials.hpp"
#include "layerheat/pullback.hpp"
#include "layerheat/quadrature.hpp"
#include "layerheat/report.hpp"
#include "oracle.hpp"

using namespace layerheat;
using geometry::BoundaryMap;
using geometry::ExtensionKind;
using potentials::JumpQuantity;
using potentials::LayerKind;
using potentials::OperatorKind;
using potentials::Side;
using potentials::SpaceTimeDensity;
using quadrature::SpaceGrid;
using quadrature::TimeGrid;
using report::num;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

struct Criterion {
  int id;
  double time_limit;  // seconds
  std::function<Outcome()> run;
};

double mu_ref(double t, double th) { return t * (2.0 + std::cos(th)); }

Outcome ac1() {
  double worst = 0.0;
  for (double t : {0.05, 0.5, 1.0}) worst = std::max(worst, std::abs(kernels::gaussian_mass(t, 400) - 1.0));
  return {worst <= 1e-8, "max |mass - 1| = " + num(worst) + " (tol 1e-8)"};
}

Outcome ac2() {
  const TimeGrid tg(1.0, 256);
  const SpaceGrid sg(256);
  const auto one = SpaceTimeDensity::from_function(tg, sg, [](double, double) { return 1.0; });
  const potentials::LayerEvaluator ev(BoundaryMap::identity(), one);
  double worst = 0.0;
  for (double t : {0.25, 0.5, 1.0}) {
    for (Point2 x : {Point2{0.3, 0.0}, Point2{0.0, -0.5}})
      worst = std::max(worst, std::abs(potentials::double_layer_eval(ev, t, x).value - (oracle::disk_mass(t, x) - 1)));
    const Point2 out{1.5, 0.0};
    worst = std::max(worst, std::abs(potentials::double_layer_eval(ev, t, out).value - oracle::disk_mass(t, out)));
  }
  return {worst <= 1e-4, "max |w[1] - oracle| = " + num(worst) + " (tol 1e-4)"};
}

Outcome ac3() {
  const int N = 128, M = 128;
  const TimeGrid tg(1.0, M);
  const SpaceGrid sg(N);
  const auto phi = BoundaryMap::identity();
  const auto mu = SpaceTimeDensity::from_function(tg, sg, mu_ref);
  const auto ops = potentials::assemble_some(phi, tg, sg, {{OperatorKind::W_star, 0}, {OperatorKind::W, 0}});
  const auto ws = ops.W_star.apply(mu), w = ops.W.apply(mu);
  const potentials::LayerEvaluator ev(phi, mu);
  double worst = 0.0;
  int probes = 0;
  for (int a = 0; a < 4; ++a) {
    const int j = N * (2 * a + 1) / 8;
    const double th = sg.theta(j);
    for (Side side : {Side::plus, Side::minus}) {
      const double sgn = side == Side::plus ? 1.0 : -1.0;
      const auto sn = potentials::jump_probe(ev, JumpQuantity::single_normal, side, th);
      const auto dv = potentials::jump_probe(ev, JumpQuantity::double_value, side, th);
      for (int b = 1; b <= 4; ++b) {
        const int i = b * M / 4;
        const double half = 0.5 * mu(i, j);
        worst = std::max(worst, std::abs(sn.limit[i] - ws(i, j) - sgn * half) / half);
        worst = std::max(worst, std::abs(dv.limit[i] - w(i, j) + sgn * half) / half);
        if (side == Side::plus) ++probes;
      }
    }
  }
  return {worst <= 0.02, "max rel error = " + num(worst) + " (tol 0.02) over " + std::to_string(probes) +
                             " (t, theta) probes"};
}

Outcome ac4() {
  const TimeGrid tg(1.0, 32);
  const SpaceGrid sg(64);
  const auto phi = BoundaryMap::star(0.3, 3);
  const auto mu = SpaceTimeDensity::from_function(tg, sg, mu_ref);
  const potentials::LayerEvaluator ev(phi, mu);
  const std::vector<Point2> probes{{0.0, 0.0}, {0.1, 0.05}, {2.0, 0.3}, {0.0, 2.2}, {-1.9, -1.4}};
  auto u = [&](double t, double x, double y) { return potentials::single_layer_eval(ev, t, {x, y}).value; };
  const double h = 1e-3, k = 1e-3, t = 0.6;
  double worst = 0.0, umax = 0.0, dmin = std::numeric_limits<double>::infinity();
  for (const auto& p : probes) {
    dmin = std::min(dmin, geometry::nearest_point(phi, p).distance);
    const double c = u(t, p[0], p[1]);
    const double ut = (u(t + k, p[0], p[1]) - u(t - k, p[0], p[1])) / (2 * k);
    const double lap = (u(t, p[0] + h, p[1]) + u(t, p[0] - h, p[1]) + u(t, p[0], p[1] + h) + u(t, p[0], p[1] - h) -
                        4 * c) / (h * h);
    worst = std::max(worst, std::abs(ut - lap));
    umax = std::max(umax, std::abs(c));
  }
  const bool ok = dmin >= 0.5 && worst <= 1e-3 * umax;
  return {ok, "max |u_t - lap u| / max|u| = " + num(worst / umax) + " (tol 1e-3), probe distance >= " + num(dmin)};
}

Outcome ac5() {
  const TimeGrid tg(1.0, 32);
  const double delta = 0.2;
  double worst_cal = 0.0, worst_sep = std::numeric_limits<double>::infinity();
  for (const auto& phi : {BoundaryMap::identity(), BoundaryMap::dilation(1.5), BoundaryMap::star(0.3, 3)}) {
    const auto ext = geometry::extend(phi, delta, ExtensionKind::automatic);
    double reach = 0.0;
    for (int j = 0; j < 256; ++j) {
      const auto y = ext.map(2 * oracle::pi * j / 256, delta);
      reach = std::max(reach, std::hypot(y[0], y[1]));
    }
    const Point2 x0{(reach + 1) * std::cos(0.4), (reach + 1) * std::sin(0.4)};
    for (Side side : {Side::plus, Side::minus}) {
      const auto g = pullback::ChartGrid::of(ext, 64, 33, side);
      const auto cal = pullback::AnnulusField::from_function(ext, tg, g, [&](double t, const Point2& y) {
        return oracle::heat2(t + 0.1, y[0] - x0[0], y[1] - x0[1]);
      });
      const auto non = pullback::AnnulusField::from_function(ext, tg, g, [](double, const Point2& y) { return y[0] * y[0]; });
      const auto zero = pullback::WeakPair::zero(tg, g);
      const double rc = pullback::weak_heat_residual(pullback::b_omega(ext, cal), zero);
      const double rn = pullback::weak_heat_residual(pullback::b_omega(ext, non), zero);
      worst_cal = std::max(worst_cal, rc);
      worst_sep = std::min(worst_sep, rn / rc);
    }
  }
  return {worst_cal <= 1e-3 && worst_sep >= 10.0,
          "max caloric residual = " + num(worst_cal) + " (tol 1e-3), min separation = " + num(worst_sep) + " (>= 10)"};
}

Outcome ac6() {
  const TimeGrid tg(1.0, 64);
  const SpaceGrid sg(128);
  const auto ext = geometry::extend(BoundaryMap::star(0.3, 3), 0.3, ExtensionKind::automatic);
  const auto mu = SpaceTimeDensity::from_function(tg, sg, mu_ref);
  const auto s = pullback::transmission_verify(ext, mu, LayerKind::single);
  const auto d = pullback::transmission_verify(ext, mu, LayerKind::double_layer);
  const double worst = std::max(s.max(), d.max());
  return {worst <= 1e-2, "max residual single = " + num(s.max()) + ", double = " + num(d.max()) + " (tol 1e-2)"};
}

Outcome ac7() {
  const TimeGrid tg(1.0, 64);
  const SpaceGrid sg(128);
  const auto phi = BoundaryMap::identity();
  const auto ext = geometry::extend(phi, 0.3, ExtensionKind::automatic);
  const auto mu = SpaceTimeDensity::from_function(tg, sg, mu_ref);
  const potentials::LayerEvaluator ev(phi, mu);
  const auto F = pullback::layer_fields(ext, ev, LayerKind::single, 32);
  const double rel = pullback::energy_monitor(ext, F.plus, F.minus).max_relative(0.1);

  auto r2 = [](double, const Point2& y) { return y[0] * y[0] + y[1] * y[1]; };
  const auto gp = pullback::ChartGrid::of(ext, 128, 32, Side::plus), gm = pullback::ChartGrid::of(ext, 128, 32, Side::minus);
  const auto ctl = pullback::energy_monitor(ext, pullback::AnnulusField::from_function(ext, tg, gp, r2),
                                            pullback::AnnulusField::from_function(ext, tg, gm, r2));
  double ctl_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ctl.t.size(); ++i)
    if (ctl.t[i] >= 0.1 - 1e-12) ctl_min = std::min(ctl_min, ctl.relative[i]);
  return {rel <= 0.05 && ctl_min > 0.5,
          "max relative residual = " + num(rel) + " (tol 0.05), negative control min = " + num(ctl_min) + " (> 0.5)"};
}

Outcome ac8() {
  const TimeGrid tg(1.0, 32);
  const SpaceGrid sg(64);
  const double h = 1e-2;
  const auto circle = BoundaryMap::identity();
  auto radial = analysis::radial_path(circle, 0.3, 3);
  auto shift = analysis::translation_path(circle, {1.0, 0.5});
  radial.certify(4 * h);
  analysis::PathAssembly pr(radial, tg, sg), pt(shift, tg, sg);
  const std::vector<analysis::KindSpec> kinds{{OperatorKind::V, 0},
                                              {OperatorKind::V_l, 1},
                                              {OperatorKind::V_l, 2},
                                              {OperatorKind::W_star, 0},
                                              {OperatorKind::W, 0}};
  double min_order = std::numeric_limits<double>::infinity(), worst_factor = 1.0, worst_shift = 0.0;
  for (const auto& k : kinds) {
    min_order = std::min(min_order, analysis::shape_derivative(pr, k.kind, k.component, 1, h).observed_order);
    const double r = analysis::shape_derivative(pr, k.kind, k.component, 4, h).stabilization_ratio;
    worst_factor = std::max(worst_factor, std::max(r, 1.0 / r));
    for (int order = 1; order <= 4; ++order)
      worst_shift = std::max(worst_shift, analysis::shape_derivative(pt, k.kind, k.component, order, h).norm);
  }
  const bool ok = min_order >= 1.9 && worst_factor <= 2.0 && worst_shift <= 1e-12;
  return {ok, "min observed order = " + num(min_order) + " (>= 1.9), worst order-4 factor = " + num(worst_factor) +
                  " (<= 2), translation norm = " + num(worst_shift) + " (<= 1e-12)"};
}

// S_2 moments between boundary nodes; the diagonal uses the distance of half a
// node spacing so every block stays finite
class NodeHeatKernel : public quadrature::SlabKernel {
 public:
  explicit NodeHeatKernel(const BoundaryMap& phi, int N) {
    for (int j = 0; j < N; ++j) pts_.push_back(phi.position(2 * oracle::pi * j / N));
    self_r2_ = std::pow(oracle::pi / N, 2);
  }
  std::array<double, 2> moments(double a, double b, int i, int j) const override {
    const double dx = pts_[i][0] - pts_[j][0], dy = pts_[i][1] - pts_[j][1];
    const double r2 = i == j ? self_r2_ : dx * dx + dy * dy;
    const auto m = kernels::heat_moments_2d(r2, a, b);
    return {m.m0, m.m1};
  }

 private:
  std::vector<Point2> pts_;
  double self_r2_ = 0.0;
};

Outcome ac9() {
  const TimeGrid tg(1.0, 32);
  const NodeHeatKernel K(BoundaryMap::star(0.3, 3), 64);
  const auto r = quadrature::toeplitz_check(tg.nodes(), K, 64, 64, 1e-14);
  return {r.applicable && r.toeplitz, "max entry deviation = " + num(r.max_deviation) + " (tol 1e-14)"};
}

Outcome ac10() {
  const analysis::PairSampling sp{4096, 1};
  double s_lo = 2.0, s_hi = 0.0;
  for (int M : {32, 64}) {
    analysis::SampledField f;
    for (int i = 0; i <= M; ++i) f.t.push_back(double(i) / M);
    f.x = {{0.0, 0.0}};
    f.values = quadrature::GridSamples(M + 1, 1);
    for (int i = 0; i <= M; ++i) f.values(i, 0) = std::sqrt(f.t[i]);
    const double s = analysis::parabolic_norm(f, 1.0, 0, sp).time_seminorm;
    s_lo = std::min(s_lo, s);
    s_hi = std::max(s_hi, s);
  }
  const auto phi = BoundaryMap::identity();
  const TimeGrid tc(1.0, 32), tf(1.0, 64);
  const SpaceGrid sc(64), sf(128);
  const auto Vc = potentials::assemble(OperatorKind::V, phi, tc, sc);
  const auto Vf = potentials::assemble(OperatorKind::V, phi, tf, sf);
  double worst = 1.0;
  for (int k = 0; k < 20; ++k) {
    const auto fn = analysis::random_density(1, k);
    const double a = analysis::operator_norm_ratio(Vc, SpaceTimeDensity::from_function(tc, sc, fn), 0.5, sp);
    const double b = analysis::operator_norm_ratio(Vf, SpaceTimeDensity::from_function(tf, sf, fn), 0.5, sp);
    worst = std::max(worst, std::max(b / a, a / b));
  }
  const bool ok = s_lo >= 0.99 && s_hi <= 1.0 && worst <= 2.0;
  return {ok, "sqrt(t) seminorm in [" + num(s_lo) + ", " + num(s_hi) + "] (within [0.99, 1]), worst ratio change = " +
                  num(worst) + " (<= 2)"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome ac11(const std::string& cli, const fs::path& work) {
  if (cli.empty()) return {false, "no CLI path given"};
  std::string detail;
  bool ok = true;
  for (const std::string exp : {"norms", "jump-test"}) {
    std::vector<std::string> csv;
    for (const char* run : {"a", "b"}) {
      const auto dir = work / "ac11" / run;
      fs::remove_all(dir);
      const std::string cmd = "\"" + cli + "\" " + exp + " --seed 7 --n 32 --m 16 --out \"" + dir.string() +
                              "\" > \"" + (work / "ac11.log").string() + "\" 2>&1";
      if (std::system(cmd.c_str()) != 0) {
        ok = false;
        detail += exp + " exited nonzero; ";
      }
      csv.push_back(slurp(dir / (exp + ".csv")));
    }
    const bool same = !csv[0].empty() && csv[0] == csv[1];
    ok = ok && same;
    detail += exp + ".csv " + (same ? "identical" : "differs") + " (" + std::to_string(csv[0].size()) + " bytes); ";
  }
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::string cli;
  std::string work = (fs::temp_directory_path() / "layerheat_acceptance").string();
  int only = 0;
  app.add_option("--cli", cli, "layerheat executable");
  app.add_option("--work", work, "scratch directory");
  app.add_option("--only", only, "run a single criterion");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(work);

  const std::vector<Criterion> all{
      {1, 5, ac1},      {2, 60, ac2},   {3, 120, ac3}, {4, 10, ac4}, {5, 60, ac5},
      {6, 300, ac6},    {7, 180, ac7},  {8, 600, ac8}, {9, 30, ac9}, {10, 120, ac10},
      {11, 600, [&] { return ac11(cli, work); }},
  };
  int failed = 0;
  for (const auto& c : all) {
    if (only && c.id != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.time_limit;
    const bool pass = o.ok && in_time;
    failed += !pass;
    char t[64];
    std::snprintf(t, sizeof t, "%.1f s (limit %.0f s)", secs, c.time_limit);
    std::cout << (pass ? "PASS" : "FAIL") << " AC" << c.id << ": " << o.detail << "; " << t << std::endl;
  }
  return failed ? 1 : 0;
}
