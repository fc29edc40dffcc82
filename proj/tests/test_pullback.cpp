#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "layerheat/error.hpp"
#include "layerheat/kernels.hpp"
#include "layerheat/pullback.hpp"
#include "oracle.hpp"

using namespace layerheat;
using namespace layerheat::pullback;
using geometry::BoundaryMap;
using geometry::ExtensionKind;
using potentials::LayerKind;
using quadrature::SpaceGrid;

namespace {

double mu_ref(double t, double th) { return t * (2.0 + std::cos(th)); }

}  // namespace

TEST_CASE("chart grid orientation") {
  const ChartGrid p(16, 5, 0.2, Side::plus), m(16, 5, 0.2, Side::minus);
  CHECK(p.s(0) == doctest::Approx(-0.2));
  CHECK(p.s(p.interface_row()) == 0.0);
  CHECK(m.s(m.interface_row()) == 0.0);
  CHECK(m.s(m.edge_row()) == doctest::Approx(0.2));
  CHECK_THROWS_AS(ChartGrid(7, 5, 0.2, Side::plus), Error);
  CHECK_THROWS_AS(ChartGrid(16, 2, 0.2, Side::plus), Error);
  CHECK_THROWS_AS(ChartGrid(16, 5, 1.2, Side::plus), Error);
}

TEST_CASE("b_omega") {
  const TimeGrid tg(1.0, 4);
  const auto id = geometry::extend(BoundaryMap::identity(), 0.3);
  const auto g = ChartGrid::of(id, 16, 7, Side::plus);

  const auto z = b_omega(id, AnnulusField(tg, g));
  for (double v : z.w0) CHECK(v == 0.0);
  for (const auto& v : z.w1) CHECK((v[0] == 0.0 && v[1] == 0.0));

  const auto u = AnnulusField::from_function(id, tg, g, [](double, const Point2& y) { return y[0]; });
  const auto b = b_omega(id, u);
  for (int i = 0; i <= 4; ++i)
    for (int k = 0; k < 7; ++k)
      for (int j = 0; j < 16; ++j) {
        const std::size_t at = (static_cast<std::size_t>(i) * 7 + k) * 16 + j;
        CHECK(b.w0[at] == doctest::Approx(-u(i, k, j)).epsilon(1e-13));
        CHECK(b.w1[at][0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(b.w1[at][1]) < 1e-12);
      }

  const double lambda = 1.5;
  const auto dil = geometry::extend(BoundaryMap::dilation(lambda), 0.3, ExtensionKind::homothetic);
  const auto gd = ChartGrid::of(dil, 16, 7, Side::minus);
  const auto one = AnnulusField::from_function(dil, tg, gd, [](double, const Point2&) { return 1.0; });
  const auto bd = b_omega(dil, one);
  for (std::size_t at = 0; at < bd.w0.size(); ++at) {
    CHECK(bd.w0[at] == doctest::Approx(-lambda * lambda).epsilon(1e-13));
    CHECK(std::hypot(bd.w1[at][0], bd.w1[at][1]) < 1e-12);
  }
}

TEST_CASE("weak heat residual") {
  const TimeGrid tg(1.0, 32);
  CHECK(default_test_family().size() == 10);
  for (const auto& phi : {BoundaryMap::identity(), BoundaryMap::dilation(1.5), BoundaryMap::star(0.3, 3)}) {
    const auto ext = geometry::extend(phi, 0.2, ExtensionKind::automatic);
    const Point2 x0{4.0 * std::cos(0.4), 4.0 * std::sin(0.4)};
    for (Side side : {Side::plus, Side::minus}) {
      const auto g = ChartGrid::of(ext, 64, 33, side);
      const auto cal = AnnulusField::from_function(ext, tg, g, [&](double t, const Point2& y) {
        return kernels::eval_s2(t + 0.1, {y[0] - x0[0], y[1] - x0[1]});
      });
      const auto non = AnnulusField::from_function(ext, tg, g, [](double, const Point2& y) { return y[0] * y[0]; });
      const auto bc = b_omega(ext, cal), bn = b_omega(ext, non);
      CHECK(weak_heat_residual(bc, bc) == 0.0);
      const auto zero = WeakPair::zero(tg, g);
      const double rc = weak_heat_residual(bc, zero), rn = weak_heat_residual(bn, zero);
      CHECK(rc <= 1e-3);
      CHECK(rn >= 10 * rc);
    }
  }
}

TEST_CASE("shell operators") {
  const TimeGrid tg(1.0, 16);
  const SpaceGrid sg(192);
  const SpaceTimeDensity zero(tg, sg);
  const auto star = BoundaryMap::star(0.3, 3);
  const auto ext = geometry::extend(star, 0.3, ExtensionKind::automatic);
  for (auto kind : {ShellKind::V_shell, ShellKind::W_shell})
    for (double v : shell_operator(kind, ext, zero, Side::plus).values) CHECK(v == 0.0);

  // V_shell and the off-boundary evaluator are two code paths for the same numbers
  const auto mu = SpaceTimeDensity::from_function(tg, sg, mu_ref);
  const potentials::LayerEvaluator ev(star, mu);
  for (Side side : {Side::plus, Side::minus}) {
    const auto V = shell_operator(ShellKind::V_shell, ext, mu, side);
    const double s = side == Side::plus ? -0.3 : 0.3;
    for (int i : {4, 16})
      for (int j : {0, 11, 40}) {
        const auto y = ext.map(sg.theta(j), s);
        CHECK(std::abs(V(i, j) - potentials::single_layer_eval(ev, tg.node(i), y).value) <= 1e-10);
      }
  }

  // W_shell of one on the circle: G - 1 inside, G outside
  const auto id = geometry::extend(BoundaryMap::identity(), 0.3);
  const auto one = SpaceTimeDensity::from_function(tg, sg, [](double, double) { return 1.0; });
  const auto Wp = shell_operator(ShellKind::W_shell, id, one, Side::plus);
  const auto Wm = shell_operator(ShellKind::W_shell, id, one, Side::minus);
  for (int i : {4, 8, 16})
    for (int j : {0, 21}) {
      const double th = sg.theta(j);
      const double Gi = oracle::disk_mass(tg.node(i), {0.7 * std::cos(th), 0.7 * std::sin(th)});
      const double Go = oracle::disk_mass(tg.node(i), {1.3 * std::cos(th), 1.3 * std::sin(th)});
      CHECK(std::abs(Wp(i, j) - (Gi - 1.0)) <= 1e-4);
      CHECK(std::abs(Wm(i, j) - Go) <= 1e-4);
    }
}

TEST_CASE("transmission characterisation on the circle") {
  const TimeGrid tg(1.0, 64);
  const SpaceGrid sg(128);
  const auto ext = geometry::extend(BoundaryMap::identity(), 0.3);

  const auto z = transmission_verify(ext, SpaceTimeDensity(tg, sg), LayerKind::single);
  for (double v : z.as_vector()) CHECK(v == 0.0);

  const auto mu = SpaceTimeDensity::from_function(tg, sg, mu_ref);
  const auto s = transmission_verify(ext, mu, LayerKind::single);
  CHECK(TransmissionResiduals::labels().size() == s.as_vector().size());
  for (double v : s.as_vector()) CHECK(v <= 1e-2);
  const auto d = transmission_verify(ext, mu, LayerKind::double_layer);
  CHECK(d.interface_value_residual <= 0.02);
  const auto dv = d.as_vector();
  for (std::size_t k = 1; k < dv.size(); ++k) CHECK(dv[k] <= 1e-2);
}

TEST_CASE("energy monitor") {
  const TimeGrid tg(1.0, 16);
  const auto ext = geometry::extend(BoundaryMap::identity(), 0.3);
  const auto gp = ChartGrid::of(ext, 32, 33, Side::plus), gm = ChartGrid::of(ext, 32, 33, Side::minus);
  const auto zero = energy_monitor(ext, AnnulusField(tg, gp), AnnulusField(tg, gm));
  for (double v : zero.e) CHECK(v == 0.0);
  for (double v : zero.relative) CHECK(v == 0.0);

  // time-constant field: no change in e but positive dissipation
  auto f = [](double, const Point2& y) { return y[0] * y[0] + y[1] * y[1]; };
  const auto c = energy_monitor(ext, AnnulusField::from_function(ext, tg, gp, f),
                                AnnulusField::from_function(ext, tg, gm, f));
  for (int i = 0; i <= 16; ++i) {
    CHECK(std::abs(c.dedt[i]) < 1e-12);
    CHECK(c.dissipation[i] > 0.0);
  }
  CHECK(c.max_relative(0.1) > 0.5);

  // e of a radial field: integral of v^2 over both shells, by polar quadrature
  auto r2 = [](double, const Point2& y) { return y[0] * y[0] + y[1] * y[1]; };
  const auto q = energy_monitor(ext, AnnulusField::from_function(ext, tg, gp, r2),
                                AnnulusField::from_function(ext, tg, gm, r2));
  const double exact = 2 * oracle::pi * (std::pow(1.3, 6) - std::pow(0.7, 6)) / 6;
  CHECK(q.e[3] == doctest::Approx(exact).epsilon(1e-3));
}
