#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "layerheat/analysis.hpp"
#include "layerheat/error.hpp"
#include "layerheat/kernels.hpp"
#include "oracle.hpp"

using namespace layerheat;
using namespace layerheat::analysis;

namespace {

SampledField square_field(const std::function<double(double, const Point2&)>& f, int nt, int nx) {
  SampledField s;
  for (int i = 0; i <= nt; ++i) s.t.push_back(double(i) / nt);
  for (int a = 0; a < nx; ++a)
    for (int b = 0; b < nx; ++b) s.x.push_back({double(a) / (nx - 1), double(b) / (nx - 1)});
  s.values = GridSamples(nt + 1, static_cast<int>(s.x.size()));
  for (int i = 0; i <= nt; ++i)
    for (std::size_t j = 0; j < s.x.size(); ++j) s.values(i, static_cast<int>(j)) = f(s.t[i], s.x[j]);
  return s;
}

BoundaryMap zero_map() { return BoundaryMap(1.0, {0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}); }

}  // namespace

TEST_CASE("parabolic_norm: constants and the square root") {
  const auto c = square_field([](double, const Point2&) { return -2.5; }, 4, 4);
  const auto h = parabolic_norm(c, 0.5, 0);
  CHECK(h.sup_part == 2.5);
  CHECK(h.time_seminorm == 0.0);
  CHECK(h.space_seminorm == 0.0);
  CHECK(h.total() == 2.5);

  for (int M : {32, 64, 256}) {
    SampledField s;
    for (int i = 0; i <= M; ++i) s.t.push_back(double(i) / M);
    s.x = {{0.0, 0.0}};
    s.values = GridSamples(M + 1, 1);
    for (int i = 0; i <= M; ++i) s.values(i, 0) = std::sqrt(s.t[i]);
    const double est = parabolic_norm(s, 1.0, 0).time_seminorm;
    CHECK(est >= 0.99);
    CHECK(est <= 1.0 + 1e-15);
  }
}

TEST_CASE("parabolic_norm: space seminorm of x1 by brute force") {
  const double beta = 0.5;
  const auto f = square_field([](double, const Point2& x) { return x[0]; }, 2, 6);
  const auto h = parabolic_norm(f, beta, 0);
  double brute = 0.0;
  for (std::size_t a = 0; a < f.x.size(); ++a)
    for (std::size_t b = a + 1; b < f.x.size(); ++b) {
      const double d = std::hypot(f.x[a][0] - f.x[b][0], f.x[a][1] - f.x[b][1]);
      brute = std::max(brute, std::abs(f.x[a][0] - f.x[b][0]) / std::pow(d, beta));
    }
  CHECK(h.space_seminorm == doctest::Approx(brute).epsilon(1e-14));
  // the aligned pair across the square
  CHECK(h.space_seminorm >= 1.0 - 1e-15);
  CHECK(h.time_seminorm == 0.0);
}

TEST_CASE("parabolic_norm is a norm on the sample lattice") {
  const TimeGrid tg(1.0, 40);
  const SpaceGrid sg(64);
  const PairSampling sp{512, 3};
  auto field = [&](auto fn) {
    GridSamples g(41, 64);
    for (int i = 0; i <= 40; ++i)
      for (int j = 0; j < 64; ++j) g(i, j) = fn(tg.node(i), sg.theta(j));
    return SampledField::on_grid(tg, sg, g);
  };
  const auto f = field([](double t, double th) { return std::sqrt(t) * std::cos(3 * th); });
  const auto g = field([](double t, double th) { return t * t - std::sin(th + t); });
  auto sum = f;
  auto twice = f;
  for (std::size_t k = 0; k < sum.values.values.size(); ++k) {
    sum.values.values[k] += g.values.values[k];
    twice.values.values[k] *= -2.0;
  }
  for (int order : {0, 1}) {
    const double nf = parabolic_norm(f, 0.5, order, sp).total(), ng = parabolic_norm(g, 0.5, order, sp).total();
    CHECK(parabolic_norm(twice, 0.5, order, sp).total() == doctest::Approx(2 * nf).epsilon(1e-14));
    CHECK(parabolic_norm(sum, 0.5, order, sp).total() <= nf + ng + 1e-12);
  }
  // the order-1 norm sees the tangential derivative 3 sqrt(t) sin
  CHECK(parabolic_norm(f, 0.5, 1, sp).gradient_sup == doctest::Approx(3.0).epsilon(1e-10));
  CHECK_THROWS_AS(parabolic_norm(f, 0.0, 0), Error);
  CHECK_THROWS_AS(parabolic_norm(f, 0.5, 2), Error);
}

TEST_CASE("superpose") {
  const TimeGrid tg(1.0, 8);
  const SpaceGrid sg(16);
  const auto z = superpose([](double, const Point2&) { return 0.0; }, BoundaryMap::star(0.2, 3), tg, sg);
  for (double v : z.values) CHECK(v == 0.0);

  const auto d = superpose([](double t, const Point2& x) { return t * x[0]; }, BoundaryMap::dilation(2.0), tg, sg);
  for (int i = 0; i <= 8; ++i)
    for (int j = 0; j < 16; ++j) CHECK(d(i, j) == doctest::Approx(tg.node(i) * 2 * std::cos(sg.theta(j))).epsilon(1e-14));

  const auto p = superpose_pair([](double t, const Point2& x) { return kernels::eval_s2(t, x); },
                                BoundaryMap::identity(), tg, sg);
  REQUIRE(p.size() == 9u * 16 * 16);
  for (int i = 1; i <= 8; ++i)
    for (int j : {0, 5})
      for (int k : {3, 9}) {
        const double dx = std::cos(sg.theta(j)) - std::cos(sg.theta(k));
        const double dy = std::sin(sg.theta(j)) - std::sin(sg.theta(k));
        CHECK(p[(static_cast<std::size_t>(i) * 16 + j) * 16 + k] ==
              doctest::Approx(oracle::heat2(tg.node(i), dx, dy)).epsilon(1e-13));
      }
  for (int j = 0; j < 16; ++j) CHECK(p[j] == 0.0);

  CHECK_THROWS_AS(superpose([](double, const Point2&) { return 1.0; }, BoundaryMap::dilation(2.0), tg, sg,
                            [](const Point2& x) { return std::hypot(x[0], x[1]) < 1.5; }),
                  Error);
}

TEST_CASE("shape derivatives") {
  const TimeGrid tg(1.0, 32);
  const SpaceGrid sg(64);
  const auto circle = BoundaryMap::identity();

  PathAssembly still(ShapePath{circle, zero_map(), "constant"}, tg, sg);
  for (int k = 1; k <= 4; ++k) CHECK(shape_derivative(still, OperatorKind::V, 0, k, 1e-2).norm == 0.0);

  const auto radial = radial_path(circle, 0.3, 3);
  radial.certify(2e-2);
  const auto p = radial.at(1.0);
  for (double th : {0.2, 1.7}) {
    const auto y = p.position(th);
    CHECK(std::hypot(y[0], y[1]) == doctest::Approx(1 + 0.3 * std::cos(3 * th)).epsilon(1e-14));
  }
  PathAssembly pr(radial, tg, sg);
  const auto d1 = shape_derivative(pr, OperatorKind::V, 0, 1, 1e-2);
  CHECK(d1.observed_order >= 1.9);
  CHECK(d1.norm > 0.0);
  const auto d4 = shape_derivative(pr, OperatorKind::V, 0, 4, 1e-2);
  CHECK(d4.stabilization_ratio >= 0.5);
  CHECK(d4.stabilization_ratio <= 2.0);

  PathAssembly pt(translation_path(circle, {1.0, -0.5}), tg, sg);
  for (int k = 1; k <= 4; ++k) CHECK(shape_derivative(pt, OperatorKind::W, 0, k, 1e-2).norm <= 1e-12);
}

TEST_CASE("smoothness report") {
  const auto empty = smoothness_report({}, {}, 4, 1e-2);
  CHECK(empty.rows.empty());
  CHECK(empty.header.size() == 8);

  const TimeGrid tg(1.0, 8);
  const SpaceGrid sg(16);
  PathAssembly a(ShapePath{BoundaryMap::identity(), zero_map(), "identity"}, tg, sg);
  PathAssembly b(radial_path(BoundaryMap::identity(), 0.3, 3), tg, sg);
  const std::vector<KindSpec> kinds{
      {OperatorKind::V, 0}, {OperatorKind::V_l, 1}, {OperatorKind::W_star, 0}, {OperatorKind::W, 0}};
  const auto t = smoothness_report({&a, &b}, kinds, 4, 1e-2);
  CHECK(t.rows.size() == 32);
  for (const auto& row : t.rows)
    if (row[0] == "identity") CHECK(std::stod(row[4]) == 0.0);
}

TEST_CASE("random densities and the operator-norm ratio") {
  const auto f = random_density(4, 2), g = random_density(4, 2), h = random_density(4, 3);
  CHECK(f(0.0, 1.0) == 0.0);
  CHECK(f(0.6, 1.0) == g(0.6, 1.0));
  CHECK(f(0.6, 1.0) != h(0.6, 1.0));

  const TimeGrid tg(1.0, 16);
  const SpaceGrid sg(32);
  const auto V = potentials::assemble(OperatorKind::V, BoundaryMap::identity(), tg, sg);
  const auto mu = potentials::SpaceTimeDensity::from_function(tg, sg, f);
  const double r = operator_norm_ratio(V, mu, 0.5, {});
  CHECK(std::isfinite(r));
  CHECK(r > 0.0);
}
