#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "layerheat/layerheat.h"

TEST_CASE("shapes through the C interface") {
  lh_shape* s = nullptr;
  REQUIRE(lh_shape_star(0.3, 3, &s) == LH_OK);
  double xy[2], nu[2];
  REQUIRE(lh_shape_point(s, 0.0, xy) == LH_OK);
  CHECK(xy[0] == doctest::Approx(1.3));
  CHECK(std::abs(xy[1]) < 1e-15);
  REQUIRE(lh_shape_normal(s, 0.0, nu) == LH_OK);
  CHECK(nu[0] == doctest::Approx(1.0));
  CHECK(lh_shape_hash(s) != 0u);
  lh_shape_free(s);
  lh_shape_free(nullptr);

  lh_shape* p = nullptr;
  CHECK(lh_shape_parse("radius=1\ncos_x_1=1\nsin_y_1=1\nfoo=2\n", &p) == LH_PARSE);
  CHECK(p == nullptr);
  CHECK(std::string(lh_last_error()).find("foo") != std::string::npos);
  CHECK(lh_shape_parse("radius=1\ncos_x_1=1\nsin_y_1=-1\n", &p) == LH_GEOMETRY);
  CHECK(lh_shape_load("/nonexistent.shape", &p) == LH_IO);
  CHECK(lh_shape_dilation(-1.0, &p) == LH_INVALID_ARGUMENT);
  CHECK(lh_shape_dilation(2.0, nullptr) == LH_INVALID_ARGUMENT);
  REQUIRE(lh_shape_parse("radius=1\ncos_x_1=1\nsin_y_1=1\n", &p) == LH_OK);
  CHECK(std::string(lh_last_error()).empty());
  lh_shape_free(p);
}

TEST_CASE("kernel through the C interface") {
  double v = -1.0;
  REQUIRE(lh_kernel_s2(0.25, 1.0, 0.0, &v) == LH_OK);
  CHECK(v == doctest::Approx(std::exp(-1.0) / M_PI));
  REQUIRE(lh_kernel_s2(-1.0, 1.0, 0.0, &v) == LH_OK);
  CHECK(v == 0.0);
  CHECK(lh_kernel_s2(0.0, 0.0, 0.0, &v) != LH_OK);
}

TEST_CASE("operators through the C interface") {
  lh_shape* s = nullptr;
  REQUIRE(lh_shape_dilation(1.0, &s) == LH_OK);
  lh_operator* op = nullptr;
  REQUIRE(lh_operator_assemble(s, LH_OP_W, 0, 1.0, 8, 32, &op) == LH_OK);
  int m = 0, n = 0;
  REQUIRE(lh_operator_dims(op, &m, &n) == LH_OK);
  CHECK(m == 8);
  CHECK(n == 32);

  // W of one on the unit circle is G - 1/2, so near 0 for small t and negative later
  std::vector<double> mu(9 * 32, 1.0), out(9 * 32);
  REQUIRE(lh_operator_apply(op, mu.data(), mu.size(), out.data(), out.size()) == LH_OK);
  CHECK(out[0] == 0.0);
  CHECK(out[8 * 32] < 0.0);
  CHECK(out[8 * 32] > -0.5);
  CHECK(lh_operator_apply(op, mu.data(), 5, out.data(), out.size()) == LH_INVALID_ARGUMENT);

  const char* path = "capi_roundtrip.bin";
  REQUIRE(lh_operator_write(op, path) == LH_OK);
  lh_operator* back = nullptr;
  REQUIRE(lh_operator_read(path, &back) == LH_OK);
  std::vector<double> out2(out.size());
  REQUIRE(lh_operator_apply(back, mu.data(), mu.size(), out2.data(), out2.size()) == LH_OK);
  CHECK(out == out2);
  std::remove(path);

  CHECK(lh_operator_assemble(s, static_cast<lh_operator_kind>(9), 0, 1.0, 8, 32, &back) == LH_INVALID_ARGUMENT);
  CHECK(lh_operator_assemble(s, LH_OP_V, 0, 1.0, 8, 31, &back) == LH_INVALID_ARGUMENT);
  lh_operator_free(op);
  lh_operator_free(back);
  lh_operator_free(nullptr);
  lh_shape_free(s);
}

TEST_CASE("experiments through the C interface") {
  std::vector<std::string> names;
  for (size_t i = 0; const char* n = lh_experiment_name(i); ++i) names.emplace_back(n);
  CHECK(names.size() == 8);
  const char* keys[] = {"out"};
  const char* vals[] = {"capi_out"};
  CHECK(lh_experiment_run("kernel-check", keys, vals, 1, nullptr) == 0);
  const char* bad_keys[] = {"bogus"};
  CHECK(lh_experiment_run("kernel-check", bad_keys, vals, 1, nullptr) == 2);
  CHECK(lh_experiment_run(nullptr, nullptr, nullptr, 0, nullptr) == 2);
  CHECK(lh_experiment_run("kernel-check", nullptr, nullptr, 0, "/nonexistent.cfg") == 2);
}
