#include "layerheat/layerheat.h"

#include <cstring>
#include <functional>
#include <iostream>
#include <new>
#include <string>
#include <vector>

#include "layerheat/error.hpp"
#include "layerheat/experiments.hpp"
#include "layerheat/geometry.hpp"
#include "layerheat/kernels.hpp"
#include "layerheat/potentials.hpp"

struct lh_shape {
  layerheat::geometry::BoundaryMap map;
};

struct lh_operator {
  layerheat::potentials::BoundaryOperatorMatrix matrix;
};

namespace {

using layerheat::Error;
using layerheat::ErrorCode;

thread_local std::string g_error;

template <class F>
lh_status guard(F&& f) {
  try {
    f();
    g_error.clear();
    return LH_OK;
  } catch (const Error& e) {
    g_error = e.what();
    return static_cast<lh_status>(e.code());
  } catch (const std::bad_alloc&) {
    g_error = "out of memory";
    return LH_INTERNAL;
  } catch (const std::exception& e) {
    g_error = e.what();
    return LH_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) layerheat::fail(ErrorCode::invalid_argument, std::string(what) + " must not be NULL");
}

lh_status make_shape(lh_shape** out, const std::function<layerheat::geometry::BoundaryMap()>& make) {
  return guard([&] {
    need(out, "out");
    *out = nullptr;
    auto map = make();
    map.validate();
    *out = new lh_shape{std::move(map)};
  });
}

}  // namespace

extern "C" {

const char* lh_version(void) { return "0.1.0"; }

const char* lh_last_error(void) { return g_error.c_str(); }

lh_status lh_shape_load(const char* path, lh_shape** out) {
  return make_shape(out, [&] {
    need(path, "path");
    return layerheat::geometry::load_shape(path);
  });
}

lh_status lh_shape_parse(const char* text, lh_shape** out) {
  return make_shape(out, [&] {
    need(text, "text");
    return layerheat::geometry::parse_shape(text);
  });
}

lh_status lh_shape_dilation(double lambda, lh_shape** out) {
  return make_shape(out, [&] {
    if (!(lambda > 0.0)) layerheat::fail(ErrorCode::invalid_argument, "dilation factor must be positive");
    return layerheat::geometry::BoundaryMap::dilation(lambda);
  });
}

lh_status lh_shape_star(double eps, int m, lh_shape** out) {
  return make_shape(out, [&] { return layerheat::geometry::BoundaryMap::star(eps, m); });
}

void lh_shape_free(lh_shape* shape) { delete shape; }

lh_status lh_shape_point(const lh_shape* shape, double theta, double xy[2]) {
  return guard([&] {
    need(shape, "shape");
    need(xy, "xy");
    const auto p = shape->map.position(theta);
    xy[0] = p[0];
    xy[1] = p[1];
  });
}

lh_status lh_shape_normal(const lh_shape* shape, double theta, double nu[2]) {
  return guard([&] {
    need(shape, "shape");
    need(nu, "nu");
    const auto n = shape->map.normal(theta);
    nu[0] = n[0];
    nu[1] = n[1];
  });
}

uint64_t lh_shape_hash(const lh_shape* shape) { return shape ? shape->map.hash() : 0; }

lh_status lh_kernel_s2(double t, double x, double y, double* out) {
  return guard([&] {
    need(out, "out");
    *out = layerheat::kernels::eval_s2(t, {x, y});
  });
}

lh_status lh_operator_assemble(const lh_shape* shape, lh_operator_kind kind, int component, double t_final, int m,
                               int n, lh_operator** out) {
  return guard([&] {
    need(shape, "shape");
    need(out, "out");
    *out = nullptr;
    if (kind < LH_OP_V || kind > LH_OP_W) layerheat::fail(ErrorCode::invalid_argument, "unknown operator kind");
    const layerheat::quadrature::TimeGrid tg(t_final, m);
    const layerheat::quadrature::SpaceGrid sg(n);
    auto mat = layerheat::potentials::assemble(static_cast<layerheat::potentials::OperatorKind>(kind), shape->map,
                                               tg, sg, component);
    *out = new lh_operator{std::move(mat)};
  });
}

lh_status lh_operator_dims(const lh_operator* op, int* m, int* n) {
  return guard([&] {
    need(op, "op");
    if (m) *m = op->matrix.time().M;
    if (n) *n = op->matrix.space().N;
  });
}

lh_status lh_operator_apply(const lh_operator* op, const double* mu, size_t mu_len, double* out, size_t out_len) {
  return guard([&] {
    need(op, "op");
    need(mu, "mu");
    need(out, "out");
    const auto& A = op->matrix;
    const std::size_t len = static_cast<std::size_t>(A.time().M + 1) * A.space().N;
    if (mu_len != len || out_len != len)
      layerheat::fail(ErrorCode::invalid_argument, "buffers must hold (M + 1) * N = " + std::to_string(len) + " values");
    layerheat::quadrature::GridSamples g(A.time().M + 1, A.space().N);
    std::memcpy(g.values.data(), mu, len * sizeof(double));
    const layerheat::potentials::SpaceTimeDensity dens(A.time(), A.space(), std::move(g));
    const auto r = A.apply(dens);
    std::memcpy(out, r.values.data(), len * sizeof(double));
  });
}

lh_status lh_operator_write(const lh_operator* op, const char* path) {
  return guard([&] {
    need(op, "op");
    need(path, "path");
    op->matrix.write(path);
  });
}

lh_status lh_operator_read(const char* path, lh_operator** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    *out = new lh_operator{layerheat::potentials::BoundaryOperatorMatrix::read(path)};
  });
}

void lh_operator_free(lh_operator* op) { delete op; }

const char* lh_experiment_name(size_t index) {
  const auto& names = layerheat::experiments::experiment_names();
  return index < names.size() ? names[index].c_str() : nullptr;
}

int lh_experiment_run(const char* name, const char* const* keys, const char* const* values, size_t count,
                      const char* config_path) {
  try {
    if (!name || (count > 0 && (!keys || !values))) {
      g_error = "experiment name and settings must not be NULL";
      std::cout << "error: " << g_error << std::endl;
      return layerheat::experiments::exit_config;
    }
    std::vector<std::pair<std::string, std::string>> settings;
    for (std::size_t i = 0; i < count; ++i) {
      if (!keys[i] || !values[i]) {
        g_error = "setting " + std::to_string(i) + " is NULL";
        std::cout << "error: " << g_error << std::endl;
        return layerheat::experiments::exit_config;
      }
      settings.emplace_back(keys[i], values[i]);
    }
    const int rc = layerheat::experiments::run(name, settings, config_path ? config_path : "", std::cout);
    std::cout.flush();
    return rc;
  } catch (const std::exception& e) {
    g_error = e.what();
    std::cout << "FAIL " << name << ": " << e.what() << std::endl;
    return layerheat::experiments::exit_tolerance;
  }
}

}  // extern "C"
