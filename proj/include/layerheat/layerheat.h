/* layerheat: heat layer potentials on perturbed planar curves, C interface.
 *
 * All functions returning lh_status leave a message for lh_last_error() on
 * failure (per thread). Handles are opaque; free them with the matching
 * *_free function, which accepts NULL. */
#ifndef LAYERHEAT_LAYERHEAT_H
#define LAYERHEAT_LAYERHEAT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define LH_API __declspec(dllexport)
#else
#define LH_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lh_status {
  LH_OK = 0,
  LH_INVALID_ARGUMENT = 1,
  LH_GEOMETRY = 2,
  LH_PARSE = 3,
  LH_IO = 4,
  LH_CONVERGENCE = 5,
  LH_INTERNAL = 6
} lh_status;

typedef enum lh_operator_kind { LH_OP_V = 0, LH_OP_V_L = 1, LH_OP_W_STAR = 2, LH_OP_W = 3 } lh_operator_kind;

typedef struct lh_shape lh_shape;
typedef struct lh_operator lh_operator;

LH_API const char* lh_version(void);
LH_API const char* lh_last_error(void);

/* shapes: trigonometric embeddings of the unit reference circle */
LH_API lh_status lh_shape_load(const char* path, lh_shape** out);
LH_API lh_status lh_shape_parse(const char* text, lh_shape** out);
LH_API lh_status lh_shape_dilation(double lambda, lh_shape** out);
/* rho(theta) = 1 + eps cos(m theta) */
LH_API lh_status lh_shape_star(double eps, int m, lh_shape** out);
LH_API void lh_shape_free(lh_shape* shape);
LH_API lh_status lh_shape_point(const lh_shape* shape, double theta, double xy[2]);
LH_API lh_status lh_shape_normal(const lh_shape* shape, double theta, double nu[2]);
LH_API uint64_t lh_shape_hash(const lh_shape* shape);

/* S_2(t, (x, y)), zero for t <= 0 */
LH_API lh_status lh_kernel_s2(double t, double x, double y, double* out);

/* Causal Nystrom matrix on T = t_final, M time steps, N nodes. component is 1 or 2
 * for LH_OP_V_L and ignored otherwise. */
LH_API lh_status lh_operator_assemble(const lh_shape* shape, lh_operator_kind kind, int component, double t_final,
                                      int m, int n, lh_operator** out);
LH_API lh_status lh_operator_dims(const lh_operator* op, int* m, int* n);
/* mu and out are (M + 1) x N, row-major in time */
LH_API lh_status lh_operator_apply(const lh_operator* op, const double* mu, size_t mu_len, double* out,
                                   size_t out_len);
LH_API lh_status lh_operator_write(const lh_operator* op, const char* path);
LH_API lh_status lh_operator_read(const char* path, lh_operator** out);
LH_API void lh_operator_free(lh_operator* op);

/* experiments; names indexed from 0, NULL past the end */
LH_API const char* lh_experiment_name(size_t index);
/* keys/values: settings such as "n" = "128"; config_path may be NULL. Prints one
 * summary line per check to stdout and returns the exit status: 0 all tolerances
 * met, 1 a tolerance failed, 2 configuration error. */
LH_API int lh_experiment_run(const char* name, const char* const* keys, const char* const* values, size_t count,
                             const char* config_path);

#ifdef __cplusplus
}
#endif

#endif
