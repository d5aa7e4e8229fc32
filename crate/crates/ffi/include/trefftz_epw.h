#ifndef TREFFTZ_EPW_H
#define TREFFTZ_EPW_H

#include <stddef.h>
#include <stdint.h>

// Result codes.
typedef enum TeStatus {
  TE_STATUS_OK = 0,
  TE_STATUS_NULL_POINTER = 1,
  TE_STATUS_INVALID_ARGUMENT = 2,
  TE_STATUS_MESH = 3,
  TE_STATUS_SOLVE = 4,
  TE_STATUS_IO = 5,
  TE_STATUS_OUTSIDE_DOMAIN = 6,
  TE_STATUS_INTERNAL = 7,
} TeStatus;

// Wave family of a basis.
typedef enum TeBasisMode {
  // Propagative plane waves.
  TE_BASIS_MODE_PPW = 0,
  // Evanescent plane waves.
  TE_BASIS_MODE_EPW = 1,
} TeBasisMode;

// A triangulation.
typedef struct TeMesh TeMesh;

// A solved point-source problem: bases, coefficients and error report.
typedef struct TeSolution TeSolution;

// Parameters of a point-source solve.
typedef struct TeSolveParams {
  double kappa;
  // Trial waves per element.
  size_t p;
  enum TeBasisMode mode;
  // Relative singular-value cutoff, e.g. `1e-14`.
  double epsilon;
  // Test-to-trial ratio, at least 1.
  double oversampling;
  double source_x;
  double source_y;
} TeSolveParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer is
// valid until the next call into the library from the same thread.
const char *te_last_error(void);

// Library version as a static NUL-terminated string.
const char *te_version(void);

// Structured triangulation of a rectangle with seeded interior jitter.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum TeStatus te_mesh_create_rectangle(double lower_x,
                                       double lower_y,
                                       double upper_x,
                                       double upper_y,
                                       size_t nx,
                                       size_t ny,
                                       double jitter,
                                       uint64_t seed,
                                       struct TeMesh **out);

// Reads a mesh in the ASCII `ntv` format.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid handle slot.
enum TeStatus te_mesh_load(const char *path, struct TeMesh **out);

// # Safety
// `mesh` must be null or a handle from this library not yet freed.
void te_mesh_free(struct TeMesh *mesh);

// Number of triangles, or 0 for a null handle.
//
// # Safety
// `mesh` must be null or a live handle.
size_t te_mesh_num_elements(const struct TeMesh *mesh);

// # Safety
// `mesh` must be null or a live handle.
size_t te_mesh_num_vertices(const struct TeMesh *mesh);

// # Safety
// `mesh` must be null or a live handle.
size_t te_mesh_num_edges(const struct TeMesh *mesh);

// Solves the impedance problem whose exact solution is the outgoing point
// source at `(source_x, source_y)` and measures the relative `H^1` error.
// The solution keeps its own copy of the mesh.
//
// # Safety
// `mesh` and `params` must be live, `out` a valid handle slot.
enum TeStatus te_solve_point_source(const struct TeMesh *mesh,
                                    const struct TeSolveParams *params,
                                    struct TeSolution **out);

// # Safety
// `sol` must be null or a handle from this library not yet freed.
void te_solution_free(struct TeSolution *sol);

// Kappa-weighted relative `H^1` error, NaN for a null handle.
//
// # Safety
// `sol` must be null or a live handle.
double te_solution_rel_error(const struct TeSolution *sol);

// Euclidean norm of the coefficient vector, NaN for a null handle.
//
// # Safety
// `sol` must be null or a live handle.
double te_solution_coeff_norm(const struct TeSolution *sol);

// Total number of trial degrees of freedom, 0 for a null handle.
//
// # Safety
// `sol` must be null or a live handle.
size_t te_solution_ndof(const struct TeSolution *sol);

// Value of the discrete solution at `(x, y)`.
//
// # Safety
// `sol` must be live; `re` and `im` must be writable.
enum TeStatus te_solution_eval(const struct TeSolution *sol,
                               double x,
                               double y,
                               double *re,
                               double *im);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TREFFTZ_EPW_H */
