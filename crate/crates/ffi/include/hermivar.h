#ifndef HERMIVAR_H
#define HERMIVAR_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum HvStatus {
  HV_OK = 0,
  HV_NULL_ARGUMENT = 1,
  HV_INVALID_PARAMETER = 2,
  HV_RESOURCE_LIMIT = 3,
  HV_GEOMETRY_MISMATCH = 4,
  HV_INTEGRITY = 5,
  HV_MALFORMED = 6,
  HV_IO = 7,
  HV_OVERFLOW = 8,
  HV_INTERNAL = 9,
} HvStatus;

// Opaque handle: a projective geometry PG(r, p^h).
typedef struct HvGeometry HvGeometry;

// Opaque handle: a set of points in one geometry.
typedef struct HvPointSet HvPointSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copy the most recent error message on this thread into `buf` as a
// NUL-terminated string, truncating to `cap` bytes.  Returns the full
// message length including the terminator; call with a null `buf` to size
// the buffer.  Returns 0 when no error has occurred yet.
//
// # Safety
// `buf` must be null or valid for `cap` writable bytes.
size_t hv_last_error(char *buf, size_t cap);

// Build PG(r, p^h) and hand back an owned handle.
//
// # Safety
// `out` must be valid for one pointer write.  The handle must be released
// with `hv_geometry_free`.
enum HvStatus hv_geometry_build(uint64_t p, uint32_t h, uint32_t r, struct HvGeometry **out);

// Release a geometry handle.  Null is a no-op.
//
// # Safety
// `g` must be null or a handle from `hv_geometry_build` not yet freed.
void hv_geometry_free(struct HvGeometry *g);

// # Safety
// `g` must be a live geometry handle; `out` valid for one write.
enum HvStatus hv_geometry_point_count(const struct HvGeometry *g, uint32_t *out);

// # Safety
// `g` must be a live geometry handle; `out` valid for one write.
enum HvStatus hv_geometry_hyperplane_count(const struct HvGeometry *g, uint32_t *out);

// The nonsingular variety of the identity form.  Requires the field order
// to be a square.
//
// # Safety
// `g` must be a live geometry handle; `out` valid for one pointer write.
// The handle must be released with `hv_point_set_free`.
enum HvStatus hv_hermitian_variety(const struct HvGeometry *g, struct HvPointSet **out);

// Cone with a vertex of dimension `d` over a nonsingular variety in a
// complementary subspace; requires d <= r - 3.
//
// # Safety
// As for `hv_hermitian_variety`.
enum HvStatus hv_cone(const struct HvGeometry *g, uint32_t d, struct HvPointSet **out);

// Build a set from point ids (duplicates collapse).
//
// # Safety
// `g` live; `ids` valid for `len` reads (null only when `len` is 0);
// `out` valid for one pointer write.
enum HvStatus hv_point_set_from_ids(const struct HvGeometry *g,
                                    const uint32_t *ids,
                                    size_t len,
                                    struct HvPointSet **out);

// Release a point-set handle.  Null is a no-op.
//
// # Safety
// `s` must be null or an unfreed point-set handle.
void hv_point_set_free(struct HvPointSet *s);

// # Safety
// `s` live; `out` valid for one write.
enum HvStatus hv_point_set_len(const struct HvPointSet *s, size_t *out);

// Copy the member ids, ascending, into `buf`.  Returns the member count
// through `written`; when `buf` is too small nothing is copied and the
// call reports the needed capacity through `written` with
// `HV_INVALID_PARAMETER`.  A null `buf` with `cap` 0 sizes the set.
//
// # Safety
// `s` live; `buf` valid for `cap` writes or null with `cap` 0; `written`
// valid for one write.
enum HvStatus hv_point_set_members(const struct HvPointSet *s,
                                   uint32_t *buf,
                                   size_t cap,
                                   size_t *written);

// Same size and hyperplane intersection numbers as the nonsingular
// variety of this geometry.
//
// # Safety
// `s` live; `out` valid for one write.
enum HvStatus hv_quasi_hermitian_check(const struct HvPointSet *s, bool *out);

// Same, against the cone with vertex dimension `d`.
//
// # Safety
// `s` live; `out` valid for one write.
enum HvStatus hv_singular_quasi_hermitian_check(const struct HvPointSet *s, uint32_t d, bool *out);

// q^3 + 1 points in a plane, every line meeting in 1 or q + 1 of them.
//
// # Safety
// `s` live; `out` valid for one write.
enum HvStatus hv_unital_check(const struct HvPointSet *s, bool *out);

// True when every line meets the set in 1 mod p points.
//
// # Safety
// `s` live; `out` valid for one write.
enum HvStatus hv_line_residue_check(const struct HvPointSet *s, bool *out);

// Whether the characteristic vector lies in the span of the hyperplane
// vectors over F_p.  Eliminates the incidence matrix on every call.
//
// # Safety
// `s` live; `out` valid for one write.
enum HvStatus hv_code_member(const struct HvPointSet *s, bool *out);

// Whether some nondegenerate conjugate-symmetric form has exactly this
// zero set.
//
// # Safety
// `s` live; `out` valid for one write.
enum HvStatus hv_fits_hermitian_form(const struct HvPointSet *s, bool *out);

// Rank of the point-hyperplane incidence matrix over F_p.
//
// # Safety
// `g` live; `out` valid for one write.
enum HvStatus hv_incidence_rank(const struct HvGeometry *g, uint64_t *out);

// Point count of the nonsingular variety in PG(r, q^2), by closed form.
// Overflow is reported when the exact value exceeds 64 bits.
//
// # Safety
// `out` must be valid for one write.
enum HvStatus hv_hermitian_size(uint32_t r, uint64_t q, uint64_t *out);

// Point count of the cone with vertex dimension `d`, by closed form.
//
// # Safety
// `out` must be valid for one write.
enum HvStatus hv_singular_size(uint32_t r, uint64_t q, uint32_t d, uint64_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HERMIVAR_H */
