#ifndef POLYGROUPOID_H
#define POLYGROUPOID_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum PgxStatus {
  PGX_STATUS_OK = 0,
  /**
   * Malformed input data.
   */
  PGX_STATUS_STRUCTURAL = 1,
  /**
   * A configured bound was exceeded.
   */
  PGX_STATUS_CAPACITY = 2,
  /**
   * A horn had no filler.
   */
  PGX_STATUS_UNFILLABLE = 3,
  /**
   * An operation precondition does not hold.
   */
  PGX_STATUS_PRECONDITION = 4,
  /**
   * Text input could not be parsed.
   */
  PGX_STATUS_PARSE = 5,
  /**
   * A required pointer argument was null.
   */
  PGX_STATUS_NULL_ARGUMENT = 6,
  /**
   * A string argument was not valid UTF-8.
   */
  PGX_STATUS_INVALID_UTF8 = 7,
} PgxStatus;

/**
 * Opaque structure handle.
 */
typedef struct PgxStructure PgxStructure;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The message of the most recent error on this thread, as a new string the
 * caller must release with `pgx_string_free`. Returns null if none.
 */
char *pgx_last_error_message(void);

/**
 * Release a string returned by this library.
 *
 * # Safety
 * `s` must be a pointer previously returned by this library and not yet
 * freed, or null.
 */
void pgx_string_free(char *s);

/**
 * Release a structure handle.
 *
 * # Safety
 * `h` must be a handle previously returned by this library and not yet
 * freed, or null.
 */
void pgx_structure_free(struct PgxStructure *h);

/**
 * Build the standard model `H_{G,n}` with `vertices` vertices.
 *
 * # Safety
 * `group_spec` must be a valid NUL-terminated string (e.g. "2x2") and
 * `out` a valid pointer.
 */
enum PgxStatus pgx_build_standard(uintptr_t n,
                                  const char *group_spec,
                                  uintptr_t vertices,
                                  struct PgxStructure **out);

/**
 * Parse a pgx document.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum PgxStatus pgx_parse(const char *text, struct PgxStructure **out);

/**
 * Serialize a structure into the pgx text form; the caller frees the
 * string with `pgx_string_free`.
 *
 * # Safety
 * `h` must be a live handle and `out` a valid pointer.
 */
enum PgxStatus pgx_serialize(const struct PgxStructure *h, char **out);

/**
 * Arity of the structure.
 *
 * # Safety
 * `h` must be a live handle.
 */
uintptr_t pgx_arity(const struct PgxStructure *h);

/**
 * Vertex count.
 *
 * # Safety
 * `h` must be a live handle.
 */
uintptr_t pgx_vertex_count(const struct PgxStructure *h);

/**
 * Order of the declared acting group.
 *
 * # Safety
 * `h` must be a live handle.
 */
uint64_t pgx_group_order(const struct PgxStructure *h);

/**
 * Run every applicable axiom family exhaustively; `out_all_pass` receives
 * the verdict and `out_report` a human-readable summary (caller-freed).
 *
 * # Safety
 * `h` must be a live handle; `out_all_pass` and `out_report` valid
 * pointers.
 */
enum PgxStatus pgx_check_axioms(const struct PgxStructure *h,
                                bool *out_all_pass,
                                char **out_report);

/**
 * The structure defect (certifying constancy); the element is written as a
 * comma-joined residue string the caller frees.
 *
 * # Safety
 * `h` must be a live handle and `out_defect` a valid pointer.
 */
enum PgxStatus pgx_structure_defect(const struct PgxStructure *h, char **out_defect);

/**
 * Twist `Q` by the group element written as comma-joined residues.
 *
 * # Safety
 * `h` must be a live handle, `g` a valid string, `out` a valid pointer.
 */
enum PgxStatus pgx_twist(const struct PgxStructure *h, const char *g, struct PgxStructure **out);

/**
 * Star-based isomorphism test.
 *
 * # Safety
 * `a` and `b` must be live handles and `out_isomorphic` a valid pointer.
 */
enum PgxStatus pgx_is_isomorphic(const struct PgxStructure *a,
                                 const struct PgxStructure *b,
                                 bool *out_isomorphic);

/**
 * Automorphism census: the group order and whether generation verified it.
 *
 * # Safety
 * `h` must be a live handle; output pointers must be valid.
 */
enum PgxStatus pgx_automorphism_order(const struct PgxStructure *h,
                                      uint64_t bound,
                                      uint64_t *out_order,
                                      bool *out_verified);

/**
 * Order of the group recovered from Q alone at the canonical fiber.
 *
 * # Safety
 * `h` must be a live handle and `out_order` a valid pointer.
 */
enum PgxStatus pgx_recovered_group_order(const struct PgxStructure *h, uint64_t *out_order);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* POLYGROUPOID_H */
