#ifndef LINKSELECT_H
#define LINKSELECT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  LS_DIRECTION_LEFT_TO_RIGHT = 0,
  LS_DIRECTION_RIGHT_TO_LEFT = 1,
} LsDirection;

typedef enum {
  LS_STATUS_OK = 0,
  LS_STATUS_USAGE = 1,
  LS_STATUS_PARSE = 2,
  LS_STATUS_SIZE_LIMIT = 3,
  LS_STATUS_INTERNAL = 4,
} LsStatus;

typedef struct LsInstance LsInstance;

typedef struct LsSolution LsSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failing call on this thread, or null. The pointer is
// valid until the next failing call on the same thread.
const char *ls_last_error(void);

// Parses an instance from NUL-terminated text in the `wps v1` format.
//
// # Safety
// `text` must be a valid NUL-terminated string and `out` a valid pointer.
LsStatus ls_instance_parse(const char *text, LsInstance **out);

// Creates an empty instance with rejection cost `f * x + m`.
//
// # Safety
// `out` must be a valid pointer.
LsStatus ls_instance_new(double f, double m, LsInstance **out);

// Appends a packet.
//
// # Safety
// `instance` must be a live handle from this library.
LsStatus ls_instance_push(LsInstance *instance, LsDirection direction, double weight);

// Number of packets; 0 for a null handle.
//
// # Safety
// `instance` must be null or a live handle.
uintptr_t ls_instance_len(const LsInstance *instance);

// # Safety
// `instance` must be null or a live handle; it is invalid afterwards.
void ls_instance_free(LsInstance *instance);

// Approximate solve with capacity search granularity `epsilon`.
//
// # Safety
// `instance` must be a live handle and `out` a valid pointer.
LsStatus ls_solve(const LsInstance *instance, double epsilon, LsSolution **out);

// Exact optimum by enumeration; fails with `SizeLimit` above `limit`
// packets.
//
// # Safety
// `instance` must be a live handle and `out` a valid pointer.
LsStatus ls_exact(const LsInstance *instance, uintptr_t limit, LsSolution **out);

// Fractional lower bound on the rejection cost at `capacity`, including
// packets too heavy to ever fit.
//
// # Safety
// `instance` must be a live handle and `out` a valid pointer.
LsStatus ls_lp_bound(const LsInstance *instance, double capacity, double *out);

// Total cost; NaN for a null handle.
//
// # Safety
// `solution` must be null or a live handle.
double ls_solution_total(const LsSolution *solution);

// # Safety
// `solution` must be null or a live handle.
double ls_solution_capacity_cost(const LsSolution *solution);

// # Safety
// `solution` must be null or a live handle.
double ls_solution_rejection_cost(const LsSolution *solution);

// Capacity placed at the left end before the first packet.
//
// # Safety
// `solution` must be null or a live handle.
double ls_solution_initial_left(const LsSolution *solution);

// # Safety
// `solution` must be null or a live handle.
uintptr_t ls_solution_len(const LsSolution *solution);

// 1 if packet `index` (0-based) is accepted, 0 if rejected, -1 if out of
// range or the handle is null.
//
// # Safety
// `solution` must be null or a live handle.
int32_t ls_solution_decision(const LsSolution *solution, uintptr_t index);

// # Safety
// `solution` must be null or a live handle; it is invalid afterwards.
void ls_solution_free(LsSolution *solution);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LINKSELECT_H */
