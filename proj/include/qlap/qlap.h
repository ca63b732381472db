#ifndef QLAP_H
#define QLAP_H

/* C interface to the quasilinear-operator verification library.  Scenario
 * handles are opaque; every entry point returns a status code and reports
 * details through qlap_last_error().  Strings returned through out-pointers
 * are owned by the handle they came from and stay valid until it is
 * destroyed (qlap_last_error: until the next failing call on the same
 * thread). */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qlap_status {
    QLAP_OK = 0,
    QLAP_ERR_INVALID_ARGUMENT = 1,
    QLAP_ERR_PARSE = 2,
    QLAP_ERR_NUMERIC = 3,
    QLAP_ERR_UNSUPPORTED = 4,
    QLAP_ERR_IO = 5,
    QLAP_ERR_INTERNAL = 6
} qlap_status;

const char* qlap_version(void);

/* Message of the most recent failure on the calling thread ("" if none). */
const char* qlap_last_error(void);

/* ---- Scenario runner ------------------------------------------------- */

typedef struct qlap_scenario qlap_scenario;

/* Parses a JSON scenario configuration.  On success *out owns the handle. */
qlap_status qlap_scenario_create(const char* config_json, qlap_scenario** out);

/* Canonical serialization of the parsed configuration. */
qlap_status qlap_scenario_config_json(qlap_scenario* s, const char** out);

/* Executes the scenario; the report accessors become valid afterwards. */
qlap_status qlap_scenario_run(qlap_scenario* s);

/* Deterministic JSON report (inputs, results, checks, provenance, series). */
qlap_status qlap_scenario_report_json(const qlap_scenario* s, const char** out);

/* 1 when every declared check passed, 0 otherwise. */
qlap_status qlap_scenario_checks_passed(const qlap_scenario* s, int* out);

qlap_status qlap_scenario_series_count(const qlap_scenario* s, size_t* out);
qlap_status qlap_scenario_series_name(const qlap_scenario* s, size_t index, const char** out);
qlap_status qlap_scenario_series_csv(const qlap_scenario* s, size_t index, const char** out);

/* Writes report.json, metadata.json and one CSV per series under out_dir. */
qlap_status qlap_scenario_write(const qlap_scenario* s, const char* out_dir);

void qlap_scenario_destroy(qlap_scenario* s);

/* ---- Direct closed-form values --------------------------------------- */

/* Normalization constant of the radial kernel for the d x d coefficient
 * matrix given in row-major order (NULL means the identity). */
qlap_status qlap_fundamental_constant(double p, int d, const double* matrix_row_major,
                                      double* out);

/* |(p-d)/p|^p */
qlap_status qlap_hardy_constant(double p, int d, double* out);

/* Weighted two-radius capacity; per_unit_sphere nonzero divides out the
 * sphere-area factor. */
qlap_status qlap_weighted_capacity(double p, int d, double beta, double r, double R,
                                   int per_unit_sphere, double* out);

/* Real exponents gamma of the local power solutions for the given coupling;
 * writes at most capacity entries (ascending) and sets *count to the number
 * available.  A double root is repeated. */
qlap_status qlap_indicial_roots(double p, int d, double lambda, double* roots, size_t capacity,
                                size_t* count);

#ifdef __cplusplus
}
#endif

#endif /* QLAP_H */
