#ifndef DDC_DDC_H
#define DDC_DDC_H

/*
 * C API of the doubly degenerate chemotaxis-consumption simulator.
 *
 * The high-level entry points mirror the CLI subcommands and return statuses
 * aligned with the CLI exit codes. The opaque simulation handle exposes
 * stepping and state queries for embedding. All functions are
 * exception-safe; on failure, ddc_last_error() returns a thread-local
 * message describing the most recent error.
 */

#include <stddef.h>

#if defined(_WIN32)
#define DDC_API __declspec(dllexport)
#else
#define DDC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ddc_status {
    DDC_OK = 0,
    DDC_ERR_CONFIG = 1,    /* config parse, precondition or usage error */
    DDC_ERR_VIOLATION = 2, /* bound violations or thresholds unmet */
    DDC_ERR_ABORTED = 3,   /* run stopped before t_end */
    DDC_ERR_INTERNAL = 4
} ddc_status;

typedef enum ddc_stop_cause {
    DDC_STOP_REACHED_T_END = 0,
    DDC_STOP_BLOWUP_SUSPECT_SUP_U = 1,
    DDC_STOP_DT_UNDERFLOW = 2,
    DDC_STOP_LINEAR_SOLVE_FAILURE = 3,
    DDC_STOP_RUNNING = 4
} ddc_stop_cause;

DDC_API const char* ddc_version(void);

/* thread-local message for the most recent failure in this thread */
DDC_API const char* ddc_last_error(void);

/* generated configuration key reference (markdown, static storage) */
DDC_API const char* ddc_config_reference(void);

/*
 * Whole-command drivers. out_dir == NULL keeps the config value; seed < 0
 * keeps the config seed; workers <= 0 keeps the config worker count.
 */
DDC_API ddc_status ddc_run(const char* config_path, const char* out_dir, long long seed, int workers);
DDC_API ddc_status ddc_sweep(const char* config_path, const char* out_dir, long long seed, int workers);
DDC_API ddc_status ddc_converge(const char* config_path, const char* out_dir, long long seed, int workers);
DDC_API ddc_status ddc_ineq(const char* config_path, const char* out_dir, long long seed, int workers);

/* opaque simulation handle */
typedef struct ddc_sim ddc_sim;

DDC_API ddc_status ddc_sim_create(const char* config_path, ddc_sim** out_sim);
DDC_API ddc_status ddc_sim_create_from_string(const char* config_text, ddc_sim** out_sim);
DDC_API void ddc_sim_destroy(ddc_sim* sim);

/* one accepted step; *out_stopped becomes nonzero once the run ended */
DDC_API ddc_status ddc_sim_step(ddc_sim* sim, int* out_stopped);
DDC_API ddc_status ddc_sim_run_to_end(ddc_sim* sim);

DDC_API double ddc_sim_time(const ddc_sim* sim);
DDC_API long long ddc_sim_step_index(const ddc_sim* sim);
DDC_API int ddc_sim_cells_x(const ddc_sim* sim);
DDC_API int ddc_sim_cells_y(const ddc_sim* sim);
DDC_API ddc_stop_cause ddc_sim_stop_cause(const ddc_sim* sim);

DDC_API double ddc_sim_mass_u(const ddc_sim* sim);
DDC_API double ddc_sim_sup_u(const ddc_sim* sim);
DDC_API double ddc_sim_sup_v(const ddc_sim* sim);
DDC_API double ddc_sim_consumption_budget(const ddc_sim* sim);

/* copies the cell values row-major (y slow); buf_len must be >= cells_x*cells_y */
DDC_API ddc_status ddc_sim_copy_u(const ddc_sim* sim, double* buf, size_t buf_len);
DDC_API ddc_status ddc_sim_copy_v(const ddc_sim* sim, double* buf, size_t buf_len);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* DDC_DDC_H */
