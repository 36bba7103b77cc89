/* C interface of the fracadapt library. All handles are opaque; every function that can
 * fail returns an fa_status and leaves a message retrievable by fa_last_error(). */
#ifndef FRACADAPT_H
#define FRACADAPT_H

#ifdef __cplusplus
extern "C" {
#endif

#if defined(FRACADAPT_BUILDING)
#define FA_API __attribute__((visibility("default")))
#else
#define FA_API
#endif

typedef enum fa_status {
    FA_OK = 0,
    FA_INVALID_ARGUMENT = 1,
    FA_INPUT_ERROR = 2,
    FA_NUMERICAL_ERROR = 3,
    FA_IO_ERROR = 4,
    FA_INTERNAL_ERROR = 5
} fa_status;

typedef enum fa_domain { FA_DOMAIN_CIRCLE = 0, FA_DOMAIN_LSHAPE = 1 } fa_domain;
typedef enum fa_strategy { FA_ADAPTIVE = 0, FA_UNIFORM = 1 } fa_strategy;
typedef enum fa_rhs_kind { FA_RHS_DISC_EXACT = 0, FA_RHS_CONSTANT = 1 } fa_rhs_kind;

typedef struct fa_config {
    fa_domain domain;
    int circle_segments;
    double s;
    double theta;
    fa_strategy strategy;
    int max_dofs;
    int dof_cap;
    int quad_order;
    double solver_tol;
    fa_rhs_kind rhs_kind;
    double rhs_value;
    int has_reference_energy;
    double reference_energy;
    /* Directory for per-level mesh dumps, or NULL. */
    const char *mesh_dump_dir;
    int verify;
} fa_config;

typedef struct fa_level_record {
    int level;
    int dofs;
    int n_elements;
    double energy_sq;
    int has_estimator;
    double estimator;
    int has_error;
    double error;
    int n_marked;
} fa_level_record;

typedef struct fa_equivalence {
    double r_min;
    double r_max;
    double q_min;
    double q_max;
    int samples_used;
    int samples_skipped;
} fa_equivalence;

typedef struct fa_mesh fa_mesh;
typedef struct fa_run fa_run;

typedef void (*fa_level_callback)(const fa_level_record *record, void *user);

FA_API const char *fa_last_error(void);
FA_API const char *fa_version(void);

FA_API void fa_config_default(fa_config *config);
FA_API fa_status fa_parse_rhs(const char *text, fa_rhs_kind *kind, double *value);

FA_API fa_status fa_run_afem(const fa_config *config, fa_level_callback callback, void *user, fa_run **out);
FA_API int fa_run_levels(const fa_run *run);
FA_API fa_status fa_run_record(const fa_run *run, int index, fa_level_record *out);
FA_API fa_status fa_run_write_csv(const fa_run *run, const char *path);
FA_API fa_status fa_run_fit_rate(const fa_run *run, int window, double *slope);
FA_API fa_status fa_run_extrapolate(const fa_run *run, double *limit, double *uncertainty);
FA_API void fa_run_free(fa_run *run);

FA_API fa_status fa_exact_energy_disc(double s, double *out);

FA_API fa_status fa_mesh_create(fa_domain domain, int circle_segments, fa_mesh **out);
FA_API fa_status fa_mesh_refine_uniform(fa_mesh *mesh);
FA_API fa_status fa_mesh_counts(const fa_mesh *mesh, int *vertices, int *elements, int *dofs);
FA_API fa_status fa_mesh_write(const fa_mesh *mesh, const char *path);
FA_API void fa_mesh_free(fa_mesh *mesh);

FA_API fa_status fa_equivalence_report(const fa_mesh *mesh, double s, int samples, int quad_order,
                                       fa_equivalence *out);

#ifdef __cplusplus
}
#endif

#endif
