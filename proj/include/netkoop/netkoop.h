#ifndef NETKOOP_NETKOOP_H
#define NETKOOP_NETKOOP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(NETKOOP_BUILDING_LIBRARY)
#define NK_API __declspec(dllexport)
#else
#define NK_API __declspec(dllimport)
#endif
#else
#define NK_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nk_status {
  NK_OK = 0,
  NK_ERR_ARGUMENT = 1,    /* null handle, bad shape or range */
  NK_ERR_VALIDATION = 2,  /* config or file contents rejected */
  NK_ERR_NUMERICAL = 3,   /* SVD, logarithm, divergence */
  NK_PARTIAL = 4,         /* results written, some nodes or runs failed */
  NK_ERR_PARSE = 5,
  NK_ERR_SCORING = 6,
  NK_ERR_IO = 7,
  NK_ERR_INTERNAL = 8
} nk_status;

typedef struct nk_config nk_config;
typedef struct nk_result nk_result;

NK_API const char* nk_version(void);

/* Message of the last failing call on this thread; empty after a success. */
NK_API const char* nk_last_error(void);

NK_API const char* nk_status_name(nk_status s);

/* Worker threads for all parallel stages; n < 1 means 1. */
NK_API void nk_set_threads(int n);
NK_API int nk_get_threads(void);

NK_API nk_status nk_config_load(const char* path, nk_config** out);
NK_API nk_status nk_config_parse(const char* json_text, nk_config** out);
NK_API void nk_config_free(nk_config* cfg);
/* Canonical JSON form; release with nk_free_string. */
NK_API nk_status nk_config_to_json(const nk_config* cfg, char** out);
/* Model seed = seed, data seed = seed + 1. */
NK_API nk_status nk_config_set_seed(nk_config* cfg, uint64_t seed);
/* The config's default output directory (may be empty); release with nk_free_string. */
NK_API nk_status nk_config_out_dir(const nk_config* cfg, char** out);
NK_API void nk_free_string(char* s);

/* Builds the model and dataset and writes them to out_dir. */
NK_API nk_status nk_simulate(const nk_config* cfg, const char* out_dir);

/* Two-step identification of the dataset in dataset_dir. Results are written
   to out_dir unless it is NULL; *out (optional) receives the result handle
   on NK_OK and NK_PARTIAL. Scoring runs when dataset_dir holds model.json. */
NK_API nk_status nk_identify(const nk_config* cfg, const char* dataset_dir, const char* out_dir, nk_result** out);

/* Dual vector field plus one global regression per node component. */
NK_API nk_status nk_baseline_dual(const nk_config* cfg, const char* dataset_dir, const char* out_dir,
                                  nk_result** out);

/* Runs the config's sweep section and writes sweep.csv, summary.csv and
   timing.csv to out_dir. */
NK_API nk_status nk_sweep(const nk_config* cfg, const char* out_dir);

/* Scores an identify or baseline-dual output directory against a model file.
   cfg may be NULL (default metric flags). */
NK_API nk_status nk_score(const char* run_dir, const char* truth_path, const nk_config* cfg, const char* out_dir,
                          nk_result** out);

NK_API void nk_result_free(nk_result* r);
NK_API int nk_result_scored(const nk_result* r);
NK_API int nk_result_partial(const nk_result* r);
NK_API int nk_result_num_nodes(const nk_result* r);
/* rmse, me, min, std, rmse_strict, rmse_extended, tpr, fpr, auroc, gamma;
   NaN when unknown. */
NK_API double nk_result_metric(const nk_result* r, const char* name);
/* Estimated neighbors of node i (ascending); returns the count and copies
   at most cap entries. Returns -1 on a bad index. */
NK_API int nk_result_neighbors(const nk_result* r, int node, int* buf, int cap);
NK_API double nk_result_lambda(const nk_result* r, int i, int k);
NK_API size_t nk_result_warning_count(const nk_result* r);
NK_API const char* nk_result_warning(const nk_result* r, size_t i);
/* Short human-readable summary (score text or the skipped-scoring notice). */
NK_API const char* nk_result_summary(const nk_result* r);

#ifdef __cplusplus
}
#endif

#endif
