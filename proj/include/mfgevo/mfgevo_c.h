/* C interface to the mfgevo engine.
 *
 * Every function returns an mfg_status. On failure a message is available
 * from mfg_last_error() until the next call on the same thread. Strings
 * handed out by the library are released with mfg_string_free.
 *
 * Distributions cross the boundary as flat arrays: classes in order, each
 * class a row-major (state x policy) block. */
#ifndef MFGEVO_C_H
#define MFGEVO_C_H

#include <stddef.h>
#include <stdint.h>

#if defined(MFG_BUILDING_LIBRARY)
#define MFG_API __attribute__((visibility("default")))
#else
#define MFG_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mfg_status {
  MFG_OK = 0,
  MFG_ERR_ARGUMENT = 1,    /* null pointer, bad buffer size, unknown key */
  MFG_ERR_PARSE = 2,       /* unreadable or malformed file/config */
  MFG_ERR_VALIDATION = 3,  /* game spec failed validation */
  MFG_ERR_DIMENSION = 4,
  MFG_ERR_ASSUMPTION = 5,  /* recurrent-class or revision-rate assumption violated */
  MFG_ERR_INTEGRATION = 6,
  MFG_ERR_DOMAIN = 7,      /* command ran but reported failure */
  MFG_ERR_INTERNAL = 8
} mfg_status;

typedef struct mfg_game mfg_game;
typedef struct mfg_config mfg_config;

MFG_API const char* mfg_version(void);
MFG_API const char* mfg_last_error(void);
MFG_API const char* mfg_status_name(mfg_status s);
MFG_API void mfg_string_free(char* s);

/* Loading never validates; validation happens on first use or through
 * mfg_game_validate. */
MFG_API mfg_status mfg_game_load_file(const char* path, mfg_game** out);
MFG_API mfg_status mfg_game_load_string(const char* json, mfg_game** out);
/* "example3", "mac" or "congestion-demo". */
MFG_API mfg_status mfg_game_scenario(const char* name, mfg_game** out);
MFG_API void mfg_game_free(mfg_game* game);

/* *ok is 1 when the game is clean; *report lists every issue. */
MFG_API mfg_status mfg_game_validate(mfg_game* game, int* ok, char** report);
MFG_API mfg_status mfg_game_to_json(mfg_game* game, char** json);

MFG_API mfg_status mfg_game_num_classes(mfg_game* game, size_t* classes);
MFG_API mfg_status mfg_game_class_shape(mfg_game* game, size_t cls, size_t* states, size_t* policies);
/* Total number of (class, state, policy) cells. */
MFG_API mfg_status mfg_game_cells(mfg_game* game, size_t* cells);
/* Total number of (class, policy) entries. */
MFG_API mfg_status mfg_game_policy_entries(mfg_game* game, size_t* entries);

/* "uniform" or a scenario distribution such as "fig1", "fig2", "msne". */
MFG_API mfg_status mfg_game_distribution(mfg_game* game, const char* name, double* mu, size_t len);
/* F(mu), one entry per (class, policy). */
MFG_API mfg_status mfg_game_payoffs(mfg_game* game, const double* mu, size_t len, double* payoffs,
                                    size_t payoffs_len);
/* f^d, f^r and V = f^d + f^r; any output may be NULL. */
MFG_API mfg_status mfg_game_vector_field(mfg_game* game, const char* protocol, const double* mu, size_t len,
                                         double* dynamic, double* revision, double* total);

/* Run configuration. Keys: protocol, horizon, step, sample_interval, tol,
 * n, seed, reps, multistart, strict, init, out, ns (comma separated),
 * scenario, spec. */
MFG_API mfg_status mfg_config_new(mfg_config** out);
MFG_API void mfg_config_free(mfg_config* cfg);
MFG_API mfg_status mfg_config_set(mfg_config* cfg, const char* key, const char* value);
/* Applies a JSON object with the same keys; later mfg_config_set calls
 * override it. */
MFG_API mfg_status mfg_config_load_file(mfg_config* cfg, const char* path);

/* Reads back "scenario", "spec" or "out" (empty string when unset). */
MFG_API mfg_status mfg_config_get(const mfg_config* cfg, const char* key, char** value);

/* command: "integrate", "simulate" or "equilibrium". Output files go to
 * the configured directory. A run that completes but reports failure
 * returns MFG_ERR_DOMAIN and still fills *summary. */
MFG_API mfg_status mfg_run(mfg_game* game, const char* command, const mfg_config* cfg, char** summary);

#ifdef __cplusplus
}
#endif

#endif /* MFGEVO_C_H */
