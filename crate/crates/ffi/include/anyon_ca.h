#ifndef ANYON_CA_H
#define ANYON_CA_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AcStatus {
  AC_STATUS_OK = 0,
  AC_STATUS_NULL_POINTER = 1,
  AC_STATUS_INVALID_ARGUMENT = 2,
  AC_STATUS_IO = 3,
  AC_STATUS_PARSE = 4,
  AC_STATUS_OUT_OF_RANGE = 5,
  AC_STATUS_BUFFER_TOO_SMALL = 6,
  AC_STATUS_PANIC = 7,
} AcStatus;

typedef struct AcConfig AcConfig;

/**
 * A single noisy memory with its decoder, advanced step by step.
 */
typedef struct AcSimulation AcSimulation;

typedef struct AcSweep AcSweep;

typedef struct AcRecord {
  uint64_t seed;
  uint32_t q_side;
  uint32_t n;
  double p;
  double q;
  uint64_t lifetime;
  bool censored;
} AcRecord;

typedef struct AcLogicalStatus {
  bool success;
  bool eps_x;
  bool eps_y;
  bool sigma_x;
  bool sigma_y;
  bool residual;
} AcLogicalStatus;

typedef struct AcParams {
  uint64_t q;
  uint64_t d;
  uint64_t a;
  uint64_t b;
  uint64_t u;
  uint64_t fc_b;
  uint64_t fn_b;
  uint64_t b0;
  double p_c;
  bool b_at_least_b0;
  bool b_above_twice_fn;
  bool u_at_least_4b2;
  bool q_odd;
} AcParams;

/**
 * One error event. `kind` is 0 for a charge error, 1 for a measurement error.
 */
typedef struct AcEvent {
  uint32_t kind;
  double x;
  double y;
  double t;
} AcEvent;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message. With a null `buf`, only `*len` is set.
 */
enum AcStatus ac_last_error(char *buf, size_t cap, size_t *len);

enum AcStatus ac_config_new(struct AcConfig **out);

/**
 * Parses `key=value` lines. Unset keys keep their defaults.
 */
enum AcStatus ac_config_parse(const char *text, struct AcConfig **out);

enum AcStatus ac_config_set(struct AcConfig *cfg, const char *key, const char *value);

enum AcStatus ac_config_validate(const struct AcConfig *cfg);

/**
 * Canonical text form of the config.
 */
enum AcStatus ac_config_canonical(const struct AcConfig *cfg, char *buf, size_t cap, size_t *len);

/**
 * 16 hex digits identifying the config; needs a 17-byte buffer.
 */
enum AcStatus ac_config_hash(const struct AcConfig *cfg, char *buf, size_t cap);

void ac_config_free(struct AcConfig *cfg);

/**
 * Runs every instance of every p value in the config.
 */
enum AcStatus ac_sweep_run(const struct AcConfig *cfg, struct AcSweep **out);

enum AcStatus ac_sweep_len(const struct AcSweep *sweep, size_t *len);

enum AcStatus ac_sweep_record(const struct AcSweep *sweep, size_t index, struct AcRecord *out);

enum AcStatus ac_sweep_write_csv(const struct AcSweep *sweep, const char *path);

void ac_sweep_free(struct AcSweep *sweep);

/**
 * Builds a simulation on the lattice of `cfg` with charge error rate `p`.
 */
enum AcStatus ac_sim_new(const struct AcConfig *cfg,
                         double p,
                         uint64_t seed,
                         struct AcSimulation **out);

/**
 * Advances `steps` time steps and reports the number of error events drawn.
 */
enum AcStatus ac_sim_step(struct AcSimulation *sim, uint64_t steps, uint64_t *events);

enum AcStatus ac_sim_time(const struct AcSimulation *sim, uint64_t *t);

enum AcStatus ac_sim_anyon_count(const struct AcSimulation *sim, size_t *count);

/**
 * Decodes a copy of the current state; the simulation itself is unchanged.
 */
enum AcStatus ac_sim_verify(const struct AcSimulation *sim, struct AcLogicalStatus *out);

void ac_sim_free(struct AcSimulation *sim);

/**
 * Closed-form constants for colony side `q` and fusion-graph diameter `d`. `b = 0` picks the default b.
 */
enum AcStatus ac_params(uint64_t q,
                        uint64_t d,
                        uint64_t a,
                        uint64_t b,
                        struct AcParams *out);

/**
 * Assigns each event a hierarchy level; `levels[i]` is -1 for events left unclassified.
 */
enum AcStatus ac_classify(const struct AcEvent *events,
                          size_t len,
                          uint64_t a,
                          uint64_t b,
                          uint64_t q,
                          uint64_t u,
                          size_t n_max,
                          int32_t *levels);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ANYON_CA_H */
