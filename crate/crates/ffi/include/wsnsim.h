#ifndef WSNSIM_H
#define WSNSIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum WsnStatus {
  WSN_STATUS_OK = 0,
  WSN_STATUS_NULL_POINTER = 1,
  /**
   * Invalid configuration or unknown key/protocol.
   */
  WSN_STATUS_CONFIG = 2,
  WSN_STATUS_IO = 3,
  /**
   * Internal invariant violated.
   */
  WSN_STATUS_INVARIANT = 4,
  WSN_STATUS_INVALID_ARGUMENT = 5,
  WSN_STATUS_PANIC = 6,
  /**
   * The simulation has no more rounds to run.
   */
  WSN_STATUS_FINISHED = 7,
} WsnStatus;

typedef enum WsnProtocol {
  WSN_PROTOCOL_LEACH = 0,
  WSN_PROTOCOL_SEP = 1,
  WSN_PROTOCOL_ESEP = 2,
  WSN_PROTOCOL_DEEC = 3,
  WSN_PROTOCOL_HSEP = 4,
} WsnProtocol;

typedef struct WsnConfig WsnConfig;

typedef struct WsnSeries WsnSeries;

typedef struct WsnSimulation WsnSimulation;

/**
 * Counts from one stepped round.
 */
typedef struct WsnRound {
  uint64_t round;
  size_t primary_chs;
  size_t secondary_chs;
  uint64_t packets_to_bs;
  double energy_spent;
  size_t deaths;
  size_t alive_after;
} WsnRound;

/**
 * One row of the per-round series (same columns as the CSV).
 */
typedef struct WsnSeriesRow {
  uint64_t round;
  size_t alive;
  size_t dead;
  size_t primary_chs;
  size_t secondary_chs;
  uint64_t packets_cum;
  double energy_total;
} WsnSeriesRow;

/**
 * Round events are -1 when they did not occur.
 */
typedef struct WsnSummary {
  enum WsnProtocol protocol;
  uint64_t seed;
  int64_t fnd;
  int64_t hnd;
  int64_t lnd;
  uint64_t total_packets;
} WsnSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after success.
 * The pointer stays valid until the next `wsn_*` call on this thread.
 */
const char *wsn_last_error(void);

const char *wsn_version(void);

/**
 * New config holding the reference defaults.
 */
struct WsnConfig *wsn_config_new(void);

/**
 * Parses a `key = value` document. `*out` receives a new handle on success.
 */
enum WsnStatus wsn_config_parse(const char *text, struct WsnConfig **out);

/**
 * Sets a real-valued key (same names as the config file).
 */
enum WsnStatus wsn_config_set_f64(struct WsnConfig *config, const char *key, double value);

/**
 * Sets an integer key such as `seed`, `n_nodes` or `max_rounds`.
 */
enum WsnStatus wsn_config_set_u64(struct WsnConfig *config, const char *key, uint64_t value);

enum WsnStatus wsn_config_validate(const struct WsnConfig *config);

void wsn_config_free(struct WsnConfig *config);

/**
 * Looks up a protocol by case-insensitive name.
 */
enum WsnStatus wsn_protocol_from_name(const char *name, enum WsnProtocol *out);

/**
 * Static lower-case protocol name.
 */
const char *wsn_protocol_name(enum WsnProtocol protocol);

/**
 * Builds the network for a stepwise run.
 */
enum WsnStatus wsn_simulation_new(const struct WsnConfig *config,
                                  enum WsnProtocol protocol,
                                  struct WsnSimulation **out);

/**
 * Runs one round. Returns `WSN_STATUS_FINISHED` once every node is dead or
 * `max_rounds` is reached; `*out` is untouched in that case.
 */
enum WsnStatus wsn_simulation_step(struct WsnSimulation *sim, struct WsnRound *out);

size_t wsn_simulation_alive(const struct WsnSimulation *sim);

double wsn_simulation_residual_energy(const struct WsnSimulation *sim);

void wsn_simulation_free(struct WsnSimulation *sim);

/**
 * Runs a whole simulation and returns its per-round series.
 */
enum WsnStatus wsn_simulate(const struct WsnConfig *config,
                            enum WsnProtocol protocol,
                            struct WsnSeries **out);

size_t wsn_series_len(const struct WsnSeries *series);

enum WsnStatus wsn_series_row(const struct WsnSeries *series,
                              size_t index,
                              struct WsnSeriesRow *out);

/**
 * FND/HND/LND and throughput. Fails with `WSN_STATUS_INVARIANT` on an empty series.
 */
enum WsnStatus wsn_series_summary(const struct WsnSeries *series, struct WsnSummary *out);

/**
 * Writes the series in the per-round CSV format.
 */
enum WsnStatus wsn_series_write_csv(const struct WsnSeries *series, const char *path);

void wsn_series_free(struct WsnSeries *series);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WSNSIM_H */
