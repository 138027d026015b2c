#ifndef AFTERSHOCK_H
#define AFTERSHOCK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AftershockStatus {
  AFTERSHOCK_STATUS_OK = 0,
  AFTERSHOCK_STATUS_NULL_POINTER = 1,
  AFTERSHOCK_STATUS_INVALID_ARGUMENT = 2,
  AFTERSHOCK_STATUS_IO = 3,
  AFTERSHOCK_STATUS_PARSE = 4,
  /**
   * Not enough data, or a curve that cannot be fitted.
   */
  AFTERSHOCK_STATUS_DEGENERATE = 5,
  AFTERSHOCK_STATUS_BUFFER_TOO_SMALL = 6,
  AFTERSHOCK_STATUS_INDEX_OUT_OF_RANGE = 7,
  AFTERSHOCK_STATUS_PANIC = 99,
} AftershockStatus;

typedef enum AftershockFormat {
  AFTERSHOCK_FORMAT_MINUTE_BARS = 0,
  AFTERSHOCK_FORMAT_EVENT_QUOTES = 1,
} AftershockFormat;

typedef enum AftershockAggregation {
  AFTERSHOCK_AGGREGATION_DAILY = 0,
  AFTERSHOCK_AGGREGATION_MINUTELY = 1,
} AftershockAggregation;

typedef enum AftershockSigmaKind {
  AFTERSHOCK_SIGMA_KIND_STANDARD_DEVIATION = 0,
  AFTERSHOCK_SIGMA_KIND_MEAN = 1,
} AftershockSigmaKind;

/**
 * Opaque parsed price series.
 */
typedef struct AftershockPriceSeries AftershockPriceSeries;

/**
 * Opaque list of detected main shocks.
 */
typedef struct AftershockShockList AftershockShockList;

/**
 * Opaque realized-volatility series.
 */
typedef struct AftershockVolatility AftershockVolatility;

/**
 * One main shock; indices refer to the volatility series it came from.
 */
typedef struct AftershockShock {
  size_t t0;
  size_t t1;
  size_t duration;
  double v_max;
  double v_min;
} AftershockShock;

typedef struct AftershockFit {
  double k;
  double p;
  double tau;
  double sse;
  bool converged;
  uint32_t iterations;
} AftershockFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failure on this thread, or NULL if none occurred.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *aftershock_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *aftershock_version(void);

/**
 * Parses a `date,time,price` CSV file (`.gz` is decompressed) against the
 * default calendar.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable pointer.
 */
enum AftershockStatus aftershock_series_parse_file(const char *path,
                                                   enum AftershockFormat format,
                                                   struct AftershockPriceSeries **out);

/**
 * Parses CSV text held in memory.
 *
 * # Safety
 * `data` must point to `len` readable bytes and `out` must be writable.
 */
enum AftershockStatus aftershock_series_parse_buffer(const uint8_t *data,
                                                     size_t len,
                                                     enum AftershockFormat format,
                                                     struct AftershockPriceSeries **out);

/**
 * Number of observations, or 0 for NULL.
 *
 * # Safety
 * `series` must be NULL or a live handle.
 */
size_t aftershock_series_len(const struct AftershockPriceSeries *series);

/**
 * Number of trading days, or 0 for NULL.
 *
 * # Safety
 * `series` must be NULL or a live handle.
 */
size_t aftershock_series_day_count(const struct AftershockPriceSeries *series);

/**
 * # Safety
 * `series` must be NULL or a handle not yet freed.
 */
void aftershock_series_free(struct AftershockPriceSeries *series);

/**
 * Realized volatility of `series`, per trading day or per clock minute of
 * the default calendar.
 *
 * # Safety
 * `series` must be a live handle and `out` writable.
 */
enum AftershockStatus aftershock_volatility_compute(const struct AftershockPriceSeries *series,
                                                    enum AftershockAggregation aggregation,
                                                    bool exclude_overnight,
                                                    struct AftershockVolatility **out);

/**
 * Volatility series from raw daily values, labelled with weekdays from
 * 2001-02-05. Useful for driving detection and counting directly.
 *
 * # Safety
 * `values` must point to `len` readable doubles and `out` must be writable.
 */
enum AftershockStatus aftershock_volatility_from_values(const double *values,
                                                        size_t len,
                                                        struct AftershockVolatility **out);

/**
 * Number of windows, or 0 for NULL.
 *
 * # Safety
 * `vols` must be NULL or a live handle.
 */
size_t aftershock_volatility_len(const struct AftershockVolatility *vols);

/**
 * Copies the values into `buf`. `written` receives the series length even
 * when `cap` is too small, in which case `AFTERSHOCK_STATUS_BUFFER_TOO_SMALL`
 * is returned and nothing is copied.
 *
 * # Safety
 * `vols` must be a live handle, `buf` must hold `cap` doubles and `written`
 * must be writable.
 */
enum AftershockStatus aftershock_volatility_values(const struct AftershockVolatility *vols,
                                                   double *buf,
                                                   size_t cap,
                                                   size_t *written);

/**
 * Sample dispersion of the values.
 *
 * # Safety
 * `vols` must be a live handle and `out` writable.
 */
enum AftershockStatus aftershock_volatility_sigma(const struct AftershockVolatility *vols,
                                                  enum AftershockSigmaKind kind,
                                                  double *out);

/**
 * # Safety
 * `vols` must be NULL or a handle not yet freed.
 */
void aftershock_volatility_free(struct AftershockVolatility *vols);

/**
 * Main-shock detection: top `k` values, merged within `min_gap`, with a
 * `search_window` impact search. Zero for any parameter selects its default
 * (7, 30 and 60).
 *
 * # Safety
 * `vols` must be a live handle and `out` writable.
 */
enum AftershockStatus aftershock_detect_shocks(const struct AftershockVolatility *vols,
                                               size_t k,
                                               size_t min_gap,
                                               size_t search_window,
                                               struct AftershockShockList **out);

/**
 * Number of shocks, or 0 for NULL.
 *
 * # Safety
 * `list` must be NULL or a live handle.
 */
size_t aftershock_shocks_len(const struct AftershockShockList *list);

/**
 * # Safety
 * `list` must be a live handle and `out` writable.
 */
enum AftershockStatus aftershock_shocks_get(const struct AftershockShockList *list,
                                            size_t index,
                                            struct AftershockShock *out);

/**
 * # Safety
 * `list` must be NULL or a handle not yet freed.
 */
void aftershock_shocks_free(struct AftershockShockList *list);

/**
 * Cumulative aftershock counts `N(1..=T)` after shock `index` above the
 * absolute threshold `theta`, written into `counts` (`T = t1 - t0`).
 * `written` receives `T` even when `cap` is too small.
 *
 * # Safety
 * Handles must be live, `counts` must hold `cap` values and `written` must
 * be writable.
 */
enum AftershockStatus aftershock_count(const struct AftershockVolatility *vols,
                                       const struct AftershockShockList *list,
                                       size_t index,
                                       double theta,
                                       uint32_t *counts,
                                       size_t cap,
                                       size_t *written);

/**
 * Omori rate `K (t + tau)^-p`.
 *
 * # Safety
 * `out` must be writable.
 */
enum AftershockStatus aftershock_omori_rate(double t, double k, double p, double tau, double *out);

/**
 * Cumulative count `N(t)`, continuous across `p = 1`.
 *
 * # Safety
 * `out` must be writable.
 */
enum AftershockStatus aftershock_omori_cumulative(double t,
                                                  double k,
                                                  double p,
                                                  double tau,
                                                  double *out);

/**
 * Small-t slope `K tau^-p`.
 *
 * # Safety
 * `out` must be writable.
 */
enum AftershockStatus aftershock_linear_limit_slope(double k, double p, double tau, double *out);

/**
 * Least-squares fit of `N(t)` to cumulative counts `n` at times `t`.
 *
 * # Safety
 * `t` and `n` must each hold `len` doubles and `out` must be writable.
 */
enum AftershockStatus aftershock_fit(const double *t,
                                     const double *n,
                                     size_t len,
                                     struct AftershockFit *out);

/**
 * Simulates an Omori point process on `(0, horizon]` and writes the event
 * count of each unit interval into `counts`, which must hold `horizon`
 * values.
 *
 * # Safety
 * `counts` must hold `horizon` writable values.
 */
enum AftershockStatus aftershock_simulate_counts(double k,
                                                 double p,
                                                 double tau,
                                                 uint32_t horizon,
                                                 uint64_t seed,
                                                 uint32_t *counts);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AFTERSHOCK_H */
