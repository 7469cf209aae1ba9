#ifndef TOKENSCREEN_H
#define TOKENSCREEN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>

typedef enum TsStatus {
  TS_STATUS_OK = 0,
  TS_STATUS_NULL_POINTER = 1,
  TS_STATUS_INVALID_ARGUMENT = 2,
  TS_STATUS_UNSUPPORTED = 3,
  TS_STATUS_NO_CONVERGENCE = 4,
  TS_STATUS_ASSUMPTION_VIOLATED = 5,
  TS_STATUS_EXCLUDED = 6,
  TS_STATUS_UNBOUNDED = 7,
  TS_STATUS_PANIC = 8,
} TsStatus;

typedef enum TsCostKind {
  TS_COST_KIND_WITH_FLOOR = 0,
  TS_COST_KIND_CONTRACTIBLE = 1,
  TS_COST_KIND_PACKAGE = 2,
} TsCostKind;

typedef struct TsAllocationMenu TsAllocationMenu;

typedef struct TsPackageMenu TsPackageMenu;

typedef struct TsScenario TsScenario;

// Efficient tokens for a value-scale buyer; `x`, `y` are per task.
typedef struct TsEfficient {
  double x;
  double y;
  double z;
  double total_input;
  double total_output;
  double surplus;
} TsEfficient;

typedef struct TsCost {
  double total;
  double x;
  double y;
  double z;
  double marginal;
  bool finetuned;
} TsCost;

// One menu item. `tasks` is 0 for package items.
typedef struct TsMenuItem {
  double quality;
  double x;
  double y;
  double z;
  double tasks;
  double transfer;
} TsMenuItem;

// `offered` is false for excluded types; the other fields are then 0.
// `task_cap` is 0 when uncapped.
typedef struct TsTariff {
  bool offered;
  double px;
  double py;
  double pz;
  double p0;
  double task_cap;
} TsTariff;

typedef struct TsRevenue {
  double revenue;
  double profit;
  double revenue_error;
  double cost_error;
} TsRevenue;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread; empty if none. Valid until
// the next failing call on the same thread.
const char *ts_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *ts_version(void);

// Parse a scenario from JSON.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum TsStatus ts_scenario_from_json(const char *json, struct TsScenario **out);

// Built-in scenario: `uniform-example`, or `uniform-symmetric` with `rho` and `c`
// (ignored for the former).
//
// # Safety
// `name` must be a NUL-terminated string and `out` a valid pointer.
enum TsStatus ts_scenario_preset(const char *name, double rho, double c, struct TsScenario **out);

// # Safety
// `sc` must come from a scenario constructor and not be freed twice.
void ts_scenario_free(struct TsScenario *sc);

// Hex SHA-256 of the canonical JSON; `buf` needs at least 65 bytes.
//
// # Safety
// `sc` must be a live handle and `buf` writable for `len` bytes.
enum TsStatus ts_scenario_hash(const struct TsScenario *sc, char *buf, size_t len);

// Efficient allocation for the value-scale buyer `(w, s)`.
//
// # Safety
// `sc` must be a live handle and `out` a valid pointer.
enum TsStatus ts_efficient_value_scale(const struct TsScenario *sc,
                                       double w,
                                       double s,
                                       struct TsEfficient *out);

// Minimum cost of quality `q`; `scale` is used by the contractible kind only.
//
// # Safety
// `sc` must be a live handle and `out` a valid pointer.
enum TsStatus ts_cost(const struct TsScenario *sc,
                      enum TsCostKind kind,
                      double scale,
                      double q,
                      struct TsCost *out);

// Package menu over the scenario's CES-index distribution.
//
// # Safety
// `sc` must be a live handle and `out` a valid pointer.
enum TsStatus ts_package_menu_new(const struct TsScenario *sc, struct TsPackageMenu **out);

// # Safety
// `m` must come from [`ts_package_menu_new`] and not be freed twice.
void ts_package_menu_free(struct TsPackageMenu *m);

// Exclusion point and fine-tuning threshold of the CES index.
//
// # Safety
// `m` must be a live handle; the output pointers must be valid.
enum TsStatus ts_package_menu_thresholds(const struct TsPackageMenu *m,
                                         double *exclusion,
                                         double *finetune_from);

// # Safety
// `m` must be a live handle and `out` a valid pointer.
enum TsStatus ts_package_menu_item(const struct TsPackageMenu *m,
                                   double theta,
                                   struct TsMenuItem *out);

// # Safety
// `m` must be a live handle and `out` a valid pointer.
enum TsStatus ts_package_menu_tariff(const struct TsPackageMenu *m,
                                     double theta,
                                     struct TsTariff *out);

// Expected revenue and profit, integrated to absolute tolerance `tol`.
//
// # Safety
// `m` must be a live handle and `out` a valid pointer.
enum TsStatus ts_package_menu_revenue(const struct TsPackageMenu *m,
                                      double tol,
                                      struct TsRevenue *out);

// Allocation menu over the scenario's value and scale distributions. When
// `strict` is set, failed rent-growth or fee-monotonicity audits are errors.
//
// # Safety
// `sc` must be a live handle and `out` a valid pointer.
enum TsStatus ts_allocation_menu_new(const struct TsScenario *sc,
                                     bool strict,
                                     struct TsAllocationMenu **out);

// # Safety
// `m` must come from [`ts_allocation_menu_new`] and not be freed twice.
void ts_allocation_menu_free(struct TsAllocationMenu *m);

// # Safety
// `m` must be a live handle and `out` a valid pointer.
enum TsStatus ts_allocation_menu_item(const struct TsAllocationMenu *m,
                                      double w,
                                      double s,
                                      struct TsMenuItem *out);

// # Safety
// `m` must be a live handle and `out` a valid pointer.
enum TsStatus ts_allocation_menu_tariff(const struct TsAllocationMenu *m,
                                        double w,
                                        double s,
                                        struct TsTariff *out);

// # Safety
// `m` must be a live handle and `out` a valid pointer.
enum TsStatus ts_allocation_menu_revenue(const struct TsAllocationMenu *m,
                                         double tol,
                                         struct TsRevenue *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TOKENSCREEN_H */
