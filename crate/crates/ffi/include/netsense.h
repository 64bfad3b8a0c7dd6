#ifndef NETSENSE_H
#define NETSENSE_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Delay-Doppler surface with cyclic shifts.
#define NS_AMBIGUITY_CYCLIC 0

// Delay-Doppler surface with zero padding.
#define NS_AMBIGUITY_LINEAR 1

typedef enum NsStatus {
  NS_STATUS_OK = 0,
  NS_STATUS_NULL_POINTER = 1,
  NS_STATUS_INVALID_UTF8 = 2,
  NS_STATUS_DOMAIN = 3,
  NS_STATUS_PARAMETER = 4,
  NS_STATUS_GEOMETRY = 5,
  NS_STATUS_INFEASIBLE = 6,
  NS_STATUS_INCONSISTENT = 7,
  NS_STATUS_NOT_SUPPORTED = 8,
  NS_STATUS_IO = 9,
  NS_STATUS_PARSE = 10,
  NS_STATUS_OUT_OF_RANGE = 11,
  NS_STATUS_PANIC = 12,
} NsStatus;

typedef struct NsGhostReport NsGhostReport;

typedef struct NsLinkBudget NsLinkBudget;

typedef struct NsScene NsScene;

typedef struct NsSequence NsSequence;

typedef struct NsSurface NsSurface;

// Radar range equation inputs; gains and RCS in dB.
typedef struct NsLinkBudgetParams {
  double pt_watts;
  double gt_dbi;
  double gr_dbi;
  double gp_db;
  double carrier_hz;
  double rcs_dbsm;
  double temperature_k;
  double bandwidth_hz;
  double noise_factor_db;
} NsLinkBudgetParams;

typedef struct NsPoint {
  double x;
  double y;
} NsPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty after a success.
// Valid until the next `ns_*` call on the same thread.
const char *ns_last_error_message(void);

// Library version, a static string.
const char *ns_version(void);

// Frees a string returned by this library.
void ns_string_free(char *s);

// Writes the pedestrian defaults (10 W, 20 dBi, 3.5 GHz, 100 MHz, -10 dBsm).
enum NsStatus ns_link_budget_params_default(struct NsLinkBudgetParams *out);

enum NsStatus ns_link_budget_new(const struct NsLinkBudgetParams *params,
                                 struct NsLinkBudget **out);

void ns_link_budget_free(struct NsLinkBudget *budget);

enum NsStatus ns_link_budget_snr_db(const struct NsLinkBudget *budget, double range_m, double *out);

enum NsStatus ns_link_budget_max_range(const struct NsLinkBudget *budget,
                                       double snr_min_db,
                                       double *out);

// Idle time letting an echo from `max_range_m` return, seconds.
enum NsStatus ns_guard_interval(double max_range_m, double *out);

enum NsStatus ns_range_resolution(double bandwidth_hz, double *out);

enum NsStatus ns_scene_from_json(const char *json, struct NsScene **out);

enum NsStatus ns_scene_load(const char *path, struct NsScene **out);

void ns_scene_free(struct NsScene *scene);

// Counts of base stations, IRS anchors and targets.
enum NsStatus ns_scene_counts(const struct NsScene *scene,
                              size_t *num_bs,
                              size_t *num_irs,
                              size_t *num_targets);

// Number of topology violations (0 for a valid scene). The first one is
// reported through `ns_last_error_message` if any.
enum NsStatus ns_scene_validate(const struct NsScene *scene, size_t *num_violations);

// Feasible associations of the scene's targets from exact ranges.
enum NsStatus ns_associate_scene(const struct NsScene *scene,
                                 double feas_tol_m,
                                 double match_radius_m,
                                 struct NsGhostReport **out);

// Feasible associations of unordered range sets.
//
// `anchors` holds `num_anchors` positions; `distances` is row-major with
// `num_targets` ranges per anchor in any order.
enum NsStatus ns_associate(const struct NsPoint *anchors,
                           size_t num_anchors,
                           const double *distances,
                           size_t num_targets,
                           double feas_tol_m,
                           struct NsGhostReport **out);

void ns_ghost_report_free(struct NsGhostReport *report);

enum NsStatus ns_ghost_report_num_solutions(const struct NsGhostReport *report, size_t *out);

// Number of targets per solution.
enum NsStatus ns_ghost_report_num_targets(const struct NsGhostReport *report, size_t *out);

// Estimated position of `target` in feasible solution `solution` (best first).
enum NsStatus ns_ghost_report_position(const struct NsGhostReport *report,
                                       size_t solution,
                                       size_t target,
                                       struct NsPoint *out);

enum NsStatus ns_ghost_report_residual(const struct NsGhostReport *report,
                                       size_t solution,
                                       double *out);

// Ghost positions (estimates matching no scene target); 0 without ground truth.
enum NsStatus ns_ghost_report_num_ghosts(const struct NsGhostReport *report, size_t *out);

enum NsStatus ns_ghost_report_ghost(const struct NsGhostReport *report,
                                    size_t index,
                                    struct NsPoint *out);

// The report as JSON; release with `ns_string_free`.
enum NsStatus ns_ghost_report_to_json(const struct NsGhostReport *report, char **out);

// Fraction of random scenes admitting more than one feasible association.
enum NsStatus ns_ghost_probability(size_t trials,
                                   size_t num_bs,
                                   size_t num_targets,
                                   double side_m,
                                   double feas_tol_m,
                                   uint64_t seed,
                                   double *out);

// Gauss-Newton position fix from `n` anchor ranges. `residual_rms_m` may be null.
enum NsStatus ns_trilaterate(const struct NsPoint *anchors,
                             const double *distances,
                             size_t n,
                             struct NsPoint *out,
                             double *residual_rms_m);

// Target-IRS distance from the direct and composite round trips of one BS.
enum NsStatus ns_irs_target_distance(struct NsPoint bs,
                                     struct NsPoint irs,
                                     double direct_roundtrip_m,
                                     double composite_roundtrip_m,
                                     double *out);

enum NsStatus ns_zadoff_chu(size_t length, size_t root, struct NsSequence **out);

enum NsStatus ns_ofdm_symbol(size_t num_subcarriers,
                             size_t cp_length,
                             uint64_t seed,
                             struct NsSequence **out);

void ns_sequence_free(struct NsSequence *seq);

enum NsStatus ns_sequence_len(const struct NsSequence *seq, size_t *out);

// Copies `min(len, capacity)` samples into the split real/imaginary buffers.
enum NsStatus ns_sequence_samples(const struct NsSequence *seq,
                                  double *re,
                                  double *im,
                                  size_t capacity);

// `mode` is `NS_AMBIGUITY_CYCLIC` or `NS_AMBIGUITY_LINEAR`.
enum NsStatus ns_ambiguity(const struct NsSequence *seq,
                           size_t doppler_bins,
                           int mode,
                           struct NsSurface **out);

void ns_surface_free(struct NsSurface *surface);

enum NsStatus ns_surface_dims(const struct NsSurface *surface,
                              size_t *delay_bins,
                              size_t *doppler_bins);

// Normalized magnitude at grid cell (`delay_index`, `doppler_index`).
enum NsStatus ns_surface_get(const struct NsSurface *surface,
                             size_t delay_index,
                             size_t doppler_index,
                             double *out);

// Peak and integrated side-lobe levels in dB, excluding a main lobe of the
// given half-widths in bins.
enum NsStatus ns_surface_sidelobes(const struct NsSurface *surface,
                                   size_t exclude_delay,
                                   size_t exclude_doppler,
                                   double *psl_db,
                                   double *isl_db);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NETSENSE_H */
