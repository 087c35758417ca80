#ifndef AOVAUC_H
#define AOVAUC_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum AovStatus {
  AOV_STATUS_OK = 0,
  AOV_STATUS_NULL_POINTER = 1,
  AOV_STATUS_INVALID_ARGUMENT = 2,
  AOV_STATUS_VALIDATION = 3,
  AOV_STATUS_IO = 4,
  AOV_STATUS_UTF8 = 5,
  AOV_STATUS_PANIC = 6,
} AovStatus;

/**
 * A collection of subjects under construction.
 */
typedef struct AovDataset AovDataset;

/**
 * The result of [`aov_analyze`].
 */
typedef struct AovReport AovReport;

/**
 * Summary of one simulated scenario.
 */
typedef struct AovSimResult {
  double rejection_rate;
  double posthoc_success_mean;
  double posthoc_success_sd;
} AovSimResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or NULL. The pointer
 * stays valid until the next library call on the same thread.
 */
const char *aov_last_error_message(void);

/**
 * Releases a string returned by the library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void aov_string_free(char *s);

struct AovDataset *aov_dataset_new(void);

/**
 * # Safety
 * `dataset` must come from this library and not have been freed.
 */
void aov_dataset_free(struct AovDataset *dataset);

/**
 * Appends one subject. `pre` and `post` must each hold at least one value.
 *
 * # Safety
 * Pointers must be valid; `pre`/`post` must hold `m_pre`/`m_post` doubles.
 */
enum AovStatus aov_dataset_add_subject(struct AovDataset *dataset,
                                       const char *subject_id,
                                       const char *group_id,
                                       const double *pre,
                                       size_t m_pre,
                                       const double *post,
                                       size_t m_post);

/**
 * Number of subjects, or 0 for NULL.
 *
 * # Safety
 * `dataset` must be NULL or a live handle.
 */
size_t aov_dataset_len(const struct AovDataset *dataset);

/**
 * Loads a long-format CSV into a new dataset written to `out`.
 *
 * # Safety
 * String arguments must be NUL-terminated; `out` must be writable.
 */
enum AovStatus aov_dataset_load_csv(const char *path,
                                    const char *value_column,
                                    const char *group_column,
                                    const char *subject_column,
                                    const char *phase_column,
                                    const char *pre_label,
                                    const char *post_label,
                                    struct AovDataset **out);

/**
 * Runs the test, and the post hoc comparisons when `posthoc` is true.
 *
 * # Safety
 * `dataset` must be a live handle; `out` must be writable.
 */
enum AovStatus aov_analyze(const struct AovDataset *dataset,
                           bool posthoc,
                           double alpha,
                           size_t replicates,
                           uint64_t seed,
                           bool winsorize,
                           bool standardize,
                           struct AovReport **out);

/**
 * # Safety
 * `report` must come from this library and not have been freed.
 */
void aov_report_free(struct AovReport *report);

/**
 * F statistic and its p-value.
 *
 * # Safety
 * `report` must be a live handle; outputs must be writable.
 */
enum AovStatus aov_report_f_test(const struct AovReport *report, double *f_stat, double *p_value);

/**
 * Intra- and inter-group sums of squares with their degrees of freedom.
 *
 * # Safety
 * `report` must be a live handle; outputs must be writable.
 */
enum AovStatus aov_report_sums_of_squares(const struct AovReport *report,
                                          double *sse,
                                          size_t *df_sse,
                                          double *ssf,
                                          size_t *df_ssf);

/**
 * Number of groups, or 0 for NULL.
 *
 * # Safety
 * `report` must be NULL or a live handle.
 */
size_t aov_report_group_count(const struct AovReport *report);

/**
 * Mean AUC and random-effects standard error of group `index` (sorted
 * label order).
 *
 * # Safety
 * `report` must be a live handle; outputs must be writable.
 */
enum AovStatus aov_report_group(const struct AovReport *report,
                                size_t index,
                                double *mean_auc,
                                double *tau);

/**
 * Post hoc p-value for groups `i` and `j`; fails with `Validation` when the
 * report was produced without post hoc comparisons.
 *
 * # Safety
 * `report` must be a live handle; `p_value` must be writable.
 */
enum AovStatus aov_report_posthoc_pvalue(const struct AovReport *report,
                                         size_t i,
                                         size_t j,
                                         double *p_value);

/**
 * Text report; free the result with [`aov_string_free`].
 *
 * # Safety
 * `report` must be a live handle; `out` must be writable.
 */
enum AovStatus aov_report_to_text(const struct AovReport *report, char **out);

/**
 * JSON document; free the result with [`aov_string_free`].
 *
 * # Safety
 * `report` must be a live handle; `out` must be writable.
 */
enum AovStatus aov_report_to_json(const struct AovReport *report, char **out);

/**
 * Empirical AUC of one subject.
 *
 * # Safety
 * `pre`/`post` must hold `m_pre`/`m_post` doubles; `out` must be writable.
 */
enum AovStatus aov_empirical_auc(const double *pre,
                                 size_t m_pre,
                                 const double *post,
                                 size_t m_post,
                                 double *out);

/**
 * Plug-in variance of one subject's empirical AUC.
 *
 * # Safety
 * `pre`/`post` must hold `m_pre`/`m_post` doubles; `out` must be writable.
 */
enum AovStatus aov_subject_auc_variance(const double *pre,
                                        size_t m_pre,
                                        const double *post,
                                        size_t m_post,
                                        double *out);

/**
 * Upper tail `P(F > x)` of the F law with `d1`, `d2` degrees of freedom.
 *
 * # Safety
 * `out` must be writable.
 */
enum AovStatus aov_f_survival(double x, double d1, double d2, double *out);

/**
 * Post hoc critical value for `k` groups.
 *
 * # Safety
 * `out` must be writable.
 */
enum AovStatus aov_critical_value(size_t k,
                                  double alpha,
                                  size_t replicates,
                                  uint64_t seed,
                                  double *out);

/**
 * Runs one simulation scenario with `k = n_aucs` treatments.
 *
 * # Safety
 * `target_aucs` must hold `n_aucs` doubles; `out` must be writable.
 */
enum AovStatus aov_run_scenario(const double *target_aucs,
                                size_t n_aucs,
                                size_t n_r,
                                size_t m_n,
                                size_t m_p,
                                double sigma_eps,
                                double alpha,
                                size_t iterations,
                                size_t r_posthoc,
                                uint64_t seed,
                                struct AovSimResult *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AOVAUC_H */
