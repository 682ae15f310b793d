/*
 * bbq: erasure-threshold Monte Carlo for bivariate bicycle and toric codes.
 *
 * Plain C interface over the C++ core. Objects are opaque handles released
 * with their *_free function. Every call that can fail returns a bbq_status;
 * the message of the last failure on the calling thread is available from
 * bbq_last_error().
 */

#ifndef BBQ_BBQ_H
#define BBQ_BBQ_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define BBQ_API __declspec(dllexport)
#else
#define BBQ_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values match the CLI exit codes. */
typedef enum bbq_status {
    BBQ_OK = 0,
    BBQ_ERR_INTERNAL = 1,
    BBQ_ERR_CONFIG = 2,
    BBQ_ERR_NO_CROSSING = 3,
    BBQ_ERR_IO = 4
} bbq_status;

typedef enum bbq_decoder_kind {
    BBQ_DECODER_BPOSD = 0,
    BBQ_DECODER_MWPM_UNINFORMED = 1,
    BBQ_DECODER_MWPM_ERASURE = 2
} bbq_decoder_kind;

typedef enum bbq_family { BBQ_FAMILY_BB = 0, BBQ_FAMILY_TORIC = 1 } bbq_family;

typedef struct bbq_code bbq_code;
typedef struct bbq_threshold bbq_threshold;
typedef struct bbq_fss_dataset bbq_fss_dataset;

BBQ_API const char* bbq_version(void);
BBQ_API const char* bbq_last_error(void);
BBQ_API const char* bbq_status_name(bbq_status status);

/* ---- codes ---- */

BBQ_API size_t bbq_registry_size(void);
/* NULL when index is out of range. */
BBQ_API const char* bbq_registry_name(size_t index);

BBQ_API bbq_status bbq_code_from_registry(const char* name, bbq_code** out);
/* BB code with A = x^3 + y + y^2, B = y^3 + x + x^2. */
BBQ_API bbq_status bbq_code_new_bb(size_t l, size_t m, bbq_code** out);
BBQ_API bbq_status bbq_code_new_toric(size_t l, bbq_code** out);
BBQ_API void bbq_code_free(bbq_code* code);

typedef struct bbq_code_info {
    bbq_family family;
    size_t n;
    size_t k;
    size_t l_param;
    size_t m_param;
    size_t hx_rows;
    size_t hz_rows;
} bbq_code_info;

BBQ_API bbq_status bbq_code_get_info(const bbq_code* code, bbq_code_info* out);
/* Copies the NUL-terminated name into buf (truncating); returns the full length. */
BBQ_API size_t bbq_code_name(const bbq_code* code, char* buf, size_t buf_len);
/* Entry (row, col) of Hx or Hz, 0 or 1; -1 on bad arguments. */
BBQ_API int bbq_code_hx_entry(const bbq_code* code, size_t row, size_t col);
BBQ_API int bbq_code_hz_entry(const bbq_code* code, size_t row, size_t col);
/* 1 when Hx * Hz^T = 0 over GF(2), 0 otherwise. */
BBQ_API int bbq_code_is_css(const bbq_code* code);

/* ---- Monte Carlo ---- */

typedef struct bbq_decoder_config {
    bbq_decoder_kind kind;
    size_t max_iterations;
    size_t osd_order;
    double erased_prior;
    double unerased_prior;
    double min_sum_scale;
    double llr_clip;
} bbq_decoder_config;

BBQ_API void bbq_decoder_config_default(bbq_decoder_config* cfg);
BBQ_API bbq_status bbq_decoder_from_name(const char* name, bbq_decoder_kind* out);

typedef struct bbq_wer_point {
    double p;
    size_t shots;
    size_t failures;
    double wer;
    double wilson_lo;
    double wilson_hi;
    uint64_t point_seed;
} bbq_wer_point;

/* threads = 0 uses every hardware thread; the result never depends on it. */
BBQ_API bbq_status bbq_estimate_wer(const bbq_code* code, const bbq_decoder_config* cfg, double p, size_t shots,
                                    uint64_t base_seed, unsigned threads, bbq_wer_point* out);
BBQ_API bbq_status bbq_wilson_interval(size_t failures, size_t shots, double confidence, double* lo, double* hi);

/* ---- threshold search ---- */

typedef struct bbq_threshold_options {
    double target_wer;
    double start;
    double step;
    double tol;
    size_t max_evals;
    double p_min;
    double p_max;
    size_t bootstrap_iters;
    double confidence;
} bbq_threshold_options;

BBQ_API void bbq_threshold_options_default(bbq_threshold_options* opts);

BBQ_API bbq_status bbq_find_threshold(const bbq_code* code, const bbq_decoder_config* cfg,
                                      const bbq_threshold_options* opts, size_t shots, uint64_t base_seed,
                                      unsigned threads, bbq_threshold** out);

/* WER model for synthetic searches: returns the failure rate at p. */
typedef double (*bbq_wer_fn)(double p, void* user);
/* Each evaluation is recorded with `shots` trials and failures = round(wer * shots). */
BBQ_API bbq_status bbq_find_threshold_fn(bbq_wer_fn fn, void* user, size_t shots, const bbq_threshold_options* opts,
                                         uint64_t bootstrap_seed, bbq_threshold** out);

typedef struct bbq_threshold_summary {
    double p_star;
    double ci_lo;
    double ci_hi;
    double p_lo;
    double p_hi;
    double wer_lo;
    double wer_hi;
    size_t evaluations;
    size_t bootstrap_clamps;
    int reached_tol;
    int degenerate;
} bbq_threshold_summary;

BBQ_API bbq_status bbq_threshold_get_summary(const bbq_threshold* t, bbq_threshold_summary* out);
BBQ_API bbq_status bbq_threshold_get_evaluation(const bbq_threshold* t, size_t index, bbq_wer_point* out);
BBQ_API void bbq_threshold_free(bbq_threshold* t);

/* ---- finite-size scaling ---- */

BBQ_API bbq_status bbq_fss_dataset_new(bbq_fss_dataset** out);
BBQ_API void bbq_fss_dataset_free(bbq_fss_dataset* data);
BBQ_API bbq_status bbq_fss_dataset_add(bbq_fss_dataset* data, size_t n, double p, size_t shots, size_t failures);
/* Per-size pseudo-threshold with its confidence interval. */
BBQ_API bbq_status bbq_fss_dataset_set_pstar(bbq_fss_dataset* data, size_t n, double p_star, double ci_lo,
                                             double ci_hi);

typedef struct bbq_fss_options {
    double window;
    size_t bootstrap_iters; /* 0 skips the bootstrap */
    double confidence;
    unsigned threads;
} bbq_fss_options;

BBQ_API void bbq_fss_options_default(bbq_fss_options* opts);

typedef struct bbq_fss_result {
    double p_inf;
    double nu;
    double coeffs[4];
    double rss;
    double ci_p_inf_lo;
    double ci_p_inf_hi;
    double ci_nu_lo;
    double ci_nu_hi;
    double window;
    size_t points;
    size_t sizes;
    size_t bootstrap_skipped;
    int flagged;
} bbq_fss_result;

BBQ_API bbq_status bbq_fss_fit(const bbq_fss_dataset* data, const bbq_fss_options* opts, uint64_t bootstrap_seed,
                               bbq_fss_result* out);

typedef struct bbq_linear_fit {
    double p_inf;
    double c;
    double ci_lo;
    double ci_hi;
    int weighted;
} bbq_linear_fit;

/* Uses the per-size p* values; needs at least three sizes. */
BBQ_API bbq_status bbq_fss_linearized(const bbq_fss_dataset* data, double nu, double confidence, bbq_linear_fit* out);

/* ---- runs ---- */

/*
 * Runs "sweep", "threshold", "baseline" or "fss" with a JSON configuration
 * (preset defaults apply to absent keys). Progress goes to stderr unless the
 * config sets "quiet": true. When report is non-NULL it receives a JSON
 * summary to be released with bbq_string_free.
 */
BBQ_API bbq_status bbq_run(const char* command, const char* config_json, char** report);
/* Resolved configuration (presets applied) as JSON, without running. */
BBQ_API bbq_status bbq_resolve_config(const char* command, const char* config_json, char** out);
BBQ_API void bbq_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* BBQ_BBQ_H */
