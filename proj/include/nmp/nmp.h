#ifndef NMP_NMP_H
#define NMP_NMP_H

#include <stddef.h>
#include <stdint.h>

#if defined(NMP_BUILDING_LIBRARY)
#define NMP_API __attribute__((visibility("default")))
#else
#define NMP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nmp_status {
    NMP_OK = 0,
    NMP_ERR_ARGUMENT = 1,    /* null handle or out-of-range argument */
    NMP_ERR_FORMAT = 2,      /* malformed file or stream */
    NMP_ERR_UNSUPPORTED = 3, /* well-formed but unsupported encoding */
    NMP_ERR_IO = 4,
    NMP_ERR_CONTRACT = 5, /* violated precondition */
    NMP_ERR_STATE = 6,
    NMP_ERR_INTERNAL = 7
} nmp_status;

typedef struct nmp_audio nmp_audio;
typedef struct nmp_model nmp_model;
typedef struct nmp_posteriors nmp_posteriors;
typedef struct nmp_notes nmp_notes;
typedef struct nmp_pitches nmp_pitches;

NMP_API const char* nmp_version(void);
NMP_API const char* nmp_status_name(nmp_status status);
/* Message of the most recent failure on the calling thread; "" if none. */
NMP_API const char* nmp_last_error(void);

/* Strings returned through char** out-parameters. */
NMP_API void nmp_string_free(char* s);

/* ---- audio ---- */

/* Decodes a WAV file, mixes it to mono and resamples to 22050 Hz. */
NMP_API nmp_status nmp_audio_load(const char* path, nmp_audio** out);
NMP_API nmp_status nmp_audio_from_samples(const float* samples, size_t count, int sample_rate, nmp_audio** out);
NMP_API nmp_status nmp_audio_resample(const nmp_audio* audio, int sample_rate, nmp_audio** out);
NMP_API size_t nmp_audio_length(const nmp_audio* audio);
NMP_API int nmp_audio_sample_rate(const nmp_audio* audio);
/* Copies min(count, length) samples into `dst`; returns the number copied. */
NMP_API size_t nmp_audio_copy_samples(const nmp_audio* audio, float* dst, size_t count);
NMP_API void nmp_audio_free(nmp_audio* audio);

/* ---- model ---- */

NMP_API nmp_status nmp_model_load(const char* weights_path, nmp_model** out);
NMP_API size_t nmp_model_parameter_count(const nmp_model* model);
NMP_API int nmp_model_harmonic_stacking(const nmp_model* model);
/* Trainable parameter count of a freshly built model. */
NMP_API nmp_status nmp_default_parameter_count(int harmonic_stacking, int supervise_contour, size_t* out);
NMP_API nmp_status nmp_predict(nmp_model* model, const nmp_audio* audio, nmp_posteriors** out);
NMP_API void nmp_model_free(nmp_model* model);

/* ---- posteriorgrams ---- */

NMP_API nmp_status nmp_posteriors_load(const char* path, nmp_posteriors** out);
NMP_API nmp_status nmp_posteriors_save(const nmp_posteriors* p, const char* path);
/* Copies frames x 88, frames x 88 and frames x 264 row-major arrays; null
   arrays are taken as zeros. */
NMP_API nmp_status nmp_posteriors_create(size_t frames, const float* onsets, const float* notes,
                                         const float* contours, nmp_posteriors** out);
NMP_API size_t nmp_posteriors_frames(const nmp_posteriors* p);
NMP_API double nmp_posteriors_frame_period(const nmp_posteriors* p);
NMP_API const float* nmp_posteriors_onsets(const nmp_posteriors* p);
NMP_API const float* nmp_posteriors_notes(const nmp_posteriors* p);
NMP_API const float* nmp_posteriors_contours(const nmp_posteriors* p);
NMP_API void nmp_posteriors_free(nmp_posteriors* p);

/* ---- note tracking ---- */

typedef struct nmp_tracker_config {
    double onset_threshold;
    double note_threshold;
    int gap_tolerance_frames;
    double min_note_duration_s;
    int onset_order_by_likelihood; /* 0: latest onset first */
    int refine_pitch;
} nmp_tracker_config;

typedef struct nmp_note {
    double onset_s;
    double offset_s;
    int pitch_midi;
    double amplitude;
} nmp_note;

typedef struct nmp_pitch {
    double time_s;
    double frequency_hz;
    double salience;
} nmp_pitch;

NMP_API void nmp_tracker_config_default(nmp_tracker_config* cfg);

/* `cfg` may be null for defaults. */
NMP_API nmp_status nmp_track_notes(const nmp_posteriors* p, const nmp_tracker_config* cfg, nmp_notes** out);
NMP_API nmp_status nmp_multipitch(const nmp_posteriors* p, const nmp_tracker_config* cfg, nmp_pitches** out);

NMP_API nmp_status nmp_notes_create(const nmp_note* notes, size_t count, nmp_notes** out);
NMP_API size_t nmp_notes_count(const nmp_notes* notes);
NMP_API nmp_status nmp_notes_get(const nmp_notes* notes, size_t index, nmp_note* out);
NMP_API nmp_status nmp_notes_read_csv(const char* path, nmp_notes** out);
NMP_API nmp_status nmp_notes_write_csv(const nmp_notes* notes, const char* path);
NMP_API nmp_status nmp_notes_write_midi(const nmp_notes* notes, const char* path);
NMP_API void nmp_notes_free(nmp_notes* notes);

NMP_API size_t nmp_pitches_count(const nmp_pitches* pitches);
NMP_API nmp_status nmp_pitches_get(const nmp_pitches* pitches, size_t index, nmp_pitch* out);
NMP_API nmp_status nmp_pitches_write_csv(const nmp_pitches* pitches, const char* path);
NMP_API void nmp_pitches_free(nmp_pitches* pitches);

/* ---- evaluation ---- */

typedef struct nmp_track_metrics {
    double F;
    double Fno;
    double Acc;
    double precision;
    double recall;
    double precision_no_offset;
    double recall_no_offset;
} nmp_track_metrics;

NMP_API nmp_status nmp_evaluate_notes(const nmp_notes* ref, const nmp_notes* est, nmp_track_metrics* out);
/* Scores every `*.csv` present in both directories. `json_out` receives the
   report (free with nmp_string_free); `warning_count` may be null. */
NMP_API nmp_status nmp_evaluate_dirs(const char* ref_dir, const char* est_dir, char** json_out,
                                     size_t* warning_count);
/* Grid search of the note threshold over `<name>.csv` / `<name>.nmpw` pairs. */
NMP_API nmp_status nmp_tune_note_threshold(const char* ref_dir, const char* posteriors_dir,
                                           const nmp_tracker_config* base, double* threshold, double* mean_fno);

/* ---- training ---- */

typedef struct nmp_train_options {
    uint64_t seed;
    size_t steps;
    size_t n_clips;
    size_t batch_size;
    size_t crop_frames;
    double learning_rate;
    int augmentation;
    size_t validation_clips;
} nmp_train_options;

typedef void (*nmp_train_progress)(size_t step, double total_loss, void* user);

NMP_API void nmp_train_options_default(nmp_train_options* opts);
/* Trains on synthetic clips and writes the checkpoint, a `<weights>.json`
   sidecar and, if `loss_log_path` is non-null, the per-step loss CSV.
   `sidecar_json` (nullable) receives the sidecar text. */
NMP_API nmp_status nmp_train_toy(const nmp_train_options* opts, const char* weights_path, const char* loss_log_path,
                                 nmp_train_progress progress, void* user, char** sidecar_json);

/* ---- plotting ---- */

/* Stacked Y_p / Y_n / Y_o heatmaps with tracked notes drawn on Y_n, each
   cell enlarged to `scale` x `scale` pixels. */
NMP_API nmp_status nmp_plot_posteriors(const nmp_posteriors* p, const nmp_tracker_config* cfg, int scale,
                                       const char* png_path);

#ifdef __cplusplus
}
#endif

#endif
