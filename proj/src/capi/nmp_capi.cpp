#include "nmp/nmp.h"

#include <cstring>
#include <new>
#include <string>

#include "audio/resample.hpp"
#include "audio/wav.hpp"
#include "common/binary_io.hpp"
#include "common/errors.hpp"
#include "eval/corpus.hpp"
#include "model/predict.hpp"
#include "plot/heatmap.hpp"
#include "tracking/midi_writer.hpp"
#include "tracking/note_io.hpp"
#include "tracking/note_tracker.hpp"
#include "tracking/tune.hpp"
#include "train/trainer.hpp"

using namespace nmp;

struct nmp_audio {
    audio::AudioBuffer buffer;
};

struct nmp_model {
    model::NmpModel<float> net;
};

struct nmp_posteriors {
    model::Posteriorgrams data;
};

struct nmp_notes {
    std::vector<tracking::NoteEvent> events;
};

struct nmp_pitches {
    std::vector<tracking::PitchEstimate> estimates;
};

namespace {

thread_local std::string tLastError;

nmp_status fail(nmp_status status, std::string message)
{
    tLastError = std::move(message);
    return status;
}

template <class F>
nmp_status guarded(F&& body)
{
    try {
        tLastError.clear();
        body();
        return NMP_OK;
    } catch (const FormatError& e) {
        return fail(NMP_ERR_FORMAT, e.what());
    } catch (const UnsupportedFormatError& e) {
        return fail(NMP_ERR_UNSUPPORTED, e.what());
    } catch (const IoError& e) {
        return fail(NMP_ERR_IO, e.what());
    } catch (const ContractError& e) {
        return fail(NMP_ERR_CONTRACT, e.what());
    } catch (const StateError& e) {
        return fail(NMP_ERR_STATE, e.what());
    } catch (const std::bad_alloc&) {
        return fail(NMP_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(NMP_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(NMP_ERR_INTERNAL, "unknown error");
    }
}

#define NMP_REQUIRE(cond)                                                                                              \
    do {                                                                                                               \
        if (!(cond))                                                                                                   \
            return fail(NMP_ERR_ARGUMENT, "invalid argument: " #cond);                                                 \
    } while (0)

char* duplicate(const std::string& s)
{
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

tracking::TrackerConfig trackerConfig(const nmp_tracker_config* cfg)
{
    tracking::TrackerConfig out;
    if (!cfg)
        return out;
    out.onset_threshold = cfg->onset_threshold;
    out.note_threshold = cfg->note_threshold;
    out.gap_tolerance_frames = cfg->gap_tolerance_frames;
    out.min_note_duration_s = cfg->min_note_duration_s;
    out.onset_order = cfg->onset_order_by_likelihood ? tracking::OnsetOrder::MostLikelyFirst
                                                     : tracking::OnsetOrder::LatestFirst;
    out.refine_pitch = cfg->refine_pitch != 0;
    return out;
}

} // namespace

extern "C" {

const char* nmp_version(void)
{
    return "0.1.0";
}

const char* nmp_status_name(nmp_status status)
{
    switch (status) {
    case NMP_OK:
        return "ok";
    case NMP_ERR_ARGUMENT:
        return "invalid argument";
    case NMP_ERR_FORMAT:
        return "format error";
    case NMP_ERR_UNSUPPORTED:
        return "unsupported format";
    case NMP_ERR_IO:
        return "i/o error";
    case NMP_ERR_CONTRACT:
        return "contract violation";
    case NMP_ERR_STATE:
        return "invalid state";
    case NMP_ERR_INTERNAL:
        return "internal error";
    }
    return "unknown status";
}

const char* nmp_last_error(void)
{
    return tLastError.c_str();
}

void nmp_string_free(char* s)
{
    delete[] s;
}

nmp_status nmp_audio_load(const char* path, nmp_audio** out)
{
    NMP_REQUIRE(path && out);
    *out = nullptr;
    return guarded([&] {
        auto buf = audio::resample(audio::loadWav(path), audio::kModelSampleRate);
        *out = new nmp_audio{std::move(buf)};
    });
}

nmp_status nmp_audio_from_samples(const float* samples, size_t count, int sample_rate, nmp_audio** out)
{
    NMP_REQUIRE(out && (samples || count == 0) && sample_rate > 0);
    *out = nullptr;
    return guarded([&] {
        audio::AudioBuffer buf;
        buf.sample_rate = sample_rate;
        buf.samples.assign(samples, samples + count);
        *out = new nmp_audio{std::move(buf)};
    });
}

nmp_status nmp_audio_resample(const nmp_audio* a, int sample_rate, nmp_audio** out)
{
    NMP_REQUIRE(a && out && sample_rate > 0);
    *out = nullptr;
    return guarded([&] { *out = new nmp_audio{audio::resample(a->buffer, sample_rate)}; });
}

size_t nmp_audio_length(const nmp_audio* a)
{
    return a ? a->buffer.samples.size() : 0;
}

int nmp_audio_sample_rate(const nmp_audio* a)
{
    return a ? a->buffer.sample_rate : 0;
}

size_t nmp_audio_copy_samples(const nmp_audio* a, float* dst, size_t count)
{
    if (!a || !dst)
        return 0;
    const size_t n = std::min(count, a->buffer.samples.size());
    for (size_t i = 0; i < n; ++i)
        dst[i] = float(a->buffer.samples[i]);
    return n;
}

void nmp_audio_free(nmp_audio* a)
{
    delete a;
}

nmp_status nmp_model_load(const char* weights_path, nmp_model** out)
{
    NMP_REQUIRE(weights_path && out);
    *out = nullptr;
    return guarded([&] {
        const auto archive = nn::loadWeights(weights_path);
        *out = new nmp_model{model::NmpModel<float>::fromArchive(archive, model::inferConfig(archive))};
    });
}

size_t nmp_model_parameter_count(const nmp_model* m)
{
    return m ? m->net.trainableParameterCount() : 0;
}

int nmp_model_harmonic_stacking(const nmp_model* m)
{
    return m && m->net.config().use_harmonic_stacking ? 1 : 0;
}

nmp_status nmp_default_parameter_count(int harmonic_stacking, int supervise_contour, size_t* out)
{
    NMP_REQUIRE(out);
    return guarded([&] {
        model::ModelConfig cfg;
        cfg.use_harmonic_stacking = harmonic_stacking != 0;
        cfg.supervise_contour = supervise_contour != 0;
        *out = model::NmpModel<float>(cfg).trainableParameterCount();
    });
}

nmp_status nmp_predict(nmp_model* m, const nmp_audio* a, nmp_posteriors** out)
{
    NMP_REQUIRE(m && a && out);
    *out = nullptr;
    return guarded([&] {
        const auto& buf = a->buffer;
        auto p = buf.sample_rate == audio::kModelSampleRate
            ? model::predict(buf, m->net)
            : model::predict(audio::resample(buf, audio::kModelSampleRate), m->net);
        *out = new nmp_posteriors{std::move(p)};
    });
}

void nmp_model_free(nmp_model* m)
{
    delete m;
}

nmp_status nmp_posteriors_load(const char* path, nmp_posteriors** out)
{
    NMP_REQUIRE(path && out);
    *out = nullptr;
    return guarded([&] { *out = new nmp_posteriors{model::loadPosteriors(path)}; });
}

nmp_status nmp_posteriors_save(const nmp_posteriors* p, const char* path)
{
    NMP_REQUIRE(p && path);
    return guarded([&] { model::savePosteriors(p->data, path); });
}

nmp_status nmp_posteriors_create(size_t frames, const float* onsets, const float* notes, const float* contours,
                                 nmp_posteriors** out)
{
    NMP_REQUIRE(out);
    *out = nullptr;
    return guarded([&] {
        auto p = model::Posteriorgrams::zeros(frames);
        if (onsets)
            p.onsets.assign(onsets, onsets + p.onsets.size());
        if (notes)
            p.notes.assign(notes, notes + p.notes.size());
        if (contours)
            p.contours.assign(contours, contours + p.contours.size());
        // Round-trip through the archive form to apply the same validation as loading.
        *out = new nmp_posteriors{model::posteriorsFromArchive(model::posteriorsToArchive(p))};
    });
}

size_t nmp_posteriors_frames(const nmp_posteriors* p)
{
    return p ? p->data.frames : 0;
}

double nmp_posteriors_frame_period(const nmp_posteriors* p)
{
    return p ? p->data.framePeriod() : 0.0;
}

const float* nmp_posteriors_onsets(const nmp_posteriors* p)
{
    return p ? p->data.onsets.data() : nullptr;
}

const float* nmp_posteriors_notes(const nmp_posteriors* p)
{
    return p ? p->data.notes.data() : nullptr;
}

const float* nmp_posteriors_contours(const nmp_posteriors* p)
{
    return p ? p->data.contours.data() : nullptr;
}

void nmp_posteriors_free(nmp_posteriors* p)
{
    delete p;
}

void nmp_tracker_config_default(nmp_tracker_config* cfg)
{
    if (!cfg)
        return;
    const tracking::TrackerConfig d;
    cfg->onset_threshold = d.onset_threshold;
    cfg->note_threshold = d.note_threshold;
    cfg->gap_tolerance_frames = d.gap_tolerance_frames;
    cfg->min_note_duration_s = d.min_note_duration_s;
    cfg->onset_order_by_likelihood = 0;
    cfg->refine_pitch = d.refine_pitch ? 1 : 0;
}

nmp_status nmp_track_notes(const nmp_posteriors* p, const nmp_tracker_config* cfg, nmp_notes** out)
{
    NMP_REQUIRE(p && out);
    *out = nullptr;
    return guarded([&] { *out = new nmp_notes{tracking::noteEvents(p->data, trackerConfig(cfg))}; });
}

nmp_status nmp_multipitch(const nmp_posteriors* p, const nmp_tracker_config* cfg, nmp_pitches** out)
{
    NMP_REQUIRE(p && out);
    *out = nullptr;
    return guarded([&] {
        auto result = std::make_unique<nmp_pitches>();
        for (const auto& frame : tracking::multipitch(p->data, trackerConfig(cfg)))
            result->estimates.insert(result->estimates.end(), frame.begin(), frame.end());
        *out = result.release();
    });
}

nmp_status nmp_notes_create(const nmp_note* notes, size_t count, nmp_notes** out)
{
    NMP_REQUIRE(out && (notes || count == 0));
    *out = nullptr;
    return guarded([&] {
        auto result = std::make_unique<nmp_notes>();
        for (size_t i = 0; i < count; ++i)
            result->events.push_back({notes[i].onset_s, notes[i].offset_s, notes[i].pitch_midi, notes[i].amplitude});
        *out = result.release();
    });
}

size_t nmp_notes_count(const nmp_notes* notes)
{
    return notes ? notes->events.size() : 0;
}

nmp_status nmp_notes_get(const nmp_notes* notes, size_t index, nmp_note* out)
{
    NMP_REQUIRE(notes && out && index < notes->events.size());
    const auto& e = notes->events[index];
    *out = {e.onset_s, e.offset_s, e.pitch_midi, e.amplitude};
    return NMP_OK;
}

nmp_status nmp_notes_read_csv(const char* path, nmp_notes** out)
{
    NMP_REQUIRE(path && out);
    *out = nullptr;
    return guarded([&] { *out = new nmp_notes{tracking::readNotesCsv(path)}; });
}

nmp_status nmp_notes_write_csv(const nmp_notes* notes, const char* path)
{
    NMP_REQUIRE(notes && path);
    return guarded([&] { tracking::writeNotesCsv(path, notes->events); });
}

nmp_status nmp_notes_write_midi(const nmp_notes* notes, const char* path)
{
    NMP_REQUIRE(notes && path);
    return guarded([&] { tracking::writeMidi(path, notes->events); });
}

void nmp_notes_free(nmp_notes* notes)
{
    delete notes;
}

size_t nmp_pitches_count(const nmp_pitches* pitches)
{
    return pitches ? pitches->estimates.size() : 0;
}

nmp_status nmp_pitches_get(const nmp_pitches* pitches, size_t index, nmp_pitch* out)
{
    NMP_REQUIRE(pitches && out && index < pitches->estimates.size());
    const auto& e = pitches->estimates[index];
    *out = {e.time_s, e.frequency_hz, e.salience};
    return NMP_OK;
}

nmp_status nmp_pitches_write_csv(const nmp_pitches* pitches, const char* path)
{
    NMP_REQUIRE(pitches && path);
    return guarded([&] { tracking::writePitchCsv(path, {pitches->estimates}); });
}

void nmp_pitches_free(nmp_pitches* pitches)
{
    delete pitches;
}

nmp_status nmp_evaluate_notes(const nmp_notes* ref, const nmp_notes* est, nmp_track_metrics* out)
{
    NMP_REQUIRE(ref && est && out);
    return guarded([&] {
        const auto m = eval::evaluateTrack(ref->events, est->events);
        *out = {m.F(),
                m.Fno(),
                m.acc,
                m.with_offset.precision,
                m.with_offset.recall,
                m.no_offset.precision,
                m.no_offset.recall};
    });
}

nmp_status nmp_evaluate_dirs(const char* ref_dir, const char* est_dir, char** json_out, size_t* warning_count)
{
    NMP_REQUIRE(ref_dir && est_dir && json_out);
    *json_out = nullptr;
    return guarded([&] {
        const auto report = eval::evaluateDirectories(ref_dir, est_dir);
        if (warning_count)
            *warning_count = report.warnings.size();
        *json_out = duplicate(eval::reportToJson(report).dump(2));
    });
}

nmp_status nmp_tune_note_threshold(const char* ref_dir, const char* posteriors_dir, const nmp_tracker_config* base,
                                   double* threshold, double* mean_fno)
{
    NMP_REQUIRE(ref_dir && posteriors_dir && threshold);
    return guarded([&] {
        const auto cases = tracking::loadTuneCases(ref_dir, posteriors_dir);
        const auto result = tracking::tuneNoteThreshold(cases, trackerConfig(base));
        *threshold = result.threshold;
        if (mean_fno)
            *mean_fno = result.mean_fno;
    });
}

void nmp_train_options_default(nmp_train_options* opts)
{
    if (!opts)
        return;
    const train::TrainConfig d;
    opts->seed = d.seed;
    opts->steps = d.steps;
    opts->n_clips = d.n_clips;
    opts->batch_size = d.batch_size;
    opts->crop_frames = d.crop_frames;
    opts->learning_rate = d.learning_rate;
    opts->augmentation = d.augmentation ? 1 : 0;
    opts->validation_clips = d.validation_clips;
}

nmp_status nmp_train_toy(const nmp_train_options* opts, const char* weights_path, const char* loss_log_path,
                         nmp_train_progress progress, void* user, char** sidecar_json)
{
    NMP_REQUIRE(opts && weights_path);
    if (sidecar_json)
        *sidecar_json = nullptr;
    return guarded([&] {
        train::TrainConfig cfg;
        cfg.seed = opts->seed;
        cfg.steps = opts->steps;
        cfg.n_clips = opts->n_clips;
        cfg.batch_size = opts->batch_size;
        cfg.crop_frames = opts->crop_frames;
        cfg.learning_rate = opts->learning_rate;
        cfg.augmentation = opts->augmentation != 0;
        cfg.validation_clips = opts->validation_clips;
        std::function<void(const train::LossRecord&)> onStep;
        if (progress)
            onStep = [&](const train::LossRecord& r) { progress(r.step, r.terms.total, user); };
        const auto result = train::trainToy(cfg, onStep);

        const std::string sidecar = train::trainSidecar(cfg, result).dump(2) + "\n";
        const std::filesystem::path weights(weights_path);
        nn::saveWeights(result.model.toArchive(), weights);
        auto sidecarPath = weights;
        sidecarPath += ".json";
        writeFileAtomic(sidecarPath, std::span(reinterpret_cast<const std::uint8_t*>(sidecar.data()), sidecar.size()));
        if (loss_log_path) {
            const std::string log = train::formatLossLog(result.log);
            writeFileAtomic(loss_log_path, std::span(reinterpret_cast<const std::uint8_t*>(log.data()), log.size()));
        }
        if (sidecar_json)
            *sidecar_json = duplicate(sidecar);
    });
}

nmp_status nmp_plot_posteriors(const nmp_posteriors* p, const nmp_tracker_config* cfg, int scale, const char* png_path)
{
    NMP_REQUIRE(p && png_path && scale >= 1 && scale <= 16);
    return guarded([&] {
        const auto notes = tracking::trackNotes(p->data, trackerConfig(cfg));
        plot::writePng(png_path, plot::renderPosteriorPlot(p->data, notes).scaled(std::size_t(scale)));
    });
}

} // extern "C"
