// nmp: command-line front end over the shared library.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nmp/nmp.h"

namespace fs = std::filesystem;

namespace {

enum ExitCode { kOk = 0, kConfigError = 2, kInputError = 3, kInternalError = 4 };

int report(int code, const std::string& what)
{
    std::fprintf(stderr, "nmp: %s\n", what.c_str());
    return code;
}

int reportStatus(int code, const std::string& what, nmp_status status)
{
    return report(code, what + ": " + nmp_last_error() + " (" + nmp_status_name(status) + ")");
}

// Exit code for a failure while reading user-supplied input.
int inputFailure(nmp_status status)
{
    return status == NMP_ERR_INTERNAL ? kInternalError : kInputError;
}

template <class T, void (*Free)(T*)>
struct Handle {
    T* ptr = nullptr;
    Handle() = default;
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;
    ~Handle() { Free(ptr); }
    T** out() { return &ptr; }
    T* get() const { return ptr; }
};

using Audio = Handle<nmp_audio, nmp_audio_free>;
using Model = Handle<nmp_model, nmp_model_free>;
using Posteriors = Handle<nmp_posteriors, nmp_posteriors_free>;
using Notes = Handle<nmp_notes, nmp_notes_free>;
using Pitches = Handle<nmp_pitches, nmp_pitches_free>;

bool inUnitInterval(double v)
{
    return v > 0.0 && v < 1.0;
}

struct TranscribeArgs {
    std::string input;
    std::string midi, notes, mpe, posteriors, weights;
    double onset_thresh = 0.5;
    double note_thresh = 0.5;
    double min_note_ms = 120.0;
};

int runTranscribe(const TranscribeArgs& a)
{
    std::string weights = a.weights;
    if (weights.empty()) {
        if (const char* env = std::getenv("NMP_WEIGHTS"))
            weights = env;
    }
    if (weights.empty())
        return report(kConfigError, "no weights given (use --weights or set NMP_WEIGHTS)");
    if (!inUnitInterval(a.onset_thresh) || !inUnitInterval(a.note_thresh))
        return report(kConfigError, "thresholds must lie strictly between 0 and 1");
    if (!(a.min_note_ms >= 0.0))
        return report(kConfigError, "--min-note-ms must be non-negative");

    Model model;
    if (nmp_status s = nmp_model_load(weights.c_str(), model.out()))
        return reportStatus(kConfigError, "cannot load weights '" + weights + "'", s);
    Audio audio;
    if (nmp_status s = nmp_audio_load(a.input.c_str(), audio.out()))
        return reportStatus(inputFailure(s), "cannot read audio '" + a.input + "'", s);
    if (nmp_audio_length(audio.get()) == 0)
        return report(kInputError, "audio '" + a.input + "' contains no samples");

    Posteriors post;
    if (nmp_status s = nmp_predict(model.get(), audio.get(), post.out()))
        return reportStatus(kInternalError, "inference failed", s);

    nmp_tracker_config cfg;
    nmp_tracker_config_default(&cfg);
    cfg.onset_threshold = a.onset_thresh;
    cfg.note_threshold = a.note_thresh;
    cfg.min_note_duration_s = a.min_note_ms / 1000.0;
    Notes notes;
    if (nmp_status s = nmp_track_notes(post.get(), &cfg, notes.out()))
        return reportStatus(kInternalError, "note tracking failed", s);
    Pitches pitches;
    if (!a.mpe.empty()) {
        if (nmp_status s = nmp_multipitch(post.get(), &cfg, pitches.out()))
            return reportStatus(kInternalError, "multipitch estimation failed", s);
    }

    const bool anyOutput = !a.midi.empty() || !a.notes.empty() || !a.mpe.empty() || !a.posteriors.empty();
    if (!anyOutput) {
        for (size_t i = 0; i < nmp_notes_count(notes.get()); ++i) {
            nmp_note n;
            nmp_notes_get(notes.get(), i, &n);
            std::printf("%.6f,%.6f,%d,%.6f\n", n.onset_s, n.offset_s, n.pitch_midi, n.amplitude);
        }
        return kOk;
    }

    // Every file is written atomically; if one fails, the ones already written are removed.
    std::vector<std::string> written;
    auto write = [&](const std::string& path, auto&& writer) {
        if (path.empty())
            return true;
        if (nmp_status s = writer(path.c_str())) {
            reportStatus(kConfigError, "cannot write '" + path + "'", s);
            return false;
        }
        written.push_back(path);
        return true;
    };
    const bool ok = write(a.notes, [&](const char* p) { return nmp_notes_write_csv(notes.get(), p); })
        && write(a.midi, [&](const char* p) { return nmp_notes_write_midi(notes.get(), p); })
        && write(a.mpe, [&](const char* p) { return nmp_pitches_write_csv(pitches.get(), p); })
        && write(a.posteriors, [&](const char* p) { return nmp_posteriors_save(post.get(), p); });
    if (!ok) {
        std::error_code ec;
        for (const auto& p : written)
            fs::remove(p, ec);
        return kConfigError;
    }
    return kOk;
}

int runEval(const std::string& ref, const std::string& est, const std::string& jsonPath)
{
    char* json = nullptr;
    size_t warnings = 0;
    if (nmp_status s = nmp_evaluate_dirs(ref.c_str(), est.c_str(), &json, &warnings))
        return reportStatus(inputFailure(s), "evaluation failed", s);
    std::string text(json);
    nmp_string_free(json);
    text += "\n";
    if (warnings > 0)
        std::fprintf(stderr, "nmp: %zu warning(s); see \"warnings\" in the report\n", warnings);
    if (!jsonPath.empty()) {
        const std::string tmp = jsonPath + ".partial";
        std::FILE* f = std::fopen(tmp.c_str(), "wb");
        if (!f || std::fwrite(text.data(), 1, text.size(), f) != text.size() || std::fclose(f) != 0) {
            std::error_code ec;
            fs::remove(tmp, ec);
            return report(kConfigError, "cannot write '" + jsonPath + "'");
        }
        fs::rename(tmp, jsonPath);
    }
    std::fputs(text.c_str(), stdout);
    return kOk;
}

int runTune(const std::string& ref, const std::string& posteriors)
{
    double threshold = 0.0;
    double fno = 0.0;
    if (nmp_status s = nmp_tune_note_threshold(ref.c_str(), posteriors.c_str(), nullptr, &threshold, &fno))
        return reportStatus(inputFailure(s), "tuning failed", s);
    std::printf("{\"note_threshold\": %.2f, \"mean_Fno\": %.6f}\n", threshold, fno);
    return kOk;
}

struct TrainArgs {
    std::string out;
    std::string log;
    nmp_train_options opts{};
    bool no_augment = false;
    bool quiet = false;
};

void printProgress(size_t step, double loss, void*)
{
    if (step % 50 == 0)
        std::fprintf(stderr, "step %zu loss %.5f\n", step, loss);
}

int runTrain(TrainArgs& a)
{
    if (a.opts.batch_size == 0 || a.opts.crop_frames == 0 || a.opts.n_clips == 0 || !(a.opts.learning_rate > 0))
        return report(kConfigError, "batch, crop, clip count and learning rate must be positive");
    a.opts.augmentation = a.no_augment ? 0 : 1;
    const std::string log = a.log.empty() ? a.out + ".loss.csv" : a.log;
    char* sidecar = nullptr;
    if (nmp_status s = nmp_train_toy(&a.opts, a.out.c_str(), log.c_str(), a.quiet ? nullptr : printProgress, nullptr,
                                     &sidecar))
        return reportStatus(s == NMP_ERR_IO ? kConfigError : kInternalError, "training failed", s);
    if (!a.quiet)
        std::fputs(sidecar, stdout);
    nmp_string_free(sidecar);
    return kOk;
}

int runPlot(const std::string& posteriorsPath, const std::string& out, int scale, double noteThresh,
            double onsetThresh)
{
    if (!inUnitInterval(noteThresh) || !inUnitInterval(onsetThresh))
        return report(kConfigError, "thresholds must lie strictly between 0 and 1");
    Posteriors post;
    if (nmp_status s = nmp_posteriors_load(posteriorsPath.c_str(), post.out()))
        return reportStatus(inputFailure(s), "cannot read posteriorgrams '" + posteriorsPath + "'", s);
    nmp_tracker_config cfg;
    nmp_tracker_config_default(&cfg);
    cfg.note_threshold = noteThresh;
    cfg.onset_threshold = onsetThresh;
    if (nmp_status s = nmp_plot_posteriors(post.get(), &cfg, scale, out.c_str()))
        return reportStatus(s == NMP_ERR_ARGUMENT || s == NMP_ERR_IO ? kConfigError : kInternalError,
                            "cannot write '" + out + "'", s);
    return kOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Lightweight polyphonic note transcription"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(nmp_version()));

    TranscribeArgs ta;
    auto* transcribe = app.add_subcommand("transcribe", "Transcribe a WAV file");
    transcribe->add_option("input", ta.input, "Input WAV file")->required();
    transcribe->add_option("--midi", ta.midi, "Write a MIDI file");
    transcribe->add_option("--notes", ta.notes, "Write note events as CSV");
    transcribe->add_option("--mpe", ta.mpe, "Write multipitch estimates as CSV");
    transcribe->add_option("--posteriors", ta.posteriors, "Write posteriorgrams (NMPW)");
    transcribe->add_option("--onset-thresh", ta.onset_thresh, "Onset peak threshold")->capture_default_str();
    transcribe->add_option("--note-thresh", ta.note_thresh, "Note threshold")->capture_default_str();
    transcribe->add_option("--min-note-ms", ta.min_note_ms, "Minimum note length in ms")->capture_default_str();
    transcribe->add_option("--weights", ta.weights, "Model weights (default: $NMP_WEIGHTS)");

    std::string refDir, estDir, jsonPath;
    auto* evalCmd = app.add_subcommand("eval", "Score estimated note CSVs against references");
    evalCmd->add_option("--ref", refDir, "Reference directory")->required();
    evalCmd->add_option("--est", estDir, "Estimate directory")->required();
    evalCmd->add_option("--json", jsonPath, "Also write the report here");

    std::string tuneRef, tunePost;
    auto* tune = app.add_subcommand("tune", "Pick the note threshold maximising Fno");
    tune->add_option("--ref", tuneRef, "Reference note CSVs")->required();
    tune->add_option("--posteriors", tunePost, "Matching <name>.nmpw posteriorgrams")->required();

    TrainArgs tr;
    nmp_train_options_default(&tr.opts);
    auto* trainCmd = app.add_subcommand("train-toy", "Train on synthetic clips");
    trainCmd->add_option("--out", tr.out, "Checkpoint path")->required();
    trainCmd->add_option("--steps", tr.opts.steps, "Optimiser steps")->capture_default_str();
    trainCmd->add_option("--seed", tr.opts.seed, "Random seed")->capture_default_str();
    trainCmd->add_option("--clips", tr.opts.n_clips, "Number of synthetic clips")->capture_default_str();
    trainCmd->add_option("--batch", tr.opts.batch_size, "Batch size")->capture_default_str();
    trainCmd->add_option("--crop", tr.opts.crop_frames, "Frames per training crop")->capture_default_str();
    trainCmd->add_option("--lr", tr.opts.learning_rate, "Learning rate")->capture_default_str();
    trainCmd->add_option("--validation-clips", tr.opts.validation_clips, "Clips for threshold tuning")
        ->capture_default_str();
    trainCmd->add_flag("--no-augment", tr.no_augment, "Disable noise/EQ augmentation");
    trainCmd->add_option("--log", tr.log, "Loss log CSV (default: <out>.loss.csv)");
    trainCmd->add_flag("--quiet", tr.quiet, "No progress output");

    std::string plotIn, plotOut;
    int scale = 1;
    double plotNote = 0.5, plotOnset = 0.5;
    auto* plotCmd = app.add_subcommand("plot", "Render posteriorgrams as a PNG");
    plotCmd->add_option("--posteriors", plotIn, "Posteriorgram file")->required();
    plotCmd->add_option("--out", plotOut, "PNG path")->required();
    plotCmd->add_option("--scale", scale, "Pixels per cell")->check(CLI::Range(1, 16))->capture_default_str();
    plotCmd->add_option("--note-thresh", plotNote, "Note threshold for the overlay")->capture_default_str();
    plotCmd->add_option("--onset-thresh", plotOnset, "Onset threshold for the overlay")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*transcribe)
            return runTranscribe(ta);
        if (*evalCmd)
            return runEval(refDir, estDir, jsonPath);
        if (*tune)
            return runTune(tuneRef, tunePost);
        if (*trainCmd)
            return runTrain(tr);
        if (*plotCmd)
            return runPlot(plotIn, plotOut, scale, plotNote, plotOnset);
    } catch (const std::exception& e) {
        return report(kInternalError, e.what());
    }
    return kInternalError;
}
