#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "nmp/nmp.h"
#include "support/test_support.hpp"

using nmp::test::TempDir;

namespace {

std::string str(const std::filesystem::path& p)
{
    return p.string();
}

nmp_notes* makeNotes(std::vector<nmp_note> v)
{
    nmp_notes* out = nullptr;
    REQUIRE(nmp_notes_create(v.data(), v.size(), &out) == NMP_OK);
    return out;
}

} // namespace

TEST_CASE("status names and null arguments")
{
    CHECK(std::strlen(nmp_version()) > 0);
    CHECK(std::string(nmp_status_name(NMP_OK)) != std::string(nmp_status_name(NMP_ERR_FORMAT)));
    nmp_audio* a = nullptr;
    CHECK(nmp_audio_load(nullptr, &a) == NMP_ERR_ARGUMENT);
    CHECK(std::strlen(nmp_last_error()) > 0);
    CHECK(nmp_audio_length(nullptr) == 0);
    CHECK(nmp_notes_count(nullptr) == 0);
    nmp_audio_free(nullptr);
    nmp_notes_free(nullptr);
    nmp_string_free(nullptr);
    CHECK(nmp_audio_from_samples(nullptr, 5, 22050, &a) == NMP_ERR_ARGUMENT);
    CHECK(nmp_audio_from_samples(nullptr, 0, 0, &a) == NMP_ERR_ARGUMENT);
}

TEST_CASE("file errors map to status codes")
{
    TempDir dir;
    nmp_audio* a = nullptr;
    CHECK(nmp_audio_load(str(dir / "missing.wav").c_str(), &a) == NMP_ERR_IO);
    CHECK(a == nullptr);
    nmp::test::writeText(dir / "bad.wav", "RIFF....WAVEjunk");
    CHECK(nmp_audio_load(str(dir / "bad.wav").c_str(), &a) == NMP_ERR_FORMAT);
    nmp_model* m = nullptr;
    nmp::test::writeText(dir / "bad.nmpw", "NMPW");
    CHECK(nmp_model_load(str(dir / "bad.nmpw").c_str(), &m) == NMP_ERR_FORMAT);
    CHECK(std::string(nmp_last_error()).find("version") != std::string::npos);
    nmp_notes* n = nullptr;
    nmp::test::writeText(dir / "n.csv", "onset_s,offset_s,pitch_midi,amplitude\n0.1,0.05,60,1\n");
    CHECK(nmp_notes_read_csv(str(dir / "n.csv").c_str(), &n) == NMP_ERR_FORMAT);
}

TEST_CASE("audio handles")
{
    std::vector<float> x(44100);
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = float(0.5 * std::sin(2 * 3.141592653589793 * 440.0 * double(i) / 44100));
    nmp_audio* a = nullptr;
    REQUIRE(nmp_audio_from_samples(x.data(), x.size(), 44100, &a) == NMP_OK);
    CHECK(nmp_audio_length(a) == 44100);
    CHECK(nmp_audio_sample_rate(a) == 44100);
    nmp_audio* r = nullptr;
    REQUIRE(nmp_audio_resample(a, 22050, &r) == NMP_OK);
    CHECK(nmp_audio_length(r) == 22050);
    std::vector<float> y(10);
    CHECK(nmp_audio_copy_samples(r, y.data(), y.size()) == 10);
    nmp_audio_free(a);
    nmp_audio_free(r);
}

TEST_CASE("tracking through the c api")
{
    const std::size_t frames = 80;
    std::vector<float> onsets(frames * 88, 0.f), notes(frames * 88, 0.f);
    for (std::size_t t = 10; t < 60; ++t)
        notes[t * 88 + 39] = 0.9f;
    onsets[10 * 88 + 39] = 0.8f;
    nmp_posteriors* p = nullptr;
    REQUIRE(nmp_posteriors_create(frames, onsets.data(), notes.data(), nullptr, &p) == NMP_OK);
    CHECK(nmp_posteriors_frames(p) == frames);
    CHECK(nmp_posteriors_frame_period(p) == doctest::Approx(256.0 / 22050));
    CHECK(nmp_posteriors_contours(p)[5] == 0.f);

    nmp_tracker_config cfg;
    nmp_tracker_config_default(&cfg);
    CHECK(cfg.note_threshold == doctest::Approx(0.5));
    CHECK(cfg.onset_threshold == doctest::Approx(0.5));
    CHECK(cfg.gap_tolerance_frames == 11);
    nmp_notes* out = nullptr;
    REQUIRE(nmp_track_notes(p, &cfg, &out) == NMP_OK);
    REQUIRE(nmp_notes_count(out) == 1);
    nmp_note n;
    REQUIRE(nmp_notes_get(out, 0, &n) == NMP_OK);
    CHECK(n.pitch_midi == 60);
    CHECK(n.onset_s == doctest::Approx(10 * 256.0 / 22050));
    CHECK(nmp_notes_get(out, 1, &n) == NMP_ERR_ARGUMENT);

    cfg.note_threshold = 2.0;
    nmp_notes* bad = nullptr;
    CHECK(nmp_track_notes(p, &cfg, &bad) == NMP_ERR_CONTRACT);

    TempDir dir;
    REQUIRE(nmp_notes_write_csv(out, str(dir / "o.csv").c_str()) == NMP_OK);
    nmp_notes* back = nullptr;
    REQUIRE(nmp_notes_read_csv(str(dir / "o.csv").c_str(), &back) == NMP_OK);
    nmp_track_metrics m;
    REQUIRE(nmp_evaluate_notes(back, out, &m) == NMP_OK);
    CHECK(m.F == 1.0);
    CHECK(m.Fno == 1.0);
    REQUIRE(nmp_notes_write_midi(out, str(dir / "o.mid").c_str()) == NMP_OK);
    CHECK(nmp::test::readBytes(dir / "o.mid").size() > 14);
    REQUIRE(nmp_posteriors_save(p, str(dir / "p.nmpw").c_str()) == NMP_OK);
    nmp_posteriors* loaded = nullptr;
    REQUIRE(nmp_posteriors_load(str(dir / "p.nmpw").c_str(), &loaded) == NMP_OK);
    CHECK(std::memcmp(nmp_posteriors_notes(loaded), notes.data(), notes.size() * sizeof(float)) == 0);
    REQUIRE(nmp_plot_posteriors(loaded, nullptr, 2, str(dir / "p.png").c_str()) == NMP_OK);
    CHECK(std::filesystem::file_size(dir / "p.png") > 8);
    CHECK(nmp_plot_posteriors(loaded, nullptr, 0, str(dir / "q.png").c_str()) == NMP_ERR_ARGUMENT);

    nmp_pitches* pitches = nullptr;
    REQUIRE(nmp_multipitch(p, nullptr, &pitches) == NMP_OK);
    CHECK(nmp_pitches_count(pitches) == 0);
    nmp_pitches_free(pitches);
    nmp_posteriors_free(loaded);
    nmp_notes_free(back);
    nmp_notes_free(out);
    nmp_posteriors_free(p);
}

TEST_CASE("directory evaluation and threshold tuning")
{
    TempDir ref, est;
    nmp_notes* a = makeNotes({{0.1, 0.5, 60, 1.0}, {0.6, 0.9, 64, 1.0}});
    nmp_notes* b = makeNotes({{0.1, 0.5, 60, 1.0}});
    REQUIRE(nmp_notes_write_csv(a, str(ref / "x.csv").c_str()) == NMP_OK);
    REQUIRE(nmp_notes_write_csv(b, str(est / "x.csv").c_str()) == NMP_OK);
    char* json = nullptr;
    std::size_t warnings = 99;
    REQUIRE(nmp_evaluate_dirs(str(ref.path()).c_str(), str(est.path()).c_str(), &json, &warnings) == NMP_OK);
    CHECK(warnings == 0);
    CHECK(std::string(json).find("\"x\"") != std::string::npos);
    nmp_string_free(json);
    CHECK(nmp_evaluate_dirs(str(ref / "nope").c_str(), str(est.path()).c_str(), &json, nullptr) == NMP_ERR_IO);

    const std::size_t frames = 100;
    std::vector<float> notes(frames * 88, 0.f), onsets(frames * 88, 0.f);
    for (std::size_t t = 9; t < 43; ++t)
        notes[t * 88 + 39] = 0.45f;
    onsets[9 * 88 + 39] = 0.9f;
    nmp_posteriors* p = nullptr;
    REQUIRE(nmp_posteriors_create(frames, onsets.data(), notes.data(), nullptr, &p) == NMP_OK);
    REQUIRE(nmp_posteriors_save(p, str(est / "y.nmpw").c_str()) == NMP_OK);
    nmp_notes* one = makeNotes({{9 * 256.0 / 22050, 43 * 256.0 / 22050, 60, 1.0}});
    REQUIRE(nmp_notes_write_csv(one, str(ref / "y.csv").c_str()) == NMP_OK);
    double threshold = 0, fno = 0;
    REQUIRE(nmp_tune_note_threshold(str(ref.path()).c_str(), str(est.path()).c_str(), nullptr, &threshold, &fno)
            == NMP_OK);
    CHECK(fno == 1.0);
    CHECK(threshold < 0.45);
    nmp_notes_free(one);
    nmp_posteriors_free(p);
    nmp_notes_free(a);
    nmp_notes_free(b);
}

TEST_CASE("train, load and predict")
{
    size_t count = 0;
    REQUIRE(nmp_default_parameter_count(1, 1, &count) == NMP_OK);
    CHECK(count == 16798);
    REQUIRE(nmp_default_parameter_count(0, 1, &count) == NMP_OK);
    CHECK(count < 16798);

    nmp_train_options opts;
    nmp_train_options_default(&opts);
    CHECK(opts.n_clips == 64);
    CHECK(opts.steps <= 2000);
    opts.steps = 2;
    opts.n_clips = 2;
    opts.batch_size = 2;
    opts.crop_frames = 16;
    opts.validation_clips = 0;
    TempDir dir;
    std::size_t calls = 0;
    auto progress = [](size_t, double loss, void* user) {
        CHECK(std::isfinite(loss));
        ++*static_cast<std::size_t*>(user);
    };
    char* sidecar = nullptr;
    const auto weights = str(dir / "m.nmpw");
    REQUIRE(nmp_train_toy(&opts, weights.c_str(), str(dir / "loss.csv").c_str(), progress, &calls, &sidecar)
            == NMP_OK);
    CHECK(calls == 2);
    CHECK(std::string(sidecar).find("\"step\": 2") != std::string::npos);
    nmp_string_free(sidecar);
    CHECK(std::filesystem::exists(weights + ".json"));
    CHECK(nmp::test::readText(dir / "loss.csv").rfind("step,total,onset,note,contour\n", 0) == 0);

    nmp_model* m = nullptr;
    REQUIRE(nmp_model_load(weights.c_str(), &m) == NMP_OK);
    CHECK(nmp_model_parameter_count(m) == 16798);
    CHECK(nmp_model_harmonic_stacking(m) == 1);

    std::vector<float> x(30000, 0.f);
    nmp_audio* a = nullptr;
    REQUIRE(nmp_audio_from_samples(x.data(), x.size(), 22050, &a) == NMP_OK);
    nmp_posteriors* p = nullptr;
    REQUIRE(nmp_predict(m, a, &p) == NMP_OK);
    CHECK(nmp_posteriors_frames(p) == (30000 + 255) / 256);
    for (std::size_t i = 0; i < nmp_posteriors_frames(p) * 88; ++i) {
        const float v = nmp_posteriors_notes(p)[i];
        REQUIRE((v >= 0.f && v <= 1.f));
    }
    nmp_posteriors_free(p);
    nmp_audio_free(a);
    nmp_model_free(m);

    opts.batch_size = 0;
    CHECK(nmp_train_toy(&opts, weights.c_str(), nullptr, nullptr, nullptr, nullptr) == NMP_ERR_CONTRACT);
}
