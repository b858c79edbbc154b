#include <doctest.h>

#include <cstdlib>
#include <string>

#include <png.h>
#include <set>
#include <sys/wait.h>

#include <json.hpp>

#include "audio/wav.hpp"
#include "model/posteriorgrams.hpp"
#include "support/test_support.hpp"
#include "tracking/note_io.hpp"

using namespace nmp;
using test::TempDir;

namespace {

std::string quote(const std::string& s)
{
    return "'" + s + "'";
}

int nmpRun(const std::string& args, const std::string& env = "")
{
    const std::string cmd = env + " " + quote(NMP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string trainedWeights()
{
    const char* w = std::getenv("NMP_TEST_WEIGHTS");
    REQUIRE_MESSAGE(w != nullptr, "NMP_TEST_WEIGHTS is not set");
    return w;
}

std::string p(const std::filesystem::path& path)
{
    return quote(path.string());
}

void writeTone(const std::filesystem::path& path, double freq, double onset, double offset, double total)
{
    audio::AudioBuffer buf;
    buf.sample_rate = 22050;
    buf.samples.assign(std::size_t(total * 22050), 0.0);
    const auto tone = test::sine(freq, offset - onset, 22050, 0.5);
    const std::size_t start = std::size_t(onset * 22050);
    for (std::size_t i = 0; i < tone.size(); ++i) {
        const double fade = std::min({1.0, double(i) / 110.0, double(tone.size() - i) / 110.0});
        buf.samples[start + i] = tone[i] * fade;
    }
    audio::saveWav(path, buf, audio::WavEncoding::Pcm16);
}

struct Png {
    std::size_t width = 0, height = 0;
    std::vector<std::uint8_t> rgb;
};

Png readPng(const std::filesystem::path& path)
{
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    REQUIRE(png_image_begin_read_from_file(&img, path.c_str()));
    img.format = PNG_FORMAT_RGB;
    Png out{img.width, img.height, std::vector<std::uint8_t>(PNG_IMAGE_SIZE(img))};
    REQUIRE(png_image_finish_read(&img, nullptr, out.rgb.data(), 0, nullptr));
    return out;
}

} // namespace

TEST_CASE("transcribe reports configuration and input errors")
{
    TempDir dir;
    writeTone(dir / "a.wav", 440, 0.1, 0.5, 1.0);
    CHECK(nmpRun("transcribe " + p(dir / "a.wav"), "env -u NMP_WEIGHTS") == 2);
    CHECK(nmpRun("transcribe " + p(dir / "a.wav") + " --weights " + p(dir / "none.nmpw")) == 2);

    test::writeText(dir / "junk.wav", "not audio");
    CHECK(nmpRun("transcribe " + p(dir / "junk.wav") + " --weights " + p(dir / "none.nmpw")) == 2);
    CHECK(nmpRun("transcribe") == 2);
    CHECK(nmpRun("frobnicate") == 2);
}

TEST_CASE("train-toy with zero steps writes initial weights and an empty log")
{
    TempDir dir;
    const std::string common = " --steps 0 --seed 3 --clips 2 --validation-clips 0 --quiet";
    REQUIRE(nmpRun("train-toy --out " + p(dir / "a.nmpw") + common) == 0);
    CHECK(test::readText(dir / "a.nmpw.loss.csv") == "step,total,onset,note,contour\n");
    CHECK(std::filesystem::exists(dir / "a.nmpw.json"));
    REQUIRE(nmpRun("train-toy --out " + p(dir / "b.nmpw") + common) == 0);
    CHECK(test::readBytes(dir / "a.nmpw") == test::readBytes(dir / "b.nmpw"));

    SUBCASE("bad inputs")
    {
        writeTone(dir / "a.wav", 440, 0.1, 0.5, 1.0);
        const std::string w = " --weights " + p(dir / "a.nmpw");
        CHECK(nmpRun("transcribe " + p(dir / "missing.wav") + w + " --notes " + p(dir / "o.csv")) == 3);
        CHECK(!std::filesystem::exists(dir / "o.csv"));
        test::writeText(dir / "junk.wav", "RIFF0000WAVEfmt ");
        CHECK(nmpRun("transcribe " + p(dir / "junk.wav") + w + " --midi " + p(dir / "o.mid")) == 3);
        CHECK(!std::filesystem::exists(dir / "o.mid"));
        CHECK(nmpRun("transcribe " + p(dir / "a.wav") + w + " --note-thresh 1.5") == 2);
        CHECK(nmpRun("transcribe " + p(dir / "a.wav") + w + " --onset-thresh 0") == 2);
        CHECK(nmpRun("transcribe " + p(dir / "a.wav") + " --notes " + p(dir / "e.csv"),
                     "NMP_WEIGHTS=" + p(dir / "a.nmpw"))
              == 0);
        CHECK(nmpRun("transcribe " + p(dir / "a.wav") + w + " --notes " + p(dir / "f.csv"),
                     "NMP_WEIGHTS=" + p(dir / "none.nmpw"))
              == 0);
        CHECK(nmpRun("transcribe " + p(dir / "a.wav") + w + " --notes " + p(dir / "nodir" / "x.csv")) == 2);
    }
    SUBCASE("all outputs")
    {
        writeTone(dir / "a.wav", 440, 0.1, 0.5, 1.0);
        REQUIRE(nmpRun("transcribe " + p(dir / "a.wav") + " --weights " + p(dir / "a.nmpw") + " --notes "
                       + p(dir / "n.csv") + " --midi " + p(dir / "n.mid") + " --mpe " + p(dir / "m.csv")
                       + " --posteriors " + p(dir / "p.nmpw"))
                == 0);
        for (const char* f : {"n.csv", "n.mid", "m.csv", "p.nmpw"})
            CHECK(std::filesystem::exists(dir / f));
        CHECK(model::loadPosteriors(dir / "p.nmpw").frames == (22050 + 255) / 256);
    }
}

TEST_CASE("eval of a directory against itself scores one, empty estimates zero")
{
    TempDir ref, empty;
    tracking::writeNotesCsv(ref / "a.csv", {{0.1, 0.5, 60, 1.0}, {0.3, 0.9, 67, 0.5}});
    tracking::writeNotesCsv(ref / "b.csv", {{1.0, 1.5, 48, 1.0}});
    tracking::writeNotesCsv(empty / "a.csv", {});
    tracking::writeNotesCsv(empty / "b.csv", {});
    REQUIRE(nmpRun("eval --ref " + p(ref.path()) + " --est " + p(ref.path()) + " --json " + p(ref / "r.json")) == 0);
    const auto same = nlohmann::json::parse(test::readText(ref / "r.json"));
    CHECK(same["mean"]["F"] == 1.0);
    CHECK(same["mean"]["Fno"] == 1.0);
    CHECK(same["mean"]["Acc"] == 1.0);
    std::filesystem::remove(ref / "r.json");
    REQUIRE(nmpRun("eval --ref " + p(ref.path()) + " --est " + p(empty.path()) + " --json " + p(empty / "r.json"))
            == 0);
    const auto zero = nlohmann::json::parse(test::readText(empty / "r.json"));
    CHECK(zero["mean"]["F"] == 0.0);
    CHECK(zero["mean"]["Fno"] == 0.0);
    CHECK(zero["mean"]["Acc"] == 0.0);

    TempDir partial;
    tracking::writeNotesCsv(partial / "a.csv", {{0.1, 0.5, 60, 1.0}});
    REQUIRE(nmpRun("eval --ref " + p(ref.path()) + " --est " + p(partial.path()) + " --json " + p(partial / "r.json"))
            == 0);
    CHECK(nlohmann::json::parse(test::readText(partial / "r.json"))["warnings"].size() == 1);
    CHECK(nmpRun("eval --ref " + p(ref / "missing") + " --est " + p(ref.path())) == 3);
}

TEST_CASE("eval matches the reference tracks report")
{
    TempDir out;
    const std::filesystem::path tracks = NMP_TRACKS_DIR;
    REQUIRE(nmpRun("eval --ref " + p(tracks / "ref") + " --est " + p(tracks / "est") + " --json " + p(out / "r.json"))
            == 0);
    const auto j = nlohmann::json::parse(test::readText(out / "r.json"));
    CHECK(j["per_track"].size() == 3);
}

TEST_CASE("plot renders data pixels and the note overlay")
{
    TempDir dir;
    auto post = model::Posteriorgrams::zeros(173);
    model::savePosteriors(post, dir / "zero.nmpw");
    REQUIRE(nmpRun("plot --posteriors " + p(dir / "zero.nmpw") + " --out " + p(dir / "zero.png")) == 0);
    const Png zero = readPng(dir / "zero.png");
    CHECK(zero.width == 173);
    CHECK(zero.height == 264 + 88 + 88 + 4);
    std::set<std::array<std::uint8_t, 3>> colours;
    for (std::size_t y = 0; y < zero.height; ++y) {
        if (y == 264 || y == 265 || y == 354 || y == 355)
            continue;
        for (std::size_t x = 0; x < zero.width; ++x) {
            const auto* px = &zero.rgb[3 * (y * zero.width + x)];
            colours.insert({px[0], px[1], px[2]});
        }
    }
    CHECK(colours.size() == 1);

    for (std::size_t t = 20; t < 70; ++t)
        post.notes[t * 88 + 39] = 0.9f;
    post.onsets[20 * 88 + 39] = 0.9f;
    model::savePosteriors(post, dir / "one.nmpw");
    REQUIRE(nmpRun("plot --posteriors " + p(dir / "one.nmpw") + " --out " + p(dir / "one.png") + " --scale 2") == 0);
    const Png one = readPng(dir / "one.png");
    CHECK(one.width == 346);
    const std::size_t row = 2 * (266 + 87 - 39);
    std::size_t first = one.width, last = 0;
    for (std::size_t x = 0; x < one.width; ++x) {
        const auto* px = &one.rgb[3 * (row * one.width + x)];
        if (px[0] == 0 && px[1] == 255 && px[2] == 255) {
            first = std::min(first, x);
            last = std::max(last, x);
        }
    }
    CHECK(first == 40);
    CHECK(last == 139);
    REQUIRE(nmpRun("plot --posteriors " + p(dir / "one.nmpw") + " --out " + p(dir / "again.png") + " --scale 2") == 0);
    CHECK(test::readBytes(dir / "one.png") == test::readBytes(dir / "again.png"));

    test::writeText(dir / "bad.nmpw", "garbage");
    CHECK(nmpRun("plot --posteriors " + p(dir / "bad.nmpw") + " --out " + p(dir / "bad.png")) == 3);
    CHECK(!std::filesystem::exists(dir / "bad.png"));
}

TEST_CASE("trained model: silence gives no notes")
{
    TempDir dir;
    audio::AudioBuffer silence;
    silence.samples.assign(22050 * 3, 0.0);
    audio::saveWav(dir / "silence.wav", silence, audio::WavEncoding::Pcm16);
    REQUIRE(nmpRun("transcribe " + p(dir / "silence.wav") + " --weights " + quote(trainedWeights()) + " --notes "
                   + p(dir / "s.csv"))
            == 0);
    CHECK(tracking::readNotesCsv(dir / "s.csv").empty());
}

TEST_CASE("trained model: a C4 tone gives one note at pitch 60")
{
    TempDir dir;
    const double onset = 0.5;
    writeTone(dir / "c4.wav", 261.6255653, onset, 1.7, 2.0);
    REQUIRE(nmpRun("transcribe " + p(dir / "c4.wav") + " --weights " + quote(trainedWeights()) + " --notes "
                   + p(dir / "c4.csv"))
            == 0);
    const auto notes = tracking::readNotesCsv(dir / "c4.csv");
    REQUIRE(notes.size() == 1);
    CHECK(notes[0].pitch_midi == 60);
    CHECK(std::abs(notes[0].onset_s - onset) <= 0.05);
}

TEST_CASE("trained model: the sidecar records a loss drop")
{
    const std::string w = trainedWeights();
    const auto side = nlohmann::json::parse(test::readText(w + ".json"));
    CHECK(double(side["final_loss"]) < 0.25 * double(side["initial_loss"]));
    CHECK(side["config"]["n_clips"] == 64);
}
