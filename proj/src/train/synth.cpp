#include "train/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "common/errors.hpp"
#include "train/labels.hpp"

namespace nmp::train {

void renderNote(std::vector<double>& out, int sampleRate, double frequency, double onset_s, double offset_s,
                double amplitude, Timbre timbre)
{
    const double sr = sampleRate;
    const long first = std::max(0L, std::lround(onset_s * sr));
    const long last = std::min(long(out.size()), std::lround(offset_s * sr));
    if (last <= first)
        return;
    const double noteLen = double(last - first) / sr;
    const double attack = std::min(0.01, 0.25 * noteLen);
    const double decay = std::min(0.1, 0.25 * noteLen);
    const double release = std::min(0.04, 0.25 * noteLen);
    const double sustain = 0.7;

    const int maxHarmonic = std::max(1, int(0.45 * sr / frequency));
    const int harmonics = std::min(maxHarmonic, 24);
    std::vector<double> gains(std::size_t(harmonics), 0.0);
    std::vector<double> decays(std::size_t(harmonics), 0.0);
    double norm = 0.0;
    for (int k = 1; k <= harmonics; ++k) {
        double g = 1.0 / k;
        if (timbre == Timbre::OddHarmonics && k % 2 == 0)
            g = 0.0;
        if (timbre == Timbre::DecayingHarmonics)
            decays[std::size_t(k - 1)] = 1.5 * k;
        gains[std::size_t(k - 1)] = g;
        norm += g;
    }

    const double w = 2.0 * std::numbers::pi * frequency / sr;
    for (long i = first; i < last; ++i) {
        const double t = double(i - first) / sr;
        const double remaining = noteLen - t;
        double env;
        if (t < attack)
            env = t / attack;
        else if (t < attack + decay)
            env = 1.0 - (1.0 - sustain) * (t - attack) / decay;
        else
            env = sustain;
        if (remaining < release)
            env *= std::max(0.0, remaining / release);
        double v = 0.0;
        for (int k = 1; k <= harmonics; ++k) {
            const double g = gains[std::size_t(k - 1)];
            if (g == 0.0)
                continue;
            double a = g;
            if (decays[std::size_t(k - 1)] > 0.0)
                a *= std::exp(-decays[std::size_t(k - 1)] * t);
            v += a * std::sin(w * k * double(i - first));
        }
        out[std::size_t(i)] += amplitude * env * v / norm;
    }
}

SynthClip synthClip(Rng& rng, const SynthConfig& cfg)
{
    if (cfg.duration_s <= 0.5 || cfg.min_midi > cfg.max_midi || cfg.max_voices < 1)
        throw ContractError("synth: invalid configuration");
    SynthClip clip;
    clip.audio.sample_rate = cfg.sample_rate;
    clip.audio.samples.assign(std::size_t(std::lround(cfg.duration_s * cfg.sample_rate)), 0.0);

    std::uniform_int_distribution<int> pitchDist(cfg.min_midi, cfg.max_midi);
    std::uniform_int_distribution<int> voiceDist(1, cfg.max_voices);
    std::uniform_int_distribution<int> timbreDist(0, 2);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> ampDist(0.3, 0.6);

    const double end = cfg.duration_s - 0.05;
    const int voices = cfg.monophonic ? 1 : voiceDist(rng);
    const bool chord = !cfg.monophonic && unit(rng) < 0.3;
    const double chordOnset = 0.05 + unit(rng) * 0.6 * cfg.duration_s;
    std::vector<int> used;
    for (int v = 0; v < voices; ++v) {
        int pitch;
        do {
            pitch = pitchDist(rng);
        } while (std::find(used.begin(), used.end(), pitch) != used.end());
        used.push_back(pitch);

        const double onset = chord ? chordOnset : 0.05 + unit(rng) * 0.6 * cfg.duration_s;
        const double maxLen = std::min(1.2, end - onset);
        const double duration = 0.25 + unit(rng) * std::max(0.0, maxLen - 0.25);
        const double offset = std::min(onset + duration, end);
        const auto timbre = Timbre(timbreDist(rng));
        renderNote(clip.audio.samples, cfg.sample_rate, midiToHz(pitch), onset, offset, ampDist(rng), timbre);
        clip.notes.push_back({onset, offset, pitch, 1.0});
    }

    double peak = 0.0;
    for (double s : clip.audio.samples)
        peak = std::max(peak, std::abs(s));
    if (peak > 0.9)
        for (double& s : clip.audio.samples)
            s *= 0.9 / peak;

    std::sort(clip.notes.begin(), clip.notes.end(), [](const auto& a, const auto& b) {
        return a.onset_s != b.onset_s ? a.onset_s < b.onset_s : a.pitch_midi < b.pitch_midi;
    });
    return clip;
}

std::vector<SynthClip> synthDataset(std::size_t n, std::uint64_t seed, const SynthConfig& cfg)
{
    if (n == 0)
        throw ContractError("synth: dataset size must be positive");
    std::vector<SynthClip> clips;
    clips.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng(substreamSeed(seed, i));
        clips.push_back(synthClip(rng, cfg));
    }
    return clips;
}

} // namespace nmp::train
