#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "audio/audio_buffer.hpp"
#include "tracking/note_event.hpp"
#include "train/augment.hpp"

namespace nmp::train {

enum class Timbre { Saw, DecayingHarmonics, OddHarmonics };

struct SynthConfig {
    double duration_s = 2.0;
    int min_midi = 40;
    int max_midi = 84;
    int max_voices = 4;
    // Exactly one note per clip.
    bool monophonic = false;
    int sample_rate = audio::kModelSampleRate;
};

struct SynthClip {
    audio::AudioBuffer audio;
    std::vector<tracking::NoteEvent> notes; // sorted by (onset, pitch)
};

// Adds one band-limited tone with an ADSR envelope that reaches zero at `offset_s`.
void renderNote(std::vector<double>& out, int sampleRate, double frequency, double onset_s, double offset_s,
                double amplitude, Timbre timbre);

SynthClip synthClip(Rng& rng, const SynthConfig& cfg = {});

// Clip i is drawn from sub-stream i of `seed`, so clips do not depend on `n`.
std::vector<SynthClip> synthDataset(std::size_t n, std::uint64_t seed, const SynthConfig& cfg = {});

} // namespace nmp::train
