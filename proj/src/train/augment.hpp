#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "audio/audio_buffer.hpp"

namespace nmp::train {

using Rng = std::mt19937_64;

// Independent, reproducible seed for sub-stream `stream` of `seed` (SplitMix64).
std::uint64_t substreamSeed(std::uint64_t seed, std::uint64_t stream);

struct AugmentConfig {
    bool noise = true;
    bool eq = true;
    double snr_min_db = 20.0;
    double snr_max_db = 50.0;
    double eq_max_gain_db = 12.0;
};

enum class FilterType { LowShelf, HighShelf, Peaking };

// Direct-form-I biquad after the RBJ audio EQ cookbook.
struct Biquad {
    double b0 = 1, b1 = 0, b2 = 0, a1 = 0, a2 = 0;

    static Biquad design(FilterType type, double frequency, double gainDb, double q, double sampleRate);
    void apply(std::vector<double>& samples) const;
};

// White Gaussian noise scaled to the given signal-to-noise ratio. Silent
// input is left unchanged.
void addNoise(std::vector<double>& samples, double snrDb, Rng& rng);

// Label-preserving augmentation: optional noise at a random SNR and one
// random shelf or peak filter. Output is clipped to [-1, 1].
audio::AudioBuffer augment(const audio::AudioBuffer& in, Rng& rng, const AugmentConfig& cfg = {});

} // namespace nmp::train
