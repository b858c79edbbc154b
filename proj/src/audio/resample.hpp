#pragma once

#include "audio/audio_buffer.hpp"

namespace nmp::audio {

struct ResamplerConfig {
    double kaiser_beta = 12.0;
    // Filter length in samples of the lower of the two rates.
    int taps = 64;
    // Cutoff as a fraction of the lower Nyquist frequency.
    double rolloff = 0.97;
};

// Polyphase windowed-sinc rate conversion. Output length is
// round(len * target / source); equal rates return the input unchanged.
AudioBuffer resample(const AudioBuffer& buf, int target_rate, const ResamplerConfig& cfg = {});

} // namespace nmp::audio
