#pragma once

#include <vector>

namespace nmp::audio {

// Working rate of the whole pipeline; every model input is at this rate.
inline constexpr int kModelSampleRate = 22050;

struct AudioBuffer {
    std::vector<double> samples;
    int sample_rate = kModelSampleRate;

    double durationSeconds() const { return double(samples.size()) / sample_rate; }
};

} // namespace nmp::audio
