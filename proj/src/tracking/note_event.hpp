#pragma once

#include <vector>

namespace nmp::tracking {

struct NoteEvent {
    double onset_s = 0.0;
    double offset_s = 0.0;
    int pitch_midi = 60;
    double amplitude = 1.0;

    double duration() const { return offset_s - onset_s; }
    bool operator==(const NoteEvent&) const = default;
};

struct PitchEstimate {
    double time_s = 0.0;
    double frequency_hz = 0.0;
    double salience = 0.0;
};

using PitchTrack = std::vector<std::vector<PitchEstimate>>; // one list per frame

} // namespace nmp::tracking
