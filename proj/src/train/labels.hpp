#pragma once

#include <cstddef>
#include <vector>

#include "tracking/note_event.hpp"

namespace nmp::train {

struct PitchAnnotation {
    double time_s = 0.0;
    double frequency_hz = 0.0;
};

// Binary training targets, frames x bins row-major.
struct Targets {
    std::size_t frames = 0;
    std::vector<float> onsets;   // frames x 88
    std::vector<float> notes;    // frames x 88
    std::vector<float> contours; // frames x 264
    std::size_t skipped = 0;     // annotations outside the representable range

    static Targets zeros(std::size_t frames);
};

// Y_n covers frames [floor(onset/period), ceil(offset/period)) at bin
// midi - 21, Y_o marks frame round(onset/period), and Y_p marks bin
// round(36 log2(f / 27.5)) at frame round(time/period).
Targets rasterizeLabels(const std::vector<tracking::NoteEvent>& notes, const std::vector<PitchAnnotation>& pitches,
                        std::size_t frames, double framePeriod);

// f0 annotations for every frame a note occupies, at the note's equal-tempered pitch.
std::vector<PitchAnnotation> pitchesFromNotes(const std::vector<tracking::NoteEvent>& notes, std::size_t frames,
                                              double framePeriod);

double midiToHz(double midi);

} // namespace nmp::train
