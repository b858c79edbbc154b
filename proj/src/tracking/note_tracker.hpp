#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "model/posteriorgrams.hpp"
#include "tracking/note_event.hpp"

namespace nmp::tracking {

enum class OnsetOrder {
    LatestFirst,     // descending onset time
    MostLikelyFirst, // descending onset likelihood
};

struct TrackerConfig {
    double onset_threshold = 0.5;
    double note_threshold = 0.5;
    int gap_tolerance_frames = 11;
    double min_note_duration_s = 0.12;
    OnsetOrder onset_order = OnsetOrder::LatestFirst;
    // Parabolic sub-bin refinement for multipitch output.
    bool refine_pitch = true;

    void validate() const;
};

// A note in frame units; `end` is exclusive.
struct TrackedNote {
    std::size_t start = 0;
    std::size_t end = 0;
    std::size_t bin = 0;
    double amplitude = 0.0;
    bool from_onset = false;
};

// Indices of peaks in a sequence of `length` values: the first index of each
// maximal run of equal values whose neighbours on both sides (where they
// exist) are strictly lower. A run covering the whole sequence is no peak.
std::vector<std::size_t> findPeaks(std::size_t length, const std::function<float(std::size_t)>& value);

// Frame-level note creation from Y_o and Y_n:
//  1. onset candidates are per-bin peaks over time of Y_o with value >= onset_threshold;
//  2. candidates are processed in `onset_order`, each tracing forward through
//     Y_n until it stays below note_threshold for more than gap_tolerance_frames;
//  3. consumed Y_n cells are zeroed (in a private copy) and never re-entered;
//  4. remaining cells above note_threshold seed notes in descending likelihood,
//     traced both backward and forward;
//  5. notes shorter than min_note_duration_s are dropped.
std::vector<TrackedNote> trackNotes(const model::Posteriorgrams& p, const TrackerConfig& cfg);

// trackNotes converted to seconds and MIDI pitch, sorted by (onset, pitch).
std::vector<NoteEvent> noteEvents(const model::Posteriorgrams& p, const TrackerConfig& cfg = {});

// Per-frame peaks of Y_p across frequency with salience above note_threshold.
PitchTrack multipitch(const model::Posteriorgrams& p, const TrackerConfig& cfg = {});

// Offset in bins of the parabola through (-1, a), (0, b), (1, c); 0 when the
// three points are not a strict local maximum. Clamped to [-0.5, 0.5].
double parabolicOffset(double a, double b, double c);

double contourBinFrequency(double bin);

} // namespace nmp::tracking
