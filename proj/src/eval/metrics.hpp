#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "tracking/note_event.hpp"

namespace nmp::eval {

using tracking::NoteEvent;

struct NoteMatchTolerances {
    double onset_tol = 0.05;      // seconds
    double pitch_tol = 0.5;       // semitones
    double offset_ratio = 0.2;    // of the reference duration
    double offset_min_tol = 0.05; // seconds

    void validate() const;
};

// Maximum-cardinality one-to-one matching between reference and estimated
// notes. Returns (ref index, est index) pairs sorted by ref index.
std::vector<std::pair<std::size_t, std::size_t>> matchNotes(const std::vector<NoteEvent>& ref,
                                                            const std::vector<NoteEvent>& est,
                                                            const NoteMatchTolerances& tol, bool useOffsets);

// Whether a single pair satisfies every active tolerance. Distances are
// rounded to 1e-4 s before comparison so that values written with six
// decimals compare as intended.
bool notesCompatible(const NoteEvent& ref, const NoteEvent& est, const NoteMatchTolerances& tol, bool useOffsets);

struct PrfScores {
    double precision = 0.0;
    double recall = 0.0;
    double f = 0.0;
    std::size_t matches = 0;
};

PrfScores prfFromCounts(std::size_t matches, std::size_t nRef, std::size_t nEst);
PrfScores noteScores(const std::vector<NoteEvent>& ref, const std::vector<NoteEvent>& est,
                     const NoteMatchTolerances& tol, bool useOffsets);

// Frame t covers [t*hop, (t+1)*hop); a note is active in frame t when
// t*hop lies in [onset, offset). Returns sum(TP) / sum(TP + FP + FN) over
// per-frame pitch multisets, or 0 when both sides are empty.
double frameAccuracy(const std::vector<NoteEvent>& ref, const std::vector<NoteEvent>& est, double hop = 0.01);

struct TrackMetrics {
    std::string name;
    std::size_t n_ref = 0;
    std::size_t n_est = 0;
    PrfScores with_offset;
    PrfScores no_offset;
    double acc = 0.0;

    double F() const { return with_offset.f; }
    double Fno() const { return no_offset.f; }
};

TrackMetrics evaluateTrack(const std::vector<NoteEvent>& ref, const std::vector<NoteEvent>& est,
                           const NoteMatchTolerances& tol = {});

} // namespace nmp::eval
