#include "eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace nmp::eval {

PrfScores prfFromCounts(std::size_t matches, std::size_t nRef, std::size_t nEst)
{
    PrfScores s;
    s.matches = matches;
    s.precision = nEst > 0 ? double(matches) / double(nEst) : 0.0;
    s.recall = nRef > 0 ? double(matches) / double(nRef) : 0.0;
    s.f = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    return s;
}

PrfScores noteScores(const std::vector<NoteEvent>& ref, const std::vector<NoteEvent>& est,
                     const NoteMatchTolerances& tol, bool useOffsets)
{
    return prfFromCounts(matchNotes(ref, est, tol, useOffsets).size(), ref.size(), est.size());
}

namespace {

// frame -> pitch -> count
using FrameRoll = std::map<long, std::map<int, long>>;

FrameRoll rasterize(const std::vector<NoteEvent>& notes, double hop)
{
    FrameRoll roll;
    for (const NoteEvent& n : notes) {
        const long first = std::max(0L, long(std::floor(n.onset_s / hop)) - 1);
        const long last = long(std::ceil(n.offset_s / hop)) + 1;
        for (long t = first; t <= last; ++t) {
            const double start = double(t) * hop;
            if (start >= n.onset_s && start < n.offset_s)
                ++roll[t][n.pitch_midi];
        }
    }
    return roll;
}

} // namespace

double frameAccuracy(const std::vector<NoteEvent>& ref, const std::vector<NoteEvent>& est, double hop)
{
    const FrameRoll r = rasterize(ref, hop);
    const FrameRoll e = rasterize(est, hop);
    long tp = 0;
    long refTotal = 0;
    long estTotal = 0;
    for (const auto& [t, pitches] : r) {
        for (const auto& [pitch, count] : pitches) {
            refTotal += count;
            auto frame = e.find(t);
            if (frame == e.end())
                continue;
            auto hit = frame->second.find(pitch);
            if (hit != frame->second.end())
                tp += std::min(count, hit->second);
        }
    }
    for (const auto& [t, pitches] : e)
        for (const auto& [pitch, count] : pitches)
            estTotal += count;
    const long fp = estTotal - tp;
    const long fn = refTotal - tp;
    const long denom = tp + fp + fn;
    return denom > 0 ? double(tp) / double(denom) : 0.0;
}

TrackMetrics evaluateTrack(const std::vector<NoteEvent>& ref, const std::vector<NoteEvent>& est,
                           const NoteMatchTolerances& tol)
{
    TrackMetrics m;
    m.n_ref = ref.size();
    m.n_est = est.size();
    m.with_offset = noteScores(ref, est, tol, true);
    m.no_offset = noteScores(ref, est, tol, false);
    m.acc = frameAccuracy(ref, est);
    return m;
}

} // namespace nmp::eval
