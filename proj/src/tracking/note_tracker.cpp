#include "tracking/note_tracker.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "common/errors.hpp"
#include "model/nmp_model.hpp"

namespace nmp::tracking {

void TrackerConfig::validate() const
{
    if (!(onset_threshold > 0.0 && onset_threshold < 1.0))
        throw ContractError("tracker: onset threshold must lie in (0, 1)");
    if (!(note_threshold > 0.0 && note_threshold < 1.0))
        throw ContractError("tracker: note threshold must lie in (0, 1)");
    if (gap_tolerance_frames < 0)
        throw ContractError("tracker: gap tolerance must be non-negative");
    if (!(min_note_duration_s >= 0.0))
        throw ContractError("tracker: minimum note duration must be non-negative");
}

std::vector<std::size_t> findPeaks(std::size_t length, const std::function<float(std::size_t)>& value)
{
    std::vector<std::size_t> peaks;
    std::size_t i = 0;
    while (i < length) {
        const float v = value(i);
        std::size_t j = i;
        while (j + 1 < length && value(j + 1) == v)
            ++j;
        const bool wholeRange = i == 0 && j + 1 == length;
        const bool leftLower = i == 0 || value(i - 1) < v;
        const bool rightLower = j + 1 == length || value(j + 1) < v;
        if (!wholeRange && leftLower && rightLower)
            peaks.push_back(i);
        i = j + 1;
    }
    return peaks;
}

namespace {

class NoteBuilder {
public:
    NoteBuilder(const model::Posteriorgrams& p, const TrackerConfig& cfg)
        : mPost(p)
        , mFrames(p.frames)
        , mBins(p.note_bins)
        , mThreshold(float(cfg.note_threshold))
        , mTolerance(cfg.gap_tolerance_frames)
        , mRemaining(p.notes)
        , mConsumed(p.notes.size(), 0)
    {
    }

    bool consumed(std::size_t t, std::size_t b) const { return mConsumed[t * mBins + b] != 0; }
    float remaining(std::size_t t, std::size_t b) const { return mRemaining[t * mBins + b]; }

    // Exclusive end of a note starting at `start`.
    std::size_t traceForward(std::size_t start, std::size_t b) const
    {
        std::size_t last = start;
        int gap = 0;
        for (std::size_t i = start + 1; i < mFrames && !consumed(i, b); ++i) {
            if (remaining(i, b) < mThreshold) {
                if (++gap > mTolerance)
                    break;
            } else {
                gap = 0;
                last = i;
            }
        }
        return last + 1;
    }

    std::size_t traceBackward(std::size_t start, std::size_t b) const
    {
        std::size_t first = start;
        int gap = 0;
        for (std::size_t i = start; i-- > 0 && !consumed(i, b);) {
            if (remaining(i, b) < mThreshold) {
                if (++gap > mTolerance)
                    break;
            } else {
                gap = 0;
                first = i;
            }
        }
        return first;
    }

    void create(std::size_t start, std::size_t end, std::size_t b, bool fromOnset)
    {
        double sum = 0.0;
        for (std::size_t t = start; t < end; ++t) {
            sum += mPost.note(t, b);
            mConsumed[t * mBins + b] = 1;
            mRemaining[t * mBins + b] = 0.0f;
        }
        mNotes.push_back({start, end, b, sum / double(end - start), fromOnset});
    }

    std::vector<TrackedNote>& notes() { return mNotes; }

private:
    const model::Posteriorgrams& mPost;
    std::size_t mFrames;
    std::size_t mBins;
    float mThreshold;
    int mTolerance;
    std::vector<float> mRemaining;
    std::vector<std::uint8_t> mConsumed;
    std::vector<TrackedNote> mNotes;
};

struct Candidate {
    std::size_t t;
    std::size_t bin;
    float value;
};

} // namespace

std::vector<TrackedNote> trackNotes(const model::Posteriorgrams& p, const TrackerConfig& cfg)
{
    cfg.validate();
    const std::size_t frames = p.frames;
    const std::size_t bins = p.note_bins;
    NoteBuilder builder(p, cfg);

    std::vector<Candidate> onsets;
    for (std::size_t b = 0; b < bins; ++b)
        for (std::size_t t : findPeaks(frames, [&](std::size_t i) { return p.onset(i, b); }))
            if (p.onset(t, b) >= float(cfg.onset_threshold))
                onsets.push_back({t, b, p.onset(t, b)});
    if (cfg.onset_order == OnsetOrder::LatestFirst) {
        std::sort(onsets.begin(), onsets.end(), [](const Candidate& a, const Candidate& b) {
            return a.t != b.t ? a.t > b.t : a.bin < b.bin;
        });
    } else {
        std::sort(onsets.begin(), onsets.end(), [](const Candidate& a, const Candidate& b) {
            if (a.value != b.value)
                return a.value > b.value;
            return a.t != b.t ? a.t < b.t : a.bin < b.bin;
        });
    }
    for (const Candidate& c : onsets) {
        if (builder.consumed(c.t, c.bin))
            continue;
        builder.create(c.t, builder.traceForward(c.t, c.bin), c.bin, true);
    }

    const float tau = float(cfg.note_threshold);
    std::vector<Candidate> seeds;
    for (std::size_t t = 0; t < frames; ++t)
        for (std::size_t b = 0; b < bins; ++b)
            if (builder.remaining(t, b) > tau)
                seeds.push_back({t, b, builder.remaining(t, b)});
    std::sort(seeds.begin(), seeds.end(), [](const Candidate& a, const Candidate& b) {
        if (a.value != b.value)
            return a.value > b.value;
        return a.t != b.t ? a.t < b.t : a.bin < b.bin;
    });
    for (const Candidate& c : seeds) {
        if (builder.consumed(c.t, c.bin))
            continue;
        builder.create(builder.traceBackward(c.t, c.bin), builder.traceForward(c.t, c.bin), c.bin, false);
    }

    const double period = p.framePeriod();
    auto& notes = builder.notes();
    std::erase_if(notes, [&](const TrackedNote& n) {
        return double(n.end - n.start) * period < cfg.min_note_duration_s - 1e-9;
    });
    return notes;
}

std::vector<NoteEvent> noteEvents(const model::Posteriorgrams& p, const TrackerConfig& cfg)
{
    const double period = p.framePeriod();
    std::vector<NoteEvent> events;
    for (const TrackedNote& n : trackNotes(p, cfg))
        events.push_back({double(n.start) * period, double(n.end) * period, int(n.bin + model::kMidiOffset),
                          n.amplitude});
    std::sort(events.begin(), events.end(), [](const NoteEvent& a, const NoteEvent& b) {
        return a.onset_s != b.onset_s ? a.onset_s < b.onset_s : a.pitch_midi < b.pitch_midi;
    });
    return events;
}

} // namespace nmp::tracking
