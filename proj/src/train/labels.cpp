#include "train/labels.hpp"

#include <algorithm>
#include <cmath>

#include "model/nmp_model.hpp"

namespace nmp::train {

using model::kContourBins;
using model::kMidiOffset;
using model::kNoteBins;

Targets Targets::zeros(std::size_t frames)
{
    Targets t;
    t.frames = frames;
    t.onsets.assign(frames * kNoteBins, 0.0f);
    t.notes.assign(frames * kNoteBins, 0.0f);
    t.contours.assign(frames * kContourBins, 0.0f);
    return t;
}

double midiToHz(double midi)
{
    return 440.0 * std::exp2((midi - 69.0) / 12.0);
}

Targets rasterizeLabels(const std::vector<tracking::NoteEvent>& notes, const std::vector<PitchAnnotation>& pitches,
                        std::size_t frames, double framePeriod)
{
    Targets t = Targets::zeros(frames);
    const long n = long(frames);
    for (const auto& note : notes) {
        const long bin = long(note.pitch_midi) - long(kMidiOffset);
        if (bin < 0 || bin >= long(kNoteBins)) {
            ++t.skipped;
            continue;
        }
        const long first = std::max(0L, long(std::floor(note.onset_s / framePeriod)));
        const long last = std::min(n, long(std::ceil(note.offset_s / framePeriod)));
        for (long f = first; f < last; ++f)
            t.notes[std::size_t(f) * kNoteBins + std::size_t(bin)] = 1.0f;
        const long onset = std::lround(note.onset_s / framePeriod);
        if (onset >= 0 && onset < n)
            t.onsets[std::size_t(onset) * kNoteBins + std::size_t(bin)] = 1.0f;
    }
    for (const auto& p : pitches) {
        const long bin = p.frequency_hz > 0.0 ? std::lround(36.0 * std::log2(p.frequency_hz / 27.5)) : -1;
        const long frame = std::lround(p.time_s / framePeriod);
        if (bin < 0 || bin >= long(kContourBins) || frame < 0 || frame >= n) {
            ++t.skipped;
            continue;
        }
        t.contours[std::size_t(frame) * kContourBins + std::size_t(bin)] = 1.0f;
    }
    return t;
}

std::vector<PitchAnnotation> pitchesFromNotes(const std::vector<tracking::NoteEvent>& notes, std::size_t frames,
                                              double framePeriod)
{
    std::vector<PitchAnnotation> out;
    for (const auto& note : notes) {
        const long first = std::max(0L, long(std::floor(note.onset_s / framePeriod)));
        const long last = std::min(long(frames), long(std::ceil(note.offset_s / framePeriod)));
        for (long f = first; f < last; ++f)
            out.push_back({double(f) * framePeriod, midiToHz(note.pitch_midi)});
    }
    return out;
}

} // namespace nmp::train
