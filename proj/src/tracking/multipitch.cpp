#include "tracking/note_tracker.hpp"

#include <algorithm>
#include <cmath>

namespace nmp::tracking {

double parabolicOffset(double a, double b, double c)
{
    const double denom = a - 2.0 * b + c;
    if (!(b > a && b >= c) && !(b >= a && b > c))
        return 0.0;
    if (denom >= 0.0)
        return 0.0;
    return std::clamp((a - c) / (2.0 * denom), -0.5, 0.5);
}

double contourBinFrequency(double bin)
{
    return 27.5 * std::exp2(bin / 36.0);
}

PitchTrack multipitch(const model::Posteriorgrams& p, const TrackerConfig& cfg)
{
    cfg.validate();
    const std::size_t bins = p.contour_bins;
    const double period = p.framePeriod();
    PitchTrack track(p.frames);
    for (std::size_t t = 0; t < p.frames; ++t) {
        auto value = [&](std::size_t b) { return p.contour(t, b); };
        for (std::size_t b : findPeaks(bins, value)) {
            const double s = value(b);
            if (!(s > cfg.note_threshold))
                continue;
            double offset = 0.0;
            if (cfg.refine_pitch && b > 0 && b + 1 < bins)
                offset = parabolicOffset(value(b - 1), s, value(b + 1));
            track[t].push_back({double(t) * period, contourBinFrequency(double(b) + offset), s});
        }
    }
    return track;
}

} // namespace nmp::tracking
