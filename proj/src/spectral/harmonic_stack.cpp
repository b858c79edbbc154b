#include "spectral/harmonic_stack.hpp"

#include <algorithm>
#include <cmath>

#include "common/errors.hpp"

namespace nmp::spectral {

int harmonicShift(double h, int binsPerOctave)
{
    return static_cast<int>(std::lround(binsPerOctave * std::log2(h)));
}

void fillStackWindow(const CqtMatrix& c, std::size_t first, std::size_t count, const std::vector<double>& harmonics,
                     float* out, int binsPerOctave)
{
    if (c.bins < kStackBins)
        throw ContractError("harmonic stack: CQT has " + std::to_string(c.bins) + " bins, need at least "
                            + std::to_string(kStackBins));
    const auto nBins = static_cast<long>(c.bins);
    for (std::size_t ch = 0; ch < harmonics.size(); ++ch) {
        const long shift = harmonicShift(harmonics[ch], binsPerOctave);
        const long lo = std::clamp(-shift, 0L, long(kStackBins));
        const long hi = std::clamp(nBins - shift, 0L, long(kStackBins));
        for (std::size_t i = 0; i < count; ++i) {
            float* row = out + (ch * count + i) * kStackBins;
            std::fill(row, row + kStackBins, 0.0f);
            const std::size_t t = first + i;
            if (t >= c.frames)
                continue;
            const float* src = c.magnitudes.data() + t * c.bins;
            for (long b = lo; b < hi; ++b)
                row[b] = src[b + shift];
        }
    }
}

HarmonicStack harmonicStack(const CqtMatrix& c, int binsPerOctave)
{
    HarmonicStack s;
    s.channels = kHarmonics.size();
    s.frames = c.frames;
    s.bins = kStackBins;
    s.values.resize(s.channels * s.frames * s.bins);
    fillStackWindow(c, 0, c.frames, {kHarmonics.begin(), kHarmonics.end()}, s.values.data(), binsPerOctave);
    return s;
}

} // namespace nmp::spectral
