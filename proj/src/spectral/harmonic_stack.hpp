#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "spectral/cqt.hpp"

namespace nmp::spectral {

inline constexpr std::array<double, 8> kHarmonics = {0.5, 1, 2, 3, 4, 5, 6, 7};
inline constexpr std::size_t kStackBins = 264; // 88 semitones x 3

// Bin offset aligning harmonic `h` with its fundamental: round(36 * log2 h).
int harmonicShift(double h, int binsPerOctave = 36);

// channels x frames x bins, channel-major.
struct HarmonicStack {
    std::size_t channels = 0;
    std::size_t frames = 0;
    std::size_t bins = 0;
    std::vector<float> values;

    float at(std::size_t c, std::size_t t, std::size_t b) const { return values[(c * frames + t) * bins + b]; }
};

// Shifted copies of the CQT, one channel per harmonic in kHarmonics order.
// Cells whose source bin falls outside the CQT are zero.
HarmonicStack harmonicStack(const CqtMatrix& c, int binsPerOctave = 36);

// Same mapping restricted to frames [first, first + count); frames beyond the
// CQT are zero. `harmonics` lets the single-channel ablation reuse the path.
void fillStackWindow(const CqtMatrix& c, std::size_t first, std::size_t count, const std::vector<double>& harmonics,
                     float* out, int binsPerOctave = 36);

} // namespace nmp::spectral
