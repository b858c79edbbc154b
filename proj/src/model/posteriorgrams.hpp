#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "nn/weights.hpp"

namespace nmp::model {

// Frame-aligned onset, note and contour likelihoods. Rows are frames.
struct Posteriorgrams {
    std::size_t frames = 0;
    std::size_t note_bins = 88;
    std::size_t contour_bins = 264;
    std::vector<float> onsets;   // frames x note_bins
    std::vector<float> notes;    // frames x note_bins
    std::vector<float> contours; // frames x contour_bins
    int sample_rate = 22050;
    int hop_samples = 256;

    double framePeriod() const { return double(hop_samples) / sample_rate; }
    float onset(std::size_t t, std::size_t b) const { return onsets[t * note_bins + b]; }
    float note(std::size_t t, std::size_t b) const { return notes[t * note_bins + b]; }
    float contour(std::size_t t, std::size_t b) const { return contours[t * contour_bins + b]; }

    static Posteriorgrams zeros(std::size_t frames, std::size_t noteBins = 88, std::size_t contourBins = 264);
};

// Stored as an NMPW archive with entries "onsets", "notes", "contours" and
// "timing" = [sample_rate, hop_samples].
nn::WeightArchive posteriorsToArchive(const Posteriorgrams& p);
Posteriorgrams posteriorsFromArchive(const nn::WeightArchive& a);
void savePosteriors(const Posteriorgrams& p, const std::filesystem::path& path);
Posteriorgrams loadPosteriors(const std::filesystem::path& path);

} // namespace nmp::model
