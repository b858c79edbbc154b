#pragma once

#include <cstddef>
#include <vector>

#include "model/posteriorgrams.hpp"
#include "plot/png.hpp"
#include "tracking/note_tracker.hpp"

namespace nmp::plot {

inline constexpr Rgb kSeparatorColor{255, 255, 255};
inline constexpr Rgb kNoteOutlineColor{0, 255, 255};

// Perceptually ordered dark-to-bright ramp; values are clamped to [0, 1].
Rgb colormap(float v);

// One pixel per cell: x is the frame, y the bin with the highest bin on top.
Image renderHeatmap(const std::vector<float>& values, std::size_t frames, std::size_t bins);

// Vertical placement of each panel in an unscaled posteriorgram plot.
struct PlotLayout {
    std::size_t contour_top = 0;
    std::size_t note_top = 0;
    std::size_t onset_top = 0;
    std::size_t separator_rows = 2;
};

// Y_p, Y_n and Y_o stacked top to bottom with white separator rows. Each
// tracked note is drawn as a bar over its frames on the Y_n panel.
Image renderPosteriorPlot(const model::Posteriorgrams& p, const std::vector<tracking::TrackedNote>& notes,
                          PlotLayout* layout = nullptr);

} // namespace nmp::plot
