#include "plot/heatmap.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace nmp::plot {

Rgb colormap(float v)
{
    // Anchors sampled from a magma-like ramp.
    static constexpr std::array<std::array<float, 3>, 5> kStops = {{
        {0, 0, 4},
        {81, 18, 124},
        {183, 55, 121},
        {252, 137, 97},
        {252, 253, 191},
    }};
    const float x = std::clamp(std::isfinite(v) ? v : 0.0f, 0.0f, 1.0f) * float(kStops.size() - 1);
    const std::size_t i = std::min(std::size_t(x), kStops.size() - 2);
    const float f = x - float(i);
    auto mix = [&](int c) { return std::uint8_t(std::lround(kStops[i][c] + f * (kStops[i + 1][c] - kStops[i][c]))); };
    return {mix(0), mix(1), mix(2)};
}

namespace {

void blit(Image& dst, const std::vector<float>& values, std::size_t frames, std::size_t bins, std::size_t top)
{
    for (std::size_t t = 0; t < frames; ++t)
        for (std::size_t b = 0; b < bins; ++b)
            dst.set(t, top + bins - 1 - b, colormap(values[t * bins + b]));
}

void separator(Image& img, std::size_t top, std::size_t rows)
{
    for (std::size_t y = top; y < top + rows; ++y)
        for (std::size_t x = 0; x < img.width; ++x)
            img.set(x, y, kSeparatorColor);
}

} // namespace

Image renderHeatmap(const std::vector<float>& values, std::size_t frames, std::size_t bins)
{
    Image img(frames, bins);
    blit(img, values, frames, bins, 0);
    return img;
}

Image renderPosteriorPlot(const model::Posteriorgrams& p, const std::vector<tracking::TrackedNote>& notes,
                          PlotLayout* layout)
{
    PlotLayout l;
    l.contour_top = 0;
    l.note_top = p.contour_bins + l.separator_rows;
    l.onset_top = l.note_top + p.note_bins + l.separator_rows;
    const std::size_t height = l.onset_top + p.note_bins;

    Image img(std::max<std::size_t>(p.frames, 1), height);
    blit(img, p.contours, p.frames, p.contour_bins, l.contour_top);
    separator(img, p.contour_bins, l.separator_rows);
    blit(img, p.notes, p.frames, p.note_bins, l.note_top);
    separator(img, l.note_top + p.note_bins, l.separator_rows);
    blit(img, p.onsets, p.frames, p.note_bins, l.onset_top);

    for (const auto& n : notes) {
        if (n.bin >= p.note_bins || n.end > p.frames || n.start >= n.end)
            continue;
        const std::size_t y = l.note_top + p.note_bins - 1 - n.bin;
        for (std::size_t t = n.start; t < n.end; ++t)
            img.set(t, y, kNoteOutlineColor);
    }
    if (layout)
        *layout = l;
    return img;
}

} // namespace nmp::plot
