#include "model/posteriorgrams.hpp"

#include <cmath>

#include "common/errors.hpp"

namespace nmp::model {

Posteriorgrams Posteriorgrams::zeros(std::size_t frames, std::size_t noteBins, std::size_t contourBins)
{
    Posteriorgrams p;
    p.frames = frames;
    p.note_bins = noteBins;
    p.contour_bins = contourBins;
    p.onsets.assign(frames * noteBins, 0.0f);
    p.notes.assign(frames * noteBins, 0.0f);
    p.contours.assign(frames * contourBins, 0.0f);
    return p;
}

nn::WeightArchive posteriorsToArchive(const Posteriorgrams& p)
{
    nn::WeightArchive a;
    const auto t = static_cast<std::uint32_t>(p.frames);
    a.add("onsets", {t, static_cast<std::uint32_t>(p.note_bins)}, p.onsets);
    a.add("notes", {t, static_cast<std::uint32_t>(p.note_bins)}, p.notes);
    a.add("contours", {t, static_cast<std::uint32_t>(p.contour_bins)}, p.contours);
    a.add("timing", {2}, {float(p.sample_rate), float(p.hop_samples)});
    return a;
}

Posteriorgrams posteriorsFromArchive(const nn::WeightArchive& a)
{
    const auto& on = a.at("onsets");
    const auto& no = a.at("notes");
    const auto& co = a.at("contours");
    const auto& timing = a.at("timing");
    if (on.shape.size() != 2 || no.shape != on.shape || co.shape.size() != 2 || co.shape[0] != on.shape[0])
        throw FormatError("shape", "posteriorgram entries must be 2-D with a shared frame count");
    if (timing.values.size() != 2 || timing.values[0] <= 0 || timing.values[1] <= 0)
        throw FormatError("timing", "expected [sample_rate, hop_samples]");
    Posteriorgrams p;
    p.frames = on.shape[0];
    p.note_bins = on.shape[1];
    p.contour_bins = co.shape[1];
    p.onsets = on.values;
    p.notes = no.values;
    p.contours = co.values;
    p.sample_rate = static_cast<int>(std::lround(timing.values[0]));
    p.hop_samples = static_cast<int>(std::lround(timing.values[1]));
    for (const auto* v : {&p.onsets, &p.notes, &p.contours})
        for (float x : *v)
            if (!(x >= 0.0f && x <= 1.0f))
                throw FormatError("values", "posteriorgram values must lie in [0, 1]");
    return p;
}

void savePosteriors(const Posteriorgrams& p, const std::filesystem::path& path)
{
    nn::saveWeights(posteriorsToArchive(p), path);
}

Posteriorgrams loadPosteriors(const std::filesystem::path& path)
{
    return posteriorsFromArchive(nn::loadWeights(path));
}

} // namespace nmp::model
