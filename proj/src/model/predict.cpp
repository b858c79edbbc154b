#include "model/predict.hpp"

#include <algorithm>
#include <cmath>

#include "common/errors.hpp"
#include "spectral/harmonic_stack.hpp"

namespace nmp::model {

nn::Tensor<float> stackWindow(const spectral::CqtMatrix& cqt, std::size_t first, std::size_t count,
                              bool harmonicStacking)
{
    const std::vector<double> harmonics = harmonicStacking
        ? std::vector<double>(spectral::kHarmonics.begin(), spectral::kHarmonics.end())
        : std::vector<double>{1.0};
    nn::Tensor<float> x({1, harmonics.size(), count, spectral::kStackBins});
    spectral::fillStackWindow(cqt, first, count, harmonics, x.data());
    return x;
}

Posteriorgrams predictBlock(NmpModel<float>& model, const spectral::CqtMatrix& cqt, std::size_t first,
                            std::size_t count, const ForwardOptions& opts)
{
    nn::Graph<float> g(false);
    const auto input = g.input(stackWindow(cqt, first, count, model.config().use_harmonic_stacking));
    const auto out = model.forward(g, input, nn::BatchNormMode::Inference, opts);
    Posteriorgrams p;
    p.frames = count;
    p.onsets.assign(g.value(out.onsets).values().begin(), g.value(out.onsets).values().end());
    p.notes.assign(g.value(out.notes).values().begin(), g.value(out.notes).values().end());
    p.contours.assign(g.value(out.contours).values().begin(), g.value(out.contours).values().end());
    return p;
}

namespace {

void blendRows(std::vector<float>& dst, const std::vector<float>& src, std::size_t width, std::size_t dstFrame,
               std::size_t srcFrame, float weight)
{
    float* d = dst.data() + dstFrame * width;
    const float* s = src.data() + srcFrame * width;
    if (weight == 1.0f) {
        std::copy_n(s, width, d);
        return;
    }
    for (std::size_t i = 0; i < width; ++i)
        d[i] = (1.0f - weight) * d[i] + weight * s[i];
}

} // namespace

Posteriorgrams predictFromCqt(NmpModel<float>& model, const spectral::CqtMatrix& cqt)
{
    const ModelConfig& cfg = model.config();
    const std::size_t total = cqt.frames;
    if (total == 0)
        throw ContractError("predict: empty input");
    const std::size_t window = cfg.window_frames;
    const std::size_t overlap = cfg.window_overlap_frames;
    const std::size_t step = window - overlap;

    Posteriorgrams out = Posteriorgrams::zeros(total);
    for (std::size_t start = 0;; start += step) {
        const Posteriorgrams block = predictBlock(model, cqt, start, window);
        const std::size_t end = std::min(total, start + window);
        for (std::size_t t = start; t < end; ++t) {
            const std::size_t i = t - start;
            // First `overlap` frames of every window after the first fade in.
            float w = 1.0f;
            if (start > 0 && i < overlap)
                w = float(i + 1) / float(overlap + 1);
            blendRows(out.onsets, block.onsets, out.note_bins, t, i, w);
            blendRows(out.notes, block.notes, out.note_bins, t, i, w);
            blendRows(out.contours, block.contours, out.contour_bins, t, i, w);
        }
        if (start + window >= total)
            break;
    }
    return out;
}

Posteriorgrams predict(const audio::AudioBuffer& buf, NmpModel<float>& model)
{
    if (buf.samples.empty())
        throw ContractError("predict: empty audio");
    spectral::CqtConfig cfg;
    const spectral::CqtMatrix c = spectral::cqt(buf, cfg);
    Posteriorgrams p = predictFromCqt(model, c);
    p.sample_rate = cfg.sample_rate;
    p.hop_samples = cfg.hop_samples;
    return p;
}

Posteriorgrams predict(const audio::AudioBuffer& buf, const nn::WeightArchive& weights, const ModelConfig& cfg)
{
    NmpModel<float> model = NmpModel<float>::fromArchive(weights, cfg);
    return predict(buf, model);
}

} // namespace nmp::model
