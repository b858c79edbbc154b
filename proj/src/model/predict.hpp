#pragma once

#include <cstddef>

#include "audio/audio_buffer.hpp"
#include "model/nmp_model.hpp"
#include "model/posteriorgrams.hpp"
#include "spectral/cqt.hpp"

namespace nmp::model {

// Network input for frames [first, first + count) of a CQT, as a
// (1, channels, count, 264) tensor; frames past the end are zero.
nn::Tensor<float> stackWindow(const spectral::CqtMatrix& cqt, std::size_t first, std::size_t count,
                              bool harmonicStacking);

// Runs the network on one block of frames (no stitching).
Posteriorgrams predictBlock(NmpModel<float>& model, const spectral::CqtMatrix& cqt, std::size_t first,
                            std::size_t count, const ForwardOptions& opts = {});

// Windowed inference over a whole recording: windows of window_frames with
// window_overlap_frames of overlap, cross-faded linearly where they meet.
Posteriorgrams predictFromCqt(NmpModel<float>& model, const spectral::CqtMatrix& cqt);

Posteriorgrams predict(const audio::AudioBuffer& buf, const nn::WeightArchive& weights, const ModelConfig& cfg);
Posteriorgrams predict(const audio::AudioBuffer& buf, NmpModel<float>& model);

} // namespace nmp::model
