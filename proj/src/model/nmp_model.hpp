#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "nn/graph.hpp"
#include "nn/weights.hpp"

namespace nmp::model {

inline constexpr std::size_t kNoteBins = 88;
inline constexpr std::size_t kContourBins = 264;
inline constexpr std::size_t kMidiOffset = 21; // bin 0 of the note outputs is A0

struct ModelConfig {
    // Feed all 8 harmonic channels; false keeps only the unshifted CQT.
    bool use_harmonic_stacking = true;
    // Supervise Y_p and normalise it before the note branch; false gives the
    // ablation where the contour projection is an unsupervised bottleneck.
    bool supervise_contour = true;
    std::size_t window_frames = 173;
    std::size_t window_overlap_frames = 30;

    std::size_t inputChannels() const { return use_harmonic_stacking ? 8 : 1; }
    void validate() const;
};

template <class T>
struct Parameter {
    std::string name;
    nn::Tensor<T> value;
    bool trainable = true;
};

struct ForwardOptions {
    // Zero the audio-derived onset features before they meet Y_n.
    bool zero_onset_features = false;
};

// Three-head convolutional transcription network.
//
//   input (C x T x 264) -> BN
//   contour: conv 8@3x39 -> BN -> ReLU -> conv 1@5x5 -> sigmoid        = Y_p
//   note:    BN -> ReLU -> conv 32@7x7 /3 -> ReLU -> conv 1@7x3 -> sigmoid = Y_n
//   onset:   conv 32@5x5 /3 on input -> BN -> ReLU, concat Y_n
//            -> conv 1@3x3 -> sigmoid                                    = Y_o
//
// "/3" is a frequency stride of 3, taking 264 bins to 88.
template <class T>
class NmpModel {
public:
    using Graph = nn::Graph<T>;
    using NodeId = typename Graph::NodeId;

    struct Outputs {
        NodeId onsets;
        NodeId notes;
        NodeId contours;
        // Graph node of each entry in parameters(), in order.
        std::vector<NodeId> parameterNodes;
    };

    // Parameters are zero except batch-norm gammas and variances, which are one.
    explicit NmpModel(const ModelConfig& cfg = {});

    // Validates names and shapes against the configured stack and reports the
    // first offending entry.
    static NmpModel fromArchive(const nn::WeightArchive& archive, const ModelConfig& cfg);
    nn::WeightArchive toArchive() const;

    // Glorot-uniform convolution weights, zero biases, identity batch norms.
    void initialize(std::uint64_t seed);
    void zeroAll();

    const ModelConfig& config() const { return mConfig; }
    std::vector<Parameter<T>>& parameters() { return mParams; }
    const std::vector<Parameter<T>>& parameters() const { return mParams; }
    Parameter<T>& parameter(const std::string& name);
    std::size_t trainableParameterCount() const;

    // `input` is (batch, inputChannels, frames, 264).
    Outputs forward(Graph& g, NodeId input, nn::BatchNormMode mode, const ForwardOptions& opts = {});

    template <class U>
    NmpModel<U> cast() const;

private:
    void declare(const std::string& name, nn::Shape shape, bool trainable);
    void declareConv(const std::string& prefix, const nn::ConvSpec& spec);
    void declareBatchNorm(const std::string& prefix, std::size_t channels);
    std::size_t index(const std::string& name) const;

    ModelConfig mConfig;
    std::vector<Parameter<T>> mParams;
    nn::ConvSpec mContourConv1, mContourConv2, mNoteConv1, mNoteConv2, mOnsetConv1, mOnsetConv2;

    template <class U>
    friend class NmpModel;
};

// Derives the architecture toggles from the entries present in an archive.
ModelConfig inferConfig(const nn::WeightArchive& archive, ModelConfig base = {});

extern template class NmpModel<float>;
extern template class NmpModel<double>;

} // namespace nmp::model
